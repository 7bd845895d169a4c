//! Height-difference functions and the neighborhoods they define.
//!
//! A height-difference function assigns every comparable pair `a <= b` a value
//! in `[0, inf]`, vanishing on the diagonal and superadditive along chains.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num::rational::BigRational;
use num::{BigInt, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlin::parse_rational;
use crate::poset::{FinitePoset, OrderMap};
use crate::verdict::Verdict;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rational(q: &Rational) -> String {
    q.to_string()
}

/// Value in `[0, inf]`. `Finite` sorts before `Infinite`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ext {
    Finite(Rational),
    Infinite,
}

impl Ext {
    pub fn zero() -> Ext {
        Ext::Finite(Rational::zero())
    }

    pub fn int(n: i64) -> Ext {
        Ext::Finite(rat(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Ext::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Ext::Finite(q) => Some(q),
            Ext::Infinite => None,
        }
    }

    pub fn add(&self, other: &Ext) -> Ext {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite(a + b),
            _ => Ext::Infinite,
        }
    }

    /// `|a - b|` when both are finite, `0` when both are infinite, `inf` otherwise.
    pub fn dist(&self, other: &Ext) -> Ext {
        match (self, other) {
            (Ext::Finite(a), Ext::Finite(b)) => Ext::Finite((a - b).abs()),
            (Ext::Infinite, Ext::Infinite) => Ext::zero(),
            _ => Ext::Infinite,
        }
    }

    /// Whether this value is at least the finite threshold `r`.
    pub fn ge(&self, r: &Rational) -> bool {
        match self {
            Ext::Finite(q) => q >= r,
            Ext::Infinite => true,
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Finite(q) => write!(f, "{q}"),
            Ext::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Ext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ext> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞" | "+inf") {
            return Ok(Ext::Infinite);
        }
        let q = parse_rational(t)?;
        if q.is_negative() {
            return Err(Error::Negative(t.to_string()));
        }
        Ok(Ext::Finite(q))
    }
}

impl From<Rational> for Ext {
    fn from(q: Rational) -> Ext {
        Ext::Finite(q)
    }
}

/// Stratum of the parameter line on which all neighborhoods are constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    /// Left endpoint; the stratum `{0}` has `lower == 0` and `upper == Some(0)`.
    pub lower: Rational,
    /// Right endpoint (closed), `Infinite` for the top stratum.
    pub upper: Ext,
    pub representative: Rational,
}

impl Stratum {
    pub fn is_zero(&self) -> bool {
        self.upper == Ext::zero()
    }

    pub fn is_top(&self) -> bool {
        self.upper == Ext::Infinite
    }

    pub fn interval_strings(&self) -> [String; 2] {
        [self.lower.to_string(), self.upper.to_string()]
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "{{0}}")
        } else if self.is_top() {
            write!(f, "({}, inf)", self.lower)
        } else {
            write!(f, "({}, {}]", self.lower, self.upper)
        }
    }
}

/// Witness that the interval property fails: `I = a^{down s} ∩ q^{up r}` is disconnected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipWitness {
    pub a: usize,
    pub q: usize,
    pub s: Rational,
    pub r: Rational,
    pub set: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipReport {
    pub verdict: Verdict,
    pub witness: Option<CipWitness>,
    pub checked: u64,
}

/// Witness that `(IV_c)` fails: no `z` in `[a, b]` realizes the split at `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IvcWitness {
    pub a: usize,
    pub b: usize,
    pub t: Rational,
}

/// Smallest `c` for which `(IV_c)` holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CRho {
    pub value: Ext,
    pub attained: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightDiff {
    poset: Arc<FinitePoset>,
    table: Vec<Option<Ext>>,
}

impl HeightDiff {
    /// Builds and validates a height-difference function from explicit values.
    /// Diagonal entries may be omitted.
    pub fn from_table(poset: Arc<FinitePoset>, entries: &[(usize, usize, Ext)]) -> Result<HeightDiff> {
        let n = poset.len();
        let mut table: Vec<Option<Ext>> = vec![None; n * n];
        for (a, b, v) in entries {
            if !poset.leq(*a, *b) {
                return Err(Error::IncomparablePair(poset.name(*a).into(), poset.name(*b).into()));
            }
            if a == b && *v != Ext::zero() {
                return Err(Error::NonZeroDiagonal(poset.name(*a).into()));
            }
            table[a * n + b] = Some(v.clone());
        }
        for a in 0..n {
            table[a * n + a] = Some(Ext::zero());
        }
        let h = HeightDiff { poset, table };
        h.validate()?;
        Ok(h)
    }

    /// `rho(a, b) = phi(b) - phi(a)` for an order-preserving `phi`.
    pub fn from_phi(poset: Arc<FinitePoset>, phi: &[Rational]) -> Result<HeightDiff> {
        if phi.len() != poset.len() {
            return Err(Error::Dimension(format!("phi has {} values for {} elements", phi.len(), poset.len())));
        }
        for &(a, b) in poset.covers() {
            if phi[b] < phi[a] {
                return Err(Error::NotMonotone(poset.name(a).into(), poset.name(b).into()));
            }
        }
        let entries: Vec<(usize, usize, Ext)> = poset
            .comparable_pairs()
            .into_iter()
            .map(|(a, b)| (a, b, Ext::Finite(&phi[b] - &phi[a])))
            .collect();
        HeightDiff::from_table(poset, &entries)
    }

    pub fn from_phi_ints(poset: Arc<FinitePoset>, phi: &[i64]) -> Result<HeightDiff> {
        let phi: Vec<Rational> = phi.iter().map(|&v| rat(v)).collect();
        HeightDiff::from_phi(poset, &phi)
    }

    /// `rho(a, b) = min_i (b_i - a_i)` on a grid poset.
    pub fn diagonal(poset: Arc<FinitePoset>) -> Result<HeightDiff> {
        let grid = poset.grid_info().ok_or(Error::NotGrid)?.clone();
        let entries: Vec<(usize, usize, Ext)> = poset
            .comparable_pairs()
            .into_iter()
            .map(|(a, b)| {
                let m = grid.coords[a]
                    .iter()
                    .zip(&grid.coords[b])
                    .map(|(x, y)| (*y - *x) as i64)
                    .min()
                    .unwrap_or(0);
                (a, b, Ext::int(m))
            })
            .collect();
        HeightDiff::from_table(poset, &entries)
    }

    /// `rho(a, b) = inf` for `a < b`.
    pub fn strict(poset: Arc<FinitePoset>) -> HeightDiff {
        let entries: Vec<(usize, usize, Ext)> = poset
            .comparable_pairs()
            .into_iter()
            .map(|(a, b)| (a, b, if a == b { Ext::zero() } else { Ext::Infinite }))
            .collect();
        HeightDiff::from_table(poset, &entries).expect("strict height is valid")
    }

    pub fn poset(&self) -> &Arc<FinitePoset> {
        &self.poset
    }

    /// Value on a comparable pair; panics if `a` is not below `b`.
    pub fn rho(&self, a: usize, b: usize) -> &Ext {
        self.table[a * self.poset.len() + b]
            .as_ref()
            .unwrap_or_else(|| panic!("({}, {}) is not a comparable pair", self.poset.name(a), self.poset.name(b)))
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&Ext> {
        self.table[a * self.poset.len() + b].as_ref()
    }

    fn validate(&self) -> Result<()> {
        let p = &self.poset;
        let n = p.len();
        for (a, b) in p.comparable_pairs() {
            if self.table[a * n + b].is_none() {
                return Err(Error::MissingPair(p.name(a).into(), p.name(b).into()));
            }
        }
        for (a, b) in p.comparable_pairs() {
            for c in 0..n {
                if p.leq(b, c) && *self.rho(a, c) < self.rho(a, b).add(self.rho(b, c)) {
                    return Err(Error::Superadditivity(p.name(a).into(), p.name(b).into(), p.name(c).into()));
                }
            }
        }
        Ok(())
    }

    /// `a^{down r} = { x <= a : rho(x, a) >= r }`.
    pub fn down(&self, a: usize, r: &Rational) -> Vec<usize> {
        (0..self.poset.len()).filter(|&x| self.poset.leq(x, a) && self.rho(x, a).ge(r)).collect()
    }

    /// `a^{up r} = { x >= a : rho(a, x) >= r }`.
    pub fn up(&self, a: usize, r: &Rational) -> Vec<usize> {
        (0..self.poset.len()).filter(|&x| self.poset.leq(a, x) && self.rho(a, x).ge(r)).collect()
    }

    /// Union of `x^{down r}` over `x` in `a^{down s}`.
    pub fn down_down(&self, a: usize, s: &Rational, r: &Rational) -> Vec<usize> {
        let mut member = vec![false; self.poset.len()];
        for x in self.down(a, s) {
            for y in self.down(x, r) {
                member[y] = true;
            }
        }
        (0..member.len()).filter(|&i| member[i]).collect()
    }

    /// Union of `x^{up s}` over `x` in `a^{up r}`.
    pub fn up_up(&self, a: usize, r: &Rational, s: &Rational) -> Vec<usize> {
        let mut member = vec![false; self.poset.len()];
        for x in self.up(a, r) {
            for y in self.up(x, s) {
                member[y] = true;
            }
        }
        (0..member.len()).filter(|&i| member[i]).collect()
    }

    /// Sorted distinct finite values, always including 0.
    pub fn critical_values(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.table.iter().flatten().filter_map(|e| e.finite().cloned()).collect();
        v.push(Rational::zero());
        v.sort();
        v.dedup();
        v
    }

    /// `{0}`, then `(v_i, v_{i+1}]` for consecutive critical values, then `(v_max, inf)`.
    pub fn strata(&self) -> Vec<Stratum> {
        let cv = self.critical_values();
        let mut out = vec![Stratum { lower: Rational::zero(), upper: Ext::zero(), representative: Rational::zero() }];
        for w in cv.windows(2) {
            out.push(Stratum { lower: w[0].clone(), upper: Ext::Finite(w[1].clone()), representative: w[1].clone() });
        }
        let top = cv.last().expect("critical values include 0").clone();
        out.push(Stratum { lower: top.clone(), upper: Ext::Infinite, representative: top + rat(1) });
        out
    }

    /// Stratum representatives, in increasing order.
    pub fn representatives(&self) -> Vec<Rational> {
        self.strata().into_iter().map(|s| s.representative).collect()
    }

    /// Index of the stratum containing `r`.
    pub fn stratum_of(&self, r: &Rational) -> usize {
        let strata = self.strata();
        strata
            .iter()
            .position(|s| match &s.upper {
                Ext::Finite(u) => r <= u,
                Ext::Infinite => true,
            })
            .expect("top stratum is unbounded")
    }

    /// Checks that every `a^{down s} ∩ q^{up r}` is empty or connected, over one
    /// representative per pair of strata.
    pub fn check_cip(&self, budget: u64) -> CipReport {
        let reps = self.representatives();
        let n = self.poset.len();
        let mut checked = 0u64;
        for s in &reps {
            let downs: Vec<Vec<bool>> = (0..n).map(|a| self.poset.membership(&self.down(a, s))).collect();
            for r in &reps {
                let ups: Vec<Vec<bool>> = (0..n).map(|q| self.poset.membership(&self.up(q, r))).collect();
                for a in 0..n {
                    for q in 0..n {
                        if checked >= budget {
                            return CipReport { verdict: Verdict::Unknown, witness: None, checked };
                        }
                        checked += 1;
                        let set: Vec<usize> = (0..n).filter(|&x| downs[a][x] && ups[q][x]).collect();
                        if !self.poset.is_connected(&set) {
                            return CipReport {
                                verdict: Verdict::No,
                                witness: Some(CipWitness { a, q, s: s.clone(), r: r.clone(), set }),
                                checked,
                            };
                        }
                    }
                }
            }
        }
        CipReport { verdict: Verdict::Yes, witness: None, checked }
    }

    fn max_finite(&self) -> Rational {
        self.critical_values().last().cloned().unwrap_or_else(Rational::zero)
    }

    /// Checks `(IV_c)` exactly by covering `[0, rho(a, b)]` with the closed
    /// intervals of admissible split points. Infinite pairs are checked on
    /// `[0, T]` with `T` beyond every interval any `z` can contribute.
    pub fn check_ivc(&self, c: &Rational) -> Result<(), IvcWitness> {
        let half = c / rat(2);
        let p = &self.poset;
        let cap = self.max_finite() + c + rat(1);
        for (a, b) in p.comparable_pairs() {
            if a == b {
                continue;
            }
            let total = self.rho(a, b);
            let end = match total {
                Ext::Finite(d) => d.clone(),
                Ext::Infinite => cap.clone(),
            };
            let mut ivs: Vec<(Rational, Rational)> = Vec::new();
            for z in p.interval(a, b) {
                let (az, zb) = (self.rho(a, z), self.rho(z, b));
                let iv = match (total, az, zb) {
                    (Ext::Finite(d), Ext::Finite(x), Ext::Finite(y)) => {
                        let rest = d - y;
                        let lo = std::cmp::max(x.clone(), rest.clone()) - &half;
                        let hi = std::cmp::min(x.clone(), rest) + &half;
                        Some((lo, hi))
                    }
                    (Ext::Infinite, Ext::Finite(x), Ext::Infinite) => Some((x - &half, x + &half)),
                    _ => None,
                };
                if let Some((lo, hi)) = iv {
                    if lo <= hi {
                        ivs.push((lo, hi));
                    }
                }
            }
            if let Some(t) = first_uncovered(&mut ivs, &end) {
                return Err(IvcWitness { a, b, t });
            }
        }
        Ok(())
    }

    /// Minimal `c` with `(IV_c)`, searched over the finite set of breakpoints
    /// where coverage can change. `inf` if some comparable pair has infinite height.
    pub fn c_rho(&self) -> CRho {
        let p = &self.poset;
        let mut cands: Vec<Rational> = vec![Rational::zero()];
        for (a, b) in p.comparable_pairs() {
            if a == b {
                continue;
            }
            let d = match self.rho(a, b) {
                Ext::Finite(d) => d.clone(),
                Ext::Infinite => return CRho { value: Ext::Infinite, attained: false },
            };
            let mut hi_lo = Vec::new();
            for z in p.interval(a, b) {
                let x = self.rho(a, z).finite().expect("bounded by a finite value").clone();
                let y = self.rho(z, b).finite().expect("bounded by a finite value").clone();
                let rest = &d - y;
                let big = std::cmp::max(x.clone(), rest.clone());
                let small = std::cmp::min(x, rest);
                cands.push(rat(2) * &big);
                cands.push(rat(2) * (&d - &small));
                cands.push(&big - &small);
                hi_lo.push((big, small));
            }
            for (bw, _) in &hi_lo {
                for (_, sz) in &hi_lo {
                    cands.push(bw - sz);
                }
            }
        }
        cands.retain(|c| !c.is_negative());
        cands.sort();
        cands.dedup();
        let (mut lo, mut hi) = (0usize, cands.len() - 1);
        debug_assert!(self.check_ivc(&cands[hi]).is_ok());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.check_ivc(&cands[mid]).is_ok() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        CRho { value: Ext::Finite(cands[lo].clone()), attained: true }
    }

    /// Supremum of `|rho - other|` over comparable pairs.
    pub fn distortion(&self, other: &HeightDiff) -> Result<Ext> {
        if *self.poset != *other.poset {
            return Err(Error::PosetMismatch);
        }
        Ok(self
            .poset
            .comparable_pairs()
            .into_iter()
            .map(|(a, b)| self.rho(a, b).dist(other.rho(a, b)))
            .max()
            .unwrap_or_else(Ext::zero))
    }

    /// `f^* rho(x, y) = rho(f(x), f(y))` on the source of `f`.
    pub fn pullback(&self, f: &OrderMap) -> Result<HeightDiff> {
        if *f.target != *self.poset {
            return Err(Error::PosetMismatch);
        }
        let entries: Vec<(usize, usize, Ext)> = f
            .source
            .comparable_pairs()
            .into_iter()
            .map(|(x, y)| (x, y, self.rho(f.apply(x), f.apply(y)).clone()))
            .collect();
        HeightDiff::from_table(f.source.clone(), &entries)
    }

    /// On a grid: `rho(a, a + r·1) >= r` for every integer shift that stays inside.
    pub fn dominates_diagonal(&self) -> Result<bool> {
        let g = self.poset.grid_info().ok_or(Error::NotGrid)?;
        for (a, c) in g.coords.iter().enumerate() {
            let mut r = 1i64;
            loop {
                let shifted: Vec<i64> = c.iter().map(|&x| x as i64 + r).collect();
                let Some(b) = self.poset.grid_index(&shifted) else { break };
                if !self.rho(a, b).ge(&rat(r)) {
                    return Ok(false);
                }
                r += 1;
            }
        }
        Ok(true)
    }
}

/// Smallest point of `[0, end]` not covered by the closed intervals, if any.
fn first_uncovered(ivs: &mut [(Rational, Rational)], end: &Rational) -> Option<Rational> {
    ivs.sort_by(|x, y| match x.0.cmp(&y.0) {
        Ordering::Equal => y.1.cmp(&x.1),
        o => o,
    });
    let mut reach: Option<Rational> = None;
    let zero = Rational::zero();
    for (lo, hi) in ivs.iter() {
        let frontier = reach.clone().unwrap_or_else(|| zero.clone());
        let gap = match &reach {
            None => lo > &zero,
            Some(r) => lo > r,
        };
        if gap {
            let t = if reach.is_none() { zero.clone() } else { (&frontier + std::cmp::min(lo, end)) / rat(2) };
            return Some(t);
        }
        if reach.as_ref().is_none_or(|r| hi > r) {
            reach = Some(hi.clone());
        }
        if reach.as_ref().is_some_and(|r| r >= end) {
            return None;
        }
    }
    match reach {
        None => Some(zero),
        Some(r) if &r >= end => None,
        Some(r) => Some(if r < zero { zero } else { (&r + end) / rat(2) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Arc<FinitePoset> {
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        Arc::new(FinitePoset::chain(&names).unwrap())
    }

    #[test]
    fn ext_ordering_and_distance() {
        assert!(Ext::int(5) < Ext::Infinite);
        assert_eq!(Ext::Infinite.dist(&Ext::Infinite), Ext::zero());
        assert_eq!(Ext::int(2).dist(&Ext::Infinite), Ext::Infinite);
        assert_eq!(Ext::int(2).dist(&Ext::int(5)), Ext::int(3));
        assert_eq!("3/2".parse::<Ext>().unwrap(), Ext::Finite(frac(3, 2)));
        assert!("-1".parse::<Ext>().is_err());
    }

    #[test]
    fn superadditivity_is_enforced() {
        let p = chain(3);
        let bad = [(0, 1, Ext::int(1)), (1, 2, Ext::int(1)), (0, 2, Ext::int(1))];
        assert!(matches!(HeightDiff::from_table(p.clone(), &bad), Err(Error::Superadditivity(..))));
        let missing = [(0, 1, Ext::int(1))];
        assert!(matches!(HeightDiff::from_table(p.clone(), &missing), Err(Error::MissingPair(..))));
        let diag = [(0, 0, Ext::int(1))];
        assert!(matches!(HeightDiff::from_table(p, &diag), Err(Error::NonZeroDiagonal(..))));
    }

    #[test]
    fn strict_neighborhoods_on_a_chain() {
        let p = chain(3);
        let rho = HeightDiff::strict(p);
        assert_eq!(rho.down(2, &rat(1)), vec![0, 1]);
        assert_eq!(rho.down(2, &rat(0)), vec![0, 1, 2]);
        assert_eq!(rho.up(0, &rat(7)), vec![1, 2]);
        assert_eq!(rho.c_rho().value, Ext::Infinite);
    }

    #[test]
    fn strata_of_a_phi_chain() {
        let rho = HeightDiff::from_phi_ints(chain(3), &[0, 1, 3]).unwrap();
        assert_eq!(rho.critical_values(), vec![rat(0), rat(1), rat(2), rat(3)]);
        let st = rho.strata();
        assert_eq!(st.len(), 5);
        assert_eq!(st[1].representative, rat(1));
        assert_eq!(st[4].representative, rat(4));
        assert_eq!(rho.stratum_of(&frac(3, 2)), 2);
        assert_eq!(rho.stratum_of(&rat(0)), 0);
        assert_eq!(rho.stratum_of(&rat(10)), 4);
    }

    #[test]
    fn c_rho_is_max_cover_gap_on_a_chain() {
        let rho = HeightDiff::from_phi_ints(chain(4), &[0, 1, 4, 7]).unwrap();
        let c = rho.c_rho();
        assert_eq!(c.value, Ext::int(3));
        assert!(c.attained);
        assert!(rho.check_ivc(&rat(3)).is_ok());
        let w = rho.check_ivc(&frac(5, 2)).unwrap_err();
        assert!(rho.poset().lt(w.a, w.b));
    }

    #[test]
    fn diagonal_on_a_grid() {
        let g = Arc::new(FinitePoset::grid(&[3, 3]).unwrap());
        let rho = HeightDiff::diagonal(g.clone()).unwrap();
        let a = g.index_of("v_0_0").unwrap();
        let b = g.index_of("v_2_1").unwrap();
        assert_eq!(rho.rho(a, b), &Ext::int(1));
        assert!(rho.dominates_diagonal().unwrap());
        assert_eq!(rho.up(a, &rat(2)), vec![g.index_of("v_2_2").unwrap()]);
    }

    #[test]
    fn distortion_between_phis() {
        let p = chain(3);
        let a = HeightDiff::from_phi_ints(p.clone(), &[0, 1, 2]).unwrap();
        let b = HeightDiff::from_phi_ints(p.clone(), &[0, 2, 5]).unwrap();
        assert_eq!(a.distortion(&b).unwrap(), Ext::int(3));
        assert_eq!(a.distortion(&HeightDiff::strict(p)).unwrap(), Ext::Infinite);
    }

    #[test]
    fn uncovered_points() {
        let mut ivs = vec![(rat(0), rat(1)), (rat(2), rat(3))];
        assert_eq!(first_uncovered(&mut ivs, &rat(3)), Some(frac(3, 2)));
        let mut ivs = vec![(rat(-1), rat(1)), (rat(1), rat(3))];
        assert_eq!(first_uncovered(&mut ivs, &rat(3)), None);
        let mut ivs = vec![(rat(1), rat(3))];
        assert_eq!(first_uncovered(&mut ivs, &rat(3)), Some(rat(0)));
    }
}
