//! Height-interleavings: certificate checks, the exhaustive search for one
//! parameter, and the distance over the strata of the parameter line.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactlin::{Field, Mat, Scalar};
use crate::functors::Calculus;
use crate::height::{Ext, HeightDiff, Rational, Stratum};
use crate::pmod::hom::{lex_coeffs, space_size};
use crate::pmod::{hom_basis, is_isomorphic, ModuleMorphism, PersistenceModule};
use crate::verdict::Verdict;

/// `p: M -> R_r N` and `q: N -> R_r M` with `e_{r,M} = q ∘ p#` and `e_{r,N} = p ∘ q#`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub r: Rational,
    pub p: ModuleMorphism,
    pub q: ModuleMorphism,
}

/// Outcome of the search at one parameter.
#[derive(Clone, Debug)]
pub struct Search {
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    /// Candidates examined on the enumerated side.
    pub candidates: u64,
}

impl Search {
    fn no(candidates: u64) -> Search {
        Search { verdict: Verdict::No, certificate: None, candidates }
    }

    fn unknown(candidates: u64) -> Search {
        Search { verdict: Verdict::Unknown, certificate: None, candidates }
    }
}

/// Verifies both interleaving identities exactly.
pub fn check_certificate(
    calc: &Calculus,
    r: &Rational,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    p: &ModuleMorphism,
    q: &ModuleMorphism,
) -> Result<bool> {
    let rn = calc.right(r, n)?;
    let rm = calc.right(r, m)?;
    if *p.source != **m || *p.target != *rn.output {
        return Err(Error::EndpointMismatch("p must map M to R_r N".into()));
    }
    if *q.source != **n || *q.target != *rm.output {
        return Err(Error::EndpointMismatch("q must map N to R_r M".into()));
    }
    let ps = calc.sharp(r, n, p)?;
    let qs = calc.sharp(r, m, q)?;
    let lhs_m = q.compose(&ps.retarget(ps.source.clone(), q.source.clone())?)?;
    let lhs_n = p.compose(&qs.retarget(qs.source.clone(), p.source.clone())?)?;
    Ok(lhs_m.same_matrices(&calc.e(r, m)?) && lhs_n.same_matrices(&calc.e(r, n)?))
}

fn flatten(f: &ModuleMorphism) -> Vec<Scalar> {
    f.components().iter().flat_map(|c| c.vectorize()).collect()
}

/// The bilinear system of one parameter. `p` ranges over `Hom(M, R N)`, `q` over
/// `Hom(N, R M)`; the sharps and canonical maps are supplied by the caller, so
/// the same solver serves the neighborhood functors and the grid shifts.
pub(crate) struct Bilinear {
    pub r: Rational,
    pub field: Field,
    pub p_basis: Vec<ModuleMorphism>,
    pub q_basis: Vec<ModuleMorphism>,
    pub p_sharp: Vec<ModuleMorphism>,
    pub q_sharp: Vec<ModuleMorphism>,
    pub e_m: ModuleMorphism,
    pub e_n: ModuleMorphism,
    /// Zero maps `M -> R N` and `N -> R M`, used when a Hom space is trivial.
    pub p_zero: ModuleMorphism,
    pub q_zero: ModuleMorphism,
}

/// Integer coefficients tried over the rationals, in enumeration order.
const RATIONAL_LATTICE: [i64; 5] = [0, 1, -1, 2, -2];

impl Bilinear {
    /// Enumerates the smaller side in lexicographic coefficient order and solves
    /// the linear system for the other side. Over a prime field this is
    /// exhaustive; over the rationals only a small integer lattice is tried.
    pub fn solve(&self, budget: u64) -> Result<Search> {
        let field = self.field;
        let (kp, kq) = (self.p_basis.len(), self.q_basis.len());
        let mut rhs_entries = flatten(&self.e_m);
        rhs_entries.extend(flatten(&self.e_n));
        let rows = rhs_entries.len();
        let rhs = Mat::column(field, rhs_entries);
        // vecs[i][j] = [vec(Q_j ∘ P_i#); vec(P_i ∘ Q_j#)]
        let mut vecs = Vec::with_capacity(kp);
        for i in 0..kp {
            let mut row = Vec::with_capacity(kq);
            for j in 0..kq {
                let mut v = flatten(&compose(&self.q_basis[j], &self.p_sharp[i])?);
                v.extend(flatten(&compose(&self.p_basis[i], &self.q_sharp[j])?));
                row.push(v);
            }
            vecs.push(row);
        }
        let outer_is_p = kp <= kq;
        let (ko, ki) = if outer_is_p { (kp, kq) } else { (kq, kp) };
        let blocks: Vec<Mat> = (0..ko)
            .map(|o| {
                let mut b = Mat::zeros(field, rows, ki);
                for i in 0..ki {
                    let v = if outer_is_p { &vecs[o][i] } else { &vecs[i][o] };
                    for (row, s) in v.iter().enumerate() {
                        b.set(row, i, s);
                    }
                }
                b
            })
            .collect();
        // over the rationals: a lattice of width 5 or 3 per coordinate
        let (total, width, exhaustive) = match field {
            Field::Prime(_) => match space_size(field, ko, budget) {
                Some(t) => (t, 0, true),
                None => return Ok(Search::unknown(0)),
            },
            Field::Rational => {
                let fits = |w: u64| w.checked_pow(ko as u32).filter(|&t| t <= budget);
                match fits(5).map(|t| (t, 5)).or_else(|| fits(3).map(|t| (t, 3))) {
                    Some((t, w)) => (t, w, ko == 0),
                    None => return Ok(Search::unknown(0)),
                }
            }
        };
        for idx in 0..total {
            let outer = if width == 0 {
                lex_coeffs(field, ko, idx)
            } else {
                let mut rest = idx;
                let mut c = vec![field.zero(); ko];
                for slot in c.iter_mut().rev() {
                    *slot = field.from_i64(RATIONAL_LATTICE[(rest % width) as usize]);
                    rest /= width;
                }
                c
            };
            let mut a = Mat::zeros(field, rows, ki);
            for (c, b) in outer.iter().zip(&blocks) {
                a.axpy(c, b);
            }
            if let Some(x) = a.solve(&rhs)? {
                let inner: Vec<Scalar> = (0..ki).map(|i| x.get(i, 0)).collect();
                let (pc, qc) = if outer_is_p { (outer, inner) } else { (inner, outer) };
                let cert = Certificate {
                    r: self.r.clone(),
                    p: combine(&self.p_basis, &pc, &self.p_zero),
                    q: combine(&self.q_basis, &qc, &self.q_zero),
                };
                return Ok(Search { verdict: Verdict::Yes, certificate: Some(cert), candidates: idx + 1 });
            }
        }
        Ok(if exhaustive { Search::no(total) } else { Search::unknown(total) })
    }
}

fn combine(basis: &[ModuleMorphism], coeffs: &[Scalar], zero: &ModuleMorphism) -> ModuleMorphism {
    if basis.is_empty() {
        zero.clone()
    } else {
        ModuleMorphism::combination(basis, coeffs)
    }
}

fn compose(outer: &ModuleMorphism, inner: &ModuleMorphism) -> Result<ModuleMorphism> {
    outer.compose(&inner.retarget(inner.source.clone(), outer.source.clone())?)
}

/// Searches for an `r`-interleaving of `M` and `N`.
pub fn find_interleaving(
    calc: &Calculus,
    r: &Rational,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    budget: u64,
) -> Result<Search> {
    m.check_same_base(n)?;
    let rm = calc.right(r, m)?.output.clone();
    let rn = calc.right(r, n)?.output.clone();
    let p_basis = hom_basis(m, &rn)?;
    let q_basis = hom_basis(n, &rm)?;
    let p_sharp = p_basis.iter().map(|p| calc.sharp(r, n, p)).collect::<Result<_>>()?;
    let q_sharp = q_basis.iter().map(|q| calc.sharp(r, m, q)).collect::<Result<_>>()?;
    let sys = Bilinear {
        r: r.clone(),
        field: m.field(),
        p_basis,
        q_basis,
        p_sharp,
        q_sharp,
        e_m: calc.e(r, m)?,
        e_n: calc.e(r, n)?,
        p_zero: ModuleMorphism::zero(m.clone(), rn)?,
        q_zero: ModuleMorphism::zero(n.clone(), rm)?,
    };
    sys.solve(budget)
}

/// Search result for one stratum, possibly inferred from monotonicity.
#[derive(Clone, Debug)]
pub struct StratumVerdict {
    pub stratum: Stratum,
    pub verdict: Verdict,
    /// False when the verdict was inferred from its neighbours.
    pub tested: bool,
    pub candidates: u64,
}

/// Verdicts over all strata and the resulting distance. When every stratum up
/// to the first `yes` is decided, `lower == upper` is the exact distance.
#[derive(Clone, Debug)]
pub struct StrataReport {
    pub strata: Vec<StratumVerdict>,
    pub lower: Ext,
    pub upper: Ext,
    pub attained: bool,
    pub certificate: Option<Certificate>,
}

impl StrataReport {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    /// The distance, if decided.
    pub fn distance(&self) -> Option<&Ext> {
        self.is_exact().then_some(&self.upper)
    }

    pub fn has_unknown(&self) -> bool {
        self.strata.iter().any(|s| s.verdict == Verdict::Unknown)
    }

    pub fn verdict_at(&self, r: &Rational) -> Verdict {
        self.strata
            .iter()
            .find(|s| match &s.stratum.upper {
                Ext::Finite(u) => r <= u,
                Ext::Infinite => true,
            })
            .map(|s| s.verdict)
            .unwrap_or(Verdict::Unknown)
    }
}

/// How the strata are visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scan {
    /// Binary search on the monotone verdicts, linear when something is unknown.
    Bisect,
    /// Every stratum is tested and monotonicity is enforced.
    Exhaustive,
}

/// Runs a monotone decision procedure over the strata.
pub(crate) fn stratified(
    strata: Vec<Stratum>,
    scan: Scan,
    mut decide: impl FnMut(usize, &Stratum) -> Result<Search>,
) -> Result<StrataReport> {
    let n = strata.len();
    let mut results: Vec<Option<Search>> = vec![None; n];
    let mut eval = |i: usize, results: &mut Vec<Option<Search>>| -> Result<Verdict> {
        if results[i].is_none() {
            results[i] = Some(decide(i, &strata[i])?);
        }
        Ok(results[i].as_ref().expect("just filled").verdict)
    };
    match scan {
        Scan::Exhaustive => {
            for i in 0..n {
                eval(i, &mut results)?;
            }
            let verdicts: Vec<Verdict> = results.iter().map(|s| s.as_ref().expect("tested").verdict).collect();
            if let Some(y) = verdicts.iter().position(|v| v.is_yes()) {
                if let Some(k) = verdicts[y..].iter().position(|v| v.is_no()) {
                    return Err(Error::Internal(format!(
                        "verdicts are not monotone: stratum {} is yes but stratum {} is no",
                        strata[y],
                        strata[y + k]
                    )));
                }
            }
        }
        Scan::Bisect => {
            let mut linear = false;
            match eval(0, &mut results)? {
                Verdict::Yes => {}
                Verdict::Unknown => linear = true,
                Verdict::No => match eval(n - 1, &mut results)? {
                    Verdict::No => {}
                    Verdict::Unknown => linear = true,
                    Verdict::Yes => {
                        let (mut lo, mut hi) = (0, n - 1);
                        while hi - lo > 1 {
                            let mid = (lo + hi) / 2;
                            match eval(mid, &mut results)? {
                                Verdict::Yes => hi = mid,
                                Verdict::No => lo = mid,
                                Verdict::Unknown => {
                                    linear = true;
                                    break;
                                }
                            }
                        }
                    }
                },
            }
            if linear {
                for i in 0..n {
                    if eval(i, &mut results)?.is_yes() {
                        break;
                    }
                }
            }
        }
    }
    let first_yes = results.iter().position(|s| s.as_ref().is_some_and(|s| s.verdict.is_yes()));
    let mut certificate = None;
    let mut out = Vec::with_capacity(n);
    for (i, (stratum, res)) in strata.iter().zip(results).enumerate() {
        let (verdict, tested, candidates) = match res {
            Some(s) => {
                if Some(i) == first_yes {
                    certificate = s.certificate.clone();
                }
                (s.verdict, true, s.candidates)
            }
            None => (Verdict::from_bool(first_yes.is_some_and(|y| i > y)), false, 0),
        };
        out.push(StratumVerdict { stratum: stratum.clone(), verdict, tested, candidates });
    }
    let left = |i: usize| Ext::Finite(strata[i].lower.clone());
    let upper = first_yes.map(left).unwrap_or(Ext::Infinite);
    // everything before the first stratum not proven "no" is excluded
    let lower = out.iter().position(|s| !s.verdict.is_no()).map(left).unwrap_or(Ext::Infinite);
    let attained = first_yes == Some(0);
    Ok(StrataReport { strata: out, lower, upper, attained, certificate })
}

/// `d_rho(M, N)` by searching each stratum at its representative. The stratum
/// `{0}` is decided by an isomorphism test.
pub fn distance(
    calc: &Calculus,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    budget: u64,
    scan: Scan,
) -> Result<StrataReport> {
    m.check_same_base(n)?;
    let strata = calc.rho().strata();
    stratified(strata, scan, |i, st| {
        if i == 0 {
            let iso = is_isomorphic(m, n, budget)?;
            let certificate = match &iso.witness {
                Some(f) if iso.verdict.is_yes() => Some(iso_certificate(calc, m, n, f)?),
                _ => None,
            };
            return Ok(Search { verdict: iso.verdict, certificate, candidates: 1 });
        }
        find_interleaving(calc, &st.representative, m, n, budget)
    })
}

/// The `0`-interleaving carried by an isomorphism `f: M -> N`.
fn iso_certificate(
    calc: &Calculus,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    f: &ModuleMorphism,
) -> Result<Certificate> {
    let z = Rational::from_integer(0.into());
    let inv = f.inverse().ok_or_else(|| Error::NotInvertible("isomorphism witness".into()))?;
    let p = calc.eta_right_id(&z, n)?.compose(&f.retarget(m.clone(), n.clone())?)?;
    let q = calc.eta_right_id(&z, m)?.compose(&inv.retarget(n.clone(), m.clone())?)?;
    Ok(Certificate { r: z, p, q })
}

/// `N(a + r)` on a grid, zero where the shift leaves the grid; `sign = -1` shifts down.
fn shifted(n: &Arc<PersistenceModule>, r: i64, sign: i64) -> Result<(Arc<PersistenceModule>, Vec<Option<usize>>)> {
    let p = n.poset().clone();
    let grid = p.grid_info().ok_or(Error::NotGrid)?.clone();
    let image: Vec<Option<usize>> = grid
        .coords
        .iter()
        .map(|c| {
            let moved: Vec<i64> = c.iter().map(|&x| x as i64 + sign * r).collect();
            p.grid_index(&moved)
        })
        .collect();
    let dims = image.iter().map(|t| t.map_or(0, |t| n.dim(t))).collect();
    let field = n.field();
    let module = PersistenceModule::from_fn(p, field, dims, |a, b| match (image[a], image[b]) {
        (Some(x), Some(y)) => n.map(x, y).clone(),
        _ => Mat::zeros(field, image[b].map_or(0, |y| n.dim(y)), image[a].map_or(0, |x| n.dim(x))),
    })?;
    Ok((Arc::new(module), image))
}

/// `L M -> N` from `p: M -> R N` on shifted grids: `p#(a) = p(a - r)`.
fn shift_sharp(
    p: &ModuleMorphism,
    lm: &Arc<PersistenceModule>,
    down: &[Option<usize>],
    n: &Arc<PersistenceModule>,
) -> Result<ModuleMorphism> {
    let field = n.field();
    let comps = (0..n.poset().len())
        .map(|a| match down[a] {
            Some(x) => p.component(x).clone(),
            None => Mat::zeros(field, n.dim(a), 0),
        })
        .collect();
    ModuleMorphism::unchecked(lm.clone(), n.clone(), comps)
}

fn shift_e(
    m: &Arc<PersistenceModule>,
    lm: &Arc<PersistenceModule>,
    rm: &Arc<PersistenceModule>,
    down: &[Option<usize>],
    up: &[Option<usize>],
) -> Result<ModuleMorphism> {
    let field = m.field();
    let comps = (0..m.poset().len())
        .map(|a| match (down[a], up[a]) {
            (Some(x), Some(y)) => m.map(x, y).clone(),
            _ => Mat::zeros(field, rm.dim(a), lm.dim(a)),
        })
        .collect();
    ModuleMorphism::unchecked(lm.clone(), rm.clone(), comps)
}

/// Interleaving search on a grid with literal diagonal shifts in place of the
/// neighborhood functors.
pub fn shift_interleaving(
    r: &Rational,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    budget: u64,
) -> Result<Search> {
    m.check_same_base(n)?;
    let k = r.ceil().to_integer().try_into().map_err(|_| Error::Internal("shift too large".into()))?;
    let (rm, up) = shifted(m, k, 1)?;
    let (rn, _) = shifted(n, k, 1)?;
    let (lm, down) = shifted(m, k, -1)?;
    let (ln, _) = shifted(n, k, -1)?;
    let p_basis = hom_basis(m, &rn)?;
    let q_basis = hom_basis(n, &rm)?;
    let p_sharp = p_basis.iter().map(|p| shift_sharp(p, &lm, &down, n)).collect::<Result<_>>()?;
    let q_sharp = q_basis.iter().map(|q| shift_sharp(q, &ln, &down, m)).collect::<Result<_>>()?;
    let sys = Bilinear {
        r: r.clone(),
        field: m.field(),
        p_basis,
        q_basis,
        p_sharp,
        q_sharp,
        e_m: shift_e(m, &lm, &rm, &down, &up)?,
        e_n: shift_e(n, &ln, &rn, &down, &up)?,
        p_zero: ModuleMorphism::zero(m.clone(), rn.clone())?,
        q_zero: ModuleMorphism::zero(n.clone(), rm.clone())?,
    };
    sys.solve(budget)
}

/// Diagonal interleaving distance on a grid from literal shifts, searched over
/// the same strata as [`distance`] with the diagonal height.
pub fn shift_oracle_distance(
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    budget: u64,
    scan: Scan,
) -> Result<StrataReport> {
    let rho = HeightDiff::diagonal(m.poset().clone())?;
    stratified(rho.strata(), scan, |_, st| shift_interleaving(&st.representative, m, n, budget))
}
