//! Colimits and limits of modules restricted to subsets of the poset.
//!
//! The colimit over `S` is `⊕_{x∈S} M(x)` modulo the relations coming from the
//! covers of `S` itself; the limit is the kernel of the dual map. Both keep
//! enough data (legs plus a section or retraction) to induce maps out of, or
//! into, themselves.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exactlin::{Field, Mat, Quotient};
use crate::pmod::PersistenceModule;
use crate::poset::{Connectivity, FinitePoset};

/// Anything indexed by a subset of a poset with composable maps.
pub trait Diagram {
    fn field(&self) -> Field;
    fn base(&self) -> &FinitePoset;
    fn dim(&self, x: usize) -> usize;
    /// Map for `x <= y`.
    fn map(&self, x: usize, y: usize) -> Mat;
}

impl Diagram for PersistenceModule {
    fn field(&self) -> Field {
        PersistenceModule::field(self)
    }
    fn base(&self) -> &FinitePoset {
        self.poset()
    }
    fn dim(&self, x: usize) -> usize {
        PersistenceModule::dim(self, x)
    }
    fn map(&self, x: usize, y: usize) -> Mat {
        PersistenceModule::map(self, x, y).clone()
    }
}

/// Diagram given by explicit spaces and maps on a subset; used for iterated colimits.
#[derive(Clone, Debug)]
pub struct TableDiagram<'a> {
    pub poset: &'a FinitePoset,
    pub field: Field,
    pub dims: HashMap<usize, usize>,
    pub maps: HashMap<(usize, usize), Mat>,
}

impl Diagram for TableDiagram<'_> {
    fn field(&self) -> Field {
        self.field
    }
    fn base(&self) -> &FinitePoset {
        self.poset
    }
    fn dim(&self, x: usize) -> usize {
        self.dims[&x]
    }
    fn map(&self, x: usize, y: usize) -> Mat {
        if x == y {
            return Mat::identity(self.field, self.dims[&x]);
        }
        self.maps[&(x, y)].clone()
    }
}

fn offsets<D: Diagram + ?Sized>(d: &D, set: &[usize]) -> (Vec<usize>, usize) {
    let mut off = Vec::with_capacity(set.len());
    let mut total = 0;
    for &x in set {
        off.push(total);
        total += d.dim(x);
    }
    (off, total)
}

fn position(set: &[usize], x: usize) -> usize {
    set.binary_search(&x).unwrap_or_else(|_| panic!("element {x} is not in the indexing set"))
}

fn sorted(set: &[usize]) -> Vec<usize> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Colimit {
    pub set: Vec<usize>,
    pub dim: usize,
    offsets: Vec<usize>,
    widths: Vec<usize>,
    pub quotient: Quotient,
}

impl Colimit {
    /// Leg `M(x) -> colim`.
    pub fn leg(&self, x: usize) -> Mat {
        let i = position(&self.set, x);
        self.quotient.map.block(0, self.dim, self.offsets[i], self.offsets[i] + self.widths[i])
    }

    /// The map out of the colimit induced by a cocone `x -> (target <- M(x))`.
    pub fn induced(&self, field: Field, target_dim: usize, mut cocone: impl FnMut(usize) -> Mat) -> Mat {
        let legs: Vec<Mat> = self.set.iter().map(|&x| cocone(x)).collect();
        let refs: Vec<&Mat> = legs.iter().collect();
        Mat::hstack(field, target_dim, &refs).mul(&self.quotient.section)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limit {
    pub set: Vec<usize>,
    pub dim: usize,
    offsets: Vec<usize>,
    widths: Vec<usize>,
    pub kernel: Mat,
    free: Vec<usize>,
}

impl Limit {
    /// Leg `lim -> M(y)`.
    pub fn leg(&self, y: usize) -> Mat {
        let i = position(&self.set, y);
        self.kernel.block(self.offsets[i], self.offsets[i] + self.widths[i], 0, self.dim)
    }

    /// The map into the limit induced by a cone `y -> (source -> M(y))`.
    pub fn induced(&self, field: Field, source_dim: usize, mut cone: impl FnMut(usize) -> Mat) -> Mat {
        let legs: Vec<Mat> = self.set.iter().map(|&y| cone(y)).collect();
        let refs: Vec<&Mat> = legs.iter().collect();
        Mat::vstack(field, source_dim, &refs).select_rows(&self.free)
    }
}

/// Colimit of `d` restricted to `set`. The empty set gives the zero space.
pub fn colim_over<D: Diagram + ?Sized>(d: &D, set: &[usize]) -> Colimit {
    let set = sorted(set);
    let field = d.field();
    let (off, total) = offsets(d, &set);
    let widths: Vec<usize> = set.iter().map(|&x| d.dim(x)).collect();
    let covers = d.base().subposet_covers(&set);
    let nrel: usize = covers.iter().map(|&(x, _)| d.dim(x)).sum();
    let mut rel = Mat::zeros(field, total, nrel);
    let mut col = 0;
    for &(x, y) in &covers {
        let (ix, iy) = (position(&set, x), position(&set, y));
        let dx = d.dim(x);
        // column j: iota_y(M(x<=y) e_j) - iota_x(e_j)
        rel.paste(off[iy], col, &d.map(x, y));
        rel.paste(off[ix], col, &Mat::identity(field, dx).neg());
        col += dx;
    }
    let quotient = Mat::quotient_map(field, total, &rel).expect("relation shape matches");
    Colimit { dim: quotient.dim(), set, offsets: off, widths, quotient }
}

/// Limit of `d` restricted to `set`. The empty set gives the zero space.
pub fn lim_over<D: Diagram + ?Sized>(d: &D, set: &[usize]) -> Limit {
    let set = sorted(set);
    let field = d.field();
    let (off, total) = offsets(d, &set);
    let widths: Vec<usize> = set.iter().map(|&x| d.dim(x)).collect();
    let covers = d.base().subposet_covers(&set);
    let nrows: usize = covers.iter().map(|&(_, y)| d.dim(y)).sum();
    let mut phi = Mat::zeros(field, nrows, total);
    let mut row = 0;
    for &(x, y) in &covers {
        let (ix, iy) = (position(&set, x), position(&set, y));
        let dy = d.dim(y);
        // row block: M(x<=y) v_x - v_y
        phi.paste(row, off[ix], &d.map(x, y));
        phi.paste(row, off[iy], &Mat::identity(field, dy).neg());
        row += dy;
    }
    let pivots = phi.rref().pivots;
    let free: Vec<usize> = (0..total).filter(|c| !pivots.contains(c)).collect();
    let kernel = phi.kernel_basis();
    Limit { dim: kernel.cols(), set, offsets: off, widths, kernel, free }
}

/// Comparison map `colim_S -> colim_T` for `S ⊆ T`.
pub fn colim_comparison(field: Field, small: &Colimit, big: &Colimit) -> Result<Mat> {
    if let Some(&x) = small.set.iter().find(|x| big.set.binary_search(x).is_err()) {
        return Err(Error::BadSubset(format!("a subset of the larger index set (element {x})")));
    }
    Ok(small.induced(field, big.dim, |x| big.leg(x)))
}

/// Comparison map `lim_T -> lim_S` for `S ⊆ T`.
pub fn lim_comparison(field: Field, big: &Limit, small: &Limit) -> Result<Mat> {
    if let Some(&x) = small.set.iter().find(|x| big.set.binary_search(x).is_err()) {
        return Err(Error::BadSubset(format!("a subset of the larger index set (element {x})")));
    }
    Ok(small.induced(field, big.dim, |y| big.leg(y)))
}

/// A candidate (co)limit: an object dimension and one leg per index.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub dim: usize,
    pub legs: HashMap<usize, Mat>,
}

impl From<&Colimit> for Candidate {
    fn from(c: &Colimit) -> Self {
        Candidate { dim: c.dim, legs: c.set.iter().map(|&x| (x, c.leg(x))).collect() }
    }
}

impl From<&Limit> for Candidate {
    fn from(c: &Limit) -> Self {
        Candidate { dim: c.dim, legs: c.set.iter().map(|&x| (x, c.leg(x))).collect() }
    }
}

pub const UNIVERSAL_CHECK_CAP: usize = 6;

/// Brute-force check that `cand` is a colimit of `d` over `set` (`|set| <= 6`).
///
/// Uses every comparable pair rather than covers, computes the full space of
/// cocones into the base field, and requires the candidate legs to form a
/// cocone, to be jointly surjective, and to factor every cocone.
pub fn check_universal_colim<D: Diagram + ?Sized>(d: &D, set: &[usize], cand: &Candidate) -> Result<bool> {
    let set = sorted(set);
    if set.len() > UNIVERSAL_CHECK_CAP {
        return Err(Error::TooLarge(set.len(), UNIVERSAL_CHECK_CAP));
    }
    let field = d.field();
    let p = d.base();
    let Some(legs) = set.iter().map(|x| cand.legs.get(x)).collect::<Option<Vec<_>>>() else {
        return Ok(false);
    };
    for (i, &x) in set.iter().enumerate() {
        if legs[i].shape() != (cand.dim, d.dim(x)) {
            return Ok(false);
        }
    }
    for (i, &x) in set.iter().enumerate() {
        for (j, &y) in set.iter().enumerate() {
            if p.lt(x, y) && legs[j].mul(&d.map(x, y)) != *legs[i] {
                return Ok(false);
            }
        }
    }
    let (off, total) = offsets(d, &set);
    let stacked = Mat::hstack(field, cand.dim, &legs);
    if stacked.rank() != cand.dim {
        return Ok(false);
    }
    // cocones into k: row vectors (delta_x) with delta_y M(x<=y) = delta_x
    let mut eqs: Vec<Mat> = Vec::new();
    for (i, &x) in set.iter().enumerate() {
        for (j, &y) in set.iter().enumerate() {
            if p.lt(x, y) {
                let mut e = Mat::zeros(field, d.dim(x), total);
                e.paste(0, off[j], &d.map(x, y).transpose());
                e.paste(0, off[i], &Mat::identity(field, d.dim(x)).neg());
                eqs.push(e);
            }
        }
    }
    let refs: Vec<&Mat> = eqs.iter().collect();
    let cocones = Mat::vstack(field, total, &refs).kernel_basis();
    if cocones.cols() != cand.dim {
        return Ok(false);
    }
    // each cocone delta factors as k * stacked
    Ok(stacked.transpose().span_contains(&cocones))
}

/// Brute-force check that `cand` is a limit of `d` over `set` (`|set| <= 6`).
pub fn check_universal_lim<D: Diagram + ?Sized>(d: &D, set: &[usize], cand: &Candidate) -> Result<bool> {
    let set = sorted(set);
    if set.len() > UNIVERSAL_CHECK_CAP {
        return Err(Error::TooLarge(set.len(), UNIVERSAL_CHECK_CAP));
    }
    let field = d.field();
    let p = d.base();
    let Some(legs) = set.iter().map(|x| cand.legs.get(x)).collect::<Option<Vec<_>>>() else {
        return Ok(false);
    };
    for (i, &x) in set.iter().enumerate() {
        if legs[i].shape() != (d.dim(x), cand.dim) {
            return Ok(false);
        }
    }
    for (i, &x) in set.iter().enumerate() {
        for (j, &y) in set.iter().enumerate() {
            if p.lt(x, y) && d.map(x, y).mul(legs[i]) != *legs[j] {
                return Ok(false);
            }
        }
    }
    let (off, total) = offsets(d, &set);
    let stacked = Mat::vstack(field, cand.dim, &legs);
    if stacked.rank() != cand.dim {
        return Ok(false);
    }
    // cones from k: vectors (g_x) with M(x<=y) g_x = g_y
    let mut eqs: Vec<Mat> = Vec::new();
    for (i, &x) in set.iter().enumerate() {
        for (j, &y) in set.iter().enumerate() {
            if p.lt(x, y) {
                let mut e = Mat::zeros(field, d.dim(y), total);
                e.paste(0, off[i], &d.map(x, y));
                e.paste(0, off[j], &Mat::identity(field, d.dim(y)).neg());
                eqs.push(e);
            }
        }
    }
    let refs: Vec<&Mat> = eqs.iter().collect();
    let cones = Mat::vstack(field, total, &refs).kernel_basis();
    if cones.cols() != cand.dim {
        return Ok(false);
    }
    Ok(stacked.span_contains(&cones))
}

#[derive(Clone, Debug)]
pub struct FubiniReport {
    /// For each `q` in the union, the connectivity of `{x in I : q in F(x)}`.
    pub fibers: Vec<(usize, Connectivity)>,
    pub all_connected: bool,
    /// `colim_{x in I} colim_{F(x)} M -> colim_{∪F} M`.
    pub map: Mat,
    pub is_iso: bool,
}

/// Compares the iterated colimit over a monotone family of downsets with the
/// colimit over their union.
pub fn fubini_compare(
    m: &PersistenceModule,
    outer: &[usize],
    mut inner: impl FnMut(usize) -> Vec<usize>,
) -> Result<FubiniReport> {
    let p = m.poset();
    let field = m.field();
    let outer = sorted(outer);
    let fam: HashMap<usize, Vec<usize>> = outer.iter().map(|&x| (x, sorted(&inner(x)))).collect();
    let mut union: Vec<usize> = fam.values().flatten().copied().collect();
    union = sorted(&union);
    let umember = p.membership(&union);
    for &x in &outer {
        for &y in &outer {
            if p.leq(x, y) && !fam[&x].iter().all(|z| fam[&y].binary_search(z).is_ok()) {
                return Err(Error::BadSubset("a monotone family".into()));
            }
        }
        let fx = p.membership(&fam[&x]);
        for &q in &fam[&x] {
            if (0..p.len()).any(|z| umember[z] && p.leq(z, q) && !fx[z]) {
                return Err(Error::BadSubset("a family of downsets of the union".into()));
            }
        }
    }
    let inner_colims: HashMap<usize, Colimit> = fam.iter().map(|(&x, s)| (x, colim_over(m, s))).collect();
    let whole = colim_over(m, &union);
    let mut maps = HashMap::new();
    for &x in &outer {
        for &y in &outer {
            if p.lt(x, y) {
                maps.insert((x, y), colim_comparison(field, &inner_colims[&x], &inner_colims[&y])?);
            }
        }
    }
    let diag = TableDiagram {
        poset: p,
        field,
        dims: inner_colims.iter().map(|(&x, c)| (x, c.dim)).collect(),
        maps,
    };
    let iterated = colim_over(&diag, &outer);
    let map = iterated.induced(field, whole.dim, |x| {
        colim_comparison(field, &inner_colims[&x], &whole).expect("inner sets lie in the union")
    });
    let fibers: Vec<(usize, Connectivity)> = union
        .iter()
        .map(|&q| {
            let fiber: Vec<usize> = outer.iter().copied().filter(|x| fam[x].binary_search(&q).is_ok()).collect();
            (q, p.connectivity(&fiber))
        })
        .collect();
    let all_connected = fibers.iter().all(|(_, c)| *c == Connectivity::Connected);
    let is_iso = map.is_invertible();
    Ok(FubiniReport { fibers, all_connected, map, is_iso })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::exactlin::GF2;

    fn span() -> Arc<FinitePoset> {
        // b <- a -> c
        Arc::new(FinitePoset::new(&["a", "b", "c"], &[("a", "b"), ("a", "c")]).unwrap())
    }

    #[test]
    fn pushout_of_a_span() {
        let p = span();
        let m = PersistenceModule::interval(p, GF2, &[0, 1, 2]).unwrap();
        let c = colim_over(&m, &[0, 1, 2]);
        assert_eq!(c.dim, 1);
        assert!(check_universal_colim(&m, &[0, 1, 2], &(&c).into()).unwrap());
        let disjoint = colim_over(&m, &[1, 2]);
        assert_eq!(disjoint.dim, 2);
        assert_eq!(colim_over(&m, &[]).dim, 0);
    }

    #[test]
    fn limit_of_a_span_is_the_apex_value() {
        let p = span();
        let m = PersistenceModule::interval(p, GF2, &[0, 1, 2]).unwrap();
        let l = lim_over(&m, &[0, 1, 2]);
        assert_eq!(l.dim, 1);
        assert!(check_universal_lim(&m, &[0, 1, 2], &(&l).into()).unwrap());
        assert_eq!(lim_over(&m, &[1, 2]).dim, 2);
    }

    #[test]
    fn truncated_or_zero_candidates_fail() {
        let p = span();
        let m = PersistenceModule::interval(p, GF2, &[0, 1, 2]).unwrap();
        let c = colim_over(&m, &[0, 1, 2]);
        let zero = Candidate { dim: 0, legs: (0..3).map(|x| (x, Mat::zeros(GF2, 0, 1))).collect() };
        assert!(!check_universal_colim(&m, &[0, 1, 2], &zero).unwrap());
        // drop the relation from the cover a<c: legs into k^2
        let mut legs = HashMap::new();
        legs.insert(0, Mat::from_rows(GF2, &[vec![1], vec![0]]));
        legs.insert(1, Mat::from_rows(GF2, &[vec![1], vec![0]]));
        legs.insert(2, Mat::from_rows(GF2, &[vec![0], vec![1]]));
        assert!(!check_universal_colim(&m, &[0, 1, 2], &Candidate { dim: 2, legs }).unwrap());
        assert!(check_universal_colim(&m, &[0, 1, 2], &(&c).into()).unwrap());
    }

    #[test]
    fn induced_maps_factor_cocones() {
        let p = span();
        let m = PersistenceModule::interval(p, GF2, &[0, 1, 2]).unwrap();
        let small = colim_over(&m, &[0, 1]);
        let big = colim_over(&m, &[0, 1, 2]);
        let k = colim_comparison(GF2, &small, &big).unwrap();
        for x in [0, 1] {
            assert_eq!(k.mul(&small.leg(x)), big.leg(x));
        }
        let lb = lim_over(&m, &[0, 1, 2]);
        let ls = lim_over(&m, &[1, 2]);
        let r = lim_comparison(GF2, &lb, &ls).unwrap();
        for y in [1, 2] {
            assert_eq!(ls.leg(y).mul(&r), lb.leg(y));
        }
    }
}
