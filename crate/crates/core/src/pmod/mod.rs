//! Persistence modules over finite posets.
//!
//! A module stores one matrix per cover relation. Maps between arbitrary
//! comparable pairs are composed along the lexicographically smallest cover
//! path; validation checks that every path gives the same composite.

pub(crate) mod hom;
mod morphism;
mod sub;

use std::collections::HashMap;
use std::sync::Arc;

pub use hom::{hom_basis, hom_dim, is_isomorphic, IsoResult};
pub use morphism::ModuleMorphism;
pub use sub::{Submodule, Subquotient};

use crate::error::{Error, Result};
use crate::exactlin::{Field, Mat};
use crate::poset::{FinitePoset, OrderMap};

#[derive(Clone, Debug)]
pub struct PersistenceModule {
    poset: Arc<FinitePoset>,
    field: Field,
    dims: Vec<usize>,
    cover_maps: Vec<Mat>,
    // Composite maps for all comparable pairs, row-major by (a, b).
    table: Vec<Option<Mat>>,
}

impl PartialEq for PersistenceModule {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.dims == other.dims
            && self.cover_maps == other.cover_maps
            && *self.poset == *other.poset
    }
}

impl Eq for PersistenceModule {}

impl PersistenceModule {
    /// Builds a module from dimensions and cover maps keyed by `(a, b)`.
    /// Maps touching a zero-dimensional space may be omitted.
    pub fn new(
        poset: Arc<FinitePoset>,
        field: Field,
        dims: Vec<usize>,
        mut maps: HashMap<(usize, usize), Mat>,
    ) -> Result<PersistenceModule> {
        if dims.len() != poset.len() {
            return Err(Error::Dimension(format!(
                "{} dimensions for {} elements",
                dims.len(),
                poset.len()
            )));
        }
        let mut cover_maps = Vec::with_capacity(poset.covers().len());
        for &(a, b) in poset.covers() {
            let m = match maps.remove(&(a, b)) {
                Some(m) => m,
                None if dims[a] == 0 || dims[b] == 0 => Mat::zeros(field, dims[b], dims[a]),
                None => {
                    return Err(Error::Dimension(format!(
                        "missing map for cover ({}, {})",
                        poset.name(a),
                        poset.name(b)
                    )))
                }
            };
            if m.field() != field {
                return Err(Error::FieldMismatch(field.to_string(), m.field().to_string()));
            }
            if m.shape() != (dims[b], dims[a]) {
                return Err(Error::Dimension(format!(
                    "map ({}, {}) is {}x{}, expected {}x{}",
                    poset.name(a),
                    poset.name(b),
                    m.rows(),
                    m.cols(),
                    dims[b],
                    dims[a]
                )));
            }
            cover_maps.push(m);
        }
        if let Some((&(a, b), _)) = maps.iter().next() {
            return Err(Error::NotACover(poset.name(a).into(), poset.name(b).into()));
        }
        let table = build_table(&poset, field, &dims, &cover_maps)?;
        Ok(PersistenceModule { poset, field, dims, cover_maps, table })
    }

    /// The zero module.
    pub fn zero(poset: Arc<FinitePoset>, field: Field) -> PersistenceModule {
        let n = poset.len();
        PersistenceModule::new(poset, field, vec![0; n], HashMap::new()).expect("zero module is valid")
    }

    /// `k_J`: one-dimensional on the convex set `J`, identities inside it.
    pub fn interval(poset: Arc<FinitePoset>, field: Field, set: &[usize]) -> Result<PersistenceModule> {
        if !poset.is_convex(set) {
            let names: Vec<&str> = set.iter().map(|&i| poset.name(i)).collect();
            return Err(Error::NotConvex(names.join(", ")));
        }
        let member = poset.membership(set);
        let dims: Vec<usize> = member.iter().map(|&m| m as usize).collect();
        let maps = poset
            .covers()
            .iter()
            .filter(|&&(a, b)| member[a] && member[b])
            .map(|&(a, b)| ((a, b), Mat::identity(field, 1)))
            .collect();
        PersistenceModule::new(poset, field, dims, maps)
    }

    /// Assembles a module from a per-element dimension and a cover-map closure.
    pub fn from_fn(
        poset: Arc<FinitePoset>,
        field: Field,
        dims: Vec<usize>,
        mut cover_map: impl FnMut(usize, usize) -> Mat,
    ) -> Result<PersistenceModule> {
        let maps = poset.covers().iter().map(|&(a, b)| ((a, b), cover_map(a, b))).collect();
        PersistenceModule::new(poset, field, dims, maps)
    }

    pub fn poset(&self) -> &Arc<FinitePoset> {
        &self.poset
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn dim(&self, a: usize) -> usize {
        self.dims[a]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// Cover maps in the order of `poset().covers()`.
    pub fn cover_maps(&self) -> &[Mat] {
        &self.cover_maps
    }

    /// Structure map `M(a <= b)`; panics unless `a <= b`.
    pub fn map(&self, a: usize, b: usize) -> &Mat {
        self.table[a * self.poset.len() + b].as_ref().unwrap_or_else(|| {
            panic!("{} is not below {}", self.poset.name(a), self.poset.name(b))
        })
    }

    /// Ranks of all structure maps, an isomorphism invariant.
    pub fn rank_invariant(&self) -> Vec<usize> {
        self.table.iter().map(|m| m.as_ref().map_or(usize::MAX, |m| m.rank())).collect()
    }

    pub fn check_same_base(&self, other: &PersistenceModule) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        if !Arc::ptr_eq(&self.poset, &other.poset) && *self.poset != *other.poset {
            return Err(Error::PosetMismatch);
        }
        Ok(())
    }

    /// `M ⊕ N` with the summands stacked in that order.
    pub fn direct_sum(&self, other: &PersistenceModule) -> Result<PersistenceModule> {
        self.check_same_base(other)?;
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = self
            .poset
            .covers()
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, Mat::block_diag(self.field, &[&self.cover_maps[i], &other.cover_maps[i]])))
            .collect();
        PersistenceModule::new(self.poset.clone(), self.field, dims, maps)
    }

    /// Direct sum of a list of modules over the same poset.
    pub fn direct_sum_all(poset: Arc<FinitePoset>, field: Field, parts: &[&PersistenceModule]) -> Result<PersistenceModule> {
        let mut acc = PersistenceModule::zero(poset, field);
        for p in parts {
            acc = acc.direct_sum(p)?;
        }
        Ok(acc)
    }

    /// `f^* M`: the module `x -> M(f(x))` on the source of `f`.
    pub fn pullback(&self, f: &OrderMap) -> Result<PersistenceModule> {
        if *f.target != *self.poset {
            return Err(Error::PosetMismatch);
        }
        let dims = (0..f.source.len()).map(|x| self.dims[f.apply(x)]).collect();
        let maps = f
            .source
            .covers()
            .iter()
            .map(|&(x, y)| ((x, y), self.map(f.apply(x), f.apply(y)).clone()))
            .collect();
        PersistenceModule::new(f.source.clone(), self.field, dims, maps)
    }
}

fn build_table(poset: &FinitePoset, field: Field, dims: &[usize], cover_maps: &[Mat]) -> Result<Vec<Option<Mat>>> {
    let n = poset.len();
    let cover_idx: HashMap<(usize, usize), usize> =
        poset.covers().iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut table: Vec<Option<Mat>> = vec![None; n * n];
    for &a in poset.linear_extension().iter().rev() {
        table[a * n + a] = Some(Mat::identity(field, dims[a]));
        for b in 0..n {
            if a == b || !poset.leq(a, b) {
                continue;
            }
            let mut canonical: Option<Mat> = None;
            for &x in poset.upper_covers(a) {
                if !poset.leq(x, b) {
                    continue;
                }
                let step = &cover_maps[cover_idx[&(a, x)]];
                let rest = table[x * n + b].as_ref().expect("upper elements are processed first");
                let comp = rest.mul(step);
                match &canonical {
                    None => canonical = Some(comp),
                    Some(c) if *c != comp => {
                        return Err(Error::NotCommutative(poset.name(a).into(), poset.name(b).into()))
                    }
                    Some(_) => {}
                }
            }
            table[a * n + b] = canonical;
        }
    }
    Ok(table)
}
