use std::sync::Arc;

use super::PersistenceModule;
use crate::error::{Error, Result};
use crate::exactlin::{Mat, Scalar};

/// Natural transformation between two modules over the same poset.
#[derive(Clone, Debug)]
pub struct ModuleMorphism {
    pub source: Arc<PersistenceModule>,
    pub target: Arc<PersistenceModule>,
    components: Vec<Mat>,
}

impl PartialEq for ModuleMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components && self.source == other.source && self.target == other.target
    }
}

fn same(a: &Arc<PersistenceModule>, b: &Arc<PersistenceModule>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl ModuleMorphism {
    /// Checks shapes and naturality on every cover.
    pub fn new(source: Arc<PersistenceModule>, target: Arc<PersistenceModule>, components: Vec<Mat>) -> Result<Self> {
        let f = ModuleMorphism::unchecked(source, target, components)?;
        f.check_natural()?;
        Ok(f)
    }

    /// Checks shapes only. Use for morphisms produced by constructions that are
    /// natural by design.
    pub fn unchecked(source: Arc<PersistenceModule>, target: Arc<PersistenceModule>, components: Vec<Mat>) -> Result<Self> {
        source.check_same_base(&target)?;
        let p = source.poset().clone();
        if components.len() != p.len() {
            return Err(Error::Dimension(format!("{} components for {} elements", components.len(), p.len())));
        }
        for (a, c) in components.iter().enumerate() {
            if c.shape() != (target.dim(a), source.dim(a)) {
                return Err(Error::Dimension(format!(
                    "component at {} is {}x{}, expected {}x{}",
                    p.name(a),
                    c.rows(),
                    c.cols(),
                    target.dim(a),
                    source.dim(a)
                )));
            }
        }
        Ok(ModuleMorphism { source, target, components })
    }

    pub fn check_natural(&self) -> Result<()> {
        let p = self.source.poset();
        for &(a, b) in p.covers() {
            let lhs = self.target.map(a, b).mul(&self.components[a]);
            let rhs = self.components[b].mul(self.source.map(a, b));
            if lhs != rhs {
                return Err(Error::NotNatural(p.name(a).into(), p.name(b).into()));
            }
        }
        Ok(())
    }

    pub fn is_natural(&self) -> bool {
        self.check_natural().is_ok()
    }

    pub fn zero(source: Arc<PersistenceModule>, target: Arc<PersistenceModule>) -> Result<Self> {
        let comps = (0..source.poset().len())
            .map(|a| Mat::zeros(source.field(), target.dim(a), source.dim(a)))
            .collect();
        ModuleMorphism::unchecked(source, target, comps)
    }

    pub fn identity(m: Arc<PersistenceModule>) -> Self {
        let comps = (0..m.poset().len()).map(|a| Mat::identity(m.field(), m.dim(a))).collect();
        ModuleMorphism { source: m.clone(), target: m, components: comps }
    }

    pub fn component(&self, a: usize) -> &Mat {
        &self.components[a]
    }

    pub fn components(&self) -> &[Mat] {
        &self.components
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ModuleMorphism) -> Result<ModuleMorphism> {
        if !same(&inner.target, &self.source) {
            return Err(Error::EndpointMismatch("inner target differs from outer source".into()));
        }
        let comps = self.components.iter().zip(&inner.components).map(|(f, g)| f.mul(g)).collect();
        Ok(ModuleMorphism { source: inner.source.clone(), target: self.target.clone(), components: comps })
    }

    fn check_parallel(&self, other: &ModuleMorphism) -> Result<()> {
        if !same(&self.source, &other.source) || !same(&self.target, &other.target) {
            return Err(Error::EndpointMismatch("morphisms are not parallel".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &ModuleMorphism) -> Result<ModuleMorphism> {
        self.check_parallel(other)?;
        let comps = self.components.iter().zip(&other.components).map(|(f, g)| f.add(g)).collect();
        Ok(ModuleMorphism { source: self.source.clone(), target: self.target.clone(), components: comps })
    }

    pub fn scale(&self, s: &Scalar) -> ModuleMorphism {
        let comps = self.components.iter().map(|f| f.scale(s)).collect();
        ModuleMorphism { source: self.source.clone(), target: self.target.clone(), components: comps }
    }

    /// `sum_i coeffs[i] * basis[i]`; `basis` must be nonempty and parallel.
    pub fn combination(basis: &[ModuleMorphism], coeffs: &[Scalar]) -> ModuleMorphism {
        let mut comps: Vec<Mat> = basis[0].components.iter().map(|c| Mat::zeros(c.field(), c.rows(), c.cols())).collect();
        for (f, s) in basis.iter().zip(coeffs) {
            if s.is_zero() {
                continue;
            }
            for (acc, c) in comps.iter_mut().zip(&f.components) {
                acc.axpy(s, c);
            }
        }
        ModuleMorphism { source: basis[0].source.clone(), target: basis[0].target.clone(), components: comps }
    }

    /// Same components, reinterpreted between equal modules.
    pub fn retarget(&self, source: Arc<PersistenceModule>, target: Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        if !same(&self.source, &source) || !same(&self.target, &target) {
            return Err(Error::EndpointMismatch("retargeting to different modules".into()));
        }
        Ok(ModuleMorphism { source, target, components: self.components.clone() })
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn is_iso(&self) -> bool {
        self.components.iter().all(|c| c.is_invertible())
    }

    pub fn is_mono(&self) -> bool {
        self.components.iter().all(|c| c.rank() == c.cols())
    }

    pub fn is_epi(&self) -> bool {
        self.components.iter().all(|c| c.rank() == c.rows())
    }

    /// Componentwise inverse of an isomorphism.
    pub fn inverse(&self) -> Option<ModuleMorphism> {
        let comps: Option<Vec<Mat>> = self.components.iter().map(|c| c.inverse()).collect();
        Some(ModuleMorphism { source: self.target.clone(), target: self.source.clone(), components: comps? })
    }

    /// Componentwise equality of the matrices, ignoring module identity.
    pub fn same_matrices(&self, other: &ModuleMorphism) -> bool {
        self.components == other.components
    }
}
