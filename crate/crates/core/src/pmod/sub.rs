use std::sync::Arc;

use super::{ModuleMorphism, PersistenceModule};
use crate::error::{Error, Result};
use crate::exactlin::{Mat, Quotient};

/// Submodule given by a basis of each `M(a)` (as matrix columns), closed under
/// the structure maps. Bases are kept in canonical echelon form.
#[derive(Clone, Debug)]
pub struct Submodule {
    parent: Arc<PersistenceModule>,
    bases: Vec<Mat>,
}

impl PartialEq for Submodule {
    fn eq(&self, other: &Self) -> bool {
        self.bases == other.bases && *self.parent == *other.parent
    }
}

impl Submodule {
    pub fn new(parent: Arc<PersistenceModule>, bases: Vec<Mat>) -> Result<Submodule> {
        let p = parent.poset().clone();
        if bases.len() != p.len() {
            return Err(Error::Dimension(format!("{} bases for {} elements", bases.len(), p.len())));
        }
        let mut canon = Vec::with_capacity(bases.len());
        for (a, b) in bases.iter().enumerate() {
            if b.rows() != parent.dim(a) {
                return Err(Error::Dimension(format!(
                    "basis at {} has vectors of length {}, expected {}",
                    p.name(a),
                    b.rows(),
                    parent.dim(a)
                )));
            }
            canon.push(b.canonical_basis());
        }
        for &(a, b) in p.covers() {
            if !canon[b].span_contains(&parent.map(a, b).mul(&canon[a])) {
                return Err(Error::NotSubmodule(p.name(a).into(), p.name(b).into()));
            }
        }
        Ok(Submodule { parent, bases: canon })
    }

    pub fn whole(parent: Arc<PersistenceModule>) -> Submodule {
        let bases = (0..parent.poset().len()).map(|a| Mat::identity(parent.field(), parent.dim(a))).collect();
        Submodule { parent, bases }
    }

    pub fn zero(parent: Arc<PersistenceModule>) -> Submodule {
        let bases = (0..parent.poset().len()).map(|a| Mat::zeros(parent.field(), parent.dim(a), 0)).collect();
        Submodule { parent, bases }
    }

    /// Image of a morphism, as a submodule of its target.
    pub fn image(f: &ModuleMorphism) -> Submodule {
        let bases = f.components().iter().map(|c| c.canonical_basis()).collect();
        Submodule { parent: f.target.clone(), bases }
    }

    /// Kernel of a morphism, as a submodule of its source.
    pub fn kernel(f: &ModuleMorphism) -> Submodule {
        let bases = f.components().iter().map(|c| c.kernel_basis().canonical_basis()).collect();
        Submodule { parent: f.source.clone(), bases }
    }

    /// `f(S)` for a submodule `S` of the source of `f`.
    pub fn pushforward(f: &ModuleMorphism, s: &Submodule) -> Result<Submodule> {
        s.check_parent(&f.source)?;
        let bases = f.components().iter().zip(&s.bases).map(|(c, b)| c.mul(b).canonical_basis()).collect();
        Ok(Submodule { parent: f.target.clone(), bases })
    }

    /// `f^{-1}(S)` for a submodule `S` of the target of `f`.
    pub fn preimage(f: &ModuleMorphism, s: &Submodule) -> Result<Submodule> {
        s.check_parent(&f.target)?;
        let field = f.source.field();
        let bases = f
            .components()
            .iter()
            .zip(&s.bases)
            .map(|(c, b)| {
                // v with c v in span(b): kernel of [c | -b], first block
                let stacked = Mat::hstack(field, c.rows(), &[c, &b.neg()]);
                let k = stacked.kernel_basis();
                k.block(0, c.cols(), 0, k.cols()).canonical_basis()
            })
            .collect();
        Ok(Submodule { parent: f.source.clone(), bases })
    }

    fn check_parent(&self, m: &Arc<PersistenceModule>) -> Result<()> {
        if Arc::ptr_eq(&self.parent, m) || *self.parent == **m {
            Ok(())
        } else {
            Err(Error::EndpointMismatch("submodule of a different module".into()))
        }
    }

    pub fn parent(&self) -> &Arc<PersistenceModule> {
        &self.parent
    }

    pub fn basis(&self, a: usize) -> &Mat {
        &self.bases[a]
    }

    pub fn dim(&self, a: usize) -> usize {
        self.bases[a].cols()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.cols()).collect()
    }

    /// First element where `other` is not contained in `self`.
    pub fn first_non_containment(&self, other: &Submodule) -> Option<usize> {
        (0..self.bases.len()).find(|&a| !self.bases[a].span_contains(&other.bases[a]))
    }

    pub fn contains(&self, other: &Submodule) -> bool {
        self.first_non_containment(other).is_none()
    }

    pub fn intersect(&self, other: &Submodule) -> Result<Submodule> {
        other.check_parent(&self.parent)?;
        let bases = self.bases.iter().zip(&other.bases).map(|(x, y)| x.span_intersection(y).canonical_basis()).collect();
        Ok(Submodule { parent: self.parent.clone(), bases })
    }

    pub fn sum(&self, other: &Submodule) -> Result<Submodule> {
        other.check_parent(&self.parent)?;
        let bases = self.bases.iter().zip(&other.bases).map(|(x, y)| x.span_sum(y).canonical_basis()).collect();
        Ok(Submodule { parent: self.parent.clone(), bases })
    }

    /// The submodule as a module in its own right, with its inclusion.
    pub fn to_module(&self) -> Result<(Arc<PersistenceModule>, ModuleMorphism)> {
        let m = &self.parent;
        let field = m.field();
        let p = m.poset().clone();
        let module = PersistenceModule::from_fn(p, field, self.dims(), |a, b| {
            let img = m.map(a, b).mul(&self.bases[a]);
            self.bases[b].solve(&img).expect("shapes agree").expect("closure was checked")
        })?;
        let module = Arc::new(module);
        let incl = ModuleMorphism::unchecked(module.clone(), m.clone(), self.bases.clone())?;
        Ok((module, incl))
    }
}

/// `upper / lower` for submodules `lower ⊆ upper` of a common module.
#[derive(Clone, Debug)]
pub struct Subquotient {
    pub upper: Submodule,
    pub lower: Submodule,
    pub upper_module: Arc<PersistenceModule>,
    pub inclusion: ModuleMorphism,
    pub module: Arc<PersistenceModule>,
    /// Quotient maps in the coordinates of the `upper` bases.
    pub quotients: Vec<Quotient>,
    /// `upper_module -> module`.
    pub projection: ModuleMorphism,
}

impl Subquotient {
    pub fn new(upper: Submodule, lower: Submodule) -> Result<Subquotient> {
        lower.check_parent(&upper.parent)?;
        if let Some(a) = upper.first_non_containment(&lower) {
            return Err(Error::Containment {
                element: upper.parent.poset().name(a).into(),
                detail: "lower submodule is not contained in the upper one".into(),
            });
        }
        let (upper_module, inclusion) = upper.to_module()?;
        let field = upper.parent.field();
        let p = upper.parent.poset().clone();
        let mut quotients = Vec::with_capacity(p.len());
        for a in 0..p.len() {
            let coords = upper.bases[a].solve(&lower.bases[a])?.expect("containment was checked");
            quotients.push(Mat::quotient_map(field, upper.dim(a), &coords)?);
        }
        let dims = quotients.iter().map(|q| q.dim()).collect();
        let module = Arc::new(PersistenceModule::from_fn(p, field, dims, |a, b| {
            quotients[b].map.mul(upper_module.map(a, b)).mul(&quotients[a].section)
        })?);
        let projection =
            ModuleMorphism::unchecked(upper_module.clone(), module.clone(), quotients.iter().map(|q| q.map.clone()).collect())?;
        Ok(Subquotient { upper, lower, upper_module, inclusion, module, quotients, projection })
    }

    /// Image in the subquotient of a submodule `Y` of the parent with `Y ⊆ upper`.
    pub fn image_of(&self, y: &Submodule) -> Result<Submodule> {
        y.check_parent(&self.upper.parent)?;
        let mut bases = Vec::with_capacity(self.quotients.len());
        for (a, q) in self.quotients.iter().enumerate() {
            let coords = self.upper.bases[a].solve(&y.bases[a])?.ok_or_else(|| Error::Containment {
                element: self.module.poset().name(a).into(),
                detail: "submodule is not inside the upper submodule".into(),
            })?;
            bases.push(q.map.mul(&coords));
        }
        Submodule::new(self.module.clone(), bases)
    }

    /// Preimage in the parent of a submodule `W` of the subquotient.
    pub fn preimage_of(&self, w: &Submodule) -> Result<Submodule> {
        w.check_parent(&self.module)?;
        let field = self.module.field();
        let mut bases = Vec::with_capacity(self.quotients.len());
        for (a, q) in self.quotients.iter().enumerate() {
            let lower = self.upper.bases[a].solve(&self.lower.bases[a])?.expect("containment was checked");
            let lifted = q.section.mul(&w.bases[a]);
            let coords = Mat::hstack(field, self.upper.dim(a), &[&lower, &lifted]);
            bases.push(self.upper.bases[a].mul(&coords));
        }
        Submodule::new(self.upper.parent.clone(), bases)
    }
}
