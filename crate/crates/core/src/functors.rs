//! Neighborhood functors `L_r`, `R_r`, their iterates, and the canonical
//! natural transformations between them.
//!
//! `L_r M(a)` is the colimit of `M` over `a^{down r}` and `R_r M(a)` the limit
//! over `a^{up r}`. Every construction keeps its (co)limit legs so that maps
//! between functors are induced rather than guessed.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use num::Zero;

use crate::error::{Error, Result};
use crate::exactlin::Mat;
use crate::height::{HeightDiff, Rational};
use crate::kan::{colim_over, lim_over, Colimit, Limit};
use crate::pmod::{ModuleMorphism, PersistenceModule, Submodule, Subquotient};
use crate::poset::OrderMap;

/// Left Kan-type extension: `a -> colim_{D(a)} M` for a monotone family of downsets `D`.
#[derive(Clone, Debug)]
pub struct Lan {
    pub input: Arc<PersistenceModule>,
    pub output: Arc<PersistenceModule>,
    pub colims: Vec<Colimit>,
}

/// Right Kan-type extension: `a -> lim_{U(a)} M` for an antitone family of upsets `U`.
#[derive(Clone, Debug)]
pub struct Ran {
    pub input: Arc<PersistenceModule>,
    pub output: Arc<PersistenceModule>,
    pub lims: Vec<Limit>,
}

fn inclusion_failure(m: &PersistenceModule, a: usize, what: &str) -> Error {
    Error::InclusionFailure { element: m.poset().name(a).into(), detail: what.into() }
}

fn subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

impl Lan {
    pub fn over(m: Arc<PersistenceModule>, sets: Vec<Vec<usize>>) -> Result<Lan> {
        let p = m.poset().clone();
        let field = m.field();
        for &(a, b) in p.covers() {
            if !subset(&sets[a], &sets[b]) {
                return Err(inclusion_failure(&m, a, "index sets are not monotone"));
            }
        }
        let colims: Vec<Colimit> = sets.iter().map(|s| colim_over(&*m, s)).collect();
        let dims = colims.iter().map(|c| c.dim).collect();
        let output = PersistenceModule::from_fn(p, field, dims, |a, b| {
            colims[a].induced(field, colims[b].dim, |x| colims[b].leg(x))
        })?;
        Ok(Lan { input: m, output: Arc::new(output), colims })
    }

    pub fn set(&self, a: usize) -> &[usize] {
        &self.colims[a].set
    }

    /// Leg `M(x) -> output(a)` for `x` in the index set of `a`.
    pub fn leg(&self, a: usize, x: usize) -> Mat {
        self.colims[a].leg(x)
    }

    /// `self -> other` for families with `D(a) ⊆ D'(a)` over the same module.
    pub fn compare(&self, other: &Lan) -> Result<ModuleMorphism> {
        let field = self.input.field();
        let mut comps = Vec::with_capacity(self.colims.len());
        for (a, (c, d)) in self.colims.iter().zip(&other.colims).enumerate() {
            if !subset(&c.set, &d.set) {
                return Err(inclusion_failure(&self.input, a, "source index set is not contained in the target one"));
            }
            comps.push(c.induced(field, d.dim, |x| d.leg(x)));
        }
        ModuleMorphism::unchecked(self.output.clone(), other.output.clone(), comps)
    }

    /// `output -> input`, defined when every `D(a)` lies below `a`.
    pub fn to_input(&self) -> Result<ModuleMorphism> {
        let field = self.input.field();
        let p = self.input.poset();
        let mut comps = Vec::with_capacity(self.colims.len());
        for (a, c) in self.colims.iter().enumerate() {
            if c.set.iter().any(|&x| !p.leq(x, a)) {
                return Err(inclusion_failure(&self.input, a, "index set is not below the element"));
            }
            comps.push(c.induced(field, self.input.dim(a), |x| self.input.map(x, a).clone()));
        }
        ModuleMorphism::unchecked(self.output.clone(), self.input.clone(), comps)
    }

    /// Functoriality: the image of `f: M -> N` given the extension of `N` on the same family.
    pub fn apply(&self, other: &Lan, f: &ModuleMorphism) -> Result<ModuleMorphism> {
        let field = self.input.field();
        let comps = self
            .colims
            .iter()
            .zip(&other.colims)
            .map(|(c, d)| c.induced(field, d.dim, |x| d.leg(x).mul(f.component(x))))
            .collect();
        ModuleMorphism::unchecked(self.output.clone(), other.output.clone(), comps)
    }
}

impl Ran {
    pub fn over(m: Arc<PersistenceModule>, sets: Vec<Vec<usize>>) -> Result<Ran> {
        let p = m.poset().clone();
        let field = m.field();
        for &(a, b) in p.covers() {
            if !subset(&sets[b], &sets[a]) {
                return Err(inclusion_failure(&m, a, "index sets are not antitone"));
            }
        }
        let lims: Vec<Limit> = sets.iter().map(|s| lim_over(&*m, s)).collect();
        let dims = lims.iter().map(|l| l.dim).collect();
        let output = PersistenceModule::from_fn(p, field, dims, |a, b| {
            lims[b].induced(field, lims[a].dim, |y| lims[a].leg(y))
        })?;
        Ok(Ran { input: m, output: Arc::new(output), lims })
    }

    pub fn set(&self, a: usize) -> &[usize] {
        &self.lims[a].set
    }

    /// Leg `output(a) -> M(y)` for `y` in the index set of `a`.
    pub fn leg(&self, a: usize, y: usize) -> Mat {
        self.lims[a].leg(y)
    }

    /// `self -> other` for families with `U(a) ⊇ U'(a)` over the same module.
    pub fn compare(&self, other: &Ran) -> Result<ModuleMorphism> {
        let field = self.input.field();
        let mut comps = Vec::with_capacity(self.lims.len());
        for (a, (big, small)) in self.lims.iter().zip(&other.lims).enumerate() {
            if !subset(&small.set, &big.set) {
                return Err(inclusion_failure(&self.input, a, "target index set is not contained in the source one"));
            }
            comps.push(small.induced(field, big.dim, |y| big.leg(y)));
        }
        ModuleMorphism::unchecked(self.output.clone(), other.output.clone(), comps)
    }

    /// `input -> output`, defined when every `U(a)` lies above `a`.
    pub fn from_input(&self) -> Result<ModuleMorphism> {
        let field = self.input.field();
        let p = self.input.poset();
        let mut comps = Vec::with_capacity(self.lims.len());
        for (a, l) in self.lims.iter().enumerate() {
            if l.set.iter().any(|&y| !p.leq(a, y)) {
                return Err(inclusion_failure(&self.input, a, "index set is not above the element"));
            }
            comps.push(l.induced(field, self.input.dim(a), |y| self.input.map(a, y).clone()));
        }
        ModuleMorphism::unchecked(self.input.clone(), self.output.clone(), comps)
    }

    /// Functoriality: the image of `f: M -> N` given the extension of `N` on the same family.
    pub fn apply(&self, other: &Ran, f: &ModuleMorphism) -> Result<ModuleMorphism> {
        let field = self.input.field();
        let comps = self
            .lims
            .iter()
            .zip(&other.lims)
            .map(|(l, k)| k.induced(field, l.dim, |y| f.component(y).mul(&l.leg(y))))
            .collect();
        ModuleMorphism::unchecked(self.output.clone(), other.output.clone(), comps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Down,
    Up,
    DownDown,
    UpUp,
}

type Key = (Kind, Rational, Rational, u64);

fn fingerprint(m: &PersistenceModule) -> u64 {
    let mut h = DefaultHasher::new();
    m.dims().hash(&mut h);
    m.cover_maps().hash(&mut h);
    h.finish()
}

#[derive(Clone)]
enum Cached {
    Lan(Arc<Lan>),
    Ran(Arc<Ran>),
}

/// Cached results whose input modules share a fingerprint.
type Bucket = Vec<(Arc<PersistenceModule>, Cached)>;

/// Functor calculus for one height-difference function, with results cached
/// per parameter and module.
pub struct Calculus {
    rho: HeightDiff,
    cache: Mutex<HashMap<Key, Bucket>>,
}

impl Calculus {
    pub fn new(rho: HeightDiff) -> Calculus {
        Calculus { rho, cache: Mutex::new(HashMap::new()) }
    }

    pub fn rho(&self) -> &HeightDiff {
        &self.rho
    }

    fn check_module(&self, m: &PersistenceModule) -> Result<()> {
        if **m.poset() != **self.rho.poset() {
            return Err(Error::PosetMismatch);
        }
        Ok(())
    }

    fn check_param(r: &Rational) -> Result<()> {
        if r < &Rational::zero() {
            return Err(Error::Negative(r.to_string()));
        }
        Ok(())
    }

    fn cached(&self, key: Key, m: &Arc<PersistenceModule>, build: impl FnOnce() -> Result<Cached>) -> Result<Cached> {
        if let Some(list) = self.cache.lock().expect("cache lock").get(&key) {
            if let Some((_, c)) = list.iter().find(|(k, _)| Arc::ptr_eq(k, m) || **k == **m) {
                return Ok(c.clone());
            }
        }
        let built = build()?;
        self.cache.lock().expect("cache lock").entry(key).or_default().push((m.clone(), built.clone()));
        Ok(built)
    }

    fn lan(&self, kind: Kind, s: &Rational, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Arc<Lan>> {
        self.check_module(m)?;
        Self::check_param(s)?;
        Self::check_param(r)?;
        let key = (kind, s.clone(), r.clone(), fingerprint(m));
        let c = self.cached(key, m, || {
            let n = m.poset().len();
            let sets = (0..n)
                .map(|a| match kind {
                    Kind::Down => self.rho.down(a, r),
                    _ => self.rho.down_down(a, s, r),
                })
                .collect();
            Ok(Cached::Lan(Arc::new(Lan::over(m.clone(), sets)?)))
        })?;
        match c {
            Cached::Lan(l) => Ok(l),
            Cached::Ran(_) => unreachable!("key kind determines the cached variant"),
        }
    }

    fn ran(&self, kind: Kind, r: &Rational, s: &Rational, m: &Arc<PersistenceModule>) -> Result<Arc<Ran>> {
        self.check_module(m)?;
        Self::check_param(s)?;
        Self::check_param(r)?;
        let key = (kind, r.clone(), s.clone(), fingerprint(m));
        let c = self.cached(key, m, || {
            let n = m.poset().len();
            let sets = (0..n)
                .map(|a| match kind {
                    Kind::Up => self.rho.up(a, r),
                    _ => self.rho.up_up(a, r, s),
                })
                .collect();
            Ok(Cached::Ran(Arc::new(Ran::over(m.clone(), sets)?)))
        })?;
        match c {
            Cached::Ran(l) => Ok(l),
            Cached::Lan(_) => unreachable!("key kind determines the cached variant"),
        }
    }

    /// `L_r M`.
    pub fn left(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Arc<Lan>> {
        self.lan(Kind::Down, &Rational::zero(), r, m)
    }

    /// `R_r M`.
    pub fn right(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Arc<Ran>> {
        self.ran(Kind::Up, r, &Rational::zero(), m)
    }

    /// `T^L_{s,r} M(a) = colim` over `a^{down s down r}`.
    pub fn left_iterated(&self, s: &Rational, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Arc<Lan>> {
        self.lan(Kind::DownDown, s, r, m)
    }

    /// `T^R_{r,s} M(a) = lim` over `a^{up r up s}`.
    pub fn right_iterated(&self, r: &Rational, s: &Rational, m: &Arc<PersistenceModule>) -> Result<Arc<Ran>> {
        self.ran(Kind::UpUp, r, s, m)
    }

    /// `eta^L_{s,r}: L_s M -> L_r M` for `s >= r`.
    pub fn eta_left(&self, s: &Rational, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        if s < r {
            return Err(Error::ParameterOrder(format!("need s >= r, got s = {s}, r = {r}")));
        }
        self.left(s, m)?.compare(&*self.left(r, m)?)
    }

    /// `eta^L_r: L_r M -> M`.
    pub fn eta_left_id(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        self.left(r, m)?.to_input()
    }

    /// `eta^R_{r,s}: R_r M -> R_s M` for `s >= r`.
    pub fn eta_right(&self, r: &Rational, s: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        if s < r {
            return Err(Error::ParameterOrder(format!("need s >= r, got r = {r}, s = {s}")));
        }
        self.right(r, m)?.compare(&*self.right(s, m)?)
    }

    /// `eta^R_r: M -> R_r M`.
    pub fn eta_right_id(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        self.right(r, m)?.from_input()
    }

    /// `e_r = eta^R_r ∘ eta^L_r: L_r M -> R_r M`.
    pub fn e(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        self.eta_right_id(r, m)?.compose(&self.eta_left_id(r, m)?)
    }

    /// `L_r f`.
    pub fn left_map(&self, r: &Rational, f: &ModuleMorphism) -> Result<ModuleMorphism> {
        self.left(r, &f.source)?.apply(&*self.left(r, &f.target)?, f)
    }

    /// `R_r f`.
    pub fn right_map(&self, r: &Rational, f: &ModuleMorphism) -> Result<ModuleMorphism> {
        self.right(r, &f.source)?.apply(&*self.right(r, &f.target)?, f)
    }

    /// Transpose of `g: M -> R_r N` to `g#: L_r M -> N`.
    pub fn sharp(&self, r: &Rational, n: &Arc<PersistenceModule>, g: &ModuleMorphism) -> Result<ModuleMorphism> {
        let lm = self.left(r, &g.source)?;
        let rn = self.right(r, n)?;
        if *rn.output != *g.target {
            return Err(Error::EndpointMismatch("target is not R_r of the given module".into()));
        }
        let n = n.clone();
        let field = n.field();
        let comps = (0..n.poset().len())
            .map(|a| {
                lm.colims[a].induced(field, n.dim(a), |x| rn.leg(x, a).mul(g.component(x)))
            })
            .collect();
        ModuleMorphism::unchecked(lm.output.clone(), n, comps)
    }

    /// Transpose of `f: L_r M -> N` to `f_flat: M -> R_r N`; `m` is the base module of the source.
    pub fn flat(&self, r: &Rational, m: &Arc<PersistenceModule>, f: &ModuleMorphism) -> Result<ModuleMorphism> {
        let lm = self.left(r, m)?;
        if *lm.output != *f.source {
            return Err(Error::EndpointMismatch("source is not L_r of the given module".into()));
        }
        let n = f.target.clone();
        let rn = self.right(r, &n)?;
        let field = n.field();
        let comps = (0..n.poset().len())
            .map(|a| rn.lims[a].induced(field, m.dim(a), |y| f.component(y).mul(&lm.leg(y, a))))
            .collect();
        ModuleMorphism::unchecked(m.clone(), rn.output.clone(), comps)
    }

    /// Counit `L_r R_r N -> N`.
    pub fn counit(&self, r: &Rational, n: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        let rn = self.right(r, n)?;
        self.sharp(r, n, &ModuleMorphism::identity(rn.output.clone()))
    }

    /// Unit `M -> R_r L_r M`.
    pub fn unit(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        let lm = self.left(r, m)?;
        self.flat(r, m, &ModuleMorphism::identity(lm.output.clone()))
    }

    /// Map `L_s L_r M -> target` induced from the legs of a left extension of `M`
    /// whose index sets contain every `x^{down r}` with `x` in `a^{down s}`.
    fn left_from_iterate(&self, s: &Rational, r: &Rational, m: &Arc<PersistenceModule>, target: &Lan) -> Result<ModuleMorphism> {
        let inner = self.left(r, m)?;
        let outer = self.left(s, &inner.output)?;
        let field = m.field();
        let mut comps = Vec::with_capacity(target.colims.len());
        for (a, t) in target.colims.iter().enumerate() {
            for &x in outer.set(a) {
                if !subset(inner.set(x), &t.set) {
                    return Err(inclusion_failure(m, a, "iterated neighborhood is not inside the target"));
                }
            }
            comps.push(outer.colims[a].induced(field, t.dim, |x| {
                inner.colims[x].induced(field, t.dim, |y| t.leg(y))
            }));
        }
        ModuleMorphism::unchecked(outer.output.clone(), target.output.clone(), comps)
    }

    /// Map `source -> R_r R_s M` dual to [`Self::left_from_iterate`].
    fn right_to_iterate(&self, r: &Rational, s: &Rational, m: &Arc<PersistenceModule>, source: &Ran) -> Result<ModuleMorphism> {
        let inner = self.right(s, m)?;
        let outer = self.right(r, &inner.output)?;
        let field = m.field();
        let mut comps = Vec::with_capacity(source.lims.len());
        for (a, t) in source.lims.iter().enumerate() {
            for &x in outer.set(a) {
                if !subset(inner.set(x), &t.set) {
                    return Err(inclusion_failure(m, a, "iterated neighborhood is not inside the source"));
                }
            }
            comps.push(outer.lims[a].induced(field, t.dim, |x| {
                inner.lims[x].induced(field, t.dim, |y| t.leg(y))
            }));
        }
        ModuleMorphism::unchecked(source.output.clone(), outer.output.clone(), comps)
    }

    /// `mu^L_{s,r}: L_s L_r M -> L_{s+r} M`.
    pub fn mu_left(&self, s: &Rational, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        let target = self.left(&(s + r), m)?;
        self.left_from_iterate(s, r, m, &target)
    }

    /// `mu^R_{r,s}: R_{s+r} M -> R_r R_s M`.
    pub fn mu_right(&self, r: &Rational, s: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        let source = self.right(&(s + r), m)?;
        self.right_to_iterate(r, s, m, &source)
    }

    /// `kappa^L_{s,r}: L_s L_r M -> T^L_{s,r} M`.
    pub fn kappa_left(&self, s: &Rational, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        let target = self.left_iterated(s, r, m)?;
        self.left_from_iterate(s, r, m, &target)
    }

    /// `tau^L_{s,r}: T^L_{s,r} M -> L_{s+r} M`.
    pub fn tau_left(&self, s: &Rational, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        self.left_iterated(s, r, m)?.compare(&*self.left(&(s + r), m)?)
    }

    /// `theta^L: L_{s+r+c} M -> T^L_{s,r} M`; fails with a witness unless
    /// `a^{down (s+r+c)} ⊆ a^{down s down r}` everywhere.
    pub fn theta_left(&self, s: &Rational, r: &Rational, c: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        self.left(&(s + r + c), m)?.compare(&*self.left_iterated(s, r, m)?)
    }

    /// `sigma^L = kappa^{-1} ∘ theta: L_{s+r+c} M -> L_s L_r M`.
    pub fn sigma_left(&self, s: &Rational, r: &Rational, c: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        let kappa = self.kappa_left(s, r, m)?;
        let inv = invert(&kappa)?;
        inv.compose(&self.theta_left(s, r, c, m)?)
    }

    /// `kappa^R_{r,s}: T^R_{r,s} M -> R_r R_s M`.
    pub fn kappa_right(&self, r: &Rational, s: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        let source = self.right_iterated(r, s, m)?;
        self.right_to_iterate(r, s, m, &source)
    }

    /// `tau^R_{r,s}: R_{s+r} M -> T^R_{r,s} M`.
    pub fn tau_right(&self, r: &Rational, s: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        self.right(&(s + r), m)?.compare(&*self.right_iterated(r, s, m)?)
    }

    /// `theta^R: T^R_{r,s} M -> R_{s+r+c} M`.
    pub fn theta_right(&self, r: &Rational, s: &Rational, c: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        self.right_iterated(r, s, m)?.compare(&*self.right(&(s + r + c), m)?)
    }

    /// `sigma^R = theta ∘ kappa^{-1}: R_r R_s M -> R_{s+r+c} M`.
    pub fn sigma_right(&self, r: &Rational, s: &Rational, c: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
        let inv = invert(&self.kappa_right(r, s, m)?)?;
        self.theta_right(r, s, c, m)?.compose(&inv)
    }

    /// `Im_r M = im(eta^L_r)`.
    pub fn image_r(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Submodule> {
        Ok(Submodule::image(&self.eta_left_id(r, m)?))
    }

    /// `Ker_r M = ker(eta^R_r)`.
    pub fn kernel_r(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Submodule> {
        Ok(Submodule::kernel(&self.eta_right_id(r, m)?))
    }

    /// `E_r M = im(e_r)` inside `R_r M`.
    pub fn e_submodule(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Submodule> {
        Ok(Submodule::image(&self.e(r, m)?))
    }

    /// `E_r M` as a module.
    pub fn e_module(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Arc<PersistenceModule>> {
        Ok(self.e_submodule(r, m)?.to_module()?.0)
    }

    /// `E_r f`, the restriction of `R_r f` to the images of `e_r`.
    pub fn e_map(&self, r: &Rational, f: &ModuleMorphism) -> Result<ModuleMorphism> {
        let em = self.e_submodule(r, &f.source)?;
        let en = self.e_submodule(r, &f.target)?;
        let rf = self.right_map(r, f)?;
        let (mm, _) = em.to_module()?;
        let (nm, _) = en.to_module()?;
        let comps = (0..mm.poset().len())
            .map(|a| {
                let img = rf.component(a).mul(em.basis(a));
                en.basis(a).solve(&img).expect("shapes agree").expect("R_r f maps E_r M into E_r N")
            })
            .collect();
        ModuleMorphism::unchecked(mm, nm, comps)
    }

    /// The canonical map `Im_r M / (Im_r M ∩ Ker_r M) -> E_r M` induced by
    /// `eta^R_r`, together with the subquotient it starts from.
    pub fn e_comparison(&self, r: &Rational, m: &Arc<PersistenceModule>) -> Result<(Subquotient, ModuleMorphism)> {
        let im = self.image_r(r, m)?;
        let ker = self.kernel_r(r, m)?;
        let sq = Subquotient::new(im.clone(), im.intersect(&ker)?)?;
        let eta = self.eta_right_id(r, m)?;
        let es = self.e_submodule(r, m)?;
        let (em, _) = es.to_module()?;
        let comps = (0..m.poset().len())
            .map(|a| {
                let lifted = im.basis(a).mul(&sq.quotients[a].section);
                let img = eta.component(a).mul(&lifted);
                es.basis(a).solve(&img).expect("shapes agree").expect("eta^R maps Im_r into E_r")
            })
            .collect();
        let f = ModuleMorphism::unchecked(sq.module.clone(), em, comps)?;
        Ok((sq, f))
    }
}

fn invert(f: &ModuleMorphism) -> Result<ModuleMorphism> {
    for (a, c) in f.components().iter().enumerate() {
        if !c.is_invertible() {
            return Err(Error::NotInvertible(f.source.poset().name(a).into()));
        }
    }
    Ok(f.inverse().expect("all components are invertible"))
}

/// `xi^L: L_r^{f*rho}(f* M) -> f*(L_r^rho M)` for an order map `f: Q -> P`.
pub fn xi_left(rho: &HeightDiff, f: &OrderMap, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
    let pulled_rho = rho.pullback(f)?;
    let pm = Arc::new(m.pullback(f)?);
    let q_calc = Calculus::new(pulled_rho);
    let p_calc = Calculus::new(rho.clone());
    let lq = q_calc.left(r, &pm)?;
    let lp = p_calc.left(r, m)?;
    let target = Arc::new(lp.output.pullback(f)?);
    let field = m.field();
    let comps = (0..f.source.len())
        .map(|q| lq.colims[q].induced(field, target.dim(q), |y| lp.leg(f.apply(q), f.apply(y))))
        .collect();
    ModuleMorphism::unchecked(lq.output.clone(), target, comps)
}

/// `xi^R: f*(R_r^rho M) -> R_r^{f*rho}(f* M)`.
pub fn xi_right(rho: &HeightDiff, f: &OrderMap, r: &Rational, m: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
    let pulled_rho = rho.pullback(f)?;
    let pm = Arc::new(m.pullback(f)?);
    let q_calc = Calculus::new(pulled_rho);
    let p_calc = Calculus::new(rho.clone());
    let rq = q_calc.right(r, &pm)?;
    let rp = p_calc.right(r, m)?;
    let source = Arc::new(rp.output.pullback(f)?);
    let field = m.field();
    let comps = (0..f.source.len())
        .map(|q| rq.lims[q].induced(field, source.dim(q), |y| rp.leg(f.apply(q), f.apply(y))))
        .collect();
    ModuleMorphism::unchecked(source, rq.output.clone(), comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::GF2;
    use crate::fixtures::{
        chain_example, diamond, grid_dims, grid_example, grid_left_decomposition, grid_right_decomposition, GRID_L1_DIMS,
        GRID_R1_DIMS,
    };
    use crate::gen::{random_module, random_poset, random_rho, random_tree_poset};
    use crate::height::{frac, rat};
    use crate::pmod::{hom_basis, is_isomorphic};
    use crate::verdict::Verdict;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn iso(a: &Arc<PersistenceModule>, b: &Arc<PersistenceModule>) -> Verdict {
        is_isomorphic(a, b, 1 << 20).unwrap().verdict
    }

    #[test]
    fn grid_latching_and_matching() {
        let ex = grid_example(GF2).unwrap();
        let calc = Calculus::new(ex.rho.clone());
        let l = calc.left(&rat(1), &ex.m).unwrap();
        let r = calc.right(&rat(1), &ex.m).unwrap();
        assert_eq!(l.output.dims(), grid_dims(GRID_L1_DIMS).as_slice());
        assert_eq!(r.output.dims(), grid_dims(GRID_R1_DIMS).as_slice());
        let p = ex.m.poset();
        let ld = grid_left_decomposition(p, GF2).unwrap();
        assert_eq!(iso(&l.output, &Arc::new(ld)), Verdict::Yes);
        let rd = grid_right_decomposition(p, GF2).unwrap();
        assert_eq!(iso(&r.output, &Arc::new(rd)), Verdict::Yes);
    }

    #[test]
    fn zero_parameter_is_the_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let p = Arc::new(random_poset(&mut rng, 6, 0.4));
            let calc = Calculus::new(random_rho(&mut rng, &p, 2));
            let m = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
            let z = rat(0);
            assert!(calc.eta_left_id(&z, &m).unwrap().is_iso());
            assert!(calc.eta_right_id(&z, &m).unwrap().is_iso());
            assert!(calc.e(&z, &m).unwrap().is_iso());
        }
    }

    #[test]
    fn adjunction_round_trips_and_mates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..15 {
            let p = Arc::new(random_poset(&mut rng, 6, 0.4));
            let calc = Calculus::new(random_rho(&mut rng, &p, 2));
            let m = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
            let n = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
            let (r, s) = (rat(1), rat(2));
            let rn = calc.right(&r, &n).unwrap();
            for g in hom_basis(&m, &rn.output).unwrap() {
                let gs = calc.sharp(&r, &n, &g).unwrap();
                assert!(gs.is_natural());
                assert!(calc.flat(&r, &m, &gs).unwrap().same_matrices(&g));
            }
            let lm = calc.left(&r, &m).unwrap();
            for f in hom_basis(&lm.output, &n).unwrap() {
                let ff = calc.flat(&r, &m, &f).unwrap();
                assert!(ff.is_natural());
                assert!(calc.sharp(&r, &n, &ff).unwrap().same_matrices(&f));
            }
            // eta mate
            let rno = rn.output.clone();
            let composite = calc.counit(&r, &n).unwrap().compose(&calc.eta_left(&s, &r, &rno).unwrap()).unwrap();
            let mate = calc.flat(&s, &rno, &composite).unwrap();
            assert!(mate.same_matrices(&calc.eta_right(&r, &s, &n).unwrap()));
            // mu mate
            let sr = &s + &r;
            let x = calc.right(&sr, &n).unwrap().output.clone();
            let lrx = calc.left(&r, &x).unwrap().output.clone();
            let c = calc.counit(&sr, &n).unwrap().compose(&calc.mu_left(&s, &r, &x).unwrap()).unwrap();
            let once = calc.flat(&s, &lrx, &c).unwrap();
            let twice = calc.flat(&r, &x, &once).unwrap();
            assert!(twice.same_matrices(&calc.mu_right(&r, &s, &n).unwrap()));
        }
    }

    #[test]
    fn factorizations_and_composition_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let p = Arc::new(random_poset(&mut rng, 6, 0.4));
            let calc = Calculus::new(random_rho(&mut rng, &p, 2));
            let m = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
            let (r, s, t) = (rat(1), rat(2), rat(3));
            let mu = calc.mu_left(&s, &r, &m).unwrap();
            assert!(mu.is_natural());
            let tk = calc.tau_left(&s, &r, &m).unwrap().compose(&calc.kappa_left(&s, &r, &m).unwrap()).unwrap();
            assert!(tk.same_matrices(&mu));
            let mur = calc.mu_right(&r, &s, &m).unwrap();
            let kt = calc.kappa_right(&r, &s, &m).unwrap().compose(&calc.tau_right(&r, &s, &m).unwrap()).unwrap();
            assert!(kt.same_matrices(&mur));
            let direct = calc.eta_left(&t, &r, &m).unwrap();
            let via = calc.eta_left(&s, &r, &m).unwrap().compose(&calc.eta_left(&t, &s, &m).unwrap()).unwrap();
            assert!(direct.same_matrices(&via));
            assert!(calc.eta_left(&r, &r, &m).unwrap().is_iso());
            assert!(matches!(calc.eta_left(&r, &s, &m), Err(Error::ParameterOrder(_))));
        }
    }

    #[test]
    fn kappa_is_iso_on_trees_and_fails_on_the_diamond() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = Arc::new(random_tree_poset(&mut rng, 7));
            let calc = Calculus::new(random_rho(&mut rng, &p, 2));
            let m = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
            for (s, r) in [(1, 1), (1, 2), (2, 1), (0, 3)] {
                assert!(calc.kappa_left(&rat(s), &rat(r), &m).unwrap().is_iso());
                assert!(calc.kappa_right(&rat(r), &rat(s), &m).unwrap().is_iso());
            }
        }
        let rho = diamond().unwrap();
        let p = rho.poset().clone();
        let calc = Calculus::new(rho);
        let full = Arc::new(PersistenceModule::interval(p.clone(), GF2, &[0, 1, 2, 3]).unwrap());
        let kappa = calc.kappa_left(&rat(1), &rat(1), &full).unwrap();
        let d = p.index_of("d").unwrap();
        assert_eq!(kappa.component(d).shape(), (1, 2));
        assert!(!kappa.is_iso());
        assert!(matches!(calc.sigma_left(&rat(1), &rat(1), &rat(0), &full), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn theta_on_the_chain_needs_the_gap() {
        let ex = chain_example(GF2, &rat(2)).unwrap();
        let calc = Calculus::new(ex.rho.clone());
        let one = rat(1);
        for (s, r) in [(1, 1), (2, 1), (1, 3)] {
            let th = calc.theta_left(&rat(s), &rat(r), &rat(2), &ex.m).unwrap();
            let tau = calc.tau_left(&rat(s), &rat(r), &ex.m).unwrap();
            let eta = calc.eta_left(&rat(s + r + 2), &rat(s + r), &ex.m).unwrap();
            assert!(tau.compose(&th).unwrap().same_matrices(&eta));
            let sigma = calc.sigma_left(&rat(s), &rat(r), &rat(2), &ex.m).unwrap();
            let mu = calc.mu_left(&rat(s), &rat(r), &ex.m).unwrap();
            assert!(mu.compose(&sigma).unwrap().same_matrices(&eta));
            let thr = calc.theta_right(&rat(r), &rat(s), &rat(2), &ex.m).unwrap();
            assert!(thr.is_natural());
        }
        match calc.theta_left(&one, &one, &rat(0), &ex.m) {
            Err(Error::InclusionFailure { element, .. }) => assert_eq!(element, "c"),
            other => panic!("expected an inclusion failure, got {other:?}"),
        }
        // d fails too: c lies in d^{down 2} but not in d^{down 1 down 1} = {a, b}
        let d = 3;
        let two = ex.rho.down(d, &rat(2));
        let iterated = ex.rho.down_down(d, &one, &one);
        assert!(two.iter().any(|x| !iterated.contains(x)));
    }

    #[test]
    fn erosion_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..15 {
            let p = Arc::new(random_poset(&mut rng, 6, 0.4));
            let calc = Calculus::new(random_rho(&mut rng, &p, 2));
            let m = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
            for r in [frac(1, 2), rat(1), rat(2), rat(5)] {
                let (_, cmp) = calc.e_comparison(&r, &m).unwrap();
                assert!(cmp.is_natural());
                assert!(cmp.is_iso());
                let im = calc.image_r(&r, &m).unwrap();
                let ker = calc.kernel_r(&r, &m).unwrap();
                assert_eq!(ker.dims() == m.dims(), im.dims().iter().all(|&d| d == 0));
            }
            let (r, s) = (rat(1), rat(1));
            let im_r = calc.image_r(&r, &m).unwrap();
            let (imm, incl) = im_r.to_module().unwrap();
            let im_s = calc.image_r(&s, &imm).unwrap();
            let pushed = Submodule::pushforward(&incl, &im_s).unwrap();
            assert!(calc.image_r(&(&s + &r), &m).unwrap().contains(&pushed));
        }
    }

    #[test]
    fn erosion_preserves_monos_and_epis() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let p = Arc::new(random_poset(&mut rng, 6, 0.4));
            let calc = Calculus::new(random_rho(&mut rng, &p, 2));
            let m = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
            let n = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
            let f = crate::gen::random_morphism(&mut rng, &m, &n).unwrap();
            let (img, incl) = Submodule::image(&f).to_module().unwrap();
            let epi = ModuleMorphism::unchecked(m.clone(), img.clone(), {
                let sub = Submodule::image(&f);
                (0..p.len())
                    .map(|a| sub.basis(a).solve(f.component(a)).unwrap().unwrap())
                    .collect()
            })
            .unwrap();
            assert!(epi.is_epi() && incl.is_mono());
            for r in [rat(1), rat(2)] {
                assert!(calc.e_map(&r, &incl).unwrap().is_mono());
                assert!(calc.e_map(&r, &epi).unwrap().is_epi());
            }
        }
    }

    #[test]
    fn xi_along_identity_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let p = Arc::new(random_poset(&mut rng, 6, 0.4));
        let rho = random_rho(&mut rng, &p, 2);
        let m = random_module(&mut rng, &p, GF2, 2, 2).unwrap();
        let id = OrderMap::new(p.clone(), p.clone(), (0..p.len()).collect()).unwrap();
        for r in [rat(0), rat(1), rat(3)] {
            assert!(xi_left(&rho, &id, &r, &m).unwrap().is_iso());
            assert!(xi_right(&rho, &id, &r, &m).unwrap().is_iso());
        }
    }
}
