//! Seeded random instances for property tests and the acceptance suite.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exactlin::{Field, Mat, Scalar};
use crate::height::HeightDiff;
use crate::pmod::{hom_basis, ModuleMorphism, PersistenceModule, Submodule};
use crate::poset::{FinitePoset, GaloisInsertion, OrderMap};

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Random poset on `n` elements: each `i < j` is related with probability `density`.
pub fn random_poset<R: Rng>(rng: &mut R, n: usize, density: f64) -> FinitePoset {
    let ids = names("x", n);
    let mut rel = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                rel.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    FinitePoset::new(&ids, &rel).expect("edges go forward")
}

/// Randomly oriented tree; every interval is a chain.
pub fn random_tree_poset<R: Rng>(rng: &mut R, n: usize) -> FinitePoset {
    let ids = names("x", n);
    let mut rel = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        if rng.gen_bool(0.5) {
            rel.push((ids[j].clone(), ids[i].clone()));
        } else {
            rel.push((ids[i].clone(), ids[j].clone()));
        }
    }
    FinitePoset::new(&ids, &rel).expect("a tree has no cycles")
}

/// Integer height function: each element sits `0..=max_step` above its highest lower cover.
pub fn random_phi<R: Rng>(rng: &mut R, p: &FinitePoset, max_step: i64) -> Vec<i64> {
    let mut phi = vec![0i64; p.len()];
    for &a in p.linear_extension() {
        let base = p.lower_covers(a).iter().map(|&b| phi[b]).max().unwrap_or(0);
        phi[a] = base + rng.gen_range(0..=max_step);
    }
    phi
}

pub fn random_rho<R: Rng>(rng: &mut R, p: &Arc<FinitePoset>, max_step: i64) -> HeightDiff {
    let phi = random_phi(rng, p, max_step);
    HeightDiff::from_phi_ints(p.clone(), &phi).expect("phi is monotone")
}

pub fn random_scalar<R: Rng>(rng: &mut R, field: Field) -> Scalar {
    match field {
        Field::Prime(p) => Scalar::Fp(rng.gen_range(0..p)),
        Field::Rational => field.from_i64(rng.gen_range(-3..=3)),
    }
}

/// Image of a random morphism `⊕ k_{up a_i} -> ⊕ k_{down b_j}` with at most
/// `gens` generators and `cogens` cogenerators, so every dimension is at most
/// `min(gens, cogens)`.
pub fn random_module<R: Rng>(
    rng: &mut R,
    p: &Arc<FinitePoset>,
    field: Field,
    gens: usize,
    cogens: usize,
) -> Result<Arc<PersistenceModule>> {
    let n = p.len();
    if n == 0 {
        return Ok(Arc::new(PersistenceModule::zero(p.clone(), field)));
    }
    let ng = rng.gen_range(1..=gens.max(1));
    let nc = rng.gen_range(1..=cogens.max(1));
    let tops: Vec<usize> = (0..ng).map(|_| rng.gen_range(0..n)).collect();
    let bottoms: Vec<usize> = (0..nc).map(|_| rng.gen_range(0..n)).collect();
    let coef: Vec<Vec<Scalar>> =
        (0..nc).map(|_| (0..ng).map(|_| random_scalar(rng, field)).collect()).collect();
    let free_set = |x: usize| -> Vec<usize> { (0..ng).filter(|&i| p.leq(tops[i], x)).collect() };
    let cofree_set = |x: usize| -> Vec<usize> { (0..nc).filter(|&j| p.leq(x, bottoms[j])).collect() };
    let cofree_dims: Vec<usize> = (0..n).map(|x| cofree_set(x).len()).collect();
    let cofree = Arc::new(PersistenceModule::from_fn(p.clone(), field, cofree_dims, |a, b| {
        let (sa, sb) = (cofree_set(a), cofree_set(b));
        let mut m = Mat::zeros(field, sb.len(), sa.len());
        for (r, j) in sb.iter().enumerate() {
            let c = sa.iter().position(|k| k == j).expect("down-closed cogenerators");
            m.set(r, c, &field.one());
        }
        m
    })?);
    let bases = (0..n)
        .map(|x| {
            let (f, g) = (free_set(x), cofree_set(x));
            let mut m = Mat::zeros(field, g.len(), f.len());
            for (r, &j) in g.iter().enumerate() {
                for (c, &i) in f.iter().enumerate() {
                    m.set(r, c, &coef[j][i]);
                }
            }
            m
        })
        .collect();
    let image = Submodule::new(cofree, bases)?;
    Ok(image.to_module()?.0)
}

/// Random element of `Hom(M, N)`.
pub fn random_morphism<R: Rng>(
    rng: &mut R,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
) -> Result<ModuleMorphism> {
    let basis = hom_basis(m, n)?;
    if basis.is_empty() {
        return ModuleMorphism::zero(m.clone(), n.clone());
    }
    let coeffs: Vec<Scalar> = basis.iter().map(|_| random_scalar(rng, m.field())).collect();
    Ok(ModuleMorphism::combination(&basis, &coeffs))
}

/// Random order-preserving map: each element goes to an upper bound of the
/// images of its lower covers. Fails when some set of images has no upper bound.
pub fn random_order_map<R: Rng>(rng: &mut R, q: &Arc<FinitePoset>, p: &Arc<FinitePoset>) -> Result<OrderMap> {
    let mut map = vec![0usize; q.len()];
    for &x in q.linear_extension() {
        let lows: Vec<usize> = q.lower_covers(x).iter().map(|&a| map[a]).collect();
        let candidates: Vec<usize> = (0..p.len()).filter(|&y| lows.iter().all(|&l| p.leq(l, y))).collect();
        map[x] = *candidates.choose(rng).ok_or(Error::NotOrderPreserving(q.name(x).into(), "no upper bound".into()))?;
    }
    OrderMap::new(q.clone(), p.clone(), map)
}

/// Galois insertion `P -> P'`: `P'` adds `extra` elements to `P`, each placed above
/// some `a` in `P` and optionally below some `y > a` in `P`, so that `a` is the
/// largest element of `P` below it.
pub fn random_galois_insertion<R: Rng>(rng: &mut R, p: &Arc<FinitePoset>, extra: usize) -> Result<GaloisInsertion> {
    let n = p.len();
    let mut ids: Vec<String> = p.names().to_vec();
    ids.extend(names("n", extra));
    let mut rel: Vec<(String, String)> =
        p.covers().iter().map(|&(a, b)| (p.name(a).to_string(), p.name(b).to_string())).collect();
    let mut base = Vec::with_capacity(extra);
    for e in 0..extra {
        let a = rng.gen_range(0..n);
        base.push(a);
        let id = format!("n{e}");
        rel.push((p.name(a).to_string(), id.clone()));
        let above: Vec<usize> = (0..n).filter(|&y| p.lt(a, y)).collect();
        if let Some(&y) = above.choose(rng) {
            if rng.gen_bool(0.5) {
                rel.push((id, p.name(y).to_string()));
            }
        }
    }
    let big = Arc::new(FinitePoset::new(&ids, &rel)?);
    let iota: Vec<usize> = (0..n).map(|a| big.index_of(p.name(a))).collect::<Result<_>>()?;
    let mut pi = vec![0usize; big.len()];
    for (a, &ia) in iota.iter().enumerate() {
        pi[ia] = a;
    }
    for (e, &a) in base.iter().enumerate() {
        pi[big.index_of(&format!("n{e}"))?] = a;
    }
    let iota = OrderMap::new(p.clone(), big.clone(), iota)?;
    let pi = OrderMap::new(big, p.clone(), pi)?;
    GaloisInsertion::new(iota, pi)
}
