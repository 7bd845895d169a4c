use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ModuleMorphism, PersistenceModule};
use crate::error::Result;
use crate::exactlin::{Field, Mat, Scalar};
use crate::verdict::Verdict;

/// Basis of `Hom(M, N)`, from the kernel of the naturality system on covers.
pub fn hom_basis(m: &Arc<PersistenceModule>, n: &Arc<PersistenceModule>) -> Result<Vec<ModuleMorphism>> {
    m.check_same_base(n)?;
    let field = m.field();
    let p = m.poset().clone();
    let mut offset = Vec::with_capacity(p.len());
    let mut unknowns = 0;
    for a in 0..p.len() {
        offset.push(unknowns);
        unknowns += n.dim(a) * m.dim(a);
    }
    let var = |a: usize, i: usize, j: usize| offset[a] + i * m.dim(a) + j;
    let mut rows: Vec<Vec<(usize, Scalar)>> = Vec::new();
    for &(a, b) in p.covers() {
        let (nab, mab) = (n.map(a, b), m.map(a, b));
        // N(a<b) f(a) - f(b) M(a<b) = 0, entry (i, j)
        for i in 0..n.dim(b) {
            for j in 0..m.dim(a) {
                let mut row = Vec::new();
                for k in 0..n.dim(a) {
                    let c = nab.get(i, k);
                    if !c.is_zero() {
                        row.push((var(a, k, j), c));
                    }
                }
                for k in 0..m.dim(b) {
                    let c = mab.get(k, j);
                    if !c.is_zero() {
                        row.push((var(b, i, k), field.neg(&c)));
                    }
                }
                if !row.is_empty() {
                    rows.push(row);
                }
            }
        }
    }
    let mut sys = Mat::zeros(field, rows.len(), unknowns);
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row {
            let cur = sys.get(r, *c);
            sys.set(r, *c, &field.add(&cur, v));
        }
    }
    let ker = sys.kernel_basis();
    let mut out = Vec::with_capacity(ker.cols());
    for t in 0..ker.cols() {
        let comps = (0..p.len())
            .map(|a| {
                let (r, c) = (n.dim(a), m.dim(a));
                let mut f = Mat::zeros(field, r, c);
                for i in 0..r {
                    for j in 0..c {
                        f.set(i, j, &ker.get(var(a, i, j), t));
                    }
                }
                f
            })
            .collect();
        out.push(ModuleMorphism::unchecked(m.clone(), n.clone(), comps)?);
    }
    Ok(out)
}

pub fn hom_dim(m: &Arc<PersistenceModule>, n: &Arc<PersistenceModule>) -> Result<usize> {
    Ok(hom_basis(m, n)?.len())
}

#[derive(Clone, Debug)]
pub struct IsoResult {
    pub verdict: Verdict,
    pub witness: Option<ModuleMorphism>,
}

impl IsoResult {
    fn no() -> Self {
        IsoResult { verdict: Verdict::No, witness: None }
    }
}

/// Coefficients of the `index`-th element of `F_p^k` in lexicographic order.
pub(crate) fn lex_coeffs(field: Field, k: usize, mut index: u64) -> Vec<Scalar> {
    let p = field.order().expect("finite field");
    let mut out = vec![field.zero(); k];
    for slot in out.iter_mut().rev() {
        *slot = field.nth(index % p);
        index /= p;
    }
    out
}

/// `p^k` if it fits under `budget`.
pub(crate) fn space_size(field: Field, k: usize, budget: u64) -> Option<u64> {
    let p = field.order()?;
    let mut total: u64 = 1;
    for _ in 0..k {
        total = total.checked_mul(p)?;
        if total > budget {
            return None;
        }
    }
    Some(total)
}

/// Decides `M ≅ N`. Cheap invariants (dimensions, ranks of structure maps,
/// Hom dimensions) can prove `No`; otherwise `Hom(M, N)` is enumerated over a
/// prime field, or sampled with random integer combinations over the rationals.
pub fn is_isomorphic(m: &Arc<PersistenceModule>, n: &Arc<PersistenceModule>, budget: u64) -> Result<IsoResult> {
    m.check_same_base(n)?;
    if m.dims() != n.dims() || m.rank_invariant() != n.rank_invariant() {
        return Ok(IsoResult::no());
    }
    let basis = hom_basis(m, n)?;
    if m.is_zero() {
        return Ok(IsoResult { verdict: Verdict::Yes, witness: Some(ModuleMorphism::zero(m.clone(), n.clone())?) });
    }
    if basis.is_empty() {
        return Ok(IsoResult::no());
    }
    let dmm = hom_dim(m, m)?;
    if dmm != basis.len() || hom_dim(n, n)? != dmm || hom_dim(n, m)? != dmm {
        return Ok(IsoResult::no());
    }
    let field = m.field();
    let found = |coeffs: &[Scalar]| {
        let f = ModuleMorphism::combination(&basis, coeffs);
        f.is_iso().then_some(f)
    };
    if let Some(total) = space_size(field, basis.len(), budget) {
        for idx in 0..total {
            if let Some(f) = found(&lex_coeffs(field, basis.len(), idx)) {
                return Ok(IsoResult { verdict: Verdict::Yes, witness: Some(f) });
            }
        }
        return Ok(IsoResult::no());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let tries = if field.is_finite() { budget.min(1 << 12) } else { 64 };
    for _ in 0..tries {
        let coeffs: Vec<Scalar> = (0..basis.len())
            .map(|_| match field {
                Field::Prime(p) => Scalar::Fp(rng.gen_range(0..p)),
                Field::Rational => field.from_i64(rng.gen_range(-50..=50)),
            })
            .collect();
        if let Some(f) = found(&coeffs) {
            return Ok(IsoResult { verdict: Verdict::Yes, witness: Some(f) });
        }
    }
    Ok(IsoResult { verdict: Verdict::Unknown, witness: None })
}
