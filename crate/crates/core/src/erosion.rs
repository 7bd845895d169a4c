//! Erosion neighborhoods: subquotients `M1 / M2` of `M` with `Im_r M ⊆ M1` and
//! `M2 ⊆ Ker_r M`, and the distance at which two modules share one.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactlin::{Field, Mat};
use crate::functors::Calculus;
use crate::height::Rational;
use crate::interleave::{check_certificate, find_interleaving, stratified, Certificate, Scan, Search, StrataReport};
use crate::pmod::{is_isomorphic, ModuleMorphism, PersistenceModule, Submodule, Subquotient};
use crate::verdict::Verdict;

fn containment(m: &PersistenceModule, a: usize, detail: &str) -> Error {
    Error::Containment { element: m.poset().name(a).into(), detail: detail.into() }
}

/// Validates `M1 / M2` as a member of `EN_r(M)` and forms the quotient.
pub fn en_construct(
    calc: &Calculus,
    r: &Rational,
    m: &Arc<PersistenceModule>,
    m1: &Submodule,
    m2: &Submodule,
) -> Result<Subquotient> {
    if **m1.parent() != **m || **m2.parent() != **m {
        return Err(Error::EndpointMismatch("submodules of a different module".into()));
    }
    if let Some(a) = m1.first_non_containment(&calc.image_r(r, m)?) {
        return Err(containment(m, a, "Im_r M is not contained in M1"));
    }
    if let Some(a) = calc.kernel_r(r, m)?.first_non_containment(m2) {
        return Err(containment(m, a, "M2 is not contained in Ker_r M"));
    }
    Subquotient::new(m1.clone(), m2.clone())
}

pub fn is_member(calc: &Calculus, r: &Rational, m: &Arc<PersistenceModule>, sq: &Subquotient) -> Result<bool> {
    match en_construct(calc, r, m, &sq.upper, &sq.lower) {
        Ok(_) => Ok(true),
        Err(Error::Containment { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// The common neighborhood built from an interleaving, presented once as a
/// subquotient of `M` and once as a subquotient of `N`.
#[derive(Clone, Debug)]
pub struct CanonicalQ {
    pub in_m: Subquotient,
    pub in_n: Subquotient,
}

/// `im(L_r M ⊕ L_r N -> M -> R_r M ⊕ R_r N)` with the maps `[eta^L, q#]` and `[eta^R; p]`.
pub fn en_canonical_q(
    calc: &Calculus,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    cert: &Certificate,
) -> Result<CanonicalQ> {
    let r = &cert.r;
    if !check_certificate(calc, r, m, n, &cert.p, &cert.q)? {
        return Err(Error::InvalidCertificate(format!("identities fail at r = {r}")));
    }
    let ps = calc.sharp(r, n, &cert.p)?;
    let qs = calc.sharp(r, m, &cert.q)?;
    let (elm, eln) = (calc.eta_left_id(r, m)?, calc.eta_left_id(r, n)?);
    let (erm, ern) = (calc.eta_right_id(r, m)?, calc.eta_right_id(r, n)?);
    // [eta^R_M; p] ∘ [eta^L_M, q#] must equal [q; eta^R_N] ∘ [p#, eta^L_N] blockwise
    let blocks_m = [[erm.compose(&elm)?, erm.compose(&retarget(&qs, m)?)?], [cert.p.compose(&elm)?, cert.p.compose(&retarget(&qs, m)?)?]];
    let blocks_n = [[cert.q.compose(&retarget(&ps, n)?)?, cert.q.compose(&eln)?], [ern.compose(&retarget(&ps, n)?)?, ern.compose(&eln)?]];
    for (row_m, row_n) in blocks_m.iter().zip(&blocks_n) {
        for (x, y) in row_m.iter().zip(row_n) {
            if !x.same_matrices(y) {
                return Err(Error::Internal("block identity of the canonical neighborhood fails".into()));
            }
        }
    }
    let side = |module: &Arc<PersistenceModule>, left: &ModuleMorphism, other_sharp: &ModuleMorphism, right: &ModuleMorphism, other: &ModuleMorphism| {
        let upper = Submodule::image(left).sum(&Submodule::image(&retarget(other_sharp, module)?))?;
        let lower = upper.intersect(&Submodule::kernel(right))?.intersect(&Submodule::kernel(other))?;
        en_construct(calc, r, module, &upper, &lower)
    };
    let in_m = side(m, &elm, &qs, &erm, &cert.p)?;
    let in_n = side(n, &eln, &ps, &ern, &cert.q)?;
    Ok(CanonicalQ { in_m, in_n })
}

fn retarget(f: &ModuleMorphism, target: &Arc<PersistenceModule>) -> Result<ModuleMorphism> {
    f.retarget(f.source.clone(), target.clone())
}

/// The interleaving `(alpha_flat, beta)` between `M` and a member `M1 / M2` of `EN_r(M)`.
pub fn en_interleaving(calc: &Calculus, r: &Rational, m: &Arc<PersistenceModule>, sq: &Subquotient) -> Result<Certificate> {
    let elm = calc.eta_left_id(r, m)?;
    let erm = calc.eta_right_id(r, m)?;
    let n = sq.module.clone();
    let size = m.poset().len();
    let mut alpha = Vec::with_capacity(size);
    let mut beta = Vec::with_capacity(size);
    for a in 0..size {
        let coords = sq.upper.basis(a).solve(elm.component(a))?.ok_or_else(|| containment(m, a, "Im_r M is not contained in M1"))?;
        alpha.push(sq.quotients[a].map.mul(&coords));
        beta.push(erm.component(a).mul(sq.upper.basis(a)).mul(&sq.quotients[a].section));
    }
    let alpha = ModuleMorphism::unchecked(elm.source.clone(), n.clone(), alpha)?;
    let beta = ModuleMorphism::unchecked(n, erm.target.clone(), beta)?;
    Ok(Certificate { r: r.clone(), p: calc.flat(r, m, &alpha)?, q: beta })
}

/// `Q ∈ EN_s(N)` with `N ∈ EN_r(M)`, pulled back to a subquotient of `M` and
/// validated as a member of `EN_{s+r+c}(M)`.
pub fn en_compose(
    calc: &Calculus,
    s: &Rational,
    r: &Rational,
    c: &Rational,
    m: &Arc<PersistenceModule>,
    n_in_m: &Subquotient,
    q_in_n: &Subquotient,
) -> Result<Subquotient> {
    let upper = n_in_m.preimage_of(&q_in_n.upper)?;
    let lower = n_in_m.preimage_of(&q_in_n.lower)?;
    en_construct(calc, &(s + r + c), m, &upper, &lower)
}

/// Common refinement of `Q1 = X1/X1' ∈ EN_r(X)` and `Q2 = X2/X2' ∈ EN_s(X)`.
#[derive(Clone, Debug)]
pub struct Mediation {
    /// `X3 / X3'` with `X3 = X1 ∩ X2` and `X3' = (X1' + X2') ∩ X3`.
    pub in_x: Subquotient,
    /// The same module as a member of `EN_s(Q1)`.
    pub in_q1: Subquotient,
    /// The same module as a member of `EN_r(Q2)`.
    pub in_q2: Subquotient,
}

pub fn en_mediate(calc: &Calculus, r: &Rational, s: &Rational, q1: &Subquotient, q2: &Subquotient) -> Result<Mediation> {
    let x3 = q1.upper.intersect(&q2.upper)?;
    let x3p = q1.lower.sum(&q2.lower)?.intersect(&x3)?;
    let in_x = Subquotient::new(x3.clone(), x3p.clone())?;
    let in_q1 = en_construct(calc, s, &q1.module, &q1.image_of(&x3)?, &q1.image_of(&x3p)?)?;
    let in_q2 = en_construct(calc, r, &q2.module, &q2.image_of(&x3)?, &q2.image_of(&x3p)?)?;
    Ok(Mediation { in_x, in_q1, in_q2 })
}

/// All subspaces of `F^d`, as canonical bases (columns), for a finite field.
pub fn subspaces(field: Field, d: usize) -> Vec<Mat> {
    let q = field.order().expect("finite field");
    let mut out = Vec::new();
    for k in 0..=d {
        for pivots in combinations(d, k) {
            // free slots: row i, column j > pivots[i] that is not a pivot column
            let free: Vec<(usize, usize)> = (0..k)
                .flat_map(|i| ((pivots[i] + 1)..d).filter(|j| !pivots.contains(j)).map(move |j| (i, j)))
                .collect();
            let count = q.pow(free.len() as u32);
            for idx in 0..count {
                let mut rows = Mat::zeros(field, k, d);
                for (i, &p) in pivots.iter().enumerate() {
                    rows.set(i, p, &field.one());
                }
                let mut rest = idx;
                for &(i, j) in &free {
                    rows.set(i, j, &field.nth(rest % q));
                    rest /= q;
                }
                out.push(rows.transpose());
            }
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out.sort();
    out
}

/// Submodules `S` of `M` with `lower ⊆ S ⊆ upper`, by backtracking along a linear
/// extension. `budget` counts visited partial assignments; `None` means it ran out.
pub fn submodules_between(lower: &Submodule, upper: &Submodule, budget: &mut u64) -> Result<Option<Vec<Submodule>>> {
    let m = upper.parent().clone();
    let field = m.field();
    if !field.is_finite() {
        return Err(Error::InvalidField("subspace enumeration needs a finite field".into()));
    }
    let p = m.poset().clone();
    let order = p.linear_extension().to_vec();
    let mut lattices: HashMap<usize, Vec<Mat>> = HashMap::new();
    let choices: Vec<Vec<Mat>> = (0..p.len())
        .map(|a| {
            lattices
                .entry(m.dim(a))
                .or_insert_with(|| subspaces(field, m.dim(a)))
                .iter()
                .filter(|v| v.span_contains(lower.basis(a)) && upper.basis(a).span_contains(v))
                .cloned()
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut current: Vec<Option<Mat>> = vec![None; p.len()];
    let complete = backtrack(&m, &order, 0, &choices, &mut current, &mut out, budget)?;
    Ok(complete.then_some(out))
}

fn backtrack(
    m: &Arc<PersistenceModule>,
    order: &[usize],
    depth: usize,
    choices: &[Vec<Mat>],
    current: &mut Vec<Option<Mat>>,
    out: &mut Vec<Submodule>,
    budget: &mut u64,
) -> Result<bool> {
    if depth == order.len() {
        let bases = current.iter().map(|b| b.clone().expect("assigned")).collect();
        out.push(Submodule::new(m.clone(), bases)?);
        return Ok(true);
    }
    let a = order[depth];
    for v in &choices[a] {
        if *budget == 0 {
            return Ok(false);
        }
        *budget -= 1;
        let closed = m.poset().lower_covers(a).iter().all(|&b| {
            let sb = current[b].as_ref().expect("lower covers come first");
            v.span_contains(&m.map(b, a).mul(sb))
        });
        if !closed {
            continue;
        }
        current[a] = Some(v.clone());
        let done = backtrack(m, order, depth + 1, choices, current, out, budget)?;
        current[a] = None;
        if !done {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Members of `EN_r(M)` up to isomorphism.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub members: Vec<Subquotient>,
    /// False when the budget ran out; `members` is then a partial list.
    pub complete: bool,
}

pub fn en_enumerate(calc: &Calculus, r: &Rational, m: &Arc<PersistenceModule>, budget: u64) -> Result<Enumeration> {
    let im = calc.image_r(r, m)?;
    let ker = calc.kernel_r(r, m)?;
    let mut left = budget;
    let uppers = submodules_between(&im, &Submodule::whole(m.clone()), &mut left)?;
    let lowers = submodules_between(&Submodule::zero(m.clone()), &ker, &mut left)?;
    let complete = uppers.is_some() && lowers.is_some();
    let (uppers, lowers) = (uppers.unwrap_or_default(), lowers.unwrap_or_default());
    let mut members: Vec<Subquotient> = Vec::new();
    let mut complete = complete;
    for u in &uppers {
        for l in &lowers {
            if !u.contains(l) {
                continue;
            }
            let sq = Subquotient::new(u.clone(), l.clone())?;
            let mut duplicate = false;
            for known in &members {
                match is_isomorphic(&known.module, &sq.module, budget)?.verdict {
                    Verdict::Yes => {
                        duplicate = true;
                        break;
                    }
                    Verdict::Unknown => complete = false,
                    Verdict::No => {}
                }
            }
            if !duplicate {
                members.push(sq);
            }
        }
    }
    Ok(Enumeration { members, complete })
}

/// Witness for a shared neighborhood: the same module as a subquotient of each side.
#[derive(Clone, Debug)]
pub struct SharedNeighborhood {
    pub r: Rational,
    pub in_m: Subquotient,
    pub in_n: Subquotient,
}

#[derive(Clone, Debug)]
pub struct EnReport {
    pub report: StrataReport,
    pub witness: Option<SharedNeighborhood>,
}

/// Decides `EN_r(M) ∩ EN_r(N) ≠ ∅` at one parameter.
pub fn en_intersect(
    calc: &Calculus,
    r: &Rational,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    budget: u64,
) -> Result<(Verdict, Option<SharedNeighborhood>)> {
    let search = find_interleaving(calc, r, m, n, budget)?;
    if let Some(cert) = &search.certificate {
        let q = en_canonical_q(calc, m, n, cert)?;
        return Ok((Verdict::Yes, Some(SharedNeighborhood { r: r.clone(), in_m: q.in_m, in_n: q.in_n })));
    }
    let (erm, ern) = (erosion_member(calc, r, m)?, erosion_member(calc, r, n)?);
    if is_isomorphic(&erm.module, &ern.module, budget)?.verdict.is_yes() {
        return Ok((Verdict::Yes, Some(SharedNeighborhood { r: r.clone(), in_m: erm, in_n: ern })));
    }
    let em = en_enumerate(calc, r, m, budget)?;
    let en = en_enumerate(calc, r, n, budget)?;
    let mut decided = em.complete && en.complete;
    for x in &em.members {
        for y in &en.members {
            match is_isomorphic(&x.module, &y.module, budget)?.verdict {
                Verdict::Yes => {
                    return Ok((Verdict::Yes, Some(SharedNeighborhood { r: r.clone(), in_m: x.clone(), in_n: y.clone() })))
                }
                Verdict::Unknown => decided = false,
                Verdict::No => {}
            }
        }
    }
    Ok((if decided { Verdict::No } else { Verdict::Unknown }, None))
}

/// `E_r M` as the member `Im_r M / (Im_r M ∩ Ker_r M)`.
pub fn erosion_member(calc: &Calculus, r: &Rational, m: &Arc<PersistenceModule>) -> Result<Subquotient> {
    let im = calc.image_r(r, m)?;
    let lower = im.intersect(&calc.kernel_r(r, m)?)?;
    en_construct(calc, r, m, &im, &lower)
}

/// `d_{rho-EN}(M, N)` over the strata, with the same left-endpoint semantics as the interleaving distance.
pub fn d_en(
    calc: &Calculus,
    m: &Arc<PersistenceModule>,
    n: &Arc<PersistenceModule>,
    budget: u64,
    scan: Scan,
) -> Result<EnReport> {
    m.check_same_base(n)?;
    let mut witnesses: HashMap<usize, SharedNeighborhood> = HashMap::new();
    let report = stratified(calc.rho().strata(), scan, |i, st| {
        let (verdict, w) = en_intersect(calc, &st.representative, m, n, budget)?;
        if let Some(w) = w {
            witnesses.insert(i, w);
        }
        Ok(Search { verdict, certificate: None, candidates: 0 })
    })?;
    let first_yes = report.strata.iter().position(|s| s.tested && s.verdict.is_yes());
    let witness = first_yes.and_then(|i| witnesses.remove(&i));
    Ok(EnReport { report, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::GF2;
    use crate::fixtures::chain_example;
    use crate::height::{rat, Ext, HeightDiff};
    use crate::interleave::distance;
    use crate::poset::FinitePoset;

    #[test]
    fn subspace_counts_are_gaussian_binomials() {
        assert_eq!(subspaces(GF2, 0).len(), 1);
        assert_eq!(subspaces(GF2, 2).len(), 5);
        assert_eq!(subspaces(GF2, 3).len(), 16);
        assert_eq!(subspaces(Field::Prime(3), 2).len(), 6);
    }

    fn chain4() -> (Calculus, Arc<PersistenceModule>) {
        let p = Arc::new(FinitePoset::chain(&["a", "b", "c", "d"]).unwrap());
        let rho = HeightDiff::from_phi_ints(p.clone(), &[0, 1, 2, 3]).unwrap();
        let m = Arc::new(PersistenceModule::interval(p, GF2, &[0, 1, 2, 3]).unwrap());
        (Calculus::new(rho), m)
    }

    #[test]
    fn trivial_members() {
        let (calc, m) = chain4();
        for r in [rat(0), rat(1), rat(2)] {
            let sq = en_construct(&calc, &r, &m, &Submodule::whole(m.clone()), &Submodule::zero(m.clone())).unwrap();
            assert_eq!(sq.module.dims(), m.dims());
            let e = erosion_member(&calc, &r, &m).unwrap();
            assert_eq!(is_isomorphic(&e.module, &calc.e_module(&r, &m).unwrap(), 1 << 20).unwrap().verdict, Verdict::Yes);
        }
        let e0 = en_enumerate(&calc, &rat(0), &m, 1 << 20).unwrap();
        assert!(e0.complete);
        assert_eq!(e0.members.len(), 1);
    }

    #[test]
    fn dropping_a_generator_breaks_containment() {
        let (calc, m) = chain4();
        // Im_1 of the full bar is [b, d]; [c, d] misses b
        let bases = [0, 0, 1, 1].iter().map(|&d| Mat::identity(GF2, 1).select_cols(&(0..d).collect::<Vec<_>>())).collect();
        let m1 = Submodule::new(m.clone(), bases).unwrap();
        match en_construct(&calc, &rat(1), &m, &m1, &Submodule::zero(m.clone())) {
            Err(Error::Containment { element, .. }) => assert_eq!(element, "b"),
            other => panic!("expected a containment error, got {other:?}"),
        }
    }

    #[test]
    fn interval_on_four_chain() {
        let (calc, m) = chain4();
        let en = en_enumerate(&calc, &rat(1), &m, 1 << 20).unwrap();
        assert!(en.complete);
        let p = m.poset().clone();
        for set in [vec![0, 1, 2, 3], vec![1, 2, 3], vec![0, 1, 2], vec![1, 2]] {
            let target = Arc::new(PersistenceModule::interval(p.clone(), GF2, &set).unwrap());
            assert!(en
                .members
                .iter()
                .any(|x| is_isomorphic(&x.module, &target, 1 << 20).unwrap().verdict == Verdict::Yes));
        }
        for x in &en.members {
            let cert = en_interleaving(&calc, &rat(1), &m, x).unwrap();
            assert!(check_certificate(&calc, &rat(1), &m, &x.module, &cert.p, &cert.q).unwrap());
        }
    }

    #[test]
    fn canonical_neighborhood_on_the_chain() {
        let ex = chain_example(GF2, &rat(2)).unwrap();
        let calc = Calculus::new(ex.rho.clone());
        let r = rat(3);
        let s = find_interleaving(&calc, &r, &ex.m, &ex.n, 1 << 20).unwrap();
        let q = en_canonical_q(&calc, &ex.m, &ex.n, &s.certificate.unwrap()).unwrap();
        assert_eq!(is_isomorphic(&q.in_m.module, &q.in_n.module, 1 << 20).unwrap().verdict, Verdict::Yes);
        assert!(is_member(&calc, &r, &ex.m, &q.in_m).unwrap());
        assert!(is_member(&calc, &r, &ex.n, &q.in_n).unwrap());
        let same = find_interleaving(&calc, &rat(0), &ex.m, &ex.m, 1 << 20).unwrap();
        let q0 = en_canonical_q(&calc, &ex.m, &ex.m, &same.certificate.unwrap()).unwrap();
        assert_eq!(is_isomorphic(&q0.in_m.module, &ex.m, 1 << 20).unwrap().verdict, Verdict::Yes);
    }

    #[test]
    fn en_distance_on_the_chain() {
        let ex = chain_example(GF2, &rat(2)).unwrap();
        let calc = Calculus::new(ex.rho.clone());
        let den = d_en(&calc, &ex.m, &ex.n, 1 << 20, Scan::Exhaustive).unwrap();
        let d = distance(&calc, &ex.m, &ex.n, 1 << 20, Scan::Exhaustive).unwrap();
        let (den, d) = (den.report.distance().unwrap().clone(), d.distance().unwrap().clone());
        assert!(den <= d);
        assert_eq!(d, Ext::int(2));
        let same = d_en(&calc, &ex.m, &ex.m, 1 << 20, Scan::Bisect).unwrap();
        assert_eq!(same.report.distance(), Some(&Ext::zero()));
    }

    #[test]
    fn composition_and_mediation_on_the_chain() {
        let (calc, m) = chain4();
        let c = calc.rho().c_rho().value.finite().unwrap().clone();
        let one = rat(1);
        let first = en_enumerate(&calc, &one, &m, 1 << 20).unwrap();
        for n in &first.members {
            let second = en_enumerate(&calc, &one, &n.module, 1 << 20).unwrap();
            assert!(second.complete);
            for q in &second.members {
                let back = en_compose(&calc, &one, &one, &c, &m, n, q).unwrap();
                assert_eq!(back.module.dims(), q.module.dims());
            }
        }
        for q1 in &first.members {
            for q2 in &first.members {
                let med = en_mediate(&calc, &one, &one, q1, q2).unwrap();
                assert_eq!(med.in_q1.module.dims(), med.in_x.module.dims());
                assert_eq!(med.in_q2.module.dims(), med.in_x.module.dims());
            }
        }
    }
}
