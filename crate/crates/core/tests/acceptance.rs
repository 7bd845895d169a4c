//! Acceptance criteria. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use hint_core::erosion::{d_en, en_enumerate, en_interleaving};
use hint_core::exactlin::{Field, GF2, GF3};
use hint_core::fixtures::{
    at, bipath_example, chain_example, diamond, grid_dims, grid_example, grid_left_decomposition,
    grid_right_decomposition, GRID_L1_DIMS, GRID_R1_DIMS,
};
use hint_core::functors::Calculus;
use hint_core::gen::{random_galois_insertion, random_module, random_order_map, random_phi, random_poset, random_rho, random_tree_poset};
use hint_core::height::{rat, Ext, HeightDiff};
use hint_core::interleave::{check_certificate, distance, find_interleaving, shift_oracle_distance, Scan, StrataReport};
use hint_core::kan::{check_universal_colim, check_universal_lim, colim_over, lim_over, Candidate};
use hint_core::pmod::{hom_basis, hom_dim, is_isomorphic, PersistenceModule};
use hint_core::poset::FinitePoset;
use hint_core::verdict::{Verdict, DEFAULT_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:?}, limit {limit:?}");
    Ok(())
}

fn iso(m: &Arc<PersistenceModule>, n: &Arc<PersistenceModule>) -> Result<Verdict, String> {
    Ok(ok(is_isomorphic(m, n, DEFAULT_BUDGET))?.verdict)
}

/// Random GF(2) module with at most two generators and cogenerators, redrawn until nonzero.
fn module(rng: &mut ChaCha8Rng, p: &Arc<FinitePoset>) -> Result<Arc<PersistenceModule>, String> {
    loop {
        let m = ok(random_module(rng, p, GF2, 2, 2))?;
        if m.dims().iter().any(|&d| d > 0) {
            return Ok(m);
        }
    }
}

fn decided(rep: &StrataReport) -> Option<Ext> {
    rep.distance().cloned()
}

fn grid_example_criterion() -> Outcome {
    let start = Instant::now();
    for field in [GF2, GF3, Field::Rational] {
        let ex = ok(grid_example(field))?;
        let calc = Calculus::new(ex.rho.clone());
        let l = ok(calc.left(&rat(1), &ex.m))?.output.clone();
        let r = ok(calc.right(&rat(1), &ex.m))?.output.clone();
        ensure!(l.dims() == grid_dims(GRID_L1_DIMS).as_slice(), "L_1 M dims over {field}: {:?}", l.dims());
        ensure!(r.dims() == grid_dims(GRID_R1_DIMS).as_slice(), "R_1 M dims over {field}: {:?}", r.dims());
        ensure!(l.dim(at(ex.m.poset(), 2, 2)) == 0, "L_1 M(v_2_2) != 0 over {field}");
    }
    let ex = ok(grid_example(GF2))?;
    let calc = Calculus::new(ex.rho.clone());
    let p = ex.m.poset().clone();
    let l = ok(calc.left(&rat(1), &ex.m))?.output.clone();
    let r = ok(calc.right(&rat(1), &ex.m))?.output.clone();
    ensure!(iso(&l, &Arc::new(ok(grid_left_decomposition(&p, GF2))?))? == Verdict::Yes, "L_1 M decomposition");
    ensure!(iso(&r, &Arc::new(ok(grid_right_decomposition(&p, GF2))?))? == Verdict::Yes, "R_1 M decomposition");
    within(start, Duration::from_secs(1))?;
    Ok("24 dimensions match over GF(2), GF(3), Q; both decompositions verified".into())
}

fn chain_criterion() -> Outcome {
    let start = Instant::now();
    let ex = ok(chain_example(GF2, &rat(2)))?;
    let calc = Calculus::new(ex.rho.clone());
    let mx = ok(distance(&calc, &ex.m, &ex.x, DEFAULT_BUDGET, Scan::Exhaustive))?;
    let xn = ok(distance(&calc, &ex.x, &ex.n, DEFAULT_BUDGET, Scan::Exhaustive))?;
    let mn = ok(distance(&calc, &ex.m, &ex.n, DEFAULT_BUDGET, Scan::Exhaustive))?;
    ensure!(decided(&mx) == Some(Ext::zero()) && !mx.attained, "d(M,X) = {:?}, attained {}", mx.distance(), mx.attained);
    ensure!(decided(&xn) == Some(Ext::zero()) && !xn.attained, "d(X,N) = {:?}, attained {}", xn.distance(), xn.attained);
    ensure!(decided(&mn) == Some(Ext::int(2)), "d(M,N) = {:?}", mn.distance());
    let gap = mn
        .strata
        .iter()
        .find(|s| s.stratum.lower == rat(1) && s.stratum.upper == Ext::int(2))
        .ok_or("no stratum (1, 2]")?;
    ensure!(gap.tested && gap.verdict == Verdict::No, "stratum (1, 2]: {} (tested {})", gap.verdict, gap.tested);
    let (a, b, d) = (decided(&mx).unwrap(), decided(&xn).unwrap(), decided(&mn).unwrap());
    ensure!(d > a.add(&b), "triangle inequality holds unexpectedly");
    within(start, Duration::from_secs(5))?;
    Ok(format!("d = {a}, {b}, {d}; triangle fails: {d} > {a} + {b}"))
}

fn bipath_criterion() -> Outcome {
    let start = Instant::now();
    let g = 8;
    let ex = ok(bipath_example(GF2, g))?;
    let calc = Calculus::new(ex.rho.clone());
    let m1 = ok(calc.left(&rat(1), &ex.m))?.output.clone();
    let n = ok(calc.left(&rat(1), &m1))?.output.clone();
    for st in ex.rho.strata() {
        let r = &st.representative;
        if *r < rat(g as i64) {
            let lr = ok(calc.left(r, &ex.m))?.output.clone();
            ensure!(ok(hom_dim(&lr, &n))? == 0, "Hom(L_r M, N) != 0 on {st}");
        }
        let nonzero = !ok(calc.e(r, &ex.m))?.is_zero();
        ensure!(nonzero == (*r <= rat(4)), "e_r,M nonzero = {nonzero} on {st}");
    }
    let mn = ok(distance(&calc, &ex.m, &n, DEFAULT_BUDGET, Scan::Exhaustive))?;
    ensure!(decided(&mn) == Some(Ext::int(4)), "d(M,N) = {:?}", mn.distance());
    let a = decided(&ok(distance(&calc, &ex.m, &m1, DEFAULT_BUDGET, Scan::Bisect))?).ok_or("d(M,M1) undecided")?;
    let b = decided(&ok(distance(&calc, &m1, &n, DEFAULT_BUDGET, Scan::Bisect))?).ok_or("d(M1,N) undecided")?;
    let c = ex.rho.c_rho().value;
    ensure!(c == Ext::int(1), "c(phi) = {c}");
    let bound = a.add(&b).add(&c);
    ensure!(Ext::int(4) > bound, "relaxed triangle inequality holds: 4 <= {bound}");
    within(start, Duration::from_secs(30))?;
    Ok(format!("Hom = 0 below 8, e_r != 0 iff r <= 4, d = 4 > {a} + {b} + {c}"))
}

fn diagonal_recovery_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let p = Arc::new(ok(FinitePoset::grid(&[3, 3]))?);
    let calc = Calculus::new(ok(HeightDiff::diagonal(p.clone()))?);
    let mut seen = std::collections::BTreeMap::new();
    for trial in 0..50 {
        let m = module(&mut rng, &p)?;
        let n = module(&mut rng, &p)?;
        let a = ok(distance(&calc, &m, &n, DEFAULT_BUDGET, Scan::Exhaustive))?;
        let b = ok(shift_oracle_distance(&m, &n, DEFAULT_BUDGET, Scan::Exhaustive))?;
        ensure!(a.is_exact() && b.is_exact(), "trial {trial}: undecided");
        ensure!(
            a.distance() == b.distance() && a.attained == b.attained,
            "trial {trial}: {:?} vs oracle {:?}",
            a.distance(),
            b.distance()
        );
        *seen.entry(a.upper.to_string()).or_insert(0) += 1;
    }
    Ok(format!("50/50 agree; distances seen {seen:?}"))
}

fn adjunction_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let mut checked = 0usize;
    for trial in 0..100 {
        let size = rng.gen_range(2..=8);
        let p = Arc::new(random_poset(&mut rng, size, 0.4));
        let rho = random_rho(&mut rng, &p, 2);
        let reps = rho.representatives();
        let r = reps[rng.gen_range(0..reps.len())].clone();
        let s = &r + reps[rng.gen_range(0..reps.len())].clone();
        let calc = Calculus::new(rho);
        let m = module(&mut rng, &p)?;
        let n = module(&mut rng, &p)?;
        let rn = ok(calc.right(&r, &n))?;
        for g in ok(hom_basis(&m, &rn.output))? {
            let back = ok(calc.flat(&r, &m, &ok(calc.sharp(&r, &n, &g))?))?;
            ensure!(back.same_matrices(&g), "trial {trial}: flat(sharp(g)) != g");
            checked += 1;
        }
        let lm = ok(calc.left(&r, &m))?;
        for f in ok(hom_basis(&lm.output, &n))? {
            let back = ok(calc.sharp(&r, &n, &ok(calc.flat(&r, &m, &f))?))?;
            ensure!(back.same_matrices(&f), "trial {trial}: sharp(flat(f)) != f");
            checked += 1;
        }
        // the transpose of counit ∘ eta^L_{s,r} is eta^R_{r,s}
        let rno = rn.output.clone();
        let composite = ok(ok(calc.counit(&r, &n))?.compose(&ok(calc.eta_left(&s, &r, &rno))?))?;
        let mate = ok(calc.flat(&s, &rno, &composite))?;
        ensure!(mate.same_matrices(&ok(calc.eta_right(&r, &s, &n))?), "trial {trial}: eta mate identity fails");
    }
    Ok(format!("100 instances, {checked} basis round trips, mate identity exact"))
}

fn cip_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut components = 0usize;
    for trial in 0..50 {
        let size = rng.gen_range(2..=8);
        let p = Arc::new(random_tree_poset(&mut rng, size));
        let rho = random_rho(&mut rng, &p, 2);
        let reps = rho.representatives();
        let calc = Calculus::new(rho);
        let m = module(&mut rng, &p)?;
        for s in &reps {
            for r in &reps {
                let kl = ok(calc.kappa_left(s, r, &m))?;
                let kr = ok(calc.kappa_right(r, s, &m))?;
                ensure!(kl.is_iso() && kr.is_iso(), "trial {trial}: kappa not iso at s = {s}, r = {r}");
                components += 2 * p.len();
            }
        }
    }
    let rho = ok(diamond())?;
    let p = rho.poset().clone();
    let all: Vec<usize> = (0..p.len()).collect();
    let m = Arc::new(ok(PersistenceModule::interval(p.clone(), GF2, &all))?);
    let calc = Calculus::new(rho.clone());
    ensure!(!ok(calc.kappa_left(&rat(1), &rat(1), &m))?.is_iso(), "kappa is iso on the diamond");
    let rep = rho.check_cip(DEFAULT_BUDGET);
    ensure!(rep.verdict == Verdict::No, "check_cip says {}", rep.verdict);
    let w = rep.witness.ok_or("no witness")?;
    let names: Vec<&str> = w.set.iter().map(|&x| p.name(x)).collect();
    ensure!(
        p.name(w.a) == "d" && p.name(w.q) == "a" && w.s == rat(1) && w.r == rat(1) && names == ["b", "c"],
        "witness I_({}, {})({}, {}) = {names:?}",
        w.s,
        w.r,
        p.name(w.a),
        p.name(w.q)
    );
    Ok(format!("{components} kappa components iso on 50 trees; diamond witness I_1,1(d, a) = {{b, c}}"))
}

fn c_rho_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for trial in 0..100 {
        let size = rng.gen_range(1..=10);
        let p = Arc::new(random_poset(&mut rng, size, 0.35));
        let phi = random_phi(&mut rng, &p, 4);
        let rho = ok(HeightDiff::from_phi_ints(p.clone(), &phi))?;
        let gap = p.covers().iter().map(|&(a, b)| phi[b] - phi[a]).max().unwrap_or(0);
        let c = rho.c_rho();
        ensure!(c.value == Ext::int(gap), "trial {trial}: c = {}, max cover gap {gap}", c.value);
    }
    for c in [rat(1), rat(2), rat(5) / rat(2), rat(4)] {
        let ex = ok(chain_example(GF2, &c))?;
        ensure!(ex.rho.c_rho().value == Ext::Finite(c.clone()), "chain C = {c}: c = {}", ex.rho.c_rho().value);
    }
    Ok("100 random heights equal the max cover gap; chain gives c = C".into())
}

/// Draws instances until `want` of them have decided distances on both sides.
fn decided_instances<F>(want: usize, max_tries: usize, mut draw: F) -> Result<usize, String>
where
    F: FnMut() -> Result<Option<bool>, String>,
{
    let mut done = 0;
    for _ in 0..max_tries {
        match draw()? {
            Some(true) => done += 1,
            Some(false) => return Err(format!("violation after {done} decided instances")),
            None => {}
        }
        if done == want {
            return Ok(done);
        }
    }
    Err(format!("only {done} decided instances in {max_tries} tries"))
}

fn stability_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pulled = decided_instances(50, 500, || {
        let p = { let k = rng.gen_range(2..=5); Arc::new(random_poset(&mut rng, k, 0.4)) };
        let q = { let k = rng.gen_range(2..=5); Arc::new(random_poset(&mut rng, k, 0.4)) };
        let Ok(f) = random_order_map(&mut rng, &q, &p) else { return Ok(None) };
        let rho = random_rho(&mut rng, &p, 2);
        let m = module(&mut rng, &p)?;
        let n = module(&mut rng, &p)?;
        let up = ok(distance(&Calculus::new(rho.clone()), &m, &n, DEFAULT_BUDGET, Scan::Bisect))?;
        let fm = Arc::new(ok(m.pullback(&f))?);
        let fn_ = Arc::new(ok(n.pullback(&f))?);
        let down = ok(distance(&Calculus::new(ok(rho.pullback(&f))?), &fm, &fn_, DEFAULT_BUDGET, Scan::Bisect))?;
        Ok(decided(&down).zip(decided(&up)).map(|(d, u)| d <= u))
    })?;
    let functional = decided_instances(50, 500, || {
        let p = { let k = rng.gen_range(2..=6); Arc::new(random_poset(&mut rng, k, 0.4)) };
        let (r1, r2) = (random_rho(&mut rng, &p, 2), random_rho(&mut rng, &p, 3));
        let m = module(&mut rng, &p)?;
        let n = module(&mut rng, &p)?;
        let d1 = ok(distance(&Calculus::new(r1.clone()), &m, &n, DEFAULT_BUDGET, Scan::Bisect))?;
        let d2 = ok(distance(&Calculus::new(r2.clone()), &m, &n, DEFAULT_BUDGET, Scan::Bisect))?;
        let delta = ok(r1.distortion(&r2))?;
        Ok(decided(&d1).zip(decided(&d2)).map(|(a, b)| a.dist(&b) <= delta))
    })?;
    let galois = decided_instances(20, 300, || {
        let p = { let k = rng.gen_range(2..=4); Arc::new(random_poset(&mut rng, k, 0.4)) };
        let gi = ok(random_galois_insertion(&mut rng, &p, 2))?;
        let big = gi.iota.target.clone();
        let rho_big = random_rho(&mut rng, &big, 2);
        let rho = ok(rho_big.pullback(&gi.iota))?;
        let delta = ok(rho_big.distortion(&ok(rho.pullback(&gi.pi))?))?;
        let m = module(&mut rng, &p)?;
        let n = module(&mut rng, &p)?;
        let pm = Arc::new(ok(m.pullback(&gi.pi))?);
        let pn = Arc::new(ok(n.pullback(&gi.pi))?);
        let d = ok(distance(&Calculus::new(rho), &m, &n, DEFAULT_BUDGET, Scan::Bisect))?;
        let d2 = ok(distance(&Calculus::new(rho_big), &pm, &pn, DEFAULT_BUDGET, Scan::Bisect))?;
        Ok(decided(&d).zip(decided(&d2)).map(|(a, b)| a <= b && b <= a.add(&delta)))
    })?;
    Ok(format!("pullback {pulled}, functional {functional}, Galois sandwich {galois} decided instances, no violations"))
}

fn relaxed_triangle_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut defects = 0usize;
    let n_ok = decided_instances(30, 300, || {
        let p = { let k = rng.gen_range(2..=7); Arc::new(random_tree_poset(&mut rng, k)) };
        let rho = random_rho(&mut rng, &p, 2);
        let c = rho.c_rho().value;
        let calc = Calculus::new(rho);
        let ms: Vec<_> = (0..3).map(|_| module(&mut rng, &p)).collect::<Result<_, _>>()?;
        let d = |a: usize, b: usize| -> Result<Option<Ext>, String> {
            Ok(decided(&ok(distance(&calc, &ms[a], &ms[b], DEFAULT_BUDGET, Scan::Bisect))?))
        };
        let (Some(mn), Some(mx), Some(xn)) = (d(0, 2)?, d(0, 1)?, d(1, 2)?) else { return Ok(None) };
        if mn > mx.add(&xn) {
            defects += 1;
        }
        Ok(Some(mn <= mx.add(&xn).add(&c)))
    })?;
    Ok(format!("{n_ok} triples on trees, zero violations ({defects} needed the c(rho) slack)"))
}

fn erosion_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..50 {
        let p = { let k = rng.gen_range(2..=7); Arc::new(random_poset(&mut rng, k, 0.4)) };
        let rho = random_rho(&mut rng, &p, 2);
        let reps = rho.representatives();
        let r = reps[rng.gen_range(0..reps.len())].clone();
        let calc = Calculus::new(rho);
        let m = module(&mut rng, &p)?;
        let (_, f) = ok(calc.e_comparison(&r, &m))?;
        ensure!(f.is_iso(), "trial {trial}: E_r M is not Im/(Im ∩ Ker) at r = {r}");
    }
    let mut members = 0usize;
    for trial in 0..20 {
        let p = { let k = rng.gen_range(2..=5); Arc::new(random_poset(&mut rng, k, 0.4)) };
        let rho = random_rho(&mut rng, &p, 2);
        let reps = rho.representatives();
        let r = reps[rng.gen_range(0..reps.len())].clone();
        let calc = Calculus::new(rho);
        let m = module(&mut rng, &p)?;
        let en = ok(en_enumerate(&calc, &r, &m, DEFAULT_BUDGET))?;
        ensure!(en.complete, "trial {trial}: enumeration incomplete");
        for x in &en.members {
            let s = ok(find_interleaving(&calc, &r, &m, &x.module, DEFAULT_BUDGET))?;
            ensure!(s.verdict == Verdict::Yes, "trial {trial}: member not {r}-interleaved with M ({})", s.verdict);
            let cert = ok(en_interleaving(&calc, &r, &m, x))?;
            ensure!(ok(check_certificate(&calc, &r, &m, &x.module, &cert.p, &cert.q))?, "trial {trial}: explicit pair fails");
            members += 1;
        }
    }
    let sandwich = decided_instances(20, 200, || {
        let p = { let k = rng.gen_range(2..=5); Arc::new(random_tree_poset(&mut rng, k)) };
        let rho = random_rho(&mut rng, &p, 2);
        let c = rho.c_rho().value;
        let calc = Calculus::new(rho);
        let m = module(&mut rng, &p)?;
        let n = module(&mut rng, &p)?;
        let den = ok(d_en(&calc, &m, &n, DEFAULT_BUDGET, Scan::Exhaustive))?;
        let d = ok(distance(&calc, &m, &n, DEFAULT_BUDGET, Scan::Exhaustive))?;
        Ok(decided(&den.report)
            .zip(decided(&d))
            .map(|(e, d)| e <= d && d <= e.add(&e).add(&c)))
    })?;
    Ok(format!("50 erosion identities; {members} EN members interleaved; sandwich on {sandwich} instances"))
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

fn colimit_oracle_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checks = 0usize;
    for trial in 0..200 {
        let p = { let k = rng.gen_range(1..=5); Arc::new(random_poset(&mut rng, k, 0.45)) };
        let m = module(&mut rng, &p)?;
        for set in subsets(p.len()) {
            let colim = colim_over(&*m, &set);
            ensure!(ok(check_universal_colim(&*m, &set, &Candidate::from(&colim)))?, "trial {trial}: colimit over {set:?}");
            let lim = lim_over(&*m, &set);
            ensure!(ok(check_universal_lim(&*m, &set, &Candidate::from(&lim)))?, "trial {trial}: limit over {set:?}");
            checks += 2;
        }
    }
    Ok(format!("{checks} universal-property checks over all subsets"))
}

fn main() {
    let criteria: [(&str, Criterion); 11] = [
        ("grid example", grid_example_criterion),
        ("chain example", chain_criterion),
        ("discrete bipath", bipath_criterion),
        ("diagonal recovery on grids", diagonal_recovery_criterion),
        ("adjunction", adjunction_criterion),
        ("CIP and Fubini", cip_criterion),
        ("c(rho)", c_rho_criterion),
        ("stability", stability_criterion),
        ("relaxed triangle inequality", relaxed_triangle_criterion),
        ("erosion", erosion_criterion),
        ("(co)limit oracle", colimit_oracle_criterion),
    ];
    // `cargo test -- <filter>` passes a name filter; honour it loosely
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
