use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use hint_core::erosion::d_en;
use hint_core::exactlin::{Field, GF2};
use hint_core::functors::{xi_left, xi_right, Calculus};
use hint_core::gen::random_module;
use hint_core::height::{Ext, HeightDiff, Rational};
use hint_core::interleave::{check_certificate, distance as rho_distance, find_interleaving, shift_oracle_distance, Scan, StrataReport};
use hint_core::io::{self, read_json};
use hint_core::pmod::PersistenceModule;
use hint_core::poset::{FinitePoset, GaloisInsertion};
use hint_core::verdict::Verdict;
use hint_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{Base, FunctorKind, NatName, Pair, ScanArg};

pub struct Ctx {
    pub field: Option<Field>,
    pub budget: u64,
    pub seed: u64,
}

/// A report plus the process exit code: 0 decided, 1 validation failure, 2 undecided.
pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

impl Outcome {
    pub fn ok(report: Value) -> Outcome {
        Outcome { report, code: 0 }
    }

    pub fn undecided_if(report: Value, undecided: bool) -> Outcome {
        Outcome { report, code: if undecided { 2 } else { 0 } }
    }

    /// Exit 1 when a decided check fails, 2 when it could not be decided.
    pub fn check(report: Value, holds: Option<bool>) -> Outcome {
        let code = match holds {
            Some(true) => 0,
            Some(false) => 1,
            None => 2,
        };
        Outcome { report, code }
    }
}

pub fn emit(outcome: &Outcome, output: Option<&Path>) -> ExitCode {
    let text = serde_json::to_string_pretty(&outcome.report).expect("json values serialize") + "\n";
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(outcome.code)
}

pub fn scan(arg: ScanArg) -> Scan {
    match arg {
        ScanArg::Bisect => Scan::Bisect,
        ScanArg::Exhaustive => Scan::Exhaustive,
    }
}

fn load_poset(path: &Path) -> Result<Arc<FinitePoset>> {
    Ok(Arc::new(io::parse_poset(&read_json(path)?).map_err(|e| at(path, e))?))
}

fn load_height(path: &Path, p: &Arc<FinitePoset>) -> Result<HeightDiff> {
    io::parse_height(&read_json(path)?, p.clone()).map_err(|e| at(path, e))
}

fn load_module(ctx: &Ctx, path: &Path, p: &Arc<FinitePoset>) -> Result<Arc<PersistenceModule>> {
    Ok(Arc::new(io::parse_module(&read_json(path)?, p.clone(), ctx.field).map_err(|e| at(path, e))?))
}

/// Prefixes semantic errors with the file they came from.
fn at(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    }
}

fn calculus(base: &Base) -> Result<(Arc<FinitePoset>, Calculus)> {
    let p = load_poset(&base.poset)?;
    let h = base
        .height
        .as_deref()
        .ok_or_else(|| Error::Parse("this command needs --height".into()))
        .and_then(|path| load_height(path, &p))?;
    Ok((p, Calculus::new(h)))
}

fn load_pair(ctx: &Ctx, pair: &Pair, p: &Arc<FinitePoset>) -> Result<(Arc<PersistenceModule>, Arc<PersistenceModule>)> {
    Ok((load_module(ctx, &pair.m, p)?, load_module(ctx, &pair.n, p)?))
}

fn distance_outcome(rep: &StrataReport) -> Outcome {
    Outcome::undecided_if(io::strata_report_to_json(rep), !rep.is_exact())
}

pub fn validate(ctx: &Ctx, base: &Base, modules: &[std::path::PathBuf]) -> Result<Outcome> {
    let check = || -> Result<Value> {
        let p = load_poset(&base.poset)?;
        let mut out = json!({ "poset": { "elements": p.len(), "covers": p.covers().len() } });
        if let Some(h) = &base.height {
            let rho = load_height(h, &p)?;
            out["height"] = json!({ "critical_values": rho.critical_values().iter().map(|v| v.to_string()).collect::<Vec<_>>() });
        }
        let dims: Vec<Value> = modules
            .iter()
            .map(|m| load_module(ctx, m, &p).map(|m| json!(m.dims())))
            .collect::<Result<_>>()?;
        out["modules"] = json!(dims);
        out["valid"] = json!(true);
        Ok(out)
    };
    Ok(match check() {
        Ok(report) => Outcome::ok(report),
        Err(e) => {
            eprintln!("invalid: {e}");
            Outcome { report: json!({ "valid": false, "error": e.to_string() }), code: 1 }
        }
    })
}

pub fn functor(ctx: &Ctx, base: &Base, module: &Path, kind: FunctorKind, r: &Rational, s: Option<&Rational>) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let m = load_module(ctx, module, &p)?;
    let need_s = || s.ok_or_else(|| Error::Parse("T functors need --s".into()));
    let report = match kind {
        FunctorKind::L => io::lan_to_json(&*calc.left(r, &m)?),
        FunctorKind::R => io::ran_to_json(&*calc.right(r, &m)?),
        FunctorKind::TL => io::lan_to_json(&*calc.left_iterated(need_s()?, r, &m)?),
        FunctorKind::TR => io::ran_to_json(&*calc.right_iterated(r, need_s()?, &m)?),
        FunctorKind::E => io::module_to_json(&*calc.e_module(r, &m)?),
        FunctorKind::Im => io::module_to_json(&calc.image_r(r, &m)?.to_module()?.0),
        FunctorKind::Ker => io::module_to_json(&calc.kernel_r(r, &m)?.to_module()?.0),
    };
    Ok(Outcome::ok(report))
}

pub fn nat(
    ctx: &Ctx,
    base: &Base,
    module: &Path,
    name: NatName,
    (r, s, c): (&Rational, &Rational, &Rational),
    xi: Option<(&Path, &Path)>,
) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let m = load_module(ctx, module, &p)?;
    let f = match name {
        NatName::E => calc.e(r, &m)?,
        NatName::EtaL => calc.eta_left(s, r, &m)?,
        NatName::EtaR => calc.eta_right(r, s, &m)?,
        NatName::MuL => calc.mu_left(s, r, &m)?,
        NatName::MuR => calc.mu_right(r, s, &m)?,
        NatName::KappaL => calc.kappa_left(s, r, &m)?,
        NatName::KappaR => calc.kappa_right(r, s, &m)?,
        NatName::TauL => calc.tau_left(s, r, &m)?,
        NatName::TauR => calc.tau_right(r, s, &m)?,
        NatName::ThetaL => calc.theta_left(s, r, c, &m)?,
        NatName::ThetaR => calc.theta_right(r, s, c, &m)?,
        NatName::SigmaL => calc.sigma_left(s, r, c, &m)?,
        NatName::SigmaR => calc.sigma_right(r, s, c, &m)?,
        NatName::XiL | NatName::XiR => {
            let (src, map) = xi.ok_or_else(|| Error::Parse("xi needs --source and --map".into()))?;
            let q = load_poset(src)?;
            let f = io::parse_order_map(&read_json(map)?, q, p.clone())?;
            if matches!(name, NatName::XiL) {
                xi_left(calc.rho(), &f, r, &m)?
            } else {
                xi_right(calc.rho(), &f, r, &m)?
            }
        }
    };
    Ok(Outcome::ok(json!({
        "source": io::module_to_json(&f.source),
        "target": io::module_to_json(&f.target),
        "morphism": io::morphism_to_json(&f),
        "iso": f.is_iso(),
    })))
}

pub fn interleave(ctx: &Ctx, base: &Base, pair: &Pair, r: &Rational, supplied: Option<(&Path, &Path)>) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let (m, n) = load_pair(ctx, pair, &p)?;
    if let Some((pp, qq)) = supplied {
        let rn = calc.right(r, &n)?.output.clone();
        let rm = calc.right(r, &m)?.output.clone();
        let pm = io::parse_morphism(&read_json(pp)?, m.clone(), rn)?;
        let qm = io::parse_morphism(&read_json(qq)?, n.clone(), rm)?;
        let ok = check_certificate(&calc, r, &m, &n, &pm, &qm)?;
        return Ok(Outcome::check(json!({ "r": r.to_string(), "valid": ok }), Some(ok)));
    }
    let search = find_interleaving(&calc, r, &m, &n, ctx.budget)?;
    let report = json!({
        "r": r.to_string(),
        "verdict": search.verdict,
        "candidates": search.candidates,
        "certificate": search.certificate.as_ref().map(io::certificate_to_json),
    });
    Ok(Outcome::undecided_if(report, search.verdict == Verdict::Unknown))
}

pub fn distance(ctx: &Ctx, base: &Base, pair: &Pair, scan_arg: ScanArg) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let (m, n) = load_pair(ctx, pair, &p)?;
    Ok(distance_outcome(&rho_distance(&calc, &m, &n, ctx.budget, scan(scan_arg))?))
}

pub fn en_distance(ctx: &Ctx, base: &Base, pair: &Pair, scan_arg: ScanArg) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let (m, n) = load_pair(ctx, pair, &p)?;
    let rep = d_en(&calc, &m, &n, ctx.budget, scan(scan_arg))?;
    Ok(Outcome::undecided_if(io::en_report_to_json(&rep), !rep.report.is_exact()))
}

pub fn cip(ctx: &Ctx, base: &Base) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let rep = calc.rho().check_cip(ctx.budget);
    Ok(Outcome::undecided_if(io::cip_report_to_json(&p, &rep), rep.verdict == Verdict::Unknown))
}

pub fn ivc(_ctx: &Ctx, base: &Base, c: &Rational) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let report = match calc.rho().check_ivc(c) {
        Ok(()) => json!({ "c": c.to_string(), "holds": true }),
        Err(w) => json!({
            "c": c.to_string(),
            "holds": false,
            "witness": { "a": p.name(w.a), "b": p.name(w.b), "t": w.t.to_string() },
        }),
    };
    Ok(Outcome::ok(report))
}

pub fn c_rho(_ctx: &Ctx, base: &Base) -> Result<Outcome> {
    let (_, calc) = calculus(base)?;
    let c = calc.rho().c_rho();
    Ok(Outcome::ok(json!({ "c": c.value.to_string(), "attained": c.attained })))
}

pub fn distortion(_ctx: &Ctx, base: &Base, other: &Path) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let h2 = load_height(other, &p)?;
    Ok(Outcome::ok(json!({ "distortion": calc.rho().distortion(&h2)?.to_string() })))
}

fn ext_json(x: Option<&Ext>) -> Value {
    x.map(|d| json!(d.to_string())).unwrap_or(Value::Null)
}

pub fn pullback(ctx: &Ctx, base: &Base, pair: &Pair, source: &Path, map: &Path) -> Result<Outcome> {
    let (p, calc) = calculus(base)?;
    let (m, n) = load_pair(ctx, pair, &p)?;
    let q = load_poset(source)?;
    let f = io::parse_order_map(&read_json(map)?, q, p)?;
    let pulled = Calculus::new(calc.rho().pullback(&f)?);
    let (fm, fn_) = (Arc::new(m.pullback(&f)?), Arc::new(n.pullback(&f)?));
    let down = rho_distance(&pulled, &fm, &fn_, ctx.budget, Scan::Bisect)?;
    let up = rho_distance(&calc, &m, &n, ctx.budget, Scan::Bisect)?;
    let holds = down.distance().zip(up.distance()).map(|(a, b)| a <= b);
    let report = json!({
        "pullback_distance": ext_json(down.distance()),
        "distance": ext_json(up.distance()),
        "holds": holds,
    });
    Ok(Outcome::check(report, holds))
}

pub fn galois(ctx: &Ctx, base: &Base, pair: &Pair, big: &Path, big_height: &Path, iota: &Path, pi: &Path) -> Result<Outcome> {
    let p = load_poset(&base.poset)?;
    let (m, n) = load_pair(ctx, pair, &p)?;
    let q = load_poset(big)?;
    let rho_big = load_height(big_height, &q)?;
    let iota = io::parse_order_map(&read_json(iota)?, p.clone(), q.clone())?;
    let pi = io::parse_order_map(&read_json(pi)?, q, p.clone())?;
    let g = GaloisInsertion::new(iota, pi)?;
    // the height on the small poset is the restriction of the big one
    let calc = Calculus::new(rho_big.pullback(&g.iota)?);
    if let Some(h) = &base.height {
        if load_height(h, &p)? != *calc.rho() {
            return Err(Error::Parse("--height must be the restriction of --big-height along iota".into()));
        }
    }
    let delta = rho_big.distortion(&calc.rho().pullback(&g.pi)?)?;
    let (pm, pn) = (Arc::new(m.pullback(&g.pi)?), Arc::new(n.pullback(&g.pi)?));
    let small = rho_distance(&calc, &m, &n, ctx.budget, Scan::Bisect)?;
    let large = rho_distance(&Calculus::new(rho_big), &pm, &pn, ctx.budget, Scan::Bisect)?;
    let holds = small.distance().zip(large.distance()).map(|(d, d2)| d <= d2 && *d2 <= d.add(&delta));
    let report = json!({
        "distance": ext_json(small.distance()),
        "pulled_back_distance": ext_json(large.distance()),
        "distortion": delta.to_string(),
        "holds": holds,
    });
    Ok(Outcome::check(report, holds))
}

pub fn oracle_grid(ctx: &Ctx, poset: Option<&Path>, pair: Option<(&Path, &Path)>, trials: Option<usize>) -> Result<Outcome> {
    let p = match poset {
        Some(path) => load_poset(path)?,
        None => Arc::new(FinitePoset::grid(&[3, 3])?),
    };
    let calc = Calculus::new(HeightDiff::diagonal(p.clone())?);
    let mut pairs = Vec::new();
    if let Some((mp, np)) = pair {
        pairs.push((load_module(ctx, mp, &p)?, load_module(ctx, np, &p)?));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let field = ctx.field.unwrap_or(GF2);
        for _ in 0..trials.unwrap_or(1) {
            pairs.push((random_module(&mut rng, &p, field, 2, 2)?, random_module(&mut rng, &p, field, 2, 2)?));
        }
    }
    let mut rows = Vec::new();
    let mut undecided = false;
    let mut agree_all = true;
    for (m, n) in &pairs {
        let a = rho_distance(&calc, m, n, ctx.budget, Scan::Bisect)?;
        let b = shift_oracle_distance(m, n, ctx.budget, Scan::Bisect)?;
        undecided |= !a.is_exact() || !b.is_exact();
        let agree = a.distance() == b.distance() && a.attained == b.attained;
        agree_all &= agree;
        rows.push(json!({ "distance": ext_json(a.distance()), "oracle": ext_json(b.distance()), "agree": agree }));
    }
    let code = if !agree_all { 1 } else if undecided { 2 } else { 0 };
    Ok(Outcome { report: json!({ "trials": rows, "agree": agree_all }), code })
}
