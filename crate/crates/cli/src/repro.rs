//! Worked examples recomputed from the bundled fixtures.

use std::sync::Arc;

use clap::Subcommand;
use hint_core::exactlin::GF2;
use hint_core::fixtures::{
    at, bipath_example, chain_example, grid_dims, grid_example, grid_left_decomposition, grid_right_decomposition,
    GRID_L1_DIMS, GRID_R1_DIMS,
};
use hint_core::functors::Calculus;
use hint_core::height::{rat, Ext, Rational};
use hint_core::interleave::{distance, Scan, StrataReport};
use hint_core::io::strata_report_to_json;
use hint_core::pmod::{hom_dim, is_isomorphic, PersistenceModule};
use hint_core::verdict::Verdict;
use hint_core::Result;
use serde_json::{json, Value};

use crate::commands::{Ctx, Outcome};
use crate::rational_arg;

#[derive(Subcommand, Debug)]
pub enum Example {
    /// 4x3 grid with phi = i + j: L_1 M, R_1 M and their decompositions.
    Grid,
    /// Four-point chain with phi = (0, 1, C+1, 2C+1).
    Chain {
        #[arg(long = "C", value_parser = rational_arg, default_value = "2")]
        c: Rational,
    },
    /// Discrete bipath of length G with M = k_B and N = L_1 L_1 M.
    Bipath {
        #[arg(long = "G", default_value_t = 8)]
        g: usize,
    },
}

pub fn run(ctx: &Ctx, example: &Example) -> Result<Outcome> {
    match example {
        Example::Grid => grid(ctx),
        Example::Chain { c } => chain(ctx, c),
        Example::Bipath { g } => bipath(ctx, *g),
    }
}

fn rows(dims: &[usize]) -> Vec<Vec<usize>> {
    (0..3).map(|r| (0..4).map(|i| dims[i * 3 + (2 - r)]).collect()).collect()
}

fn checked(report: Value, ok: bool, undecided: bool) -> Outcome {
    let code = if !ok { 1 } else if undecided { 2 } else { 0 };
    let mut report = report;
    report["ok"] = json!(ok);
    Outcome { report, code }
}

fn grid(ctx: &Ctx) -> Result<Outcome> {
    let field = ctx.field.unwrap_or(GF2);
    let ex = grid_example(field)?;
    let calc = Calculus::new(ex.rho.clone());
    let p = ex.m.poset().clone();
    let l = calc.left(&rat(1), &ex.m)?.output.clone();
    let r = calc.right(&rat(1), &ex.m)?.output.clone();
    let l_iso = is_isomorphic(&l, &Arc::new(grid_left_decomposition(&p, field)?), ctx.budget)?.verdict;
    let r_iso = is_isomorphic(&r, &Arc::new(grid_right_decomposition(&p, field)?), ctx.budget)?.verdict;
    let l_ok = l.dims() == grid_dims(GRID_L1_DIMS).as_slice();
    let r_ok = r.dims() == grid_dims(GRID_R1_DIMS).as_slice();
    let l22 = l.dim(at(&p, 2, 2));
    let report = json!({
        "example": "grid",
        "field": field.to_string(),
        "L1_dims": rows(l.dims()),
        "R1_dims": rows(r.dims()),
        "L1_dims_match": l_ok,
        "R1_dims_match": r_ok,
        "L1_at_v_2_2": l22,
        "L1_decomposition": l_iso,
        "R1_decomposition": r_iso,
    });
    let undecided = l_iso == Verdict::Unknown || r_iso == Verdict::Unknown;
    Ok(checked(report, l_ok && r_ok && l22 == 0 && l_iso != Verdict::No && r_iso != Verdict::No, undecided))
}

fn ext_str(rep: &StrataReport) -> Value {
    rep.distance().map(|d| json!(d.to_string())).unwrap_or(Value::Null)
}

fn chain(ctx: &Ctx, c: &Rational) -> Result<Outcome> {
    let field = ctx.field.unwrap_or(GF2);
    let ex = chain_example(field, c)?;
    let calc = Calculus::new(ex.rho.clone());
    let mx = distance(&calc, &ex.m, &ex.x, ctx.budget, Scan::Exhaustive)?;
    let xn = distance(&calc, &ex.x, &ex.n, ctx.budget, Scan::Exhaustive)?;
    let mn = distance(&calc, &ex.m, &ex.n, ctx.budget, Scan::Exhaustive)?;
    let expected = [Ext::zero(), Ext::zero(), Ext::Finite(c.clone())];
    let got = [mx.distance(), xn.distance(), mn.distance()];
    let ok = got.iter().zip(&expected).all(|(g, e)| *g == Some(e));
    let triangle = match got {
        [Some(a), Some(b), Some(d)] => json!({ "lhs": d.to_string(), "rhs": a.add(b).to_string(), "violated": *d > a.add(b) }),
        _ => Value::Null,
    };
    let report = json!({
        "example": "chain",
        "C": c.to_string(),
        "field": field.to_string(),
        "d_M_X": strata_report_to_json(&mx),
        "d_X_N": strata_report_to_json(&xn),
        "d_M_N": strata_report_to_json(&mn),
        "distances": [ext_str(&mx), ext_str(&xn), ext_str(&mn)],
        "triangle": triangle,
    });
    Ok(checked(report, ok, !(mx.is_exact() && xn.is_exact() && mn.is_exact())))
}

fn bipath(ctx: &Ctx, g: usize) -> Result<Outcome> {
    let field = ctx.field.unwrap_or(GF2);
    let ex = bipath_example(field, g)?;
    let calc = Calculus::new(ex.rho.clone());
    let m1 = calc.left(&rat(1), &ex.m)?.output.clone();
    let n = calc.left(&rat(1), &m1)?.output.clone();
    let mut hom = Vec::new();
    let mut hom_ok = true;
    let mut e_nonzero = Vec::new();
    let mut e_ok = true;
    for st in ex.rho.strata() {
        let r = &st.representative;
        let lr: Arc<PersistenceModule> = calc.left(r, &ex.m)?.output.clone();
        if *r < rat(g as i64) {
            let d = hom_dim(&lr, &n)?;
            hom_ok &= d == 0;
            hom.push(json!({ "stratum": st.to_string(), "hom_dim": d }));
        }
        let nz = !calc.e(r, &ex.m)?.is_zero();
        e_ok &= nz == (Ext::Finite(r.clone()) <= Ext::Finite(rat(g as i64) / rat(2)));
        e_nonzero.push(json!({ "stratum": st.to_string(), "nonzero": nz }));
    }
    let mn = distance(&calc, &ex.m, &n, ctx.budget, Scan::Bisect)?;
    let mm1 = distance(&calc, &ex.m, &m1, ctx.budget, Scan::Bisect)?;
    let m1n = distance(&calc, &m1, &n, ctx.budget, Scan::Bisect)?;
    let c = calc.rho().c_rho().value;
    let half = Ext::Finite(rat(g as i64) / rat(2));
    let rti = match (mn.distance(), mm1.distance(), m1n.distance()) {
        (Some(d), Some(a), Some(b)) => {
            let rhs = a.add(b).add(&c);
            json!({ "lhs": d.to_string(), "rhs": rhs.to_string(), "violated": *d > rhs })
        }
        _ => Value::Null,
    };
    let ok = hom_ok && e_ok && mn.distance() == Some(&half) && rti["violated"] == json!(true);
    let report = json!({
        "example": "bipath",
        "G": g,
        "field": field.to_string(),
        "hom_L_r_M_N": hom,
        "e_r_M": e_nonzero,
        "d_M_N": ext_str(&mn),
        "d_M_M1": ext_str(&mm1),
        "d_M1_N": ext_str(&m1n),
        "c_rho": c.to_string(),
        "relaxed_triangle": rti,
    });
    Ok(checked(report, ok, !(mn.is_exact() && mm1.is_exact() && m1n.is_exact())))
}
