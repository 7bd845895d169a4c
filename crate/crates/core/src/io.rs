//! JSON reading and writing. All numbers in emitted documents are fraction
//! strings or `"inf"`; inputs also accept JSON integers.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::erosion::{EnReport, SharedNeighborhood};
use crate::error::{Error, Result};
use crate::exactlin::{parse_rational, Field, Mat, Scalar};
use crate::functors::{Lan, Ran};
use crate::height::{CipReport, Ext, HeightDiff, Rational};
use crate::interleave::{Certificate, StrataReport};
use crate::pmod::{ModuleMorphism, PersistenceModule, Submodule, Subquotient};
use crate::poset::{FinitePoset, OrderMap};

fn bad(what: &str, detail: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{what}: {detail}"))
}

/// Reads a JSON file; syntax errors carry the path, line and column.
pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn field_obj<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(what, "expected an object"))
}

fn str_list(v: &Value, what: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| bad(what, "expected an array"))?
        .iter()
        .map(|x| x.as_str().map(str::to_string).ok_or_else(|| bad(what, "expected strings")))
        .collect()
}

fn number_text(v: &Value, what: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(n.to_string()),
        Value::Number(_) => Err(bad(what, "floats are not accepted; use a fraction string")),
        _ => Err(bad(what, "expected a number or a fraction string")),
    }
}

pub fn parse_ext(v: &Value, what: &str) -> Result<Ext> {
    number_text(v, what)?.parse()
}

pub fn parse_rational_value(v: &Value, what: &str) -> Result<Rational> {
    parse_rational(&number_text(v, what)?)
}

// posets

/// `{"elements": [...], "covers": [["a", "b"], ...]}` or `{"grid": [4, 3]}`.
pub fn parse_poset(v: &Value) -> Result<FinitePoset> {
    let obj = field_obj(v, "poset")?;
    if let Some(shape) = obj.get("grid") {
        let shape: Vec<usize> = shape
            .as_array()
            .ok_or_else(|| bad("poset.grid", "expected an array"))?
            .iter()
            .map(|x| x.as_u64().map(|n| n as usize).ok_or_else(|| bad("poset.grid", "expected sizes")))
            .collect::<Result<_>>()?;
        return FinitePoset::grid(&shape);
    }
    let elements = str_list(obj.get("elements").ok_or_else(|| bad("poset", "missing \"elements\""))?, "poset.elements")?;
    let covers = match obj.get("covers") {
        None => Vec::new(),
        Some(c) => c
            .as_array()
            .ok_or_else(|| bad("poset.covers", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, pair)| {
                let ids = str_list(pair, &format!("poset.covers[{i}]"))?;
                match <[String; 2]>::try_from(ids) {
                    Ok([a, b]) => Ok((a, b)),
                    Err(_) => Err(bad(&format!("poset.covers[{i}]"), "expected a pair")),
                }
            })
            .collect::<Result<_>>()?,
    };
    FinitePoset::new(&elements, &covers)
}

pub fn poset_to_json(p: &FinitePoset) -> Value {
    if let Some(g) = p.grid_info() {
        return json!({ "grid": g.shape });
    }
    let covers: Vec<[&str; 2]> = p.covers().iter().map(|&(a, b)| [p.name(a), p.name(b)]).collect();
    json!({ "elements": p.names(), "covers": covers })
}

// heights

/// `{"phi": {...}}`, `{"rho": [["a", "b", "3/2"], ...]}`, `{"diag": true}` or `{"strict": true}`.
pub fn parse_height(v: &Value, poset: Arc<FinitePoset>) -> Result<HeightDiff> {
    let obj = field_obj(v, "height")?;
    if let Some(phi) = obj.get("phi") {
        let phi = field_obj(phi, "height.phi")?;
        let mut values = vec![None; poset.len()];
        for (id, val) in phi {
            values[poset.index_of(id)?] = Some(parse_rational_value(val, &format!("height.phi.{id}"))?);
        }
        let values: Vec<Rational> = values
            .into_iter()
            .enumerate()
            .map(|(i, x)| x.ok_or_else(|| bad("height.phi", format!("no value for {}", poset.name(i)))))
            .collect::<Result<_>>()?;
        return HeightDiff::from_phi(poset, &values);
    }
    if let Some(rho) = obj.get("rho") {
        let rows = rho.as_array().ok_or_else(|| bad("height.rho", "expected an array"))?;
        let mut entries = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let what = format!("height.rho[{i}]");
            let row = row.as_array().filter(|r| r.len() == 3).ok_or_else(|| bad(&what, "expected [a, b, value]"))?;
            let a = poset.index_of(row[0].as_str().ok_or_else(|| bad(&what, "element ids are strings"))?)?;
            let b = poset.index_of(row[1].as_str().ok_or_else(|| bad(&what, "element ids are strings"))?)?;
            entries.push((a, b, parse_ext(&row[2], &what)?));
        }
        return HeightDiff::from_table(poset, &entries);
    }
    if obj.get("diag").and_then(Value::as_bool) == Some(true) {
        return HeightDiff::diagonal(poset);
    }
    if obj.get("strict").and_then(Value::as_bool) == Some(true) {
        return Ok(HeightDiff::strict(poset));
    }
    Err(bad("height", "expected one of \"phi\", \"rho\", \"diag\", \"strict\""))
}

pub fn height_to_json(rho: &HeightDiff) -> Value {
    let p = rho.poset();
    let rows: Vec<Value> = p
        .comparable_pairs()
        .into_iter()
        .filter(|(a, b)| a != b)
        .map(|(a, b)| json!([p.name(a), p.name(b), rho.rho(a, b).to_string()]))
        .collect();
    json!({ "rho": rows })
}

// fields and matrices

/// `{"kind": "gfp", "p": 2}` or `{"kind": "rational"}`; a bare string like `"gf2"` also works.
pub fn parse_field(v: &Value) -> Result<Field> {
    if let Some(s) = v.as_str() {
        return s.parse();
    }
    let obj = field_obj(v, "field")?;
    match obj.get("kind").and_then(Value::as_str) {
        Some("gfp") => {
            let p = obj.get("p").and_then(Value::as_u64).ok_or_else(|| bad("field.p", "expected a prime"))?;
            Field::prime(u32::try_from(p).map_err(|_| bad("field.p", "too large"))?)
        }
        Some("rational") => Ok(Field::Rational),
        _ => Err(bad("field.kind", "expected \"gfp\" or \"rational\"")),
    }
}

pub fn field_to_json(field: Field) -> Value {
    match field {
        Field::Prime(p) => json!({ "kind": "gfp", "p": p }),
        Field::Rational => json!({ "kind": "rational" }),
    }
}

fn parse_scalar(v: &Value, field: Field, what: &str) -> Result<Scalar> {
    field.from_rational(&parse_rational_value(v, what)?)
}

/// Row-major matrix with a known shape.
pub fn parse_mat(v: &Value, field: Field, rows: usize, cols: usize, what: &str) -> Result<Mat> {
    let data = v.as_array().ok_or_else(|| bad(what, "expected an array of rows"))?;
    if data.len() != rows {
        return Err(Error::Dimension(format!("{what}: {} rows, expected {rows}", data.len())));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, row) in data.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| bad(what, "expected an array of rows"))?;
        if row.len() != cols {
            return Err(Error::Dimension(format!("{what}: row {i} has {} entries, expected {cols}", row.len())));
        }
        for x in row {
            entries.push(parse_scalar(x, field, what)?);
        }
    }
    Ok(Mat::from_scalars(field, rows, cols, entries))
}

pub fn mat_to_json(m: &Mat) -> Value {
    let rows: Vec<Vec<String>> =
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect()).collect();
    json!(rows)
}

// modules and morphisms

/// `{"field": ..., "dims": {"a": 1, ...}, "maps": {"a|b": [[...]], ...}}`. Missing dims are 0;
/// `field_override` replaces the declared field.
pub fn parse_module(v: &Value, poset: Arc<FinitePoset>, field_override: Option<Field>) -> Result<PersistenceModule> {
    let obj = field_obj(v, "module")?;
    let field = match (field_override, obj.get("field")) {
        (Some(f), _) => f,
        (None, Some(f)) => parse_field(f)?,
        (None, None) => return Err(bad("module", "missing \"field\"")),
    };
    let mut dims = vec![0usize; poset.len()];
    if let Some(d) = obj.get("dims") {
        for (id, val) in field_obj(d, "module.dims")? {
            dims[poset.index_of(id)?] =
                val.as_u64().ok_or_else(|| bad(&format!("module.dims.{id}"), "expected a count"))? as usize;
        }
    }
    let mut maps = HashMap::new();
    if let Some(ms) = obj.get("maps") {
        for (key, val) in field_obj(ms, "module.maps")? {
            let what = format!("module.maps.{key}");
            let (a, b) = key.split_once('|').ok_or_else(|| bad(&what, "keys look like \"lower|upper\""))?;
            let (a, b) = (poset.index_of(a)?, poset.index_of(b)?);
            maps.insert((a, b), parse_mat(val, field, dims[b], dims[a], &what)?);
        }
    }
    PersistenceModule::new(poset, field, dims, maps)
}

pub fn module_to_json(m: &PersistenceModule) -> Value {
    let p = m.poset();
    let dims: Map<String, Value> = (0..p.len()).map(|a| (p.name(a).to_string(), json!(m.dim(a)))).collect();
    let maps: Map<String, Value> = p
        .covers()
        .iter()
        .filter(|&&(a, b)| m.dim(a) > 0 && m.dim(b) > 0)
        .map(|&(a, b)| (format!("{}|{}", p.name(a), p.name(b)), mat_to_json(m.map(a, b))))
        .collect();
    json!({ "field": field_to_json(m.field()), "dims": dims, "maps": maps })
}

/// `{"components": {"a": [[...]], ...}}`; missing components are zero.
pub fn parse_morphism(v: &Value, source: Arc<PersistenceModule>, target: Arc<PersistenceModule>) -> Result<ModuleMorphism> {
    let obj = field_obj(v, "morphism")?;
    let p = source.poset().clone();
    let field = source.field();
    let mut comps: Vec<Mat> = (0..p.len()).map(|a| Mat::zeros(field, target.dim(a), source.dim(a))).collect();
    if let Some(cs) = obj.get("components") {
        for (id, val) in field_obj(cs, "morphism.components")? {
            let a = p.index_of(id)?;
            comps[a] = parse_mat(val, field, target.dim(a), source.dim(a), &format!("morphism.components.{id}"))?;
        }
    }
    ModuleMorphism::new(source, target, comps)
}

pub fn morphism_to_json(f: &ModuleMorphism) -> Value {
    let p = f.source.poset();
    let comps: Map<String, Value> = (0..p.len())
        .filter(|&a| f.component(a).rows() * f.component(a).cols() > 0)
        .map(|a| (p.name(a).to_string(), mat_to_json(f.component(a))))
        .collect();
    json!({ "components": comps })
}

/// `{"map": {"x": "a", ...}}` from `source` to `target`.
pub fn parse_order_map(v: &Value, source: Arc<FinitePoset>, target: Arc<FinitePoset>) -> Result<OrderMap> {
    let obj = field_obj(v, "order map")?;
    let map = field_obj(obj.get("map").ok_or_else(|| bad("order map", "missing \"map\""))?, "order map.map")?;
    let pairs: Vec<(String, String)> = map
        .iter()
        .map(|(k, v)| {
            v.as_str().map(|t| (k.clone(), t.to_string())).ok_or_else(|| bad(&format!("map.{k}"), "expected an id"))
        })
        .collect::<Result<_>>()?;
    OrderMap::from_names(source, target, &pairs)
}

pub fn order_map_to_json(f: &OrderMap) -> Value {
    let map: Map<String, Value> =
        (0..f.source.len()).map(|a| (f.source.name(a).to_string(), json!(f.target.name(f.apply(a))))).collect();
    json!({ "map": map })
}

// reports

pub fn lan_to_json(l: &Lan) -> Value {
    let p = l.output.poset();
    let legs: Map<String, Value> = (0..p.len())
        .map(|a| {
            let per: Map<String, Value> =
                l.set(a).iter().map(|&x| (p.name(x).to_string(), mat_to_json(&l.leg(a, x)))).collect();
            (p.name(a).to_string(), Value::Object(per))
        })
        .collect();
    let mut out = module_to_json(&l.output);
    out["legs"] = Value::Object(legs);
    out
}

pub fn ran_to_json(r: &Ran) -> Value {
    let p = r.output.poset();
    let legs: Map<String, Value> = (0..p.len())
        .map(|a| {
            let per: Map<String, Value> =
                r.set(a).iter().map(|&y| (p.name(y).to_string(), mat_to_json(&r.leg(a, y)))).collect();
            (p.name(a).to_string(), Value::Object(per))
        })
        .collect();
    let mut out = module_to_json(&r.output);
    out["legs"] = Value::Object(legs);
    out
}

pub fn certificate_to_json(c: &Certificate) -> Value {
    json!({ "r": c.r.to_string(), "p": morphism_to_json(&c.p), "q": morphism_to_json(&c.q) })
}

pub fn strata_report_to_json(rep: &StrataReport) -> Value {
    let strata: Vec<Value> = rep
        .strata
        .iter()
        .map(|s| {
            json!({
                "interval": s.stratum.interval_strings(),
                "verdict": s.verdict,
                "tested": s.tested,
            })
        })
        .collect();
    let mut out = json!({
        "strata": strata,
        "attained": rep.attained,
        "certificate": rep.certificate.as_ref().map(certificate_to_json),
    });
    match rep.distance() {
        Some(d) => out["distance"] = json!(d.to_string()),
        None => {
            out["distance"] = Value::Null;
            out["bounds"] = json!([rep.lower.to_string(), rep.upper.to_string()]);
        }
    }
    out
}

pub fn submodule_to_json(s: &Submodule) -> Value {
    let p = s.parent().poset();
    let bases: Map<String, Value> = (0..p.len()).map(|a| (p.name(a).to_string(), mat_to_json(s.basis(a)))).collect();
    json!(bases)
}

/// Pointwise bases (as columns) of the two submodules, and the quotient module.
pub fn subquotient_to_json(sq: &Subquotient) -> Value {
    json!({
        "upper": submodule_to_json(&sq.upper),
        "lower": submodule_to_json(&sq.lower),
        "module": module_to_json(&sq.module),
    })
}

fn shared_to_json(w: &SharedNeighborhood) -> Value {
    json!({ "r": w.r.to_string(), "in_m": subquotient_to_json(&w.in_m), "in_n": subquotient_to_json(&w.in_n) })
}

pub fn en_report_to_json(rep: &EnReport) -> Value {
    let mut out = strata_report_to_json(&rep.report);
    out["witness"] = rep.witness.as_ref().map(shared_to_json).unwrap_or(Value::Null);
    out
}

pub fn cip_report_to_json(p: &FinitePoset, rep: &CipReport) -> Value {
    let witness = rep.witness.as_ref().map(|w| {
        let set: Vec<&str> = w.set.iter().map(|&x| p.name(x)).collect();
        json!({ "a": p.name(w.a), "q": p.name(w.q), "s": w.s.to_string(), "r": w.r.to_string(), "set": set })
    });
    json!({ "verdict": rep.verdict, "witness": witness, "checked": rep.checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::GF2;
    use crate::fixtures::{chain_example, grid_example};
    use crate::height::rat;

    #[test]
    fn poset_and_module_round_trip() {
        let ex = grid_example(GF2).unwrap();
        let p = ex.m.poset().clone();
        let pj = poset_to_json(&p);
        assert_eq!(parse_poset(&pj).unwrap(), *p);
        let mj = module_to_json(&ex.m);
        let back = parse_module(&mj, p.clone(), None).unwrap();
        assert_eq!(back, *ex.m);
        let hj = height_to_json(&ex.rho);
        assert_eq!(parse_height(&hj, p).unwrap(), ex.rho);
    }

    #[test]
    fn inputs_accept_fractions_and_reject_floats() {
        let p = Arc::new(parse_poset(&json!({"elements": ["a", "b"], "covers": [["a", "b"]]})).unwrap());
        let h = parse_height(&json!({"phi": {"a": 0, "b": "3/2"}}), p.clone()).unwrap();
        assert_eq!(h.rho(0, 1), &Ext::Finite(crate::height::frac(3, 2)));
        assert!(parse_height(&json!({"phi": {"a": 0, "b": 1.5}}), p.clone()).is_err());
        let m = parse_module(
            &json!({"field": {"kind": "rational"}, "dims": {"a": 1, "b": 1}, "maps": {"a|b": [["1/2"]]}}),
            p.clone(),
            None,
        )
        .unwrap();
        assert_eq!(m.map(0, 1).get(0, 0).to_string(), "1/2");
        let r = parse_height(&json!({"rho": [["a", "b", "inf"]]}), p).unwrap();
        assert_eq!(r.rho(0, 1), &Ext::Infinite);
    }

    #[test]
    fn cyclic_covers_are_rejected() {
        let err = parse_poset(&json!({"elements": ["a", "b", "c"], "covers": [["a", "b"], ["b", "c"], ["c", "a"]]}))
            .unwrap_err();
        assert!(matches!(err, Error::Cycle(_)));
    }

    #[test]
    fn morphisms_and_reports_serialize() {
        let ex = chain_example(GF2, &rat(2)).unwrap();
        let id = ModuleMorphism::identity(ex.m.clone());
        let back = parse_morphism(&morphism_to_json(&id), ex.m.clone(), ex.m.clone()).unwrap();
        assert!(back.same_matrices(&id));
        let calc = crate::functors::Calculus::new(ex.rho.clone());
        let rep = crate::interleave::distance(&calc, &ex.m, &ex.n, 1 << 20, crate::interleave::Scan::Bisect).unwrap();
        let j = strata_report_to_json(&rep);
        assert_eq!(j["distance"], json!("2"));
        assert_eq!(j["strata"][0]["interval"], json!(["0", "0"]));
        assert!(j.to_string().find('.').is_none(), "no floats in reports");
    }
}
