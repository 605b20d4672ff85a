//! JSON syntax for functions and maps.
//!
//! Functions: `{"op": "delta", "vec": [..]}`, `{"op": "normfn"}`,
//! `{"op": "scale", "c": .., "arg": ..}`, `{"op": "sum"|"sup"|"inf", "args": [..]}`,
//! `{"op": "abs", "arg": ..}`, `{"op": "ray", "dir": [..]}`,
//! `{"op": "mu", "p": .., "atoms": [[w, [..]], ..]}`,
//! `{"op": "compose", "map": <map>, "arg": ..}`.
//!
//! Maps: `{"map": "adjoint", "matrix": [[..]]}`, `{"map": "modulus"}`,
//! `{"map": "rank1", "fn": <function>, "x0star": [..]}`,
//! `{"map": "tabulated", "action": {"0": <function>, ..}}`,
//! `{"map": "compose", "outer": <map>, "inner": <map>}`. A map may carry
//! `"source"` and `"target"` space objects; missing ones default to the space
//! of the surrounding function.
//!
//! Parse errors name the offending node by its JSON path.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::homfn::{DiscreteMeasure, HomFn};
use crate::phmaps::{extract_phi, PhKind, PhMap};
use crate::spaces::{Functional, Space, Vector};

fn bad(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("at {path}: {msg}"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| bad(path, format!("missing field \"{key}\"")))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(path, "expected a finite number"))
}

fn numbers(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| bad(path, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn dims(got: usize, want: usize, path: &str) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(bad(path, format!("expected {want} coordinates, got {got}")))
    }
}

/// Parses a function over `space` (the space `E` whose dual it acts on).
pub fn homfn_from_json(v: &Value, space: &Space) -> Result<HomFn> {
    parse_fn(v, space, "$")
}

fn parse_fn(v: &Value, space: &Space, path: &str) -> Result<HomFn> {
    let obj = object(v, path)?;
    let op = field(obj, "op", path)?
        .as_str()
        .ok_or_else(|| bad(path, "\"op\" must be a string"))?;
    let children = |key: &str| -> Result<Vec<HomFn>> {
        let p = format!("{path}.{key}");
        let arr = field(obj, key, path)?
            .as_array()
            .ok_or_else(|| bad(&p, "expected an array"))?;
        arr.iter()
            .enumerate()
            .map(|(i, c)| parse_fn(c, space, &format!("{p}[{i}]")))
            .collect()
    };
    let child = |key: &str| parse_fn(field(obj, key, path)?, space, &format!("{path}.{key}"));
    Ok(match op {
        "delta" => {
            let p = format!("{path}.vec");
            let c = numbers(field(obj, "vec", path)?, &p)?;
            dims(c.len(), space.dim(), &p)?;
            HomFn::Delta(Vector(c))
        }
        "normfn" => HomFn::NormFn,
        "scale" => HomFn::Scale(
            number(field(obj, "c", path)?, &format!("{path}.c"))?,
            Box::new(child("arg")?),
        ),
        "abs" => HomFn::Abs(Box::new(child("arg")?)),
        "sum" => HomFn::Sum(children("args")?),
        "sup" | "inf" => {
            let cs = children("args")?;
            if cs.is_empty() {
                return Err(bad(path, format!("\"{op}\" needs at least one argument")));
            }
            if op == "sup" {
                HomFn::Sup(cs)
            } else {
                HomFn::Inf(cs)
            }
        }
        "ray" => {
            let p = format!("{path}.dir");
            let c = numbers(field(obj, "dir", path)?, &p)?;
            dims(c.len(), space.dim(), &p)?;
            HomFn::Ray(Functional(c))
        }
        "mu" => {
            let p = number(field(obj, "p", path)?, &format!("{path}.p"))?;
            if p < 1.0 {
                return Err(bad(&format!("{path}.p"), format!("exponent {p} is below 1")));
            }
            let ap = format!("{path}.atoms");
            let arr = field(obj, "atoms", path)?
                .as_array()
                .ok_or_else(|| bad(&ap, "expected an array of [weight, point] pairs"))?;
            let mut atoms = Vec::with_capacity(arr.len());
            for (i, a) in arr.iter().enumerate() {
                let pp = format!("{ap}[{i}]");
                let pair = a
                    .as_array()
                    .filter(|x| x.len() == 2)
                    .ok_or_else(|| bad(&pp, "expected [weight, point]"))?;
                let w = number(&pair[0], &format!("{pp}[0]"))?;
                let x = numbers(&pair[1], &format!("{pp}[1]"))?;
                dims(x.len(), space.dim(), &format!("{pp}[1]"))?;
                atoms.push((w, Vector(x)));
            }
            let measure = DiscreteMeasure::new(atoms).map_err(|e| bad(&ap, e))?;
            HomFn::Mu { measure, p }
        }
        "compose" => {
            let mp = format!("{path}.map");
            let map = parse_map(field(obj, "map", path)?, space, space, &mp)?;
            let arg = parse_fn(field(obj, "arg", path)?, map.target(), &format!("{path}.arg"))?;
            HomFn::Composed {
                arg: Box::new(arg),
                map: Box::new(map),
            }
        }
        other => return Err(bad(path, format!("unknown op \"{other}\""))),
    })
}

/// Parses a map whose source and target default to the given spaces.
pub fn phmap_from_json(v: &Value, source: &Space, target: &Space) -> Result<PhMap> {
    parse_map(v, source, target, "$")
}

fn parse_space(v: &Value, path: &str) -> Result<Space> {
    serde_json::from_value(v.clone()).map_err(|e| bad(path, e))
}

fn parse_map(v: &Value, source: &Space, target: &Space, path: &str) -> Result<PhMap> {
    let obj = object(v, path)?;
    let kind = field(obj, "map", path)?
        .as_str()
        .ok_or_else(|| bad(path, "\"map\" must be a string"))?;
    let source = match obj.get("source") {
        Some(s) => parse_space(s, &format!("{path}.source"))?,
        None => source.clone(),
    };
    let target = match obj.get("target") {
        Some(s) => parse_space(s, &format!("{path}.target"))?,
        None => target.clone(),
    };
    let wrap = |e: Error| bad(path, e);
    match kind {
        "adjoint" => {
            let mp = format!("{path}.matrix");
            let rows = field(obj, "matrix", path)?
                .as_array()
                .ok_or_else(|| bad(&mp, "expected an array of rows"))?;
            let m = rows
                .iter()
                .enumerate()
                .map(|(i, r)| numbers(r, &format!("{mp}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            PhMap::adjoint(m, source, target).map_err(wrap)
        }
        "modulus" => {
            if source != target {
                return Err(bad(path, "modulus needs equal source and target spaces"));
            }
            Ok(PhMap::modulus(source))
        }
        "rank1" => {
            let f = parse_fn(field(obj, "fn", path)?, &source, &format!("{path}.fn"))?;
            let xp = format!("{path}.x0star");
            let x0 = numbers(field(obj, "x0star", path)?, &xp)?;
            dims(x0.len(), target.dim(), &xp)?;
            PhMap::rank_one(f, Functional(x0), source, target).map_err(wrap)
        }
        "tabulated" => {
            let ap = format!("{path}.action");
            let act = field(obj, "action", path)?
                .as_object()
                .ok_or_else(|| bad(&ap, "expected an object keyed by basis index"))?;
            let mut action = BTreeMap::new();
            for (k, h) in act {
                let i: usize = k
                    .parse()
                    .map_err(|_| bad(&ap, format!("key \"{k}\" is not a basis index")))?;
                action.insert(i, parse_fn(h, &source, &format!("{ap}.\"{k}\""))?);
            }
            extract_phi(&target, &source, &action).map_err(|e| bad(&ap, e))
        }
        "compose" => {
            let inner_v = field(obj, "inner", path)?;
            let inner = parse_map(inner_v, &source, &source, &format!("{path}.inner"))?;
            let outer = parse_map(
                field(obj, "outer", path)?,
                inner.target(),
                &target,
                &format!("{path}.outer"),
            )?;
            PhMap::composite(outer, inner).map_err(wrap)
        }
        other => Err(bad(path, format!("unknown map \"{other}\""))),
    }
}

pub fn homfn_to_json(f: &HomFn) -> Value {
    match f {
        HomFn::Delta(v) => json!({"op": "delta", "vec": v.0}),
        HomFn::NormFn => json!({"op": "normfn"}),
        HomFn::Scale(c, g) => json!({"op": "scale", "c": c, "arg": homfn_to_json(g)}),
        HomFn::Sum(cs) => json!({"op": "sum", "args": cs.iter().map(homfn_to_json).collect::<Vec<_>>()}),
        HomFn::Sup(cs) => json!({"op": "sup", "args": cs.iter().map(homfn_to_json).collect::<Vec<_>>()}),
        HomFn::Inf(cs) => json!({"op": "inf", "args": cs.iter().map(homfn_to_json).collect::<Vec<_>>()}),
        HomFn::Abs(g) => json!({"op": "abs", "arg": homfn_to_json(g)}),
        HomFn::Ray(d) => json!({"op": "ray", "dir": d.0}),
        HomFn::Mu { measure, p } => json!({
            "op": "mu",
            "p": p,
            "atoms": measure.atoms().iter().map(|(w, x)| json!([w, x.0])).collect::<Vec<_>>(),
        }),
        HomFn::Composed { arg, map } => {
            json!({"op": "compose", "map": phmap_to_json(map), "arg": homfn_to_json(arg)})
        }
    }
}

pub fn phmap_to_json(m: &PhMap) -> Value {
    let mut v = match m.kind() {
        PhKind::Adjoint(mat) => json!({"map": "adjoint", "matrix": mat}),
        PhKind::Modulus => json!({"map": "modulus"}),
        PhKind::RankOne { f, x0 } => json!({"map": "rank1", "fn": homfn_to_json(f), "x0star": x0.0}),
        PhKind::Tabulated(action) => {
            let obj: Map<String, Value> = action
                .iter()
                .enumerate()
                .map(|(i, h)| (i.to_string(), homfn_to_json(h)))
                .collect();
            json!({"map": "tabulated", "action": obj})
        }
        PhKind::Composite { outer, inner } => {
            json!({"map": "compose", "outer": phmap_to_json(outer), "inner": phmap_to_json(inner)})
        }
    };
    let obj = v.as_object_mut().expect("object literal");
    obj.insert("source".into(), serde_json::to_value(m.source()).expect("space serializes"));
    obj.insert("target".into(), serde_json::to_value(m.target()).expect("space serializes"));
    v
}

/// Serde adapter for fields holding a [`HomFn`]; deserialization is not
/// offered because parsing needs the ambient space.
pub mod as_ast {
    use serde::Serializer;

    use crate::homfn::HomFn;

    pub fn serialize<S: Serializer>(f: &HomFn, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&super::homfn_to_json(f), s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let l2 = Space::l2(2);
        let phi = PhMap::adjoint(vec![vec![0.0, 1.0], vec![1.0, 0.0]], l2.clone(), l2.clone()).unwrap();
        let f = HomFn::Sup(vec![
            HomFn::delta(vec![1.0, 2.0]).abs(),
            HomFn::NormFn.scale(0.5),
            HomFn::ray(vec![0.5, 0.0]),
            HomFn::mu(DiscreteMeasure::dirac(Vector(vec![0.0, 1.0])), 2.0).unwrap(),
            crate::phmaps::compose_op(&phi, HomFn::delta(vec![1.0, 0.0]).min(HomFn::zero())).unwrap(),
            crate::phmaps::compose_op(&PhMap::modulus(l2.clone()), HomFn::delta(vec![1.0, -1.0])).unwrap(),
        ]);
        let j = homfn_to_json(&f);
        let back = homfn_from_json(&j, &l2).unwrap();
        assert_eq!(back, f);
        let m = PhMap::rank_one(HomFn::NormFn, Functional(vec![1.0, 0.0]), l2.clone(), l2.clone()).unwrap();
        let t = PhMap::tabulated(vec![HomFn::NormFn, HomFn::delta(vec![1.0, 1.0])], l2.clone(), l2.clone()).unwrap();
        let c = PhMap::composite(m.clone(), t.clone()).unwrap();
        for map in [m, t, c, phi] {
            assert_eq!(phmap_from_json(&phmap_to_json(&map), &l2, &l2).unwrap(), map);
        }
    }

    #[test]
    fn errors_name_the_node() {
        let l2 = Space::l2(2);
        let v: Value = serde_json::from_str(
            r#"{"op":"sup","args":[{"op":"delta","vec":[1,2]},{"op":"supp","args":[]}]}"#,
        )
        .unwrap();
        let e = homfn_from_json(&v, &l2).unwrap_err().to_string();
        assert!(e.contains("$.args[1]") && e.contains("supp"), "{e}");
        let v: Value = serde_json::from_str(r#"{"op":"delta","vec":[1,2,3]}"#).unwrap();
        let e = homfn_from_json(&v, &l2).unwrap_err().to_string();
        assert!(e.contains("$.vec"), "{e}");
        let v: Value = serde_json::from_str(r#"{"op":"abs"}"#).unwrap();
        assert!(homfn_from_json(&v, &l2).unwrap_err().to_string().contains("\"arg\""));
        let v: Value = serde_json::from_str(r#"{"map":"tabulated","action":{"0":{"op":"normfn"}}}"#).unwrap();
        let e = phmap_from_json(&v, &l2, &l2).unwrap_err().to_string();
        assert!(e.contains("e_1"), "{e}");
    }
}
