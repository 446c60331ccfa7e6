//! Channel documents.
//!
//! ```json
//! {
//!   "alphabets": {"x1": 2, "x2": 2, "y": 4},
//!   "q0": [1.0], "q1": [1.0], "q2": [1.0],
//!   "kernel": [[[[[1, 0, 0, 0], ...]]]],
//!   "scheme": {"pu": [...], "pv1": [...], "pv2": [...], "f1": [...], "f2": [...]}
//! }
//! ```
//!
//! `kernel` is indexed `[s0][s1][s2][x1][x2]` and holds a pmf over `y`.
//! State pmfs default to a single symbol. The optional scheme gives `pu`,
//! `pv1[u][s0][s1]` and `pv2[u][s0][s2]` as pmfs, and the encoder maps
//! `f1[u][v1][s0][s1]`, `f2[u][v2][s0][s2]` as symbols (`null` marks a
//! missing entry).

use std::fs;
use std::path::Path;

use macfb_core::{
    validate, ChannelKernel, CondPmf, DetMap, KernelShape, SchemeDistribution, StateModel,
};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct ChannelDoc {
    pub model: StateModel,
    pub kernel: ChannelKernel,
    pub scheme: Option<SchemeDistribution>,
}

impl ChannelDoc {
    /// The document's scheme, or the uncoded one when none is given.
    pub fn scheme_or_uncoded(&self) -> Result<SchemeDistribution, CliError> {
        match &self.scheme {
            Some(p) => Ok(p.clone()),
            None => Ok(SchemeDistribution::uncoded(&self.model, &self.kernel)?),
        }
    }
}

fn bad(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("at `{path}`: {msg}"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| bad(path, format!("missing field `{key}`")))
}

fn number(v: &Value, path: &str) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| bad(path, format!("expected a number, found {v}")))
}

fn count(v: &Value, path: &str) -> Result<usize, CliError> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| bad(path, format!("expected a nonnegative integer, found {v}")))
}

fn array<'a>(v: &'a Value, path: &str, len: Option<usize>) -> Result<&'a [Value], CliError> {
    let a = v.as_array().ok_or_else(|| bad(path, format!("expected an array, found {v}")))?;
    if let Some(n) = len {
        if a.len() != n {
            return Err(bad(path, format!("expected {n} entries, found {}", a.len())));
        }
    }
    Ok(a)
}

fn pmf(v: &Value, path: &str, len: Option<usize>) -> Result<Vec<f64>, CliError> {
    array(v, path, len)?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]")))
        .collect()
}

/// Walks a nested array of the given dimensions in row-major order.
fn nested<T>(
    v: &Value,
    path: &str,
    dims: &[usize],
    leaf: &mut impl FnMut(&Value, &str) -> Result<Vec<T>, CliError>,
) -> Result<Vec<T>, CliError> {
    match dims.split_first() {
        None => leaf(v, path),
        Some((&n, rest)) => {
            let mut out = Vec::new();
            for (i, x) in array(v, path, Some(n))?.iter().enumerate() {
                out.extend(nested(x, &format!("{path}[{i}]"), rest, leaf)?);
            }
            Ok(out)
        }
    }
}

pub fn load(path: &Path) -> Result<ChannelDoc, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<ChannelDoc, CliError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| bad("$", "expected an object"))?;
    let alph = field(obj, "alphabets", "$")?
        .as_object()
        .ok_or_else(|| bad("alphabets", "expected an object"))?;
    let size = |k: &str| -> Result<Option<usize>, CliError> {
        alph.get(k).map(|v| count(v, &format!("alphabets.{k}"))).transpose()
    };
    let state = |k: &str, a: &str| -> Result<Vec<f64>, CliError> {
        match obj.get(k) {
            Some(v) => pmf(v, k, size(a)?),
            None => match size(a)? {
                None | Some(1) => Ok(vec![1.0]),
                Some(n) => Err(bad(k, format!("missing, but alphabets.{a} = {n}"))),
            },
        }
    };
    let model = StateModel::new(state("q0", "s0")?, state("q1", "s1")?, state("q2", "s2")?)?;
    let need = |k: &str| size(k)?.ok_or_else(|| bad("alphabets", format!("missing `{k}`")));
    let shape = KernelShape {
        s0: model.q0.len(),
        s1: model.q1.len(),
        s2: model.q2.len(),
        x1: need("x1")?,
        x2: need("x2")?,
        y: need("y")?,
    };
    let dims = [shape.s0, shape.s1, shape.s2, shape.x1, shape.x2];
    let table = nested(field(obj, "kernel", "$")?, "kernel", &dims, &mut |v, p| {
        pmf(v, p, Some(shape.y))
    })?;
    let kernel = ChannelKernel::new(shape, table)?;
    let scheme = obj
        .get("scheme")
        .map(|s| parse_scheme(s, &model, &kernel))
        .transpose()?;
    Ok(ChannelDoc { model, kernel, scheme })
}

fn parse_scheme(
    v: &Value,
    model: &StateModel,
    kernel: &ChannelKernel,
) -> Result<SchemeDistribution, CliError> {
    let obj = v.as_object().ok_or_else(|| bad("scheme", "expected an object"))?;
    let pu = pmf(field(obj, "pu", "scheme")?, "scheme.pu", None)?;
    let nu = pu.len();
    let (n0, n1, n2) = (model.q0.len(), model.q1.len(), model.q2.len());
    let cond = |key: &str, nk: usize| -> Result<CondPmf, CliError> {
        let path = format!("scheme.{key}");
        let raw = field(obj, key, "scheme")?;
        // The satellite alphabet is read off the first pmf.
        let mut first = raw;
        for _ in 0..3 {
            first = array(first, &path, None)?
                .first()
                .ok_or_else(|| bad(&path, "empty array"))?;
        }
        let nv = array(first, &path, None)?.len();
        let table = nested(raw, &path, &[nu, n0, nk], &mut |x, p| pmf(x, p, Some(nv)))?;
        Ok(CondPmf::new(vec![nu, n0, nk], nv, table)?)
    };
    let pv1 = cond("pv1", n1)?;
    let pv2 = cond("pv2", n2)?;
    let shape = kernel.shape();
    let map = |key: &str, nv: usize, nk: usize, out: usize| -> Result<DetMap, CliError> {
        let path = format!("scheme.{key}");
        let table = nested(field(obj, key, "scheme")?, &path, &[nu, nv, n0, nk], &mut |x, p| {
            if x.is_null() {
                Ok(vec![None])
            } else {
                Ok(vec![Some(count(x, p)?)])
            }
        })?;
        Ok(DetMap::new([nu, nv, n0, nk], out, table)?)
    };
    let f1 = map("f1", pv1.out_size(), n1, shape.x1)?;
    let f2 = map("f2", pv2.out_size(), n2, shape.x2)?;
    let p = SchemeDistribution {
        states: model.clone(),
        kernel: kernel.clone(),
        pu,
        pv1,
        pv2,
        f1,
        f2,
    };
    let report = validate(&p);
    if !report.is_valid() {
        return Err(CliError::Config(format!("invalid scheme:\n{report}")));
    }
    Ok(p)
}
