//! The `name:key=val,key=val` potential grammar.
//!
//! Names: `const` (c), `gauss` (gamma, alpha, npow), `sphere` (l, gamma),
//! `logsing` (alpha), and `table=path` for an `r,V` CSV file.

use std::collections::BTreeMap;

use liouville_core::{Error, Potential, Result};

fn malformed(spec: &str, why: impl std::fmt::Display) -> Error {
    Error::Parse(format!("malformed potential spec `{spec}`: {why}"))
}

pub fn parse_potential(spec: &str) -> Result<Potential> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix("table=") {
        return Potential::load_csv(path.trim());
    }
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut keys: BTreeMap<&str, &str> = BTreeMap::new();
    for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| malformed(spec, format!("`{pair}` is not key=value")))?;
        if keys.insert(k.trim(), v.trim()).is_some() {
            return Err(malformed(spec, format!("duplicate key `{}`", k.trim())));
        }
    }
    let allowed: &[&str] = match name {
        "const" => &["c"],
        "gauss" => &["gamma", "alpha", "npow"],
        "sphere" => &["l", "gamma"],
        "logsing" => &["alpha"],
        "table" => &["path"],
        other => return Err(malformed(spec, format!("unknown potential `{other}`"))),
    };
    if let Some(k) = keys.keys().find(|k| !allowed.contains(k)) {
        return Err(malformed(spec, format!("unknown key `{k}` for `{name}`")));
    }
    if name == "table" {
        let path = keys.get("path").ok_or_else(|| malformed(spec, "missing key `path`"))?;
        return Potential::load_csv(path);
    }
    let num = |key: &str, default: Option<f64>| -> Result<f64> {
        match keys.get(key) {
            Some(v) => v.parse::<f64>().map_err(|_| malformed(spec, format!("`{key}={v}` is not a number"))),
            None => default.ok_or_else(|| malformed(spec, format!("missing key `{key}`"))),
        }
    };
    let v = match name {
        "const" => Potential::Constant { c: num("c", Some(1.0))? },
        "gauss" => Potential::PowerGauss {
            n_pow: num("npow", Some(0.0))?,
            gamma: num("gamma", Some(1.0))?,
            alpha_exp: num("alpha", Some(2.0))?,
        },
        "sphere" => Potential::Sphere { l: num("l", None)?, gamma: num("gamma", Some(0.0))? },
        _ => Potential::LogSingular { alpha_cut: num("alpha", None)? },
    };
    v.validate()?;
    Ok(v)
}
