//! Flat `key = value` run configuration. Command-line flags override it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Every key the config file accepts. Unset keys fall back to flags or defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub beta: Option<f64>,
    pub n: Option<f64>,
    pub potential: Option<String>,
    pub method: Option<String>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub root_tol: Option<f64>,
    pub mass_tol: Option<f64>,
    pub r_max: Option<f64>,
    pub nodes: Option<usize>,
    pub grad_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub psi0_threshold: Option<f64>,
    pub mass_inner_threshold: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse::<T>().map_err(|_| anyhow::anyhow!("config line {line}: bad value `{value}` for `{key}`"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .with_context(|| format!("config line {line}: expected key = value, got `{content}`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "beta" => c.beta = Some(parse_value(key, value, line)?),
                "n" => c.n = Some(parse_value(key, value, line)?),
                "potential" => c.potential = Some(value.to_string()),
                "method" => c.method = Some(value.to_string()),
                "abs_tol" => c.abs_tol = Some(parse_value(key, value, line)?),
                "rel_tol" => c.rel_tol = Some(parse_value(key, value, line)?),
                "root_tol" => c.root_tol = Some(parse_value(key, value, line)?),
                "mass_tol" => c.mass_tol = Some(parse_value(key, value, line)?),
                "r_max" => c.r_max = Some(parse_value(key, value, line)?),
                "nodes" => c.nodes = Some(parse_value(key, value, line)?),
                "grad_tol" => c.grad_tol = Some(parse_value(key, value, line)?),
                "max_iter" => c.max_iter = Some(parse_value(key, value, line)?),
                "psi0_threshold" => c.psi0_threshold = Some(parse_value(key, value, line)?),
                "mass_inner_threshold" => c.mass_inner_threshold = Some(parse_value(key, value, line)?),
                "out_dir" => c.out_dir = Some(PathBuf::from(value)),
                "seed" => c.seed = Some(parse_value(key, value, line)?),
                "threads" => c.threads = Some(parse_value(key, value, line)?),
                other => bail!("config line {line}: unknown key `{other}`"),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Serializes set keys, floats in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = writeln!(s, "{k} = {v}");
            }
        };
        let f = |x: Option<f64>| x.map(|v| format!("{v:?}"));
        put("beta", f(self.beta));
        put("n", f(self.n));
        put("potential", self.potential.clone());
        put("method", self.method.clone());
        put("abs_tol", f(self.abs_tol));
        put("rel_tol", f(self.rel_tol));
        put("root_tol", f(self.root_tol));
        put("mass_tol", f(self.mass_tol));
        put("r_max", f(self.r_max));
        put("nodes", self.nodes.map(|v| v.to_string()));
        put("grad_tol", f(self.grad_tol));
        put("max_iter", self.max_iter.map(|v| v.to_string()));
        put("psi0_threshold", f(self.psi0_threshold));
        put("mass_inner_threshold", f(self.mass_inner_threshold));
        put("out_dir", self.out_dir.as_ref().map(|p| p.display().to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        s
    }

    /// Resolves an output path against `out_dir` when it is relative.
    pub fn output_path(&self, p: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }
}
