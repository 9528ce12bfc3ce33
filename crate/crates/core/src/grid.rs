//! Radial meshes and the quadrature `2π ∫ g(r) r dr` over them.
//!
//! Every grid keeps its smallest node strictly positive. The cell `[0, r₀]`
//! is integrated with an analytic local model chosen by the caller (see
//! [`OriginModel`]), so singular weights never get evaluated at the origin.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest node of a log-graded grid, relative to `r_max`.
pub const LOG_FLOOR: f64 = 1e-8;

/// Minimum node count accepted by [`make_grid`].
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "exponent", rename_all = "lowercase")]
pub enum Grading {
    /// `rᵢ = r_max · i / N`, `i = 1..=N`.
    Uniform,
    /// Geometric nodes from `LOG_FLOOR · r_max` to `r_max`.
    Log,
    /// `rᵢ = r_max · (i / N)^p`, `i = 1..=N`.
    Power(f64),
    /// Nodes supplied directly (tabulated data, resampling).
    Custom,
}

/// Local behaviour of the integrand `g` on the origin cell `[0, r₀]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OriginModel {
    /// `g(r) ≈ g(r₀) (r / r₀)^k`, requires `k > -2`.
    Power(f64),
    /// `g(r) ≈ g(r₀) (r₀ / r)² (ln r₀ / ln r)²`, the `1/(r² ln² r)` class; requires `r₀ < 1`.
    InverseLogSquared,
    /// Drop the origin cell.
    Skip,
}

impl OriginModel {
    /// `2π ∫₀^{r₀} g r dr / g(r₀)` under the model.
    fn cell_factor(self, r0: f64) -> Result<f64> {
        match self {
            OriginModel::Power(k) => {
                if k <= -2.0 {
                    return Err(Error::InvalidArgument(format!(
                        "origin exponent {k} is not integrable against r dr"
                    )));
                }
                Ok(2.0 * PI * r0 * r0 / (k + 2.0))
            }
            OriginModel::InverseLogSquared => {
                if r0 >= 1.0 {
                    return Err(Error::InvalidArgument(
                        "inverse-log origin model needs r0 < 1".into(),
                    ));
                }
                Ok(2.0 * PI * r0 * r0 * (-r0.ln()))
            }
            OriginModel::Skip => Ok(0.0),
        }
    }
}

/// Strictly increasing positive radii with trapezoid weights.
///
/// `weights[i]` already contains the `2π r` factor, so
/// `Σ weights[i] · g(rᵢ) ≈ 2π ∫₀^{r_max} g(r) r dr` with the origin cell
/// modelled as constant (`OriginModel::Power(0)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_max: f64,
    grading: Grading,
}

/// Builds a graded radial grid on `(0, r_max]`.
pub fn make_grid(r_max: f64, n_nodes: usize, grading: Grading) -> Result<Grid> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidArgument(format!("r_max must be positive, got {r_max}")));
    }
    if n_nodes < MIN_NODES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_NODES} nodes, got {n_nodes}"
        )));
    }
    let n = n_nodes as f64;
    let nodes: Vec<f64> = match grading {
        Grading::Uniform => (1..=n_nodes).map(|i| r_max * i as f64 / n).collect(),
        Grading::Log => {
            let lo = (LOG_FLOOR * r_max).ln();
            let hi = r_max.ln();
            let last = (n_nodes - 1) as f64;
            (0..n_nodes)
                .map(|i| {
                    if i == n_nodes - 1 {
                        r_max
                    } else {
                        (lo + (hi - lo) * i as f64 / last).exp()
                    }
                })
                .collect()
        }
        Grading::Power(p) => {
            if !(p >= 1.0) {
                return Err(Error::InvalidArgument(format!("power grading needs p >= 1, got {p}")));
            }
            (1..=n_nodes).map(|i| r_max * (i as f64 / n).powf(p)).collect()
        }
        Grading::Custom => {
            return Err(Error::InvalidArgument("use Grid::from_nodes for custom nodes".into()))
        }
    };
    Grid::build(nodes, grading)
}

impl Grid {
    /// Grid over explicit nodes (strictly increasing, positive, at least two).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Grid> {
        Grid::build(nodes, Grading::Custom)
    }

    fn build(nodes: Vec<f64>, grading: Grading) -> Result<Grid> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("a grid needs at least two nodes".into()));
        }
        if !(nodes[0] > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smallest node must be positive, got {}",
                nodes[0]
            )));
        }
        for (i, pair) in nodes.windows(2).enumerate() {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "nodes not strictly increasing at index {}",
                    i + 1
                )));
            }
        }
        let m = nodes.len();
        let mut weights = vec![0.0; m];
        for i in 0..m - 1 {
            for (k, w) in interval_rule(&nodes, i) {
                weights[k] += 2.0 * PI * w * nodes[k];
            }
        }
        if weights.iter().any(|w| *w < 0.0) {
            // Strongly irregular spacing: fall back to the trapezoid rule.
            weights.iter_mut().for_each(|w| *w = 0.0);
            for i in 0..m - 1 {
                let h = nodes[i + 1] - nodes[i];
                weights[i] += PI * h * nodes[i];
                weights[i + 1] += PI * h * nodes[i + 1];
            }
        }
        weights[0] += PI * nodes[0] * nodes[0];
        let r_max = nodes[m - 1];
        Ok(Grid { nodes, weights, r_max, grading })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes up to and including the first one `>= r`.
    pub fn count_up_to(&self, r: f64) -> usize {
        self.nodes.partition_point(|&x| x < r).min(self.nodes.len() - 1) + 1
    }
}

/// Weights of `∫_{rᵢ}^{rᵢ₊₁} f dr` from the quadratic through `rᵢ`, `rᵢ₊₁`
/// and one neighbour (the left one when it exists). Exact for quadratics.
fn interval_rule(nodes: &[f64], i: usize) -> [(usize, f64); 3] {
    let idx = if nodes.len() == 2 {
        return [(i, 0.5 * (nodes[1] - nodes[0])), (i + 1, 0.5 * (nodes[1] - nodes[0])), (i, 0.0)];
    } else if i == 0 {
        [0, 1, 2]
    } else {
        [i - 1, i, i + 1]
    };
    let a = nodes[i];
    let b = nodes[i + 1] - a;
    let x = idx.map(|k| nodes[k] - a);
    let mut out = [(0, 0.0); 3];
    for j in 0..3 {
        let (p, q) = (x[(j + 1) % 3], x[(j + 2) % 3]);
        // ∫₀^b (x - p)(x - q) dx
        let num = b * b * b / 3.0 - (p + q) * b * b / 2.0 + p * q * b;
        out[j] = (idx[j], num / ((x[j] - p) * (x[j] - q)));
    }
    out
}

fn check_samples(grid: &Grid, g: &[f64]) -> Result<()> {
    if g.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "sample count {} does not match grid size {}",
            g.len(),
            grid.len()
        )));
    }
    if let Some(index) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample { index, r: grid.nodes[index] });
    }
    Ok(())
}

/// `2π ∫₀^{r_max} g(r) r dr` with a constant model on the origin cell.
pub fn integrate_radial(grid: &Grid, g: &[f64]) -> Result<f64> {
    integrate_radial_with(grid, g, OriginModel::Power(0.0))
}

/// `2π ∫₀^{r_max} g(r) r dr` with the given origin-cell model.
pub fn integrate_radial_with(grid: &Grid, g: &[f64], origin: OriginModel) -> Result<f64> {
    check_samples(grid, g)?;
    let r0 = grid.nodes[0];
    let body: f64 = grid.weights.iter().zip(g).map(|(w, v)| w * v).sum();
    // Replace the constant-model origin cell folded into weights[0].
    let constant_cell = PI * r0 * r0 * g[0];
    Ok(body - constant_cell + origin.cell_factor(r0)? * g[0])
}

/// Running integral `2π ∫₀^{rᵢ} g r dr` at every node.
pub fn cumulative_radial(grid: &Grid, g: &[f64], origin: OriginModel) -> Result<Vec<f64>> {
    check_samples(grid, g)?;
    let nodes = &grid.nodes;
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = origin.cell_factor(nodes[0])? * g[0];
    out.push(acc);
    for i in 0..nodes.len() - 1 {
        acc += interval_rule(nodes, i)
            .iter()
            .map(|&(k, w)| 2.0 * PI * w * g[k] * nodes[k])
            .sum::<f64>();
        out.push(acc);
    }
    Ok(out)
}

/// Running integral `∫_{x₀}^{xᵢ} f dx` on increasing abscissae, same local rule
/// as the radial quadrature.
pub fn cumulative_1d(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(acc);
    for i in 0..x.len().saturating_sub(1) {
        acc += interval_rule(x, i).iter().map(|&(k, w)| w * f[k]).sum::<f64>();
        out.push(acc);
    }
    out
}
