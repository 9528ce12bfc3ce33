//! Normalized solution profiles and their JSON header + CSV body format.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;

/// Header of the CSV body, one row per node.
pub const CSV_HEADER: [&str; 4] = ["r", "psi", "r_dpsi", "mass"];

/// Integrator and root tolerances recorded alongside a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub root_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abs_tol: 1e-10, rel_tol: 1e-8, root_tol: 1e-8 }
    }
}

/// Profile `ψ` solving `-Δψ = 4πβ rⁿ V e^ψ` with `∫ rⁿ V e^ψ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSolution {
    pub beta: f64,
    pub n: f64,
    pub potential: Potential,
    pub grid: Grid,
    pub psi: Vec<f64>,
    /// `r ψ'(r)`.
    pub dpsi: Vec<f64>,
    /// `M(r) = ∫_{D(0,r)} rⁿ V e^ψ`.
    pub mass: Vec<f64>,
    /// Mass estimated beyond `r_max`, as a fraction of the total.
    pub tail_mass: f64,
    pub tolerances: Tolerances,
    pub method: String,
}

/// Quick self-consistency numbers stored in the JSON header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub mass_residual: f64,
    pub flux_residual: f64,
    pub slope_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    beta: f64,
    n: f64,
    potential: String,
    potential_spec: Potential,
    r_max: f64,
    nodes: usize,
    tolerances: Tolerances,
    residual_summary: ResidualSummary,
    tail_mass: f64,
    method: String,
    csv: String,
}

impl NormalizedSolution {
    pub fn r_max(&self) -> f64 {
        self.grid.r_max()
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        *self.mass.last().unwrap_or(&0.0)
    }

    pub fn summary(&self) -> ResidualSummary {
        let mass_residual = (self.total_mass() - 1.0).abs();
        let flux_residual = self
            .dpsi
            .iter()
            .zip(&self.mass)
            .map(|(w, m)| (w + 2.0 * self.beta * m).abs())
            .fold(0.0, f64::max);
        let slope_gap = (self.dpsi.last().copied().unwrap_or(0.0) + 2.0 * self.beta).abs();
        ResidualSummary { mass_residual, flux_residual, slope_gap }
    }

    /// `ψ(r)` by cubic Hermite interpolation in `ln r` using the stored slopes.
    /// Below the first node the profile is held flat; beyond `r_max` it
    /// continues with the terminal slope.
    pub fn psi_at(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        let last = nodes.len() - 1;
        if r <= nodes[0] {
            return self.psi[0];
        }
        if r >= nodes[last] {
            return self.psi[last] + self.dpsi[last] * (r / nodes[last]).ln();
        }
        let i = nodes.partition_point(|&x| x <= r).clamp(1, last);
        let (t0, t1) = (nodes[i - 1].ln(), nodes[i].ln());
        let h = t1 - t0;
        let u = (r.ln() - t0) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.psi[i - 1] + h10 * h * self.dpsi[i - 1] + h01 * self.psi[i] + h11 * h * self.dpsi[i]
    }

    /// Resamples onto `grid`; slopes and masses are interpolated linearly in `ln r`.
    pub fn resample(&self, grid: &Grid) -> NormalizedSolution {
        let nodes = self.grid.nodes();
        let lin = |col: &[f64], r: f64| -> f64 {
            let last = nodes.len() - 1;
            if r <= nodes[0] {
                return col[0];
            }
            if r >= nodes[last] {
                return col[last];
            }
            let i = nodes.partition_point(|&x| x <= r).clamp(1, last);
            let u = (r / nodes[i - 1]).ln() / (nodes[i] / nodes[i - 1]).ln();
            col[i - 1] + u * (col[i] - col[i - 1])
        };
        let target = grid.nodes();
        NormalizedSolution {
            psi: target.iter().map(|&r| self.psi_at(r)).collect(),
            dpsi: target.iter().map(|&r| lin(&self.dpsi, r)).collect(),
            mass: target.iter().map(|&r| lin(&self.mass, r)).collect(),
            grid: grid.clone(),
            ..self.clone()
        }
    }

    /// Writes `<path>` (JSON header) and the CSV body next to it with the
    /// `.csv` extension. Returns the CSV path.
    pub fn write(&self, json_path: impl AsRef<Path>) -> Result<PathBuf> {
        let json_path = json_path.as_ref();
        let csv_path = json_path.with_extension("csv");
        let csv_name = csv_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| Error::InvalidArgument(format!("bad output path {}", json_path.display())))?;
        let header = Header {
            beta: self.beta,
            n: self.n,
            potential: self.potential.descriptor(),
            potential_spec: self.potential.clone(),
            r_max: self.r_max(),
            nodes: self.len(),
            tolerances: self.tolerances,
            residual_summary: self.summary(),
            tail_mass: self.tail_mass,
            method: self.method.clone(),
            csv: csv_name,
        };
        let mut writer = csv::Writer::from_path(&csv_path)?;
        writer.write_record(CSV_HEADER)?;
        for i in 0..self.len() {
            writer.write_record([
                full(self.grid.nodes()[i]),
                full(self.psi[i]),
                full(self.dpsi[i]),
                full(self.mass[i]),
            ])?;
        }
        writer.flush()?;
        std::fs::write(json_path, serde_json::to_string_pretty(&header)? + "\n")?;
        Ok(csv_path)
    }

    /// Reads a solution written by [`NormalizedSolution::write`].
    pub fn read(json_path: impl AsRef<Path>) -> Result<Self> {
        let json_path = json_path.as_ref();
        let header: Header = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
        let csv_path = json_path.with_file_name(&header.csv);
        let mut reader = csv::Reader::from_path(&csv_path)?;
        let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        if found != CSV_HEADER {
            return Err(Error::Parse(format!("expected CSV header {}, got {}", CSV_HEADER.join(","), found.join(","))));
        }
        let (mut r, mut psi, mut dpsi, mut mass) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let get = |k: usize| -> Result<f64> {
                record[k]
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: bad number `{}`", row + 2, &record[k])))
            };
            r.push(get(0)?);
            psi.push(get(1)?);
            dpsi.push(get(2)?);
            mass.push(get(3)?);
        }
        Ok(NormalizedSolution {
            beta: header.beta,
            n: header.n,
            potential: header.potential_spec,
            grid: Grid::from_nodes(r)?,
            psi,
            dpsi,
            mass,
            tail_mass: header.tail_mass,
            tolerances: header.tolerances,
            method: header.method,
        })
    }
}

/// Shortest representation that round-trips exactly.
fn full(x: f64) -> String {
    format!("{x:?}")
}
