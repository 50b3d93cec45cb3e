//! CSV and JSON output for densities.
//!
//! CSV columns are `q_m,k,weight,theta,phi` with a one-line header and every
//! float written with 17 significant digits. The JSON summary holds the
//! parameters, grid, binning, cluster table, marginals and orbit residual;
//! it carries enough to rebuild the same density.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::par::Execution;
use crate::pushforward::{
    build_density, dominant_peaks, orbit_symmetry_residual, BlochDensity, DensityOptions, Histogram, OutcomeGrid,
    Peak,
};
use crate::teleport::ProtocolParams;

pub const CSV_HEADER: &str = "q_m,k,weight,theta,phi";

pub fn write_csv<W: Write>(density: &BlochDensity, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in &density.samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.q_m, s.k, s.weight, s.point.theta, s.point.phi
        )?;
    }
    out.flush()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub top_n: usize,
    pub merge_radius: f64,
}

impl Default for Clustering {
    fn default() -> Self {
        Self {
            top_n: 8,
            merge_radius: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub theta: Histogram,
    pub phi: Histogram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub command: String,
    pub params: ProtocolParams,
    pub grid: OutcomeGrid,
    pub bins_theta: usize,
    pub bins_phi: usize,
    pub clustering: Clustering,
    pub total_weight: f64,
    pub clusters: Vec<Peak>,
    pub orbit_residual: f64,
    pub marginals: Marginals,
}

impl DensitySummary {
    pub fn new(
        density: &BlochDensity,
        params: ProtocolParams,
        grid: OutcomeGrid,
        options: &DensityOptions,
        clustering: Clustering,
    ) -> Self {
        Self {
            command: "pdf".into(),
            params,
            grid,
            bins_theta: options.bins_theta,
            bins_phi: options.bins_phi,
            clustering,
            total_weight: density.total_weight,
            clusters: dominant_peaks(density, clustering.top_n, clustering.merge_radius),
            orbit_residual: orbit_symmetry_residual(density, clustering.merge_radius),
            marginals: Marginals {
                theta: density.theta_hist.clone(),
                phi: density.phi_hist.clone(),
            },
        }
    }

    /// Recomputes the density described by this summary.
    pub fn replay(&self, execution: Execution) -> Result<(BlochDensity, DensitySummary)> {
        let options = DensityOptions {
            bins_theta: self.bins_theta,
            bins_phi: self.bins_phi,
            execution,
        };
        // deserialized values bypass the constructors
        let grid = OutcomeGrid::new(self.grid.q_min(), self.grid.q_max(), self.grid.n_points())?;
        let params = ProtocolParams::new(self.params.beta(), self.params.theta_r())?;
        let density = build_density(&grid, params, &options)?;
        let summary = DensitySummary::new(&density, params, grid, &options, self.clustering);
        Ok((density, summary))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is always serializable")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// The cluster table alone, as JSON.
    pub fn clusters_json(&self) -> String {
        serde_json::to_string_pretty(&self.clusters).expect("clusters are always serializable")
    }
}
