//! Pushforward of the homodyne outcome density onto the Bloch sphere.
//!
//! Each point `q_{m,i}` of a uniform outcome grid carries the weight
//! `P(q_{m,i}) Δq` and is mapped to the Bloch point of the state it leaves
//! behind. No sampling is involved.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_range, Execution};
use crate::teleport::{bloch_angles, coefficients, BlochPoint, MeasurementOutcome, ProtocolParams};

pub const DEFAULT_GRID_POINTS: usize = 200_000;
pub const FULL_GRID_POINTS: usize = 2_000_000;
pub const DEFAULT_BINS_THETA: usize = 512;
pub const DEFAULT_BINS_PHI: usize = 1024;
/// Half-width of the default grid in units of `√π`.
pub const DEFAULT_Q_WINDOW: f64 = 20.0;

/// Uniform grid `q_min, …, q_max` with `n_points` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeGrid {
    q_min: f64,
    q_max: f64,
    n_points: usize,
}

impl OutcomeGrid {
    pub fn new(q_min: f64, q_max: f64, n_points: usize) -> Result<Self> {
        if !(q_min.is_finite() && q_max.is_finite() && q_min < q_max) {
            return Err(Error::InvalidInput(format!("grid needs q_min < q_max, got [{q_min}, {q_max}]")));
        }
        if n_points < 2 {
            return Err(Error::InvalidInput(format!("grid needs at least 2 points, got {n_points}")));
        }
        Ok(Self { q_min, q_max, n_points })
    }

    /// `[-w√π, w√π]`.
    pub fn symmetric(half_width_sqrt_pi: f64, n_points: usize) -> Result<Self> {
        let w = half_width_sqrt_pi * PI.sqrt();
        Self::new(-w, w, n_points)
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn step(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.q_max
        } else {
            self.q_min + i as f64 * self.step()
        }
    }
}

impl Default for OutcomeGrid {
    fn default() -> Self {
        Self::symmetric(DEFAULT_Q_WINDOW, DEFAULT_GRID_POINTS).expect("default grid is valid")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    pub bins_theta: usize,
    pub bins_phi: usize,
    pub execution: Execution,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            bins_theta: DEFAULT_BINS_THETA,
            bins_phi: DEFAULT_BINS_PHI,
            execution: Execution::Parallel,
        }
    }
}

/// Fixed-width histogram of normalized mass over `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub mass: Vec<f64>,
}

impl Histogram {
    fn new(lo: f64, hi: f64, bins: usize) -> Self {
        Self {
            lo,
            hi,
            mass: vec![0.0; bins],
        }
    }

    pub fn bin_of(&self, x: f64) -> usize {
        let n = self.mass.len();
        let t = ((x - self.lo) / (self.hi - self.lo) * n as f64).floor();
        (t.max(0.0) as usize).min(n - 1)
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.mass.len() as f64
    }

    /// Total-variation distance `½ Σ |aᵢ - bᵢ|` to a histogram with the same
    /// binning.
    pub fn total_variation(&self, other: &Histogram) -> f64 {
        0.5 * self.mass.iter().zip(&other.mass).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub q_m: f64,
    pub k: f64,
    /// Normalized weight.
    pub weight: f64,
    pub point: BlochPoint,
}

/// Weighted Bloch points with their `θ` and `φ` marginals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochDensity {
    pub samples: Vec<DensitySample>,
    pub theta_hist: Histogram,
    pub phi_hist: Histogram,
    /// Sum of the unnormalized weights `P Δq`, relative to the largest one.
    pub total_weight: f64,
}

impl BlochDensity {
    /// Normalizes `(outcome, point, weight)` triples and fills the marginals.
    /// Weights are summed in index order.
    pub fn from_weighted(entries: Vec<(MeasurementOutcome, BlochPoint, f64)>, options: &DensityOptions) -> Result<Self> {
        if options.bins_theta == 0 || options.bins_phi == 0 {
            return Err(Error::InvalidInput("histogram bin counts must be positive".into()));
        }
        if entries.iter().any(|e| !(e.2 >= 0.0 && e.2.is_finite())) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total: f64 = entries.iter().map(|e| e.2).sum();
        if !(total > 0.0) {
            return Err(Error::AllWeightsZero);
        }
        let mut theta_hist = Histogram::new(0.0, PI, options.bins_theta);
        let mut phi_hist = Histogram::new(-PI, PI, options.bins_phi);
        let samples: Vec<DensitySample> = entries
            .into_iter()
            .map(|(o, point, w)| {
                let weight = w / total;
                let t = theta_hist.bin_of(point.theta);
                theta_hist.mass[t] += weight;
                // φ = π belongs to the last bin, φ → -π⁺ to the first
                let f = phi_hist.bin_of(point.phi);
                phi_hist.mass[f] += weight;
                DensitySample {
                    q_m: o.q_m(),
                    k: o.k(),
                    weight,
                    point,
                }
            })
            .collect();
        Ok(Self {
            samples,
            theta_hist,
            phi_hist,
            total_weight: total,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// Mass within `radius` (great-circle) of `centre`.
    pub fn mass_within(&self, centre: &BlochPoint, radius: f64) -> f64 {
        let c = centre.to_vector();
        let cos_r = radius.cos();
        self.samples
            .iter()
            .filter(|s| {
                let v = s.point.to_vector();
                v[0] * c[0] + v[1] * c[1] + v[2] * c[2] >= cos_r
            })
            .map(|s| s.weight)
            .sum()
    }
}

/// Evaluates the outcome density and Bloch point on every grid node.
///
/// Densities are computed in log form and rescaled by their maximum before
/// exponentiation, so grids whose absolute density underflows still work.
pub fn build_density(grid: &OutcomeGrid, params: ProtocolParams, options: &DensityOptions) -> Result<BlochDensity> {
    let evaluated: Vec<Result<(MeasurementOutcome, BlochPoint, f64)>> =
        map_range(grid.n_points(), options.execution, |i| {
            let outcome = MeasurementOutcome::from_q(grid.point(i));
            let c = coefficients(outcome, params)?;
            Ok((outcome, bloch_angles(&c)?, c.ln_density()))
        });
    let evaluated: Vec<_> = evaluated.into_iter().collect::<Result<_>>()?;
    let max_ln = evaluated
        .iter()
        .map(|e| e.2)
        .filter(|x| x.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max_ln.is_finite() {
        return Err(Error::AllWeightsZero);
    }
    let step = grid.step();
    let entries = evaluated
        .into_iter()
        .map(|(o, p, ln)| (o, p, (ln - max_ln).exp() * step))
        .collect();
    BlochDensity::from_weighted(entries, options)
}

/// A cluster of mass on the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub point: BlochPoint,
    pub mass: f64,
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 0.0).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

/// Greedy clustering on the `θ × φ` histogram cells: take the heaviest cell
/// still holding unclaimed mass, absorb every unclaimed point within
/// `merge_radius` of its centroid, report the spherical centroid and mass of
/// what was absorbed. Equal cells go to lower `θ`, then lower `φ`.
pub fn dominant_peaks(density: &BlochDensity, top_n: usize, merge_radius: f64) -> Vec<Peak> {
    let nt = density.theta_hist.mass.len();
    let np = density.phi_hist.mass.len();
    let cell_of = |p: &BlochPoint| density.theta_hist.bin_of(p.theta) * np + density.phi_hist.bin_of(p.phi);
    let cells: Vec<usize> = density.samples.iter().map(|s| cell_of(&s.point)).collect();
    let mut cell_mass = vec![0.0f64; nt * np];
    for (s, &c) in density.samples.iter().zip(&cells) {
        cell_mass[c] += s.weight;
    }
    let mut claimed = vec![false; density.samples.len()];
    let cos_r = merge_radius.cos();
    let mut peaks = Vec::new();

    while peaks.len() < top_n {
        // first index wins ties, which is lower θ then lower φ
        let mut best = None::<(usize, f64)>;
        for (i, &m) in cell_mass.iter().enumerate() {
            if m > 0.0 && best.is_none_or(|(_, bm)| m > bm * (1.0 + 1e-12)) {
                best = Some((i, m));
            }
        }
        let Some((seed_cell, _)) = best else { break };

        let mut seed = [0.0; 3];
        for (i, s) in density.samples.iter().enumerate() {
            if !claimed[i] && cells[i] == seed_cell {
                let v = s.point.to_vector();
                for d in 0..3 {
                    seed[d] += s.weight * v[d];
                }
            }
        }
        let seed = normalize(seed).unwrap_or_else(|| {
            let s = density.samples.iter().zip(&cells).find(|(_, &c)| c == seed_cell).unwrap();
            s.0.point.to_vector()
        });

        let mut sum = [0.0; 3];
        let mut mass = 0.0;
        for (i, s) in density.samples.iter().enumerate() {
            if claimed[i] {
                continue;
            }
            let v = s.point.to_vector();
            if v[0] * seed[0] + v[1] * seed[1] + v[2] * seed[2] >= cos_r || cells[i] == seed_cell {
                claimed[i] = true;
                cell_mass[cells[i]] -= s.weight;
                mass += s.weight;
                for d in 0..3 {
                    sum[d] += s.weight * v[d];
                }
            }
        }
        // the seed cell is now empty; clear rounding residue
        cell_mass[seed_cell] = 0.0;
        let centre = normalize(sum).unwrap_or(seed);
        peaks.push(Peak {
            point: BlochPoint::from_vector(centre),
            mass,
        });
    }
    peaks
}

/// The point and its images under `(θ, φ-π)`, `(π-θ, -φ)`, `(π-θ, π-φ)`.
pub fn symmetry_orbit(point: &BlochPoint) -> [BlochPoint; 4] {
    let (t, f) = (point.theta, point.phi);
    [
        BlochPoint::new(t, f),
        BlochPoint::new(t, f - PI),
        BlochPoint::new(PI - t, -f),
        BlochPoint::new(PI - t, PI - f),
    ]
}

/// Peaks below this mass are ignored by [`orbit_symmetry_residual`].
pub const ORBIT_MIN_PEAK_MASS: f64 = 0.01;
const ORBIT_PEAKS: usize = 16;

/// Largest relative spread `(max - min)/max` of the mass within
/// `merge_radius` of the four orbit images of a dominant peak.
pub fn orbit_symmetry_residual(density: &BlochDensity, merge_radius: f64) -> f64 {
    dominant_peaks(density, ORBIT_PEAKS, merge_radius)
        .iter()
        .filter(|p| p.mass >= ORBIT_MIN_PEAK_MASS)
        .map(|p| {
            let masses = symmetry_orbit(&p.point).map(|q| density.mass_within(&q, merge_radius));
            let max = masses.iter().cloned().fold(0.0, f64::max);
            let min = masses.iter().cloned().fold(f64::INFINITY, f64::min);
            if max > 0.0 {
                (max - min) / max
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// Points of a Fibonacci lattice on the sphere, a near-uniform reference set.
pub fn fibonacci_sphere(n: usize) -> Vec<BlochPoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            BlochPoint::new(z.acos(), (i as f64 * golden).rem_euclid(TAU))
        })
        .collect()
}
