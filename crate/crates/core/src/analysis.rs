//! Fidelity statistics against the magic states, squeezing conversion,
//! rotation-angle search and peak trajectories.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_slice, Execution};
use crate::pushforward::{
    build_density, dominant_peaks, symmetry_orbit, BlochDensity, DensityOptions, OutcomeGrid, Peak,
};
use crate::teleport::{BlochPoint, ProtocolParams};

/// The four magic states related by Pauli byproducts; ties between them go
/// to the first entry.
pub const MAGIC_STATES: [BlochPoint; 4] = [
    BlochPoint { theta: FRAC_PI_4, phi: FRAC_PI_2 },
    BlochPoint { theta: FRAC_PI_4, phi: -FRAC_PI_2 },
    BlochPoint { theta: 3.0 * FRAC_PI_4, phi: FRAC_PI_2 },
    BlochPoint { theta: 3.0 * FRAC_PI_4, phi: -FRAC_PI_2 },
];

/// Pure-state fidelity `(1 + cos Θ)/2`, `Θ` the angle between the points.
pub fn state_fidelity(a: &BlochPoint, b: &BlochPoint) -> f64 {
    let (u, v) = (a.to_vector(), b.to_vector());
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    (0.5 * (1.0 + dot)).clamp(0.0, 1.0)
}

/// Index into [`MAGIC_STATES`] and fidelity of the closest magic state.
pub fn nearest_magic_state(p: &BlochPoint) -> (usize, f64) {
    let mut best = (0, state_fidelity(p, &MAGIC_STATES[0]));
    for (i, m) in MAGIC_STATES.iter().enumerate().skip(1) {
        let f = state_fidelity(p, m);
        if f > best.1 {
            best = (i, f);
        }
    }
    best
}

/// Normalized mass of the outcomes whose output has fidelity at least
/// `f_threshold` with the nearest magic state.
pub fn magic_success_probability(density: &BlochDensity, f_threshold: f64) -> f64 {
    density
        .samples
        .iter()
        .filter(|s| nearest_magic_state(&s.point).1 >= f_threshold)
        .map(|s| s.weight)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProbability {
    pub threshold: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub beta: f64,
    pub theta_r: f64,
    pub squeezing_db: f64,
    pub thresholds: Vec<ThresholdProbability>,
    pub nearest_targets: [BlochPoint; 4],
}

/// Success probabilities for each threshold, in the order given.
pub fn fidelity_report(density: &BlochDensity, params: ProtocolParams, thresholds: &[f64]) -> Result<FidelityReport> {
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidInput(format!("fidelity threshold {t} outside [0, 1]")));
    }
    let fidelities: Vec<(f64, f64)> = density
        .samples
        .iter()
        .map(|s| (nearest_magic_state(&s.point).1, s.weight))
        .collect();
    let thresholds = thresholds
        .iter()
        .map(|&threshold| ThresholdProbability {
            threshold,
            probability: fidelities.iter().filter(|(f, _)| *f >= threshold).map(|(_, w)| w).sum(),
        })
        .collect();
    Ok(FidelityReport {
        beta: params.beta(),
        theta_r: params.theta_r(),
        squeezing_db: beta_to_squeezing_db(params.beta())?,
        thresholds,
        nearest_targets: MAGIC_STATES,
    })
}

/// Per-peak squeezing `-10 log₁₀ β` in dB.
pub fn beta_to_squeezing_db(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    Ok(-10.0 * beta.log10())
}

/// Grid, binning and clustering used for every density in a scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub grid: OutcomeGrid,
    pub density: DensityOptions,
    pub top_n: usize,
    pub merge_radius: f64,
    /// Peaks lighter than this are not considered.
    pub min_peak_mass: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid: OutcomeGrid::default(),
            density: DensityOptions::default(),
            top_n: 8,
            merge_radius: 0.1,
            min_peak_mass: 0.01,
        }
    }
}

impl SearchOptions {
    fn peaks(&self, density: &BlochDensity) -> Vec<Peak> {
        dominant_peaks(density, self.top_n, self.merge_radius)
            .into_iter()
            .filter(|p| p.mass >= self.min_peak_mass)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub theta_r: f64,
    pub achieved: BlochPoint,
    pub mass: f64,
    /// Great-circle distance from `achieved` to the nearest orbit point of
    /// the target.
    pub distance: f64,
}

fn check_interval(interval: (f64, f64)) -> Result<()> {
    let (lo, hi) = interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    Ok(())
}

fn density_at(beta: f64, theta_r: f64, options: &SearchOptions) -> Result<Option<BlochDensity>> {
    let params = ProtocolParams::new(beta, theta_r)?;
    match build_density(&options.grid, params, &options.density) {
        Ok(d) => Ok(Some(d)),
        Err(Error::AllWeightsZero) => Ok(None),
        Err(e) => Err(e),
    }
}

// Smaller is better; the objective is compared lexicographically.
type Score = (f64, f64);

/// Orbit distances below this count as a hit, so the peak mass decides
/// between them. Centroids of clusters straddling a fixed point of an orbit
/// map land within ~1e-7 rad of it over a whole range of angles.
pub const DISTANCE_RESOLUTION: f64 = 1e-6;

/// Coarse scan over `grid_steps` equally spaced angles, then golden-section
/// refinement of the best bracket. Returns the best angle seen.
fn scan_and_refine<T, F>(
    interval: (f64, f64),
    grid_steps: usize,
    refine_iters: usize,
    execution: Execution,
    eval: F,
) -> Result<(f64, Score, T)>
where
    T: Send + Clone,
    F: Fn(f64) -> Result<Option<(Score, T)>> + Sync + Send,
{
    check_interval(interval)?;
    if grid_steps < 8 {
        return Err(Error::InvalidInput(format!("grid_steps must be at least 8, got {grid_steps}")));
    }
    let (lo, hi) = interval;
    let h = (hi - lo) / (grid_steps - 1) as f64;
    let xs: Vec<f64> = (0..grid_steps).map(|i| lo + i as f64 * h).collect();
    let coarse = map_slice(&xs, execution, |&x| eval(x));

    let mut best: Option<(f64, Score, T)> = None;
    let better = |s: &Score, b: &Option<(f64, Score, T)>| b.as_ref().is_none_or(|(_, bs, _)| s < bs);
    for (x, r) in xs.iter().zip(coarse) {
        if let Some((s, t)) = r? {
            if better(&s, &best) {
                best = Some((*x, s, t));
            }
        }
    }
    let Some(mut best) = best else {
        return Err(Error::NoPeaksFound);
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let probe = |x: f64, best: &mut (f64, Score, T)| -> Result<Score> {
        Ok(match eval(x)? {
            Some((s, t)) => {
                if s < best.1 {
                    *best = (x, s, t);
                }
                s
            }
            None => (f64::INFINITY, f64::INFINITY),
        })
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = probe(c, &mut best)?;
    let mut fd = probe(d, &mut best)?;
    for _ in 0..refine_iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = probe(c, &mut best)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = probe(d, &mut best)?;
        }
    }
    Ok(best)
}

/// Local search for the rotation angle whose dominant peaks come closest to
/// the symmetry orbit of `target`, ties going to the heavier peak.
///
/// The objective only depends on the orbit, so any orbit point as target
/// gives the same answer. No global optimality is claimed.
pub fn search_theta_r(
    beta: f64,
    target: BlochPoint,
    interval: (f64, f64),
    grid_steps: usize,
    refine_iters: usize,
    options: &SearchOptions,
) -> Result<SearchResult> {
    let orbit = symmetry_orbit(&target);
    let eval = |theta_r: f64| -> Result<Option<(Score, (BlochPoint, f64))>> {
        let Some(density) = density_at(beta, theta_r, options)? else {
            return Ok(None);
        };
        let mut best: Option<(Score, (BlochPoint, f64))> = None;
        for p in options.peaks(&density) {
            let dist = orbit
                .iter()
                .map(|o| o.angular_distance(&p.point))
                .fold(f64::INFINITY, f64::min);
            let score = (if dist < DISTANCE_RESOLUTION { 0.0 } else { dist }, -p.mass);
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((score, (p.point, p.mass)));
            }
        }
        Ok(best)
    };
    let (theta_r, _, (achieved, mass)) =
        scan_and_refine(interval, grid_steps, refine_iters, options.density.execution, eval)?;
    Ok(SearchResult {
        theta_r,
        achieved,
        mass,
        distance: orbit.iter().map(|o| o.angular_distance(&achieved)).fold(f64::INFINITY, f64::min),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitySearchResult {
    pub theta_r: f64,
    pub threshold: f64,
    pub probability: f64,
}

/// Local search for the rotation angle maximizing
/// [`magic_success_probability`] at `f_threshold`.
pub fn search_success_probability(
    beta: f64,
    f_threshold: f64,
    interval: (f64, f64),
    grid_steps: usize,
    refine_iters: usize,
    options: &SearchOptions,
) -> Result<ProbabilitySearchResult> {
    let eval = |theta_r: f64| -> Result<Option<(Score, f64)>> {
        Ok(density_at(beta, theta_r, options)?.map(|d| {
            let p = magic_success_probability(&d, f_threshold);
            ((-p, 0.0), p)
        }))
    };
    let (theta_r, _, probability) =
        scan_and_refine(interval, grid_steps, refine_iters, options.density.execution, eval)?;
    Ok(ProbabilitySearchResult {
        theta_r,
        threshold: f_threshold,
        probability,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub theta_r: f64,
    /// Sorted by mass, heaviest first.
    pub peaks: Vec<Peak>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryPoint>,
    /// `tracks[t][i]` is the peak of track `t` at sample `i`.
    pub tracks: Vec<Vec<Peak>>,
}

/// Number of tracks followed by [`trace_trajectory`].
pub const TRACKS: usize = 4;

impl Trajectory {
    /// Largest great-circle jump between consecutive points of any track.
    pub fn max_step(&self) -> f64 {
        self.tracks
            .iter()
            .flat_map(|t| t.windows(2).map(|w| w[0].point.angular_distance(&w[1].point)))
            .fold(0.0, f64::max)
    }
}

/// Dominant peaks at `steps` equally spaced angles, with up to four of them
/// followed from one angle to the next by nearest-distance matching.
pub fn trace_trajectory(
    beta: f64,
    interval: (f64, f64),
    steps: usize,
    options: &SearchOptions,
) -> Result<Trajectory> {
    check_interval(interval)?;
    if steps < 2 {
        return Err(Error::InvalidInput(format!("trajectory needs at least 2 steps, got {steps}")));
    }
    let (lo, hi) = interval;
    let xs: Vec<f64> = (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect();
    let built = map_slice(&xs, options.density.execution, |&theta_r| {
        let params = ProtocolParams::new(beta, theta_r)?;
        let density = build_density(&options.grid, params, &options.density)?;
        let mut peaks = options.peaks(&density);
        peaks.sort_by(|a, b| b.mass.total_cmp(&a.mass));
        Ok(TrajectoryPoint { theta_r, peaks })
    });
    let samples: Vec<TrajectoryPoint> = built.into_iter().collect::<Result<_>>()?;

    let mut tracks: Vec<Vec<Peak>> = samples[0].peaks.iter().take(TRACKS).map(|p| vec![*p]).collect();
    for sample in &samples[1..] {
        let mut free = vec![true; sample.peaks.len()];
        // all (track, peak) pairs, closest first; each side used once
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (t, track) in tracks.iter().enumerate() {
            let last = track.last().expect("tracks are never empty");
            for (j, p) in sample.peaks.iter().enumerate() {
                pairs.push((last.point.angular_distance(&p.point), t, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut linked = vec![None; tracks.len()];
        for (_, t, j) in pairs {
            if linked[t].is_none() && free[j] {
                linked[t] = Some(j);
                free[j] = false;
            }
        }
        for (t, l) in linked.into_iter().enumerate() {
            // a track with no peak left keeps its last position
            let next = l.map(|j| sample.peaks[j]).unwrap_or(*tracks[t].last().unwrap());
            tracks[t].push(next);
        }
    }
    Ok(Trajectory { samples, tracks })
}

/// Great-circle distance from `p` to the nearest point of `q`'s orbit.
pub fn orbit_distance(p: &BlochPoint, q: &BlochPoint) -> f64 {
    symmetry_orbit(q)
        .iter()
        .map(|o| o.angular_distance(p))
        .fold(PI, f64::min)
}
