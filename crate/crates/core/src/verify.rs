//! Built-in property checks, run by the `verify` command.
//!
//! Samples come from a Kronecker sequence, so every run checks the same
//! points.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gauss_sums::{classify_zero_damping, ratio_at_peak, PauliVerdict};
use crate::pushforward::{build_density, orbit_symmetry_residual, DensityOptions, OutcomeGrid};
use crate::teleport::{
    coefficients_lattice, coefficients_mehler, coefficients_theta, lattice_j_window, mehler_j_window,
    MeasurementOutcome, ProtocolParams,
};
use crate::theta::{gcd, theta3_series_scaled, RationalAngle, ScaledComplex, ThetaArgs, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyReport {
    fn new(name: &str, errors: &[f64], tolerance: f64) -> Self {
        let max_error = errors.iter().cloned().fold(0.0, f64::max);
        Self {
            name: name.into(),
            cases: errors.len(),
            max_error,
            tolerance,
            passed: errors.iter().all(|e| *e < tolerance),
        }
    }
}

/// Points of the additive recurrence `frac(i·α)` in `[0, 1)^D`.
pub fn kronecker<const D: usize>(n: usize) -> Vec<[f64; D]> {
    // generalized golden ratio: the real root of x^{D+1} = x + 1
    let mut g = 2.0f64;
    for _ in 0..64 {
        g = (1.0 + g).powf(1.0 / (D as f64 + 1.0));
    }
    let alpha: [f64; D] = std::array::from_fn(|d| (1.0 / g.powi(d as i32 + 1)).fract());
    (1..=n)
        .map(|i| std::array::from_fn(|d| (0.5 + alpha[d] * i as f64).fract()))
        .collect()
}

fn scaled_rel(a: ScaledComplex, b: ScaledComplex) -> f64 {
    // |a/b - 1| without leaving log form
    let ratio = a.value / b.value * (a.log_scale - b.log_scale).exp();
    (ratio - 1.0).norm()
}

/// The three theta identities on `cases` points with `Im τ ∈ [0.05, 2]`,
/// every side evaluated by direct summation.
pub fn theta_symmetries(cases: usize) -> Result<Vec<PropertyReport>> {
    let i = Complex64::i();
    let (mut e1, mut e2, mut e3) = (Vec::new(), Vec::new(), Vec::new());
    for [a, b, c, d, e] in kronecker::<5>(cases) {
        let tau = Complex64::new(-1.0 + 2.0 * a, 0.05 + 1.95 * b);
        let z = Complex64::new(-PI + 2.0 * PI * c, -1.0 + 2.0 * d);
        let n = (e * 7.0).floor() - 3.0;
        let base = theta3_series_scaled(ThetaArgs::new(z, tau)?, DEFAULT_TOL)?;

        let shifted = theta3_series_scaled(ThetaArgs::new(z + n * PI * tau, tau)?, DEFAULT_TOL)?;
        let rhs = base.mul_exp(-i * PI * tau * (n * n) - 2.0 * i * n * z);
        e1.push(scaled_rel(shifted, rhs));

        let lhs = theta3_series_scaled(ThetaArgs::new(z + FRAC_PI_2, tau)?, DEFAULT_TOL)?;
        let rhs = theta3_series_scaled(ThetaArgs::new(z, tau + 1.0)?, DEFAULT_TOL)?;
        e2.push(scaled_rel(lhs, rhs));

        let lhs = theta3_series_scaled(ThetaArgs::new(z / tau, -1.0 / tau)?, DEFAULT_TOL)?;
        let rhs = base.mul_exp(i * z * z / (PI * tau) + 0.5 * (-i * tau).ln());
        e3.push(scaled_rel(lhs, rhs));
    }
    Ok(vec![
        PropertyReport::new("theta quasi-periodicity z -> z + n pi tau", &e1, 1e-8),
        PropertyReport::new("theta shift z -> z + pi/2 equals tau -> tau + 1", &e2, 1e-8),
        PropertyReport::new("theta modular inversion tau -> -1/tau", &e3, 1e-8),
    ])
}

/// Truncation order at which the Fock sum has converged to well below
/// `1e-6` for damping `beta`.
pub fn converged_mehler_order(beta: f64) -> usize {
    ((25.0 / beta).ceil() as usize).max(600)
}

/// `C₋/C₊` from the theta and lattice forms (tolerance `1e-9`) and from the
/// Fock sum at a converged truncation order (tolerance `1e-6`), for
/// `β ∈ [0.01, 0.2]`, `θ_r ∈ (0.05, π/2 - 0.05)`, `q_m ∈ [-5√π, 5√π]`.
pub fn route_agreement(cases: usize) -> Result<Vec<PropertyReport>> {
    let (mut lattice, mut mehler) = (Vec::new(), Vec::new());
    for [a, b, c] in kronecker::<3>(cases) {
        let beta = 0.01 + 0.19 * a;
        let theta_r = 0.05 + (FRAC_PI_2 - 0.1) * b;
        let outcome = MeasurementOutcome::from_q((-5.0 + 10.0 * c) * PI.sqrt());
        let params = ProtocolParams::new(beta, theta_r)?;
        let t = coefficients_theta(outcome, params)?;
        let l = coefficients_lattice(outcome, params, lattice_j_window(outcome, params))?;
        let n_max = converged_mehler_order(beta);
        let m = coefficients_mehler(outcome, params, n_max, mehler_j_window(n_max))?;
        let rt = t.c_minus / t.c_plus;
        lattice.push(((l.c_minus / l.c_plus) - rt).norm() / rt.norm());
        mehler.push(((m.c_minus / m.c_plus) - rt).norm() / rt.norm());
    }
    Ok(vec![
        PropertyReport::new("theta and lattice ratios agree", &lattice, 1e-9),
        PropertyReport::new("theta and converged Fock-sum ratios agree", &mehler, 1e-6),
    ])
}

/// Ratio quantization and parity rule for coprime `(u, v)`, `|u|, v <= 20`,
/// `ℓ ∈ [-10, 10]`. The error is 1 for a mismatch.
pub fn zero_damping_quantization() -> PropertyReport {
    let mut errors = Vec::new();
    for u in -20..=20i64 {
        for v in 1..=20i64 {
            if gcd(u, v) != 1 {
                continue;
            }
            let angle = RationalAngle::new(u, v).expect("coprime");
            let class = classify_zero_damping(angle);
            for ell in -10..=10 {
                let verdict = PauliVerdict::from_ratio(ratio_at_peak(angle, ell));
                let ok = verdict.pauli_axis() == class.axis && verdict.axis == class.verdict_at(ell).axis;
                errors.push(if ok { 0.0 } else { 1.0 });
            }
        }
    }
    PropertyReport::new("zero-damping ratios quantized and follow parity rule", &errors, 0.5)
}

/// Reference parameter sets: Y eigenstates, strings, and
/// high-probability magic states.
pub const REFERENCE_PARAMS: [(f64, f64); 3] = [(0.04, FRAC_PI_4), (0.01, 0.0681 * PI), (0.001, 0.38467 * PI)];

/// Orbit residual of each reference density on `grid`.
pub fn orbit_residuals(grid: &OutcomeGrid, merge_radius: f64) -> Result<PropertyReport> {
    let mut errors = Vec::new();
    for (beta, theta_r) in REFERENCE_PARAMS {
        let d = build_density(grid, ProtocolParams::new(beta, theta_r)?, &DensityOptions::default())?;
        errors.push(orbit_symmetry_residual(&d, merge_radius));
    }
    Ok(PropertyReport::new("orbit symmetry residual of reference densities", &errors, 0.05))
}

/// Everything above with the given sample count and grid.
pub fn run_all(cases: usize, grid: &OutcomeGrid) -> Result<Vec<PropertyReport>> {
    let mut reports = theta_symmetries(cases)?;
    reports.extend(route_agreement(cases)?);
    reports.push(zero_damping_quantization());
    reports.push(orbit_residuals(grid, 0.1)?);
    Ok(reports)
}
