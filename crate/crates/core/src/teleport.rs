//! Output coefficients of the teleportation circuit after a q-homodyne
//! measurement, and the Bloch-sphere map.
//!
//! For an outcome `q_m = k√π` the unmeasured mode is left in
//! `C₊|+̃⟩ + C₋|−̃⟩`. Three independent evaluations are provided:
//!
//! * [`coefficients_theta`]: the closed theta-function form, with
//!   `ζ = θ_r + iβ`, `τ = tan(ζ)/2` and `z = -(kπ/2) sec ζ`,
//!   `C₊ ∝ θ₃{z|τ}`, `C₋ ∝ θ₄{z|τ}`.
//! * [`coefficients_lattice`]: the Mehler-summed lattice form
//!   `Σⱼ exp[-iπ/2 (2j+s)² cot ζ + iπ(2j+s)k csc ζ]`.
//! * [`coefficients_mehler`]: the truncated Fock-space double sum
//!   `Σⱼ Σₙ ψₙ((2j+s)√π) e^{(iθ_r-β)n} ψₙ(q_m)`.
//!
//! The three differ by `k`-independent factors only, so ratios `C₋/C₊` agree
//! exactly and densities agree up to one positive constant.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::hermite_functions;
use crate::theta::{theta3_scaled, RationalAngle, ScaledComplex, ThetaArgs, ThetaConfig};

/// `|cos ζ|` (theta route) or `|sin ζ|` (lattice route) below which the
/// route is declared singular.
pub const SINGULAR_TOL: f64 = 1e-9;
/// Relative size of the neglected lattice tail that is still accepted.
pub const LATTICE_TAIL_TOL: f64 = 1e-14;

// e^{-40} ≈ 4e-18 relative to the largest lattice term
const LATTICE_LOG_REACH: f64 = 40.0;

/// Damping strength and rotation angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    beta: f64,
    theta_r: f64,
}

impl ProtocolParams {
    /// `theta_r` is stored reduced to `[0, 2π)`.
    pub fn new(beta: f64, theta_r: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be positive and finite, got {beta}")));
        }
        if !theta_r.is_finite() {
            return Err(Error::InvalidInput(format!("theta_r must be finite, got {theta_r}")));
        }
        Ok(Self {
            beta,
            theta_r: theta_r.rem_euclid(TAU),
        })
    }

    pub fn from_rational(beta: f64, angle: RationalAngle) -> Result<Self> {
        Self::new(beta, angle.theta_r())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta_r(&self) -> f64 {
        self.theta_r
    }

    /// `ζ = θ_r + iβ`.
    pub fn zeta(&self) -> Complex64 {
        Complex64::new(self.theta_r, self.beta)
    }

    fn singular(&self, route: &'static str) -> Error {
        Error::SingularRotation {
            route,
            theta_r: self.theta_r,
            beta: self.beta,
        }
    }
}

/// A homodyne outcome `q_m` together with `k = q_m/√π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    q_m: f64,
    k: f64,
}

impl MeasurementOutcome {
    pub fn from_q(q_m: f64) -> Self {
        Self {
            q_m,
            k: q_m / PI.sqrt(),
        }
    }

    pub fn from_k(k: f64) -> Self {
        Self {
            q_m: k * PI.sqrt(),
            k,
        }
    }

    pub fn q_m(&self) -> f64 {
        self.q_m
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Unnormalized amplitudes `e^{log_scale}·(c_plus, c_minus)` of `|+̃⟩, |−̃⟩`.
///
/// The mantissas are kept of order one so the ratio and the Bloch angles stay
/// meaningful even where the density itself underflows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputCoefficients {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    pub log_scale: f64,
}

impl OutputCoefficients {
    pub fn new(c_plus: Complex64, c_minus: Complex64) -> Self {
        Self {
            c_plus,
            c_minus,
            log_scale: 0.0,
        }
    }

    /// `C₋/C₊`, `None` when `C₊` vanishes.
    pub fn ratio(&self) -> Option<Complex64> {
        if self.c_plus.norm() == 0.0 {
            None
        } else {
            Some(self.c_minus / self.c_plus)
        }
    }

    /// `ln(|C₊|² + |C₋|²)`.
    pub fn ln_density(&self) -> f64 {
        (self.c_plus.norm_sqr() + self.c_minus.norm_sqr()).ln() + 2.0 * self.log_scale
    }

    /// `|C₊|² + |C₋|²`.
    pub fn density(&self) -> f64 {
        self.ln_density().exp()
    }
}

/// Polar coordinates on the logical Bloch sphere, `|+̃⟩` at the north pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub theta: f64,
    pub phi: f64,
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

impl BlochPoint {
    /// Canonical form: `θ` clamped to `[0, π]`, `φ` wrapped to `(-π, π]`, and
    /// `φ = 0` at the poles.
    pub fn new(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let phi = if theta == 0.0 || theta == PI {
            0.0
        } else {
            wrap_phase(phi)
        };
        Self { theta, phi }
    }

    pub fn to_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Inverse of [`BlochPoint::to_vector`]; the input need not be normalized.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let rho = v[0].hypot(v[1]);
        Self::new(rho.atan2(v[2]), v[1].atan2(v[0]))
    }

    /// Great-circle distance in radians.
    pub fn angular_distance(&self, other: &BlochPoint) -> f64 {
        let a = self.to_vector();
        let b = other.to_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
        sin.atan2(dot)
    }
}

/// Coefficients through the theta-function closed form
/// `C± = e^{iπk² tanζ/2} / √(2(1+e^{2iζ})) · θ₃{-(kπ/2) sec ζ + πs/2 | tan(ζ)/2}`.
///
/// Singular when `cos ζ` vanishes (`θ_r → π/2` with small `β`).
pub fn coefficients_theta(outcome: MeasurementOutcome, params: ProtocolParams) -> Result<OutputCoefficients> {
    coefficients_theta_with(outcome, params, &ThetaConfig::default())
}

pub fn coefficients_theta_with(
    outcome: MeasurementOutcome,
    params: ProtocolParams,
    cfg: &ThetaConfig,
) -> Result<OutputCoefficients> {
    let zeta = params.zeta();
    let cos = zeta.cos();
    if cos.norm() <= SINGULAR_TOL {
        return Err(params.singular("theta"));
    }
    let i = Complex64::i();
    let tan = zeta.sin() / cos;
    let tau = tan / 2.0;
    let k = outcome.k;
    let z = -0.5 * PI * k / cos;
    let log_prefactor = i * 0.5 * PI * k * k * tan - 0.5 * (2.0 * (1.0 + (2.0 * i * zeta).exp())).ln();

    let plus = theta3_scaled(ThetaArgs::new(z, tau)?, cfg)?;
    let minus = theta3_scaled(ThetaArgs::new(z + FRAC_PI_2, tau)?, cfg)?;
    Ok(join(plus, minus, log_prefactor))
}

// Common prefactor applied, mantissas rescaled so the larger has modulus one.
fn join(plus: ScaledComplex, minus: ScaledComplex, log_prefactor: Complex64) -> OutputCoefficients {
    let max_ln = plus.ln_abs().max(minus.ln_abs());
    let phase = Complex64::from_polar(1.0, log_prefactor.im);
    let mantissa = |x: ScaledComplex| {
        if x.value.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            x.value * (x.log_scale - max_ln).exp() * phase
        }
    };
    OutputCoefficients {
        c_plus: mantissa(plus),
        c_minus: mantissa(minus),
        log_scale: max_ln + log_prefactor.re,
    }
}

/// Value of `2j + s` at which the lattice terms peak, and the half-width
/// (in the same units) beyond which they drop below `e^{-40}` of the peak.
fn lattice_extent(k: f64, zeta: Complex64) -> (f64, f64) {
    let sin = zeta.sin();
    let cot = zeta.cos() / sin;
    let csc = 1.0 / sin;
    // Re exponent = (π/2) x² Im(cot) - π x k Im(csc), concave since Im(cot) < 0
    let curvature = -0.5 * PI * cot.im;
    let centre = k * csc.im / cot.im;
    (centre, (LATTICE_LOG_REACH / curvature).sqrt())
}

/// Smallest `J` for which [`coefficients_lattice`] meets its tail bound.
pub fn lattice_j_window(outcome: MeasurementOutcome, params: ProtocolParams) -> i64 {
    let (centre, half_width) = lattice_extent(outcome.k, params.zeta());
    ((centre.abs() + half_width) / 2.0).ceil() as i64 + 2
}

/// Coefficients through direct summation of the lattice form over
/// `j ∈ [-J, J]`, `J = j_window`.
///
/// Fails with [`Error::TailNotConverged`] when the terms just outside the
/// window are not below [`LATTICE_TAIL_TOL`] of the partial sum, and with
/// [`Error::SingularRotation`] when `sin ζ` vanishes (`θ_r → 0`, small `β`).
pub fn coefficients_lattice(
    outcome: MeasurementOutcome,
    params: ProtocolParams,
    j_window: i64,
) -> Result<OutputCoefficients> {
    if j_window < 1 {
        return Err(Error::InvalidWindow(j_window));
    }
    let zeta = params.zeta();
    let sin = zeta.sin();
    if sin.norm() <= SINGULAR_TOL {
        return Err(params.singular("lattice"));
    }
    let i = Complex64::i();
    let cot = zeta.cos() / sin;
    let csc = 1.0 / sin;
    let k = outcome.k;
    let exponent = |x: f64| -i * 0.5 * PI * x * x * cot + i * PI * x * k * csc;

    let mut max_re = f64::NEG_INFINITY;
    let mut exps: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
    for (s, list) in exps.iter_mut().enumerate() {
        for j in -j_window..=j_window {
            let e = exponent((2 * j + s as i64) as f64);
            max_re = max_re.max(e.re);
            list.push(e);
        }
    }
    let sums: Vec<Complex64> = exps
        .iter()
        .map(|list| list.iter().map(|e| (e - max_re).exp()).sum())
        .collect();

    // tail: first two excluded terms on each side bound a super-geometric series
    let partial = sums[0].norm().max(sums[1].norm());
    let mut tail = 0.0f64;
    for s in 0..2i64 {
        for side in [-1i64, 1] {
            let first = (exponent((2 * (side * (j_window + 1)) + s) as f64).re - max_re).exp();
            let second = (exponent((2 * (side * (j_window + 2)) + s) as f64).re - max_re).exp();
            let bound = if first == 0.0 {
                0.0
            } else if second < first {
                first / (1.0 - second / first)
            } else {
                f64::INFINITY
            };
            tail = tail.max(bound);
        }
    }
    let relative_tail = tail / partial;
    if !(relative_tail < LATTICE_TAIL_TOL) {
        return Err(Error::TailNotConverged {
            j_window,
            tail: relative_tail,
        });
    }

    let log_prefactor = -i * 0.5 * PI * k * k * cot - 0.5 * (1.0 - (2.0 * i * zeta).exp()).ln();
    Ok(join(
        ScaledComplex::new(sums[0], max_re),
        ScaledComplex::new(sums[1], max_re),
        log_prefactor,
    ))
}

/// Comb half-width that covers every lattice point where some `ψₙ`,
/// `n <= n_max`, is not negligible.
pub fn mehler_j_window(n_max: usize) -> i64 {
    let turning = (2.0 * n_max as f64 + 1.0).sqrt();
    ((turning + 12.0) / (2.0 * PI.sqrt())).ceil() as i64 + 1
}

/// Coefficients as the truncated Fock-space double sum
/// `Σ_{|j|<=J} Σ_{n<=n_max} ψₙ((2j+s)√π) e^{(iθ_r-β)n} ψₙ(q_m)`.
///
/// Independent of the Mehler kernel and of theta functions; converges like
/// `e^{-β n_max}`.
pub fn coefficients_mehler(
    outcome: MeasurementOutcome,
    params: ProtocolParams,
    n_max: usize,
    j_window: i64,
) -> Result<OutputCoefficients> {
    if j_window < 0 {
        return Err(Error::InvalidWindow(j_window));
    }
    let psi_q = hermite_functions(n_max, outcome.q_m);
    let root_pi = PI.sqrt();
    let mut combs = [vec![0.0; n_max + 1], vec![0.0; n_max + 1]];
    for (s, comb) in combs.iter_mut().enumerate() {
        for j in -j_window..=j_window {
            let x = (2 * j + s as i64) as f64 * root_pi;
            for (acc, psi) in comb.iter_mut().zip(hermite_functions(n_max, x)) {
                *acc += psi;
            }
        }
    }
    let step = Complex64::from_polar((-params.beta).exp(), params.theta_r);
    let mut c = [Complex64::new(0.0, 0.0); 2];
    for (s, comb) in combs.iter().enumerate() {
        let mut w = Complex64::new(1.0, 0.0);
        for (a, p) in comb.iter().zip(&psi_q) {
            c[s] += w * (a * p);
            w *= step;
        }
    }
    Ok(OutputCoefficients::new(c[0], c[1]))
}

/// Picks a non-singular route: theta form unless `cos ζ` vanishes, lattice
/// form otherwise.
pub fn coefficients(outcome: MeasurementOutcome, params: ProtocolParams) -> Result<OutputCoefficients> {
    match coefficients_theta(outcome, params) {
        Err(Error::SingularRotation { .. }) => {
            coefficients_lattice(outcome, params, lattice_j_window(outcome, params))
        }
        other => other,
    }
}

/// `θ = 2 atan(|C₋|/|C₊|)`, `φ = arg C₋ − arg C₊` wrapped to `(-π, π]`.
///
/// The phase is taken from full-quadrant arguments of each coefficient.
pub fn bloch_angles(coeffs: &OutputCoefficients) -> Result<BlochPoint> {
    let (a, b) = (coeffs.c_plus.norm(), coeffs.c_minus.norm());
    if a == 0.0 && b == 0.0 {
        return Err(Error::DegenerateState);
    }
    let theta = 2.0 * b.atan2(a);
    Ok(BlochPoint::new(theta, coeffs.c_minus.arg() - coeffs.c_plus.arg()))
}

/// Unnormalized outcome density `|C₊|² + |C₋|²`.
pub fn prob_density(outcome: MeasurementOutcome, params: ProtocolParams) -> Result<f64> {
    coefficients(outcome, params).map(|c| c.density())
}
