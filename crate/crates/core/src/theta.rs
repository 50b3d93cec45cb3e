//! Jacobi theta functions θ₃ and θ₄ for complex argument and lattice parameter.
//!
//! The lattice form `θ₃{z|τ} = Σ_ℓ exp(iπτℓ² + 2iℓz)` is evaluated by a
//! direct symmetric partial sum ([`theta3_series`]) or, for small `Im τ`, by
//! first moving `(z, τ)` towards the fundamental domain with the exact
//! identities
//!
//! ```text
//! θ₃{z | τ + 1}        = θ₃{z + π/2 | τ}
//! θ₃{z + nπτ | τ}      = ω^{-n²} e^{-2inz} θ₃{z | τ},      ω = e^{iπτ}
//! θ₃{z/τ | -1/τ}       = e^{iz²/(πτ)} √(-iτ) θ₃{z | τ}
//! ```
//!
//! ([`theta3_modular`]). All prefactors are accumulated in log space so that
//! values far outside the `f64` range are still usable through
//! [`ScaledComplex`].
//!
//! [`theta3_rational`] implements the finite residue decomposition that holds
//! when the real part of `τ` is the rational `u/(2v)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative truncation tolerance used when none is supplied.
pub const DEFAULT_TOL: f64 = 1e-17;
/// Maximum number of lattice terms a single series may use.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;
/// `Im τ` below which the modular transform is applied.
pub const DEFAULT_MODULAR_THRESHOLD: f64 = 0.5;
/// Gaussian peaks kept on either side of the nearest one in [`theta3_rational`].
pub const DEFAULT_PEAK_WINDOW: i64 = 8;

// consecutive negligible terms required before the series stops
const SMALL_RUN: usize = 3;
// the inversion step only helps while |Re τ| <= 1/2 forces |τ| < 1
const MAX_MODULAR_THRESHOLD: f64 = 0.85;
const MAX_INVERSIONS: usize = 128;

/// A complex number stored as `value · exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    pub value: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub fn new(value: Complex64, log_scale: f64) -> Self {
        Self { value, log_scale }
    }

    /// Collapse to a plain complex number (may over- or underflow).
    pub fn to_complex(self) -> Complex64 {
        if self.value == Complex64::new(0.0, 0.0) {
            return self.value;
        }
        self.value * self.log_scale.exp()
    }

    /// `ln |value · e^{log_scale}|`, `-inf` for an exact zero.
    pub fn ln_abs(self) -> f64 {
        self.value.norm().ln() + self.log_scale
    }

    /// Multiply by `exp(log_factor)`.
    pub fn mul_exp(self, log_factor: Complex64) -> Self {
        Self {
            value: self.value * Complex64::from_polar(1.0, log_factor.im),
            log_scale: self.log_scale + log_factor.re,
        }
    }
}

/// Argument pair `(z, τ)` with `Im τ > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaArgs {
    z: Complex64,
    tau: Complex64,
}

impl ThetaArgs {
    pub fn new(z: Complex64, tau: Complex64) -> Result<Self> {
        let finite = z.re.is_finite() && z.im.is_finite() && tau.re.is_finite();
        if !(tau.im > 0.0 && tau.im.is_finite()) || !finite {
            return Err(Error::NonconvergentParameters {
                re: tau.re,
                im: tau.im,
            });
        }
        Ok(Self { z, tau })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// The nome `ω = e^{iπτ}`; `|ω| < 1` by construction.
    pub fn nome(&self) -> Complex64 {
        (Complex64::i() * PI * self.tau).exp()
    }

    /// Same `τ`, argument shifted by `π/2` (θ₃ at the shifted point is θ₄).
    pub fn quarter_shift(&self) -> Self {
        Self {
            z: self.z + FRAC_PI_2,
            tau: self.tau,
        }
    }
}

/// Knobs for [`theta3`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaConfig {
    pub tol: f64,
    pub term_cap: usize,
    pub modular_threshold: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            term_cap: DEFAULT_TERM_CAP,
            modular_threshold: DEFAULT_MODULAR_THRESHOLD,
        }
    }
}

impl ThetaConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.modular_threshold > 0.0 && self.modular_threshold <= MAX_MODULAR_THRESHOLD) {
            return Err(Error::InvalidInput(format!(
                "modular threshold must lie in (0, {MAX_MODULAR_THRESHOLD}], got {}",
                self.modular_threshold
            )));
        }
        Ok(())
    }
}

/// Symmetric partial sum over `ℓ ∈ [-L, L]`, scaled by the largest term.
fn series_kernel(z: Complex64, tau: Complex64, tol: f64, cap: usize) -> Result<ScaledComplex> {
    // log|term_ℓ| = -aℓ² - bℓ
    let a = PI * tau.im;
    let b = 2.0 * z.im;
    let peak = (b / (2.0 * a)).abs();
    // largest exponent over the integers nearest the continuous maximum
    let vertex = -b / (2.0 * a);
    let shift = [vertex.floor(), vertex.ceil()]
        .iter()
        .map(|l| -a * l * l - b * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let i = Complex64::i();
    let term = |l: f64| (i * PI * tau * (l * l) + 2.0 * i * l * z - shift).exp();

    let mut sum = term(0.0);
    let mut run = 0;
    let mut l = 0usize;
    while run < SMALL_RUN {
        l += 1;
        if 2 * l + 1 > cap {
            return Err(Error::ToleranceUnreachable { cap });
        }
        let lf = l as f64;
        let plus = term(lf);
        let minus = term(-lf);
        sum += plus + minus;
        let largest = plus.norm().max(minus.norm());
        if lf > peak && largest <= tol * sum.norm() {
            run += 1;
        } else {
            run = 0;
        }
    }
    Ok(ScaledComplex::new(sum, shift))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")))
    }
}

/// θ₃ by direct lattice summation, returned in scaled form.
pub fn theta3_series_scaled(args: ThetaArgs, tol: f64) -> Result<ScaledComplex> {
    check_tol(tol)?;
    series_kernel(args.z, args.tau, tol, DEFAULT_TERM_CAP)
}

/// θ₃ by direct lattice summation `Σ_ℓ e^{2iℓz} ω^{ℓ²}`.
///
/// The sum stops once three consecutive `±ℓ` pairs past the largest term are
/// below `tol` relative to the partial sum. Slow when `Im τ` is small; use
/// [`theta3`] in that regime.
pub fn theta3_series(args: ThetaArgs, tol: f64) -> Result<Complex64> {
    theta3_series_scaled(args, tol).map(ScaledComplex::to_complex)
}

/// θ₄{z|τ} = θ₃{z + π/2 | τ} through [`theta3_series`].
pub fn theta4_series(args: ThetaArgs, tol: f64) -> Result<Complex64> {
    theta3_series(args.quarter_shift(), tol)
}

/// Shrinks `Im z` into `[-πIm τ/2, πIm τ/2]` and `Re z` into `[-π/2, π/2]`.
fn reduce_argument(z: &mut Complex64, tau: Complex64, log_prefactor: &mut Complex64) {
    let n = (z.im / (PI * tau.im)).round();
    if n != 0.0 {
        let reduced = *z - n * PI * tau;
        let i = Complex64::i();
        *log_prefactor += -i * PI * tau * (n * n) - 2.0 * i * n * reduced;
        *z = reduced;
    }
    z.re -= PI * (z.re / PI).round();
}

fn modular_scaled(args: ThetaArgs, cfg: &ThetaConfig) -> Result<ScaledComplex> {
    cfg.validate()?;
    let i = Complex64::i();
    let mut z = args.z;
    let mut tau = args.tau;
    let mut log_prefactor = Complex64::new(0.0, 0.0);
    for _ in 0..MAX_INVERSIONS {
        let m = tau.re.round();
        tau.re -= m;
        z += m * FRAC_PI_2;
        reduce_argument(&mut z, tau, &mut log_prefactor);
        if tau.im >= cfg.modular_threshold {
            break;
        }
        log_prefactor += -i * z * z / (PI * tau) - 0.5 * (-i * tau).ln();
        z /= tau;
        tau = -1.0 / tau;
    }
    let m = tau.re.round();
    tau.re -= m;
    z += m * FRAC_PI_2;
    reduce_argument(&mut z, tau, &mut log_prefactor);
    Ok(series_kernel(z, tau, cfg.tol, cfg.term_cap)?.mul_exp(log_prefactor))
}

/// θ₃ through the modular reduction chain, returned in scaled form.
pub fn theta3_modular_scaled(args: ThetaArgs, tol: f64) -> Result<ScaledComplex> {
    let cfg = ThetaConfig {
        tol,
        ..ThetaConfig::default()
    };
    modular_scaled(args, &cfg)
}

/// θ₃ evaluated after reducing `τ` with `τ → τ - m` and `τ → -1/τ` until
/// `Im τ` reaches the default threshold, with `z` kept inside one
/// quasi-period at every step.
pub fn theta3_modular(args: ThetaArgs, tol: f64) -> Result<Complex64> {
    theta3_modular_scaled(args, tol).map(ScaledComplex::to_complex)
}

/// θ₃ with explicit configuration, scaled form. This is the evaluator used
/// by the rest of the crate.
pub fn theta3_scaled(args: ThetaArgs, cfg: &ThetaConfig) -> Result<ScaledComplex> {
    modular_scaled(args, cfg)
}

/// θ₃ with explicit configuration.
pub fn theta3(args: ThetaArgs, cfg: &ThetaConfig) -> Result<Complex64> {
    theta3_scaled(args, cfg).map(ScaledComplex::to_complex)
}

/// θ₄{z|τ} = θ₃{z + π/2 | τ} through [`theta3`].
pub fn theta4(args: ThetaArgs, cfg: &ThetaConfig) -> Result<Complex64> {
    theta3(args.quarter_shift(), cfg)
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Coprime pair `(u, v)`, `v > 0`, standing for `tan θ_r = u/v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalAngle {
    u: i64,
    v: i64,
}

impl RationalAngle {
    pub fn new(u: i64, v: i64) -> Result<Self> {
        if v <= 0 || gcd(u, v) != 1 {
            return Err(Error::NotCoprime { u, v });
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> i64 {
        self.u
    }

    pub fn v(&self) -> i64 {
        self.v
    }

    pub fn tan(&self) -> f64 {
        self.u as f64 / self.v as f64
    }

    /// The rotation angle `atan(u/v)` in `(-π/2, π/2)`.
    pub fn theta_r(&self) -> f64 {
        (self.u as f64).atan2(self.v as f64)
    }

    /// `√(u² + v²)`.
    pub fn hypot(&self) -> f64 {
        (self.u as f64).hypot(self.v as f64)
    }

    /// `β' = (1 + u²/v²) β / 2`.
    pub fn effective_beta(&self, beta: f64) -> f64 {
        let t = self.tan();
        0.5 * (1.0 + t * t) * beta
    }
}

/// `exp(iπ r / d)` for an integer residue, reduced modulo `2d` first.
pub(crate) fn unit_root(r: i64, d: i64) -> Complex64 {
    let r = r.rem_euclid(2 * d);
    Complex64::from_polar(1.0, PI * r as f64 / d as f64)
}

/// θ₃ (or θ₄ when `sign_theta4`) as the finite sum over residues
/// `n = 0 … 2v-1` of Gaussian peak trains,
///
/// ```text
/// 1/(2v√β') Σₙ (±1)ⁿ e^{iπn²u/2v} Σ_ℓ e^{iπℓn/v} exp[-(z + ℓπ/2v)²/(πβ')]
/// ```
///
/// at the zero-damping argument `z = -(πk/2)·√(u²+v²)/v`. The inner sum keeps
/// `ell_window` peaks on either side of the one nearest `z`. The result is
/// θ at `τ = u/2v + iβ'`, the first-order expansion of `tan(θ_r + iβ)/2`.
pub fn theta3_rational(
    k: f64,
    angle: RationalAngle,
    beta: f64,
    ell_window: i64,
    sign_theta4: bool,
) -> Result<Complex64> {
    if ell_window < 1 {
        return Err(Error::InvalidWindow(ell_window));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let (u, v) = (angle.u, angle.v);
    let beta_eff = angle.effective_beta(beta);
    let z = -0.5 * PI * k * angle.hypot() / v as f64;
    let nearest = (k * angle.hypot()).round() as i64;

    let mut total = Complex64::new(0.0, 0.0);
    for ell in (nearest - ell_window)..=(nearest + ell_window) {
        let offset = z + ell as f64 * PI / (2 * v) as f64;
        let gauss = (-offset * offset / (PI * beta_eff)).exp();
        if gauss == 0.0 {
            continue;
        }
        let mut residues = Complex64::new(0.0, 0.0);
        for n in 0..2 * v {
            // e^{iπ(n²u + 2ℓn)/2v}
            let mut w = unit_root((n * n).rem_euclid(4 * v) * u.rem_euclid(4 * v) + 2 * ell * n, 2 * v);
            if sign_theta4 && n % 2 == 1 {
                w = -w;
            }
            residues += w;
        }
        total += residues * gauss;
    }
    Ok(total / (2.0 * v as f64 * beta_eff.sqrt()))
}

/// Peak window that keeps the neglected Gaussians of [`theta3_rational`]
/// below `e^{-40}` relative to the nearest one.
pub fn rational_peak_window(angle: RationalAngle, beta: f64) -> i64 {
    let beta_eff = angle.effective_beta(beta);
    let spacing = PI / (2 * angle.v) as f64;
    let reach = (40.0 * PI * beta_eff).sqrt();
    ((reach / spacing).ceil() as i64 + 1).max(DEFAULT_PEAK_WINDOW)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn args(z: Complex64, tau: Complex64) -> ThetaArgs {
        ThetaArgs::new(z, tau).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // Σ e^{-πℓ²} for |ℓ| <= 50, which is exact to double precision
    fn brute_theta_imaginary_tau(z: f64) -> Complex64 {
        (-50i64..=50)
            .map(|l| {
                let l = l as f64;
                c((-PI * l * l).exp(), 0.0) * Complex64::from_polar(1.0, 2.0 * l * z)
            })
            .sum()
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(matches!(
            ThetaArgs::new(c(0.0, 0.0), c(0.3, 0.0)),
            Err(Error::NonconvergentParameters { .. })
        ));
        assert!(ThetaArgs::new(c(0.0, 0.0), c(0.3, -1.0)).is_err());
        assert!(theta3_series(args(c(0.0, 0.0), c(0.0, 1.0)), 0.0).is_err());
    }

    #[test]
    fn series_value_at_tau_i() {
        let got = theta3_series(args(c(0.0, 0.0), c(0.0, 1.0)), DEFAULT_TOL).unwrap();
        let expected = brute_theta_imaginary_tau(0.0);
        assert!((got.re - 1.086_434_811_213_308).abs() < 1e-14);
        assert!(rel(got, expected) < 1e-15);
        assert!(got.im.abs() < 1e-16);
    }

    #[test]
    fn series_periodic_in_z() {
        let a = theta3_series(args(c(0.0, 0.0), c(0.0, 1.0)), DEFAULT_TOL).unwrap();
        let b = theta3_series(args(c(PI, 0.0), c(0.0, 1.0)), DEFAULT_TOL).unwrap();
        assert!(rel(b, a) < 1e-14);
    }

    #[test]
    fn quarter_shift_is_theta4() {
        let t = c(0.0, 1.0);
        let half = theta3_series(args(c(FRAC_PI_2, 0.0), t), DEFAULT_TOL).unwrap();
        let alternating: f64 = (-50i64..=50)
            .map(|l| if l % 2 == 0 { 1.0 } else { -1.0 } * (-PI * (l * l) as f64).exp())
            .sum();
        assert!((half.re - alternating).abs() < 1e-15);
        let t4 = theta4_series(args(c(0.0, 0.0), t), DEFAULT_TOL).unwrap();
        assert_eq!(t4, half);
        let back = theta4_series(args(c(-FRAC_PI_2, 0.0), t), DEFAULT_TOL).unwrap();
        let t3 = theta3_series(args(c(0.0, 0.0), t), DEFAULT_TOL).unwrap();
        assert_eq!(back, t3);
    }

    #[test]
    fn theta4_delegates_exactly() {
        let a = args(c(0.7, 0.0), c(0.0, 0.3));
        let t4 = theta4_series(a, DEFAULT_TOL).unwrap();
        let t3 = theta3_series(args(c(0.7 + FRAC_PI_2, 0.0), c(0.0, 0.3)), DEFAULT_TOL).unwrap();
        assert_eq!(t4, t3);
        let cfg = ThetaConfig::default();
        let d4 = theta4(a, &cfg).unwrap();
        let d3 = theta3(args(c(0.7 + FRAC_PI_2, 0.0), c(0.0, 0.3)), &cfg).unwrap();
        assert_eq!(d4, d3);
    }

    #[test]
    fn self_dual_point() {
        let a = args(c(0.0, 0.0), c(0.0, 1.0));
        let s = theta3_series(a, DEFAULT_TOL).unwrap();
        let m = theta3_modular(a, DEFAULT_TOL).unwrap();
        assert!(rel(m, s) < 1e-14);
        // one explicit inversion with a threshold above Im τ
        let cfg = ThetaConfig {
            modular_threshold: 0.85,
            ..ThetaConfig::default()
        };
        let low = args(c(0.0, 0.0), c(0.0, 0.8));
        let via = theta3(low, &cfg).unwrap();
        let direct = theta3_series(low, DEFAULT_TOL).unwrap();
        assert!(rel(via, direct) < 1e-14);
    }

    #[test]
    fn modular_matches_series_small_tau() {
        let a = args(c(0.3, 0.0), c(0.0, 0.1));
        let s = theta3_series(a, DEFAULT_TOL).unwrap();
        let m = theta3_modular(a, DEFAULT_TOL).unwrap();
        assert!(rel(m, s) < 1e-10, "{}", rel(m, s));
    }

    #[test]
    fn modular_matches_series_complex_args() {
        let a = args(c(0.2, 0.1), c(0.5, 0.05));
        let s = theta3_series(a, DEFAULT_TOL).unwrap();
        let m = theta3_modular(a, DEFAULT_TOL).unwrap();
        assert!(rel(m, s) < 1e-8, "{}", rel(m, s));
    }

    #[test]
    fn term_cap_is_enforced() {
        let a = args(c(0.0, 0.0), c(0.0, 1e-13));
        assert_eq!(
            theta3_series(a, DEFAULT_TOL),
            Err(Error::ToleranceUnreachable {
                cap: DEFAULT_TERM_CAP
            })
        );
        // the modular route is unaffected
        let m = theta3_modular_scaled(a, DEFAULT_TOL).unwrap();
        assert!((m.ln_abs() - 0.5 * (1e13f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn scaled_values_survive_underflow() {
        // θ₄{0 | 1e-4 i} ≈ 2·10² e^{-π/(4·1e-4)}, far below f64::MIN_POSITIVE
        let a = args(c(FRAC_PI_2, 0.0), c(0.0, 1e-4));
        let s = theta3_modular_scaled(a, DEFAULT_TOL).unwrap();
        let expected = (2.0 / 1e-4f64.sqrt()).ln() - PI / (4.0 * 1e-4);
        assert!((s.ln_abs() - expected).abs() < 1e-9);
        assert_eq!(s.to_complex(), c(0.0, 0.0));
    }

    #[test]
    fn rational_angle_validation() {
        assert!(RationalAngle::new(2, 4).is_err());
        assert!(RationalAngle::new(1, 0).is_err());
        assert!(RationalAngle::new(1, -3).is_err());
        assert!(RationalAngle::new(0, 1).is_ok());
        assert!(RationalAngle::new(-3, 4).is_ok());
        let a = RationalAngle::new(3, 4).unwrap();
        assert_eq!(a.hypot(), 5.0);
        assert!((a.effective_beta(0.02) - 0.5 * (1.0 + 9.0 / 16.0) * 0.02).abs() < 1e-18);
        assert!(a.effective_beta(1e-9) > 0.0);
    }

    #[test]
    fn rational_window_validation() {
        let a = RationalAngle::new(1, 1).unwrap();
        assert_eq!(theta3_rational(0.0, a, 0.04, 0, false), Err(Error::InvalidWindow(0)));
        assert!(theta3_rational(0.0, a, 0.0, 8, false).is_err());
    }

    #[test]
    fn rational_equals_series_at_expanded_tau() {
        for &(u, v, beta, k) in &[
            (1i64, 1i64, 0.04, 0.0),
            (1, 1, 0.04, 0.37),
            (1, 2, 0.01, -1.1),
            (3, 4, 0.005, 2.3),
            (-2, 3, 0.02, 0.8),
            (0, 1, 0.01, 0.25),
        ] {
            let a = RationalAngle::new(u, v).unwrap();
            let tau = c(a.tan() / 2.0, a.effective_beta(beta));
            let z = c(-0.5 * PI * k * a.hypot() / v as f64, 0.0);
            let w = rational_peak_window(a, beta);
            for theta4_flag in [false, true] {
                let got = theta3_rational(k, a, beta, w, theta4_flag).unwrap();
                let zz = if theta4_flag { z + FRAC_PI_2 } else { z };
                let want = theta3(args(zz, tau), &ThetaConfig::default()).unwrap();
                assert!(rel(got, want) < 1e-11, "{u}/{v} k={k} theta4={theta4_flag}: {}", rel(got, want));
            }
        }
    }

    #[test]
    fn rational_peak_value_u0() {
        let a = RationalAngle::new(0, 1).unwrap();
        let beta = 0.01;
        let got = theta3_rational(0.0, a, beta, DEFAULT_PEAK_WINDOW, false).unwrap();
        // n = 0 and n = 1 terms: 2 Σ_{ℓ even} exp(-(ℓπ/2)²/(πβ'))
        let be = a.effective_beta(beta);
        let direct: f64 = (-8i64..=8)
            .filter(|l| l % 2 == 0)
            .map(|l| 2.0 * (-(l as f64 * FRAC_PI_2).powi(2) / (PI * be)).exp())
            .sum::<f64>()
            / (2.0 * be.sqrt());
        assert!(got.im.abs() < 1e-12);
        assert!(got.re > 0.0);
        assert!((got.re - direct).abs() < 1e-12 * direct);
        assert!((got.re - 1.0 / be.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn rational_ratio_tracks_full_zeta() {
        // u = v = 1, β = 0.04, k = 0 against the exact complex ζ = π/4 + 0.04i
        let a = RationalAngle::new(1, 1).unwrap();
        let zeta = c(PI / 4.0, 0.04);
        let tau = zeta.tan() / 2.0;
        let cfg = ThetaConfig::default();
        let t3 = theta3(args(c(0.0, 0.0), tau), &cfg).unwrap();
        let t4 = theta4(args(c(0.0, 0.0), tau), &cfg).unwrap();
        let r3 = theta3_rational(0.0, a, 0.04, 8, false).unwrap();
        let r4 = theta3_rational(0.0, a, 0.04, 8, true).unwrap();
        assert!(rel(r4 / r3, t4 / t3) < 1e-3);
        // the value itself carries the O(β²) error of the expanded τ
        assert!(rel(r3, t3) < 0.05);
    }

    #[test]
    fn rational_midpoint_suppression() {
        let a = RationalAngle::new(1, 1).unwrap();
        let beta = 0.002;
        let be = a.effective_beta(beta);
        let on = theta3_rational(0.0, a, beta, 8, false).unwrap().norm();
        // halfway between peaks ℓ = 0 and ℓ = 1 in z, i.e. k = 1/(2√2)
        let k_mid = 0.5 / a.hypot();
        let off = theta3_rational(k_mid, a, beta, 8, false).unwrap().norm();
        let envelope = (-(PI / 2.0).powi(2) * 0.25 / (PI * be)).exp();
        assert!(off <= 2.5 * envelope * on, "{off} vs {}", envelope * on);
    }
}
