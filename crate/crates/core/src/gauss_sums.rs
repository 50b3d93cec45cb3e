//! Generalized quadratic Gauss sums and the Pauli classification of the
//! output at zero damping.
//!
//! At `β → 0` with `tan θ_r = u/v` the density collapses onto the outcomes
//! `k = ℓ/√(u²+v²)` and at each of them
//!
//! ```text
//! C₋/C₊ = G(u, 2ℓ+2v, 4v) / G(u, 2ℓ, 4v),   G(a,b,c) = Σ_{n<c} e^{2πi(an²+bn)/c}
//! ```
//!
//! which only takes the values `0, ∞, ±1, ±i`. In the `|+̃⟩, |−̃⟩` basis used
//! here `0` and `∞` are the X eigenstates, `±1` the Z eigenstates and `±i`
//! the Y eigenstates.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theta::{gcd, RationalAngle};

/// Distance to a quantized value still accepted as that value.
pub const QUANTIZATION_TOL: f64 = 1e-10;

// |G| is 0 or at least √c for the moduli used here
const ZERO_SUM_TOL: f64 = 1e-8;

/// Arguments of `G(a, b, c) = Σ_{n=0}^{c-1} exp(2πi(an² + bn)/c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussSumSpec {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl GaussSumSpec {
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        if c < 1 {
            return Err(Error::InvalidInput(format!("Gauss sum modulus must be positive, got {c}")));
        }
        Ok(Self { a, b, c })
    }
}

/// Exact evaluation: phases are reduced as integers modulo `c`, counted per
/// residue, and each distinct residue is turned into a complex number once.
pub fn gauss_sum(spec: GaussSumSpec) -> Complex64 {
    let c = spec.c;
    let (a, b) = (spec.a.rem_euclid(c), spec.b.rem_euclid(c));
    let mut counts = vec![0u64; c as usize];
    for n in 0..c {
        let phase = ((a as i128 * (n * n) as i128 + b as i128 * n as i128) % c as i128) as usize;
        counts[phase] += 1;
    }
    counts
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(r, &m)| Complex64::from_polar(m as f64, 2.0 * PI * r as f64 / c as f64))
        .sum()
}

/// Jacobi symbol `(u/v)` for odd `v >= 1`, by quadratic reciprocity.
pub fn jacobi_symbol(u: i64, v: i64) -> Result<i8> {
    if v < 1 || v % 2 == 0 {
        return Err(Error::EvenModulus(v));
    }
    let mut a = u.rem_euclid(v);
    let mut n = v;
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

/// `G(a, b, c) = ε_c √c (a/c) exp(-2πi (4a)⁻¹ b² / c)` for odd `c` coprime
/// to `a`, with `ε_c = 1` for `c ≡ 1 (mod 4)` and `i` for `c ≡ 3 (mod 4)`.
pub fn gauss_sum_closed_form(spec: GaussSumSpec) -> Result<Complex64> {
    let GaussSumSpec { a, b, c } = spec;
    if c % 2 == 0 {
        return Err(Error::EvenModulus(c));
    }
    if gcd(a, c) != 1 {
        return Err(Error::NotCoprime { u: a, v: c });
    }
    let eps = if c % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::i()
    };
    let symbol = jacobi_symbol(a, c)? as f64;
    let inv = mod_inverse(4 * a, c).unwrap_or(0);
    let b = b.rem_euclid(c) as i128;
    let r = ((inv as i128 * b * b) % c as i128) as f64;
    Ok(eps * (c as f64).sqrt() * symbol * Complex64::from_polar(1.0, -2.0 * PI * r / c as f64))
}

/// `C₋/C₊` at a zero-damping peak.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PeakRatio {
    Value(Complex64),
    /// `C₊ = 0`, `C₋ ≠ 0`.
    Infinite,
    /// Both coefficients vanish; never observed for coprime `(u, v)`.
    Indeterminate,
}

impl PeakRatio {
    /// Snaps to the nearest of `0, ±1, ±i` when within [`QUANTIZATION_TOL`].
    pub fn quantized(&self) -> Option<PeakRatio> {
        match *self {
            PeakRatio::Value(r) => [
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
            ]
            .into_iter()
            .find(|q| (r - q).norm() < QUANTIZATION_TOL)
            .map(PeakRatio::Value),
            other => Some(other),
        }
    }
}

/// `C₋/C₊` at the outcome `k = ℓ/√(u²+v²)` in the `β → 0` limit, from the
/// two finite sums of period `2v`.
pub fn ratio_at_peak(angle: RationalAngle, ell: i64) -> PeakRatio {
    let (u, v) = (angle.u(), angle.v());
    let plus = gauss_sum(GaussSumSpec { a: u, b: 2 * ell, c: 4 * v });
    let minus = gauss_sum(GaussSumSpec {
        a: u,
        b: 2 * ell + 2 * v,
        c: 4 * v,
    });
    match (plus.norm() < ZERO_SUM_TOL, minus.norm() < ZERO_SUM_TOL) {
        (true, true) => PeakRatio::Indeterminate,
        (true, false) => PeakRatio::Infinite,
        (false, true) => PeakRatio::Value(Complex64::new(0.0, 0.0)),
        (false, false) => PeakRatio::Value(minus / plus),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictAxis {
    X,
    Y,
    Z,
    /// `|+̃⟩`, `C₋/C₊ = 0`.
    PlusState,
    /// `|−̃⟩`, `C₋/C₊ = ∞`.
    MinusState,
    Undetermined,
}

/// Pauli eigenstate reached at one zero-damping outcome.
///
/// `sign` is the eigenvalue: `+1` for `|+̃⟩`, `|0̃⟩` (ratio `+1`) and
/// `(|0̃⟩ + i|1̃⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliVerdict {
    pub axis: VerdictAxis,
    pub sign: Option<i8>,
    pub ratio: PeakRatio,
}

impl PauliVerdict {
    pub fn from_ratio(ratio: PeakRatio) -> Self {
        let (axis, sign) = match ratio.quantized() {
            Some(PeakRatio::Infinite) => (VerdictAxis::MinusState, Some(-1)),
            Some(PeakRatio::Value(r)) if r.norm() == 0.0 => (VerdictAxis::PlusState, Some(1)),
            Some(PeakRatio::Value(r)) if r.im == 0.0 => (VerdictAxis::Z, Some(r.re as i8)),
            // C₋/C₊ = ±i  ↔  C₁/C₀ = ∓i
            Some(PeakRatio::Value(r)) => (VerdictAxis::Y, Some(-r.im as i8)),
            _ => (VerdictAxis::Undetermined, None),
        };
        Self { axis, sign, ratio }
    }

    /// The Pauli axis, with the two X eigenstates folded into `X`.
    pub fn pauli_axis(&self) -> VerdictAxis {
        match self.axis {
            VerdictAxis::PlusState | VerdictAxis::MinusState => VerdictAxis::X,
            a => a,
        }
    }
}

/// Zero-damping classification for one rational angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroDampingClass {
    pub angle: RationalAngle,
    /// Axis from the parity rule: `v` odd and `u` even gives X, both odd
    /// gives Y, `v` even gives Z.
    pub axis: VerdictAxis,
    /// Verdict for `ℓ = 0 … 2v-1`; the pattern repeats with period `2v`.
    pub table: Vec<PauliVerdict>,
}

impl ZeroDampingClass {
    pub fn verdict_at(&self, ell: i64) -> PauliVerdict {
        self.table[ell.rem_euclid(self.table.len() as i64) as usize]
    }
}

fn parity_axis(u: i64, v: i64) -> VerdictAxis {
    match (u.rem_euclid(2), v.rem_euclid(2)) {
        (_, 0) => VerdictAxis::Z,
        (1, 1) => VerdictAxis::Y,
        _ => VerdictAxis::X,
    }
}

/// Closed-form verdict for odd `v`: `C₁/C₀ = e^{iπuv/2} e^{iπℓ}` in the
/// computational basis, i.e. `C₋/C₊ = (1 - C₁/C₀)/(1 + C₁/C₀)`.
fn odd_modulus_verdict(u: i64, v: i64, ell: i64) -> PauliVerdict {
    let ratio = match (u * v + 2 * ell).rem_euclid(4) {
        0 => PeakRatio::Value(Complex64::new(0.0, 0.0)),
        1 => PeakRatio::Value(Complex64::new(0.0, -1.0)),
        2 => PeakRatio::Infinite,
        _ => PeakRatio::Value(Complex64::new(0.0, 1.0)),
    };
    PauliVerdict::from_ratio(ratio)
}

/// Parity-rule axis and the per-outcome verdicts. Odd `v` uses the closed
/// form; even `v` has none and is tabulated from the finite sums.
pub fn classify_zero_damping(angle: RationalAngle) -> ZeroDampingClass {
    let (u, v) = (angle.u(), angle.v());
    let table = (0..2 * v)
        .map(|ell| {
            if v % 2 == 1 {
                odd_modulus_verdict(u, v, ell)
            } else {
                PauliVerdict::from_ratio(ratio_at_peak(angle, ell))
            }
        })
        .collect();
    ZeroDampingClass {
        angle,
        axis: parity_axis(u, v),
        table,
    }
}

/// `k_ℓ = ℓ/√(u²+v²)`: the only outcomes with weight as `β → 0`.
pub fn allowed_outcomes(angle: RationalAngle, ell_range: RangeInclusive<i64>) -> Vec<f64> {
    let h = angle.hypot();
    ell_range.map(|ell| ell as f64 / h).collect()
}
