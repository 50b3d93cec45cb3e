//! Normalized harmonic-oscillator eigenfunctions.

use std::f64::consts::PI;

// rescale the recurrence when the mantissa leaves [1e-150, 1e150]
const RESCALE: f64 = 1e150;

/// `ψ₀(x) … ψ_{n_max}(x)` with `ψₙ(x) = (2ⁿ n! √π)^{-1/2} e^{-x²/2} Hₙ(x)`.
///
/// Uses the three-term recurrence
/// `ψₙ₊₁ = √(2/(n+1)) x ψₙ - √(n/(n+1)) ψₙ₋₁` on a mantissa with a separate
/// log scale, so neither `n!` nor `e^{-x²/2}` is ever formed on its own.
/// Entries that underflow in `f64` come back as zero.
pub fn hermite_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.25 * PI.ln() - 0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(log_scale.exp());
    for n in 0..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}
