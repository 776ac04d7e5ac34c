//! Closed-form Euclidean kernels.

use crate::error::{Error, Result};

fn check(t: f64, m: f64, hbar: f64) -> Result<()> {
    if !(t > 0.0) || !(m > 0.0) || !(hbar > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kernel needs T, m, hbar > 0 (got {t}, {m}, {hbar})"
        )));
    }
    Ok(())
}

/// `ln K` of the free-particle heat kernel `sqrt(m/(2 pi hbar T)) exp(-m (x_f-x_i)^2 / (2 hbar T))`.
pub fn free_log_kernel(x_i: f64, x_f: f64, t: f64, m: f64, hbar: f64) -> Result<f64> {
    check(t, m, hbar)?;
    let d = x_f - x_i;
    Ok(0.5 * (m / (2.0 * std::f64::consts::PI * hbar * t)).ln() - m * d * d / (2.0 * hbar * t))
}

pub fn free_kernel(x_i: f64, x_f: f64, t: f64, m: f64, hbar: f64) -> Result<f64> {
    free_log_kernel(x_i, x_f, t, m, hbar).map(f64::exp)
}

/// `ln K` of the harmonic-oscillator Euclidean kernel (Mehler form).
///
/// For `omega T > 350` the hyperbolic functions are replaced by their
/// exponential asymptotics so nothing overflows.
pub fn ho_exact_log_kernel(x_i: f64, x_f: f64, t: f64, m: f64, omega: f64, hbar: f64) -> Result<f64> {
    check(t, m, hbar)?;
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be > 0, got {omega}")));
    }
    let wt = omega * t;
    let pi = std::f64::consts::PI;
    if wt > 350.0 {
        // sinh ~ cosh ~ e^{wt}/2; coth -> 1, 1/sinh -> 2 e^{-wt}
        let ln_sinh = wt - std::f64::consts::LN_2;
        let coth = 1.0;
        let csch = 2.0 * (-wt).exp();
        let pre = 0.5 * ((m * omega / (2.0 * pi * hbar)).ln() - ln_sinh);
        let expo = -(m * omega / (2.0 * hbar)) * ((x_i * x_i + x_f * x_f) * coth - 2.0 * x_i * x_f * csch);
        return Ok(pre + expo);
    }
    let s = wt.sinh();
    let c = wt.cosh();
    let pre = 0.5 * (m * omega / (2.0 * pi * hbar * s)).ln();
    let expo = -(m * omega / (2.0 * hbar * s)) * ((x_i * x_i + x_f * x_f) * c - 2.0 * x_i * x_f);
    Ok(pre + expo)
}

pub fn ho_exact_kernel(x_i: f64, x_f: f64, t: f64, m: f64, omega: f64, hbar: f64) -> Result<f64> {
    ho_exact_log_kernel(x_i, x_f, t, m, omega, hbar).map(f64::exp)
}

/// `psi_n(x)` of the harmonic oscillator, normalized Hermite functions by
/// the stable three-term recurrence.
pub fn ho_eigenfunction(n: usize, x: f64, m: f64, omega: f64, hbar: f64) -> f64 {
    let a = (m * omega / hbar).sqrt();
    let y = a * x;
    let mut p0 = a.sqrt() * std::f64::consts::PI.powf(-0.25) * (-0.5 * y * y).exp();
    if n == 0 {
        return p0;
    }
    let mut p1 = std::f64::consts::SQRT_2 * y * p0;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = (2.0 / kf).sqrt() * y * p1 - ((kf - 1.0) / kf).sqrt() * p0;
        p0 = p1;
        p1 = p2;
    }
    p1
}
