//! Exact partition function of a quadratic lattice action.

use super::path_action;
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Potential};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPartition {
    /// `ln Z` over the `n_tau - 2` interior positions.
    pub log_z: f64,
    pub action_min: f64,
    /// Full path including the fixed endpoints.
    pub minimizer: Vec<f64>,
    /// `ln det` of the interior Hessian of `S_E` (not divided by hbar).
    pub log_det_hessian: f64,
}

/// `V = a + b x + c x^2` coefficients, if the potential is quadratic.
fn quadratic_coefficients(pot: &Potential) -> Option<(f64, f64, f64)> {
    match pot {
        Potential::Free => Some((0.0, 0.0, 0.0)),
        Potential::Harmonic { mass, omega } => Some((0.0, 0.0, 0.5 * mass * omega * omega)),
        Potential::Polynomial(c) if c.len() <= 3 => {
            let g = |i: usize| c.get(i).copied().unwrap_or(0.0);
            Some((g(0), g(1), g(2)))
        }
        _ => None,
    }
}

/// `Z = (2 pi hbar)^{(N-2)/2} det(H)^{-1/2} exp(-S_min / hbar)` with `H` the
/// Hessian of `S_E` in interior coordinates. The minimizer and `ln det H`
/// come from one Thomas sweep.
pub fn gaussian_lattice_partition(lat: &LatticeSpec, pot: &Potential) -> Result<GaussianPartition> {
    let (_, b, c) = quadratic_coefficients(pot)
        .ok_or_else(|| Error::InvalidPotential("Gaussian partition needs a quadratic potential".into()))?;
    let n = lat.n_tau();
    let k = n - 2;
    let dt = lat.total_time() / (n - 1) as f64;
    let m = lat.mass();
    let hbar = lat.hbar();
    let diag = 2.0 * m / dt + 2.0 * dt * c;
    let off = -m / dt;
    // H y = r, r from the linear potential term and the fixed endpoints
    let mut r = vec![-dt * b; k];
    r[0] += m / dt * lat.x_start();
    r[k - 1] += m / dt * lat.x_end();

    let mut piv = vec![0.0; k];
    let mut rr = vec![0.0; k];
    piv[0] = diag;
    rr[0] = r[0];
    for j in 1..k {
        let f = off / piv[j - 1];
        piv[j] = diag - f * off;
        rr[j] = r[j] - f * rr[j - 1];
    }
    if piv.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::InvalidPotential("lattice Hessian is not positive definite".into()));
    }
    let mut y = vec![0.0; k];
    y[k - 1] = rr[k - 1] / piv[k - 1];
    for j in (0..k - 1).rev() {
        y[j] = (rr[j] - off * y[j + 1]) / piv[j];
    }
    let log_det_hessian: f64 = piv.iter().map(|p| p.ln()).sum();

    let mut minimizer = Vec::with_capacity(n);
    minimizer.push(lat.x_start());
    minimizer.extend_from_slice(&y);
    minimizer.push(lat.x_end());
    let action_min = path_action(&minimizer, lat, pot);
    let log_z = 0.5 * k as f64 * (2.0 * std::f64::consts::PI * hbar).ln() - 0.5 * log_det_hessian - action_min / hbar;
    Ok(GaussianPartition {
        log_z,
        action_min,
        minimizer,
        log_det_hessian,
    })
}

/// `<S_E> = S_min + hbar (N - 2) / 2` under the exact Gaussian target.
pub fn gaussian_mean_action(lat: &LatticeSpec, pot: &Potential) -> Result<f64> {
    let g = gaussian_lattice_partition(lat, pot)?;
    Ok(g.action_min + 0.5 * lat.hbar() * (lat.n_tau() - 2) as f64)
}
