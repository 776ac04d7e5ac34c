//! Independent reference values: closed-form kernels, exact diagonalization,
//! exact Gaussian lattice partition functions, quadrature and enumeration on
//! tiny lattices, and a Metropolis sampler of the exact path density.
//!
//! Nothing in here calls into the action, estimator, or model code it is
//! used to check. Potentials are evaluated by [`potential_at`], which
//! re-derives each closed form rather than calling `Potential::value`.

mod ed;
mod enumerate;
mod gaussian;
mod kernels;
mod metropolis;
mod quadrature;
mod toy_exact;

pub use ed::{exact_diagonalization, richardson_spectral_kernel, spectral_kernel, Grid, SpectralKernel, SpectralResult, BOUNDARY_TOLERANCE};
pub use enumerate::{brute_force_partition, BruteForcePartition, DiscretePathDistribution, ENUMERATION_BUDGET};
pub use gaussian::{gaussian_lattice_partition, gaussian_mean_action, GaussianPartition};
pub use kernels::{free_kernel, free_log_kernel, ho_eigenfunction, ho_exact_kernel, ho_exact_log_kernel};
pub use metropolis::{metropolis_discrete, metropolis_sampler, MetropolisConfig, MetropolisRun};
pub use toy_exact::ToyParameters;
pub use quadrature::{gauss_hermite, gauss_hermite_log_integral, gauss_hermite_partition, QUADRATURE_BUDGET};

use crate::error::Result;
use crate::lattice::{LatticeSpec, Potential};
use crate::output::CsvTable;

pub(crate) fn potential_at(pot: &Potential, x: f64) -> f64 {
    match pot {
        Potential::Free => 0.0,
        Potential::Harmonic { mass, omega } => mass * (omega * x).powi(2) / 2.0,
        Potential::DoubleWell { alpha, beta } => x.powi(2) * (alpha * x.powi(2) + beta),
        Potential::Polynomial(c) => c.iter().enumerate().map(|(n, cn)| cn * x.powi(n as i32)).sum(),
    }
}

/// Lattice action with trapezoid potential weights, written out longhand.
pub(crate) fn path_action(path: &[f64], lat: &LatticeSpec, pot: &Potential) -> f64 {
    let n = path.len();
    let dt = lat.total_time() / (n - 1) as f64;
    let m = lat.mass();
    let mut kinetic = 0.0;
    for w in path.windows(2) {
        kinetic += (w[1] - w[0]) * (w[1] - w[0]);
    }
    let mut potential = 0.5 * (potential_at(pot, path[0]) + potential_at(pot, path[n - 1]));
    for &x in &path[1..n - 1] {
        potential += potential_at(pot, x);
    }
    m * kinetic / (2.0 * dt) + dt * potential
}

/// Two-column `x,value` table for plot overlays.
pub fn curve_csv(xs: &[f64], values: &[f64]) -> Result<CsvTable> {
    if xs.len() != values.len() {
        return Err(crate::error::Error::LengthMismatch {
            expected: xs.len(),
            got: values.len(),
        });
    }
    let mut t = CsvTable::new(&["x", "value"]);
    for (x, v) in xs.iter().zip(values) {
        t.push(vec![*x, *v])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_closed_forms_agree() {
        let pots = [
            Potential::Free,
            Potential::harmonic(1.3, 0.7).unwrap(),
            Potential::double_well(0.05, -1.0).unwrap(),
            Potential::polynomial(vec![0.5, -0.1, 0.2, 0.0, 0.3]).unwrap(),
        ];
        for p in &pots {
            for x in [-3.1, -0.2, 0.0, 1.7] {
                let a = potential_at(p, x);
                assert!((a - p.value(x)).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn action_matches_lattice() {
        let lat = LatticeSpec::new(7, 1.1, 0.2, -0.4, 1.0, 1.5).unwrap();
        let pot = Potential::double_well(0.05, -1.0).unwrap();
        let path = [0.2, 0.9, -0.3, 1.4, 0.0, 2.2, -0.4];
        let a = path_action(&path, &lat, &pot);
        let b = crate::lattice::euclidean_action(&path, &lat, &pot).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn curve_table() {
        let t = curve_csv(&[0.0, 1.0], &[2.0, 3.0]).unwrap();
        assert_eq!(t.render().lines().next(), Some("x,value"));
        assert!(curve_csv(&[0.0], &[1.0, 2.0]).is_err());
    }
}
