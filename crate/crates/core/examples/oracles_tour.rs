//! The exact references the generator is checked against, cross-checked
//! with each other.
//!
//!     cargo run --release --example oracles_tour

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vfpg::oracles::*;
use vfpg::{LatticeSpec, Potential};

fn main() -> vfpg::Result<()> {
    let ho = Potential::harmonic(1.0, 1.0)?;

    // Mehler kernel vs a spectral sum over ED eigenstates
    let grid = Grid::new(-12.0, 12.0, 2999)?;
    let coarse = exact_diagonalization(&ho, grid, 1.0, 1.0, 40)?;
    let fine = exact_diagonalization(&ho, grid.refined(), 1.0, 1.0, 40)?;
    for (a, b) in [(0.0, 0.0), (0.0, 1.0), (-1.0, 0.5)] {
        let k = richardson_spectral_kernel(&coarse, &fine, a, b, 0.5, 39)?;
        println!("K({a:+.1}, {b:+.1})  Mehler {:.10}  spectral {:.10}", ho_exact_kernel(a, b, 0.5, 1.0, 1.0, 1.0)?, k.value);
    }
    println!("ED levels {:.6?}", &fine.energies[..4]);

    // lattice partition function: closed form vs tensor-product quadrature
    let lat = LatticeSpec::new(5, 1.0, 0.0, 1.0, 1.0, 1.0)?;
    let g = gaussian_lattice_partition(&lat, &ho)?;
    println!("ln Z_lattice  Gaussian {:.12}  Gauss-Hermite {:.12}", g.log_z, gauss_hermite_partition(&lat, &ho, 10)?);

    // brute-force enumeration converges to the same number
    for n in [9, 17, 33] {
        let h = 8.0 / (n - 1) as f64;
        let axis: Vec<f64> = (0..n).map(|i| -4.0 + h * i as f64).collect();
        let bf = brute_force_partition(&lat, &ho, &vec![axis; 3])?;
        println!("enumeration on {n}^3 points: ln Z {:.10}", bf.log_z);
    }

    // Metropolis chain vs the Gaussian moment of the action
    let run = metropolis_sampler(&lat, &ho, &MetropolisConfig::new(50_000, 0.8), &mut ChaCha8Rng::seed_from_u64(1))?;
    let s = run.samples.action.as_ref().expect("filled by the sampler");
    println!(
        "Metropolis <S> {:.4} (acceptance {:.2}); Gaussian moment {:.4}",
        s.iter().sum::<f64>() / s.len() as f64,
        run.acceptance_rate,
        gaussian_mean_action(&lat, &ho)?
    );

    // double well: ED ground state is bimodal
    let dw = Potential::double_well(0.05, -1.0)?;
    let spec = exact_diagonalization(&dw, Grid::new(-10.0, 10.0, 1999)?, 1.0, 1.0, 4)?;
    println!("double well levels {:.6?}", spec.energies);
    Ok(())
}
