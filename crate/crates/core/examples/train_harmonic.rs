//! Trains the generator on the harmonic oscillator and compares the
//! variational free energy with the exact lattice value.
//!
//!     cargo run --release --example train_harmonic -- [epochs]

use vfpg::estimate::estimate_free_energy;
use vfpg::oracles::gaussian_lattice_partition;
use vfpg::rng::stream_rng;
use vfpg::train::train_with_observer;
use vfpg::{LatticeSpec, ModelConfig, Potential, TrainConfig};

fn main() -> vfpg::Result<()> {
    let epochs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300);
    let lat = LatticeSpec::new(32, 0.5, 0.0, 1.0, 1.0, 1.0)?;
    let pot = Potential::harmonic(1.0, 1.0)?;
    let exact = gaussian_lattice_partition(&lat, &pot)?;
    let f_lat = -lat.hbar() * exact.log_z;

    let mut cfg = TrainConfig::new(lat.clone(), pot.clone());
    cfg.model = ModelConfig::new(8, 4, lat.n_tau());
    cfg.learning_rate = 2e-2;
    cfg.latent_sample_count = 128;
    cfg.max_epochs = epochs;
    cfg.seed = 7;

    let (model, _) = train_with_observer(&cfg, |epoch, _, s| {
        if epoch % (epochs / 10).max(1) == 0 {
            println!(
                "epoch {epoch:>5}  F {:>9.4} +- {:.4}  L1 {:.4}  L2 {:.4}",
                s.f_mean,
                s.f_sem(),
                s.l1,
                s.l2
            );
        }
        Ok(())
    })?;
    let est = estimate_free_energy(&model, &lat, &pot, 4096, &mut stream_rng(cfg.seed, &[4]))?;
    println!("F_phi            {:.4} +- {:.4}", est.mean, est.sem());
    println!("-hbar ln Z_lat   {f_lat:.4}");
    println!("gap              {:.4}  (hbar KL(q || P), always >= 0)", est.mean - f_lat);
    Ok(())
}
