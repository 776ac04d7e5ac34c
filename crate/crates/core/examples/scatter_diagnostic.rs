//! Action / log-likelihood scatter during training. For the exact path
//! density every point sits on the line S/hbar + ln q = const, so the
//! distance d measures how far the generator still is from it.
//!
//!     cargo run --release --example scatter_diagnostic

use vfpg::estimate::scatter_diagnostic;
use vfpg::oracles::{brute_force_partition, DiscretePathDistribution};
use vfpg::rng::stream_rng;
use vfpg::train::train_with_observer;
use vfpg::{LatticeSpec, ModelConfig, Potential, TrainConfig};

fn main() -> vfpg::Result<()> {
    let lat = LatticeSpec::new(32, 0.5, 0.0, 1.0, 1.0, 1.0)?;
    let pot = Potential::harmonic(1.0, 1.0)?;
    let mut cfg = TrainConfig::new(lat.clone(), pot.clone());
    cfg.model = ModelConfig::new(8, 4, 32);
    cfg.learning_rate = 2e-2;
    cfg.latent_sample_count = 128;
    cfg.max_epochs = 200;
    cfg.seed = 3;
    train_with_observer(&cfg, |epoch, model, _| {
        if (epoch + 1) % 20 == 0 {
            let sc = scatter_diagnostic(model, &lat, &pot, 5000, &mut stream_rng(cfg.seed, &[8, epoch as u64]))?;
            println!("epoch {:>4}  median d {:.3}  mean d {:.3}", epoch + 1, sc.median_distance(), sc.mean_distance());
        }
        Ok(())
    })?;

    // the enumerable exact density on a coarse grid: d vanishes identically
    let small = LatticeSpec::new(5, 1.0, 0.0, 0.5, 1.0, 1.0)?;
    let table = brute_force_partition(&small, &pot, &vec![vec![-1.0, -0.5, 0.0, 0.5, 1.0]; 3])?;
    let exact = DiscretePathDistribution::new(table);
    let sc = scatter_diagnostic(&exact, &small, &pot, 5000, &mut stream_rng(1, &[8]))?;
    println!("exact toy density: max d {:.1e}", sc.points.iter().fold(0.0f64, |a, p| a.max(p.distance)));
    Ok(())
}
