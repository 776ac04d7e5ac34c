//! Mean squared deviation of generated paths from the minimal-action path
//! as hbar shrinks, at unit penalty weight and at weight 1/hbar. The action
//! term scales as 1/hbar, so at unit weight the endpoint penalties lose
//! influence and the endpoints drift. The shared-latent generator also keeps
//! a nearly flat mean path, which puts a floor under the deviation at this
//! short schedule.
//!
//!     cargo run --release --example hbar_collapse

use vfpg::estimate::{mean_squared_deviation, PathGenerator};
use vfpg::lattice::minimal_action_path;
use vfpg::rng::stream_rng;
use vfpg::train::train;
use vfpg::{LatticeSpec, ModelConfig, Potential, TrainConfig};

fn main() -> vfpg::Result<()> {
    let pot = Potential::harmonic(1.0, 1.0)?;
    for scaled in [false, true] {
        println!("penalty weight {}", if scaled { "1/hbar" } else { "1" });
        for hbar in [1.0, 0.2, 0.05] {
            let lat = LatticeSpec::new(32, 0.5, 0.0, 1.0, hbar, 1.0)?;
            let x_cl = minimal_action_path(&lat, &pot, 1e-12)?;
            let mut cfg = TrainConfig::new(lat.clone(), pot.clone());
            cfg.model = ModelConfig::new(8, 4, 32);
            cfg.learning_rate = 2e-2;
            cfg.latent_sample_count = 128;
            cfg.max_epochs = 300;
            if scaled {
                cfg.penalty_weight = 1.0 / hbar;
            }
            let (model, _) = train(&cfg)?;
            let batch = model.generate(&lat, 4096, &mut stream_rng(0, &[9]))?;
            println!("  hbar {hbar:<5} <(x - x_cl)^2> = {:.3e}", mean_squared_deviation(&batch, &x_cl)?);
        }
    }
    Ok(())
}
