//! Double-well density V = 0.05 x^4 - x^2 at T = 2 against exact
//! diagonalization.
//!
//!     cargo run --release --example double_well

use vfpg::config::{ExperimentConfig, ExperimentKind, GridSpec, PotentialKind};
use vfpg::estimate::local_maxima;
use vfpg::experiment::{ground_state_scan, ReferenceKernel};

fn main() -> vfpg::Result<()> {
    let mut exp = ExperimentConfig::with_kind(ExperimentKind::GroundState);
    exp.potential = PotentialKind::DoubleWell;
    exp.alpha = 0.05;
    exp.beta = -1.0;
    exp.total_time = 2.0;
    exp.hidden = 8;
    exp.components = 4;
    exp.learning_rate = 2e-2;
    exp.latent_sample_count = 128;
    exp.max_epochs = 300;
    exp.runs = 3;
    exp.diagonal = GridSpec {
        min: -5.0,
        max: 5.0,
        points: 21,
    };
    let res = ground_state_scan(&exp)?;
    let ed = ReferenceKernel::for_config(&exp)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "x", "rho", "2 sigma", "ED");
    for i in 0..res.curve.x.len() {
        let x = res.curve.x[i];
        println!(
            "{x:>6.2} {:>10.4} {:>10.4} {:>10.4}",
            res.curve.normalized[i],
            res.curve.two_sigma[i],
            ed.normalized(x, x)?
        );
    }
    println!("peaks at {:.3?}, wells at +-{:.3}", local_maxima(&res.curve.x, &res.curve.normalized), 10f64.sqrt());
    Ok(())
}
