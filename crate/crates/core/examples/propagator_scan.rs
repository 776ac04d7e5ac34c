//! Trace-normalized propagator K(x_f, T; 0, 0) of the harmonic oscillator
//! from independent training runs, next to the exact kernel.
//!
//!     cargo run --release --example propagator_scan

use vfpg::config::{ExperimentConfig, ExperimentKind, GridSpec};
use vfpg::experiment::{propagator_scan, ReferenceKernel};

fn main() -> vfpg::Result<()> {
    let mut exp = ExperimentConfig::with_kind(ExperimentKind::Scan);
    exp.hidden = 8;
    exp.components = 4;
    exp.learning_rate = 2e-2;
    exp.latent_sample_count = 128;
    exp.max_epochs = 200;
    exp.runs = 3;
    exp.scan = GridSpec {
        min: -2.0,
        max: 2.0,
        points: 5,
    };
    exp.diagonal = GridSpec {
        min: -6.5,
        max: 6.5,
        points: 11,
    };
    let res = propagator_scan(&exp)?;
    let exact = ReferenceKernel::for_config(&exp)?;
    println!("{:>6} {:>12} {:>10} {:>12}", "x_f", "K/trK", "2 sigma", "exact");
    for i in 0..res.curve.x.len() {
        let x = res.curve.x[i];
        println!(
            "{x:>6.2} {:>12.5} {:>10.5} {:>12.5}",
            res.curve.normalized[i],
            res.curve.two_sigma[i],
            exact.normalized(exp.x_start, x)?
        );
    }
    Ok(())
}
