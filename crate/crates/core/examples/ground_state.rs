//! Ground-state density of the harmonic oscillator (omega = 5) from the
//! diagonal kernel at T = 1, with a Gaussian fit of its variance.
//!
//!     cargo run --release --example ground_state

use vfpg::config::{ExperimentConfig, ExperimentKind, GridSpec};
use vfpg::experiment::{ground_state_scan, ReferenceKernel};
use vfpg::oracles::ho_eigenfunction;

fn main() -> vfpg::Result<()> {
    let mut exp = ExperimentConfig::with_kind(ExperimentKind::GroundState);
    exp.omega = 5.0;
    exp.total_time = 1.0;
    exp.hidden = 8;
    exp.components = 4;
    exp.learning_rate = 2e-2;
    exp.latent_sample_count = 128;
    exp.max_epochs = 300;
    exp.runs = 3;
    exp.diagonal = GridSpec {
        min: -1.2,
        max: 1.2,
        points: 9,
    };
    let res = ground_state_scan(&exp)?;
    let exact = ReferenceKernel::for_config(&exp)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "x", "rho", "2 sigma", "exact T=1", "|psi0|^2");
    for i in 0..res.curve.x.len() {
        let x = res.curve.x[i];
        println!(
            "{x:>6.2} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            res.curve.normalized[i],
            res.curve.two_sigma[i],
            exact.normalized(x, x)?,
            ho_eigenfunction(0, x, exp.mass, exp.omega, exp.hbar).powi(2)
        );
    }
    if let Some(fit) = res.fit {
        println!("fitted variance {:.4}, analytic hbar/(2 m omega) = {:.4}", fit.variance, exp.hbar / (2.0 * exp.mass * exp.omega));
    }
    Ok(())
}
