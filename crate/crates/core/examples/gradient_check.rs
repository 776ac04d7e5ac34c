//! Reverse-mode gradients of the generator's training loss against central
//! finite differences on a miniature model.
//!
//!     cargo run --release --example gradient_check

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vfpg::autodiff::{finite_difference_gradient, Tape, Tensor};
use vfpg::model::{forward_on_tape, LatentBatch, TENSOR_NAMES};
use vfpg::train::surrogate_on_tape;
use vfpg::{LatticeSpec, ModelConfig, ModelParams};

fn main() -> vfpg::Result<()> {
    let cfg = ModelConfig::new(3, 2, 5);
    let lat = LatticeSpec::new(5, 0.5, 0.0, 1.0, 1.0, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let model = ModelParams::init(cfg, &mut rng)?;
    let z = LatentBatch::sample(4, &mut rng);
    let positions: Vec<f64> = (0..20).map(|i| (0.3 * i as f64).sin()).collect();
    let weights = [0.3, -0.1, -0.4, 0.2];

    let loss_of = |tensors: &[Tensor]| -> vfpg::Result<f64> {
        let p = ModelParams::from_tensors(cfg, tensors.to_vec())?;
        let mut tape = Tape::new();
        let vars = p.attach(&mut tape, false);
        let zv = tape.constant(z.tensor().clone());
        let nodes = forward_on_tape(&mut tape, &vars, zv, cfg)?;
        let (loss, _, _) = surrogate_on_tape(&mut tape, &nodes, &positions, &weights, &lat, 1.0)?;
        Ok(tape.value(loss).item())
    };
    let numeric = finite_difference_gradient(|t| loss_of(t).expect("valid shapes"), &model.to_tensors(), 1e-6);

    let mut tape = Tape::new();
    let vars = model.attach(&mut tape, true);
    let zv = tape.constant(z.tensor().clone());
    let nodes = forward_on_tape(&mut tape, &vars, zv, cfg)?;
    let (loss, _, _) = surrogate_on_tape(&mut tape, &nodes, &positions, &weights, &lat, 1.0)?;
    let grads = tape.backward(loss)?;
    for ((name, v), num) in TENSOR_NAMES.iter().zip(vars.as_array()).zip(&numeric) {
        let g = grads.get(v);
        let worst = g
            .data()
            .iter()
            .zip(num.data())
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1e-12))
            .fold(0.0f64, f64::max);
        println!("{name:>10}  {} entries  worst relative error {worst:.2e}", g.len());
    }
    Ok(())
}
