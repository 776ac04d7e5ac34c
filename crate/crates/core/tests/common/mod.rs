#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vfpg::autodiff::{
    dense_forward, finite_difference_gradient, lstm_cell_step, lstm_cell_step_projected, lstm_input_projection, DenseVars,
    LstmVars, Tape, Tensor, Var,
};
use vfpg::lattice::LatticeSpec;
use vfpg::model::{forward_on_tape, LatentBatch, ModelConfig, ModelParams};
use vfpg::train::surrogate_on_tape;

pub const FD_STEP: f64 = 1e-5;

/// Relative error with an absolute floor below which both sides count as zero.
pub fn rel_err(a: f64, n: f64) -> f64 {
    let d = (a - n).abs();
    if d < 1e-11 {
        0.0
    } else {
        d / a.abs().max(n.abs())
    }
}

fn rand_tensor(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

type Build = Box<dyn Fn(&mut Tape, &[Var]) -> Var>;

/// Worst relative error between tape and central-difference gradients of
/// `sum(coeffs * build(inputs))` with random coefficients.
fn check(build: Build, inputs: Vec<Tensor>, seed: u64) -> f64 {
    let out_len = {
        let mut t = Tape::new();
        let vs: Vec<Var> = inputs.iter().map(|x| t.param(x.clone())).collect();
        let o = build(&mut t, &vs);
        t.value(o).len()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..out_len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let value = |xs: &[Tensor]| {
        let mut t = Tape::new();
        let vs: Vec<Var> = xs.iter().map(|x| t.constant(x.clone())).collect();
        let o = build(&mut t, &vs);
        t.value(o).data().iter().zip(&coeffs).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut t = Tape::new();
    let vs: Vec<Var> = inputs.iter().map(|x| t.param(x.clone())).collect();
    let o = build(&mut t, &vs);
    let loss = t.dot_const(o, coeffs.clone()).unwrap();
    let grads = t.backward(loss).unwrap();
    let numeric = finite_difference_gradient(value, &inputs, FD_STEP);
    let mut worst = 0.0f64;
    for (v, num) in vs.iter().zip(&numeric) {
        for (a, n) in grads.get(*v).data().iter().zip(num.data()) {
            worst = worst.max(rel_err(*a, *n));
        }
    }
    worst
}

/// `(name, worst relative error)` for every tape primitive and layer.
pub fn primitive_gradient_errors() -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut r = |rows, cols| rand_tensor(rows, cols, -1.0, 1.0, &mut rng);
    let (a34, b34, w54, row4, x31) = (r(3, 4), r(3, 4), r(5, 4), r(1, 4), r(3, 1));
    let (lw, mu) = (r(3, 4), r(3, 4));
    let (lstm_x, lstm_h, lstm_c, w_ih, w_hh, lb) = (r(3, 2), r(3, 3), r(3, 3), r(12, 2), r(12, 3), r(1, 12));
    let mut rng2 = ChaCha8Rng::seed_from_u64(18);
    let sigma = rand_tensor(3, 4, 0.4, 1.5, &mut rng2);
    let wide = rand_tensor(3, 4, -3.0, 3.0, &mut rng2);

    let cases: Vec<(&'static str, Build, Vec<Tensor>)> = vec![
        ("matmul_t", Box::new(|t, v| t.matmul_t(v[0], v[1]).unwrap()), vec![a34.clone(), w54.clone()]),
        ("add_row", Box::new(|t, v| t.add_row(v[0], v[1]).unwrap()), vec![a34.clone(), row4.clone()]),
        ("add", Box::new(|t, v| t.add(v[0], v[1]).unwrap()), vec![a34.clone(), b34.clone()]),
        ("sub", Box::new(|t, v| t.sub(v[0], v[1]).unwrap()), vec![a34.clone(), b34.clone()]),
        ("mul", Box::new(|t, v| t.mul(v[0], v[1]).unwrap()), vec![a34.clone(), b34.clone()]),
        ("scale", Box::new(|t, v| t.scale(v[0], -1.7)), vec![a34.clone()]),
        ("add_scalar", Box::new(|t, v| t.add_scalar(v[0], 0.3)), vec![a34.clone()]),
        ("sigmoid", Box::new(|t, v| t.sigmoid(v[0])), vec![wide.clone()]),
        ("tanh", Box::new(|t, v| t.tanh(v[0])), vec![wide.clone()]),
        ("softplus", Box::new(|t, v| t.softplus(v[0])), vec![wide.clone()]),
        ("exp", Box::new(|t, v| t.exp(v[0])), vec![a34.clone()]),
        ("square", Box::new(|t, v| t.square(v[0])), vec![a34.clone()]),
        ("slice_cols", Box::new(|t, v| t.slice_cols(v[0], 1, 2).unwrap()), vec![a34.clone()]),
        ("softmax_rows", Box::new(|t, v| t.softmax_rows(v[0])), vec![wide.clone()]),
        ("log_softmax_rows", Box::new(|t, v| t.log_softmax_rows(v[0])), vec![wide.clone()]),
        ("gather_cols", Box::new(|t, v| t.gather_cols(v[0], vec![2, 0, 3]).unwrap()), vec![a34.clone()]),
        (
            "gmm_log_prob",
            Box::new(|t, v| {
                let lw = t.log_softmax_rows(v[0]);
                t.gmm_log_prob(lw, v[1], v[2], v[3]).unwrap()
            }),
            vec![lw, mu, sigma, x31],
        ),
        ("sum_cols", Box::new(|t, v| t.sum_cols(v[0])), vec![a34.clone()]),
        ("sum", Box::new(|t, v| t.sum(v[0])), vec![a34.clone()]),
        ("mean", Box::new(|t, v| t.mean(v[0])), vec![a34.clone()]),
        ("dot_const", Box::new(|t, v| t.dot_const(v[0], (0..12).map(|i| i as f64 * 0.1 - 0.5).collect()).unwrap()), vec![a34.clone()]),
        (
            "dense_forward",
            Box::new(|t, v| dense_forward(t, &DenseVars { weight: v[1], bias: v[2] }, v[0]).unwrap()),
            vec![a34.clone(), w54, rand_tensor(1, 5, -1.0, 1.0, &mut rng2)],
        ),
        (
            "lstm_cell_step",
            Box::new(|t, v| {
                let p = LstmVars { w_ih: v[3], w_hh: v[4], bias: v[5] };
                let (h, c) = lstm_cell_step(t, &p, v[0], v[1], v[2]).unwrap();
                let hc = t.mul(h, c).unwrap();
                t.add(hc, c).unwrap()
            }),
            vec![lstm_x.clone(), lstm_h.clone(), lstm_c.clone(), w_ih.clone(), w_hh.clone(), lb.clone()],
        ),
        (
            "lstm_unrolled_projected",
            Box::new(|t, v| {
                let p = LstmVars { w_ih: v[3], w_hh: v[4], bias: v[5] };
                let proj = lstm_input_projection(t, &p, v[0]).unwrap();
                let (mut h, mut c) = (v[1], v[2]);
                for _ in 0..3 {
                    (h, c) = lstm_cell_step_projected(t, &p, proj, h, c).unwrap();
                }
                h
            }),
            vec![lstm_x, lstm_h, lstm_c, w_ih, w_hh, lb],
        ),
    ];
    cases
        .into_iter()
        .enumerate()
        .map(|(i, (name, build, inputs))| (name, check(build, inputs, 100 + i as u64)))
        .collect()
}

/// Worst relative error of the full training loss on a miniature model
/// `(H=3, N_tau=5, N_c=2)`: score-weighted `ln q` plus both endpoint
/// penalties, at fixed sampled positions.
pub fn total_loss_gradient_error() -> f64 {
    let cfg = ModelConfig::new(3, 2, 5);
    let lat = LatticeSpec::new(5, 0.5, 0.0, 1.0, 1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = ModelParams::init(cfg, &mut rng).unwrap();
    let z = LatentBatch::sample(6, &mut rng);
    let positions: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.5)).collect();
    let weights: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let value = |t: &[Tensor]| {
        let p = ModelParams::from_tensors(cfg, t.to_vec()).unwrap();
        let mut tape = Tape::new();
        let vars = p.attach(&mut tape, false);
        let zv = tape.constant(z.tensor().clone());
        let nodes = forward_on_tape(&mut tape, &vars, zv, cfg).unwrap();
        let (loss, _, _) = surrogate_on_tape(&mut tape, &nodes, &positions, &weights, &lat, 1.0).unwrap();
        tape.value(loss).item()
    };
    let mut tape = Tape::new();
    let vars = model.attach(&mut tape, true);
    let zv = tape.constant(z.tensor().clone());
    let nodes = forward_on_tape(&mut tape, &vars, zv, cfg).unwrap();
    let (loss, _, _) = surrogate_on_tape(&mut tape, &nodes, &positions, &weights, &lat, 1.0).unwrap();
    let grads = tape.backward(loss).unwrap();
    let numeric = finite_difference_gradient(value, &model.to_tensors(), FD_STEP);
    let mut worst = 0.0f64;
    for (v, num) in vars.as_array().iter().zip(&numeric) {
        for (a, n) in grads.get(*v).data().iter().zip(num.data()) {
            worst = worst.max(rel_err(*a, *n));
        }
    }
    worst
}
