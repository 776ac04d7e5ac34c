//! A miniature generator over position-discretized paths, small enough that
//! every path can be enumerated. Used to check the score-function gradient
//! against an exact computation.
//!
//! The latent and LSTM match the continuous model; the head emits one
//! categorical distribution per interior stamp over a fixed position grid.
//! Endpoints are pinned.

use rand::Rng;

use crate::autodiff::{
    dense_forward, lstm_cell_step_projected, lstm_input_projection, DenseParams, LstmCellParams, Tape, Tensor, Var,
};
use crate::error::{Error, Result};
use crate::lattice::{euclidean_action, LatticeSpec, Potential};
use crate::model::{LatentBatch, LATENT_DIM};
use crate::train::score_weights;

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalToy {
    pub lstm: LstmCellParams,
    pub head: DenseParams,
    grid: Vec<f64>,
    interior: usize,
}

/// Per-parameter mean of the per-batch gradient estimates and its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub mean: Vec<f64>,
    pub sem: Vec<f64>,
    pub samples: usize,
}

impl CategoricalToy {
    /// `interior` stamps, each choosing a point of `grid`.
    pub fn init<R: Rng + ?Sized>(hidden: usize, interior: usize, grid: Vec<f64>, rng: &mut R) -> Result<Self> {
        if hidden == 0 || interior == 0 || grid.len() < 2 {
            return Err(Error::InvalidArgument("toy needs hidden >= 1, interior >= 1, grid >= 2 points".into()));
        }
        Ok(Self {
            lstm: LstmCellParams::init(LATENT_DIM, hidden, rng),
            head: DenseParams::init(hidden, grid.len(), rng),
            grid,
            interior,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn interior(&self) -> usize {
        self.interior
    }

    /// `[w_ih, w_hh, bias, head.weight, head.bias]`.
    pub fn tensors(&self) -> [&Tensor; 5] {
        [&self.lstm.w_ih, &self.lstm.w_hh, &self.lstm.bias, &self.head.weight, &self.head.bias]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 5] {
        [
            &mut self.lstm.w_ih,
            &mut self.lstm.w_hh,
            &mut self.lstm.bias,
            &mut self.head.weight,
            &mut self.head.bias,
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Log-softmax over the grid for every interior stamp, each `B x P`.
    fn forward(&self, tape: &mut Tape, z: Var) -> Result<(Vec<Var>, [Var; 5])> {
        let lstm = self.lstm.attach(tape, true);
        let head = self.head.attach(tape, true);
        let b = tape.value(z).rows();
        let h = self.lstm.hidden_size();
        let proj = lstm_input_projection(tape, &lstm, z)?;
        let mut hidden = tape.constant(Tensor::zeros(b, h));
        let mut cell = tape.constant(Tensor::zeros(b, h));
        let mut out = Vec::with_capacity(self.interior);
        for _ in 0..self.interior {
            let (hn, cn) = lstm_cell_step_projected(tape, &lstm, proj, hidden, cell)?;
            hidden = hn;
            cell = cn;
            let logits = dense_forward(tape, &head, hidden)?;
            out.push(tape.log_softmax_rows(logits));
        }
        Ok((out, [lstm.w_ih, lstm.w_hh, lstm.bias, head.weight, head.bias]))
    }

    fn full_path(&self, lat: &LatticeSpec, idx: &[usize]) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.interior + 2);
        p.push(lat.x_start());
        p.extend(idx.iter().map(|&i| self.grid[i]));
        p.push(lat.x_end());
        p
    }

    /// One batch: sample `z`, then grid indices; returns the score-function
    /// gradient of `E[F/hbar]` flattened in [`Self::tensors`] order.
    pub fn batch_gradient<R: Rng + ?Sized>(
        &self,
        lat: &LatticeSpec,
        pot: &Potential,
        batch: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if lat.n_tau() != self.interior + 2 {
            return Err(Error::LengthMismatch {
                expected: self.interior + 2,
                got: lat.n_tau(),
            });
        }
        let z = LatentBatch::sample(batch, rng);
        let mut tape = Tape::new();
        let zv = tape.constant(z.tensor().clone());
        let (log_p, vars) = self.forward(&mut tape, zv)?;
        let mut idx = vec![vec![0usize; self.interior]; batch];
        let mut log_q = vec![0.0; batch];
        for (k, lp) in log_p.iter().enumerate() {
            let t = tape.value(*lp);
            for row in 0..batch {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = self.grid.len() - 1;
                for (j, l) in t.row(row).iter().enumerate() {
                    acc += l.exp();
                    if u < acc {
                        pick = j;
                        break;
                    }
                }
                idx[row][k] = pick;
                log_q[row] += t.get(row, pick);
            }
        }
        let mut free = Vec::with_capacity(batch);
        for (row, ids) in idx.iter().enumerate() {
            free.push(euclidean_action(&self.full_path(lat, ids), lat, pot)? + lat.hbar() * log_q[row]);
        }
        let weights = score_weights(&free, lat.hbar())?;
        let mut total: Option<Var> = None;
        for (k, lp) in log_p.iter().enumerate() {
            let picked = tape.gather_cols(*lp, idx.iter().map(|r| r[k]).collect())?;
            total = Some(match total {
                None => picked,
                Some(t) => tape.add(t, picked)?,
            });
        }
        let log_q_var = total.expect("interior >= 1");
        let surrogate = tape.dot_const(log_q_var, weights)?;
        let grads = tape.backward(surrogate)?;
        Ok(vars.iter().flat_map(|v| grads.get(*v).into_data()).collect())
    }

    /// Averages `batches` independent batch gradients.
    pub fn estimate_gradient<R: Rng + ?Sized>(
        &self,
        lat: &LatticeSpec,
        pot: &Potential,
        batch: usize,
        batches: usize,
        rng: &mut R,
    ) -> Result<GradientEstimate> {
        if batches < 2 {
            return Err(Error::InvalidArgument("need >= 2 batches for a standard error".into()));
        }
        let p = self.parameter_count();
        let mut sum = vec![0.0; p];
        let mut sum2 = vec![0.0; p];
        for _ in 0..batches {
            let g = self.batch_gradient(lat, pot, batch, rng)?;
            for ((s, s2), v) in sum.iter_mut().zip(sum2.iter_mut()).zip(&g) {
                *s += v;
                *s2 += v * v;
            }
        }
        let n = batches as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let sem = sum2
            .iter()
            .zip(&mean)
            .map(|(s2, m)| ((s2 / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
            .collect();
        Ok(GradientEstimate {
            mean,
            sem,
            samples: batch * batches,
        })
    }
}
