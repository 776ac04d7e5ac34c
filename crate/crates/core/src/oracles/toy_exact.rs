//! Exact objective and gradient of the categorical toy generator.
//!
//! The latent is integrated with a 2-D Gauss-Hermite rule and paths are
//! enumerated; the LSTM forward pass is re-implemented here in plain f64 so
//! no automatic-differentiation code is involved. The gradient is taken by
//! central finite differences of the exact objective.

use super::{gauss_hermite, path_action};
use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Potential};

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Raw parameters `[w_ih (4H x 2), w_hh (4H x H), bias (1 x 4H), head.w (P x H), head.b (1 x P)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyParameters {
    pub tensors: Vec<Tensor>,
    pub grid: Vec<f64>,
    pub interior: usize,
}

impl ToyParameters {
    fn hidden(&self) -> usize {
        self.tensors[1].cols()
    }

    /// Per-stamp log-probabilities over the grid for one latent.
    fn log_probs(&self, z: [f64; 2]) -> Vec<Vec<f64>> {
        let h = self.hidden();
        let p = self.grid.len();
        let (w_ih, w_hh, b, hw, hb) = (
            self.tensors[0].data(),
            self.tensors[1].data(),
            self.tensors[2].data(),
            self.tensors[3].data(),
            self.tensors[4].data(),
        );
        let mut hid = vec![0.0; h];
        let mut cel = vec![0.0; h];
        let mut out = Vec::with_capacity(self.interior);
        for _ in 0..self.interior {
            let mut g = vec![0.0; 4 * h];
            for (r, gr) in g.iter_mut().enumerate() {
                let mut s = b[r] + w_ih[2 * r] * z[0] + w_ih[2 * r + 1] * z[1];
                for c in 0..h {
                    s += w_hh[r * h + c] * hid[c];
                }
                *gr = s;
            }
            for j in 0..h {
                let (i, f, c, o) = (sig(g[j]), sig(g[h + j]), g[2 * h + j].tanh(), sig(g[3 * h + j]));
                cel[j] = f * cel[j] + i * c;
                hid[j] = o * cel[j].tanh();
            }
            let logits: Vec<f64> = (0..p)
                .map(|k| hb[k] + (0..h).map(|c| hw[k * h + c] * hid[c]).sum::<f64>())
                .collect();
            let mx = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = mx + logits.iter().map(|l| (l - mx).exp()).sum::<f64>().ln();
            out.push(logits.into_iter().map(|l| l - lse).collect());
        }
        out
    }

    /// `E_z sum_x q(x|z) [S(x)/hbar + ln q(x|z)]`.
    pub fn exact_objective(&self, lat: &LatticeSpec, pot: &Potential, gh_order: usize) -> Result<f64> {
        if lat.n_tau() != self.interior + 2 || self.tensors.len() != 5 {
            return Err(Error::InvalidArgument("toy parameters do not match the lattice".into()));
        }
        let p = self.grid.len();
        let total = p.pow(self.interior as u32);
        let mut actions = Vec::with_capacity(total);
        let mut path = vec![0.0; lat.n_tau()];
        path[0] = lat.x_start();
        path[self.interior + 1] = lat.x_end();
        for c in 0..total {
            let mut r = c;
            for k in 0..self.interior {
                path[k + 1] = self.grid[r % p];
                r /= p;
            }
            actions.push(path_action(&path, lat, pot) / lat.hbar());
        }
        let (nodes, weights) = gauss_hermite(gh_order)?;
        let mut acc = 0.0;
        for (y0, w0) in nodes.iter().zip(&weights) {
            for (y1, w1) in nodes.iter().zip(&weights) {
                let lp = self.log_probs([std::f64::consts::SQRT_2 * y0, std::f64::consts::SQRT_2 * y1]);
                let mut inner = 0.0;
                for (c, s) in actions.iter().enumerate() {
                    let mut r = c;
                    let mut lq = 0.0;
                    for lk in &lp {
                        lq += lk[r % p];
                        r /= p;
                    }
                    inner += lq.exp() * (s + lq);
                }
                acc += w0 * w1 * inner;
            }
        }
        Ok(acc / std::f64::consts::PI)
    }

    /// Central differences of [`Self::exact_objective`], flattened in tensor order.
    pub fn exact_gradient(&self, lat: &LatticeSpec, pot: &Potential, gh_order: usize, step: f64) -> Result<Vec<f64>> {
        let mut work = self.clone();
        let mut out = Vec::new();
        for t in 0..work.tensors.len() {
            for i in 0..work.tensors[t].len() {
                let orig = work.tensors[t].data()[i];
                work.tensors[t].data_mut()[i] = orig + step;
                let fp = work.exact_objective(lat, pot, gh_order)?;
                work.tensors[t].data_mut()[i] = orig - step;
                let fm = work.exact_objective(lat, pot, gh_order)?;
                work.tensors[t].data_mut()[i] = orig;
                out.push((fp - fm) / (2.0 * step));
            }
        }
        Ok(out)
    }
}
