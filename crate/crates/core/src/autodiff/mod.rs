//! Minimal reverse-mode automatic differentiation over dense matrices.
//!
//! The tape records matrix-valued primitives (affine maps, gate
//! nonlinearities, softmax, mixture log-densities, reductions) so a whole
//! batch moves through each node at once. There is no broadcasting beyond
//! the explicit row-broadcast in [`Tape::add_row`].

mod layers;
mod tape;
mod tensor;

pub use layers::{
    dense_forward, lstm_cell_step, lstm_cell_step_projected, lstm_input_projection, DenseParams, DenseVars,
    LstmCellParams, LstmVars, FORGET_BIAS_INIT,
};
pub use tape::{Gradients, Tape, Var};
pub use tensor::{gmm_log_prob, softmax, Tensor};

pub(crate) use tape::softplus;
pub(crate) use tensor::gmm_log_prob_log_weights;

/// Central finite-difference gradient of `f` with respect to every entry of
/// every tensor in `params`.
pub fn finite_difference_gradient<F>(mut f: F, params: &[Tensor], step: f64) -> Vec<Tensor>
where
    F: FnMut(&[Tensor]) -> f64,
{
    let mut work = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for p in 0..params.len() {
        let mut g = Tensor::zeros(params[p].rows(), params[p].cols());
        for i in 0..params[p].len() {
            let orig = work[p].data()[i];
            work[p].data_mut()[i] = orig + step;
            let up = f(&work);
            work[p].data_mut()[i] = orig - step;
            let down = f(&work);
            work[p].data_mut()[i] = orig;
            g.data_mut()[i] = (up - down) / (2.0 * step);
        }
        out.push(g);
    }
    out
}

/// Agreement test for gradient checks: relative error at most `rel`, or
/// absolute difference at most `abs_floor`.
pub fn gradients_agree(analytic: f64, numeric: f64, rel: f64, abs_floor: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= abs_floor || diff <= rel * analytic.abs().max(numeric.abs())
}
