use rand::Rng;

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Affine map `y = x W^T + b`, `W` is `out x in`, `b` is `1 x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub weight: Tensor,
    pub bias: Tensor,
}

#[derive(Debug, Clone, Copy)]
pub struct DenseVars {
    pub weight: Var,
    pub bias: Var,
}

impl DenseParams {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Tensor::zeros(output, input),
            bias: Tensor::zeros(1, output),
        }
    }

    /// Uniform in `[-1/sqrt(in), 1/sqrt(in)]`.
    pub fn init<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        let a = 1.0 / (input as f64).sqrt();
        Self {
            weight: uniform(output, input, a, rng),
            bias: uniform(1, output, a, rng),
        }
    }

    pub fn attach(&self, tape: &mut Tape, trainable: bool) -> DenseVars {
        DenseVars {
            weight: tape.leaf(self.weight.clone(), trainable),
            bias: tape.leaf(self.bias.clone(), trainable),
        }
    }
}

pub fn dense_forward(tape: &mut Tape, p: &DenseVars, input: Var) -> Result<Var> {
    let xw = tape.matmul_t(input, p.weight)?;
    tape.add_row(xw, p.bias)
}

/// LSTM cell weights with gate blocks stacked in the order input, forget,
/// candidate, output.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams {
    /// `4H x D_in`
    pub w_ih: Tensor,
    /// `4H x H`
    pub w_hh: Tensor,
    /// `1 x 4H`
    pub bias: Tensor,
}

#[derive(Debug, Clone, Copy)]
pub struct LstmVars {
    pub w_ih: Var,
    pub w_hh: Var,
    pub bias: Var,
}

pub const FORGET_BIAS_INIT: f64 = 1.0;

impl LstmCellParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_ih: Tensor::zeros(4 * hidden, input),
            w_hh: Tensor::zeros(4 * hidden, hidden),
            bias: Tensor::zeros(1, 4 * hidden),
        }
    }

    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` weights, forget-gate bias 1.
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let mut bias = uniform(1, 4 * hidden, 1.0 / (hidden as f64).sqrt(), rng);
        bias.data_mut()[hidden..2 * hidden].fill(FORGET_BIAS_INIT);
        Self {
            w_ih: uniform(4 * hidden, input, 1.0 / (input as f64).sqrt(), rng),
            w_hh: uniform(4 * hidden, hidden, 1.0 / (hidden as f64).sqrt(), rng),
            bias,
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_hh.cols()
    }

    pub fn input_size(&self) -> usize {
        self.w_ih.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_size();
        if self.w_hh.rows() != 4 * h || self.w_ih.rows() != 4 * h || self.bias.shape() != [1, 4 * h] {
            return Err(Error::Shape {
                op: "LstmCellParams",
                detail: format!(
                    "w_ih {:?}, w_hh {:?}, bias {:?}",
                    self.w_ih.shape(),
                    self.w_hh.shape(),
                    self.bias.shape()
                ),
            });
        }
        Ok(())
    }

    pub fn attach(&self, tape: &mut Tape, trainable: bool) -> LstmVars {
        LstmVars {
            w_ih: tape.leaf(self.w_ih.clone(), trainable),
            w_hh: tape.leaf(self.w_hh.clone(), trainable),
            bias: tape.leaf(self.bias.clone(), trainable),
        }
    }
}

/// Input contribution to the gates, `x W_ih^T + b`. Hoisted out of the
/// recurrence when the same input is fed at every step.
pub fn lstm_input_projection(tape: &mut Tape, p: &LstmVars, input: Var) -> Result<Var> {
    let xw = tape.matmul_t(input, p.w_ih)?;
    tape.add_row(xw, p.bias)
}

/// One LSTM step. Returns `(h', c')`.
pub fn lstm_cell_step(tape: &mut Tape, p: &LstmVars, input: Var, hidden: Var, cell: Var) -> Result<(Var, Var)> {
    let proj = lstm_input_projection(tape, p, input)?;
    lstm_cell_step_projected(tape, p, proj, hidden, cell)
}

/// LSTM step given a precomputed input projection.
pub fn lstm_cell_step_projected(
    tape: &mut Tape,
    p: &LstmVars,
    input_proj: Var,
    hidden: Var,
    cell: Var,
) -> Result<(Var, Var)> {
    let h = tape.value(hidden).cols();
    let hw = tape.matmul_t(hidden, p.w_hh)?;
    let gates = tape.add(input_proj, hw)?;
    let i_pre = tape.slice_cols(gates, 0, h)?;
    let f_pre = tape.slice_cols(gates, h, h)?;
    let g_pre = tape.slice_cols(gates, 2 * h, h)?;
    let o_pre = tape.slice_cols(gates, 3 * h, h)?;
    let i = tape.sigmoid(i_pre);
    let f = tape.sigmoid(f_pre);
    let g = tape.tanh(g_pre);
    let o = tape.sigmoid(o_pre);
    let fc = tape.mul(f, cell)?;
    let ig = tape.mul(i, g)?;
    let c_next = tape.add(fc, ig)?;
    let tc = tape.tanh(c_next);
    let h_next = tape.mul(o, tc)?;
    Ok((h_next, c_next))
}

fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, a: f64, rng: &mut R) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.gen_range(-a..=a)).collect();
    Tensor::new(rows, cols, data).expect("shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_lstm_gives_zero_states() {
        let p = LstmCellParams::zeros(3, 4);
        let mut t = Tape::new();
        let v = p.attach(&mut t, true);
        let x = t.constant(Tensor::row_vector(vec![0.3, -2.0, 5.0]));
        let h = t.constant(Tensor::zeros(1, 4));
        let c = t.constant(Tensor::zeros(1, 4));
        let (h1, c1) = lstm_cell_step(&mut t, &v, x, h, c).unwrap();
        assert!(t.value(h1).max_abs() == 0.0);
        assert!(t.value(c1).max_abs() == 0.0);
    }

    #[test]
    fn saturated_forget_gate_carries_cell() {
        let mut p = LstmCellParams::zeros(2, 3);
        p.bias.data_mut()[3..6].fill(20.0);
        let mut t = Tape::new();
        let v = p.attach(&mut t, false);
        let x = t.constant(Tensor::row_vector(vec![1.0, -1.0]));
        let h = t.constant(Tensor::row_vector(vec![0.1, 0.2, 0.3]));
        let c = t.constant(Tensor::row_vector(vec![0.5, -0.7, 1.1]));
        let (_, c1) = lstm_cell_step(&mut t, &v, x, h, c).unwrap();
        for (a, b) in t.value(c1).data().iter().zip([0.5, -0.7, 1.1]) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn init_sets_forget_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = LstmCellParams::init(2, 5, &mut rng);
        p.validate().unwrap();
        assert!(p.bias.data()[5..10].iter().all(|&b| b == 1.0));
        let bound = 1.0 / 2f64.sqrt();
        assert!(p.w_ih.data().iter().all(|w| w.abs() <= bound));
    }
}
