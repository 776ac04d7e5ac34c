//! The path generator: a 2-D Gaussian latent repeated over the time lattice,
//! an LSTM unrolled from zero state, and a dense head emitting a Gaussian
//! mixture per time stamp.
//!
//! Sampled positions are not fed back into the recurrence, so given `z` the
//! per-stamp mixtures are independent and the path log-density is the sum of
//! the per-stamp mixture log-densities.

mod checkpoint;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};

use crate::autodiff::{
    dense_forward, gmm_log_prob_log_weights, lstm_cell_step_projected, lstm_input_projection, softplus, DenseParams,
    DenseVars, LstmCellParams, LstmVars, Tape, Tensor, Var,
};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, PathBatch};

pub const LATENT_DIM: usize = 2;

/// Lower bound added to every mixture standard deviation.
pub const SIGMA_FLOOR: f64 = 1e-4;

pub const DEFAULT_HIDDEN: usize = 64;

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub hidden: usize,
    pub components: usize,
    pub n_tau: usize,
    /// Reserved for feeding sampled positions back into the recurrence.
    /// Not implemented; must stay `false`.
    pub position_feedback: bool,
}

impl ModelConfig {
    pub fn new(hidden: usize, components: usize, n_tau: usize) -> Self {
        Self {
            hidden,
            components,
            n_tau,
            position_feedback: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.components == 0 {
            return Err(Error::InvalidArgument(format!(
                "hidden size and component count must be >= 1 (got H={}, N_c={})",
                self.hidden, self.components
            )));
        }
        if self.n_tau < 3 {
            return Err(Error::InvalidArgument(format!("n_tau must be >= 3, got {}", self.n_tau)));
        }
        if self.position_feedback {
            return Err(Error::InvalidArgument(
                "sampled-position feedback is reserved and not implemented".into(),
            ));
        }
        Ok(())
    }
}

/// All trainable tensors of the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    config: ModelConfig,
    pub lstm: LstmCellParams,
    /// Maps `H` to `3 N_c` columns: mixture logits, means, std pre-activations.
    pub head: DenseParams,
}

/// Tape handles for a [`ModelParams`].
#[derive(Debug, Clone, Copy)]
pub struct ModelVars {
    pub lstm: LstmVars,
    pub head: DenseVars,
}

impl ModelVars {
    pub fn as_array(&self) -> [Var; 5] {
        [self.lstm.w_ih, self.lstm.w_hh, self.lstm.bias, self.head.weight, self.head.bias]
    }
}

pub const TENSOR_NAMES: [&str; 5] = ["lstm.w_ih", "lstm.w_hh", "lstm.bias", "head.weight", "head.bias"];

impl ModelParams {
    pub fn init<R: Rng + ?Sized>(config: ModelConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            lstm: LstmCellParams::init(LATENT_DIM, config.hidden, rng),
            head: DenseParams::init(config.hidden, 3 * config.components, rng),
        })
    }

    pub fn zeros(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            lstm: LstmCellParams::zeros(LATENT_DIM, config.hidden),
            head: DenseParams::zeros(config.hidden, 3 * config.components),
        })
    }

    pub fn from_tensors(config: ModelConfig, tensors: Vec<Tensor>) -> Result<Self> {
        config.validate()?;
        let [w_ih, w_hh, bias, weight, hbias]: [Tensor; 5] = tensors
            .try_into()
            .map_err(|v: Vec<Tensor>| Error::InvalidArgument(format!("expected 5 tensors, got {}", v.len())))?;
        let p = Self {
            config,
            lstm: LstmCellParams { w_ih, w_hh, bias },
            head: DenseParams {
                weight,
                bias: hbias,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let (h, c) = (self.config.hidden, self.config.components);
        let expected = self.expected_shapes();
        for ((name, t), shape) in TENSOR_NAMES.iter().zip(self.tensors()).zip(expected) {
            if t.shape() != shape {
                return Err(Error::Shape {
                    op: "ModelParams",
                    detail: format!("{name} is {:?}, expected {:?} (H={h}, N_c={c})", t.shape(), shape),
                });
            }
            if !t.is_finite() {
                return Err(Error::NonFinite((*name).into()));
            }
        }
        Ok(())
    }

    fn expected_shapes(&self) -> [[usize; 2]; 5] {
        let (h, c) = (self.config.hidden, self.config.components);
        [[4 * h, LATENT_DIM], [4 * h, h], [1, 4 * h], [3 * c, h], [1, 3 * c]]
    }

    pub fn config(&self) -> ModelConfig {
        self.config
    }

    pub fn hidden(&self) -> usize {
        self.config.hidden
    }

    pub fn components(&self) -> usize {
        self.config.components
    }

    pub fn n_tau(&self) -> usize {
        self.config.n_tau
    }

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

    pub fn to_tensors(&self) -> Vec<Tensor> {
        self.tensors().into_iter().cloned().collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn attach(&self, tape: &mut Tape, trainable: bool) -> ModelVars {
        ModelVars {
            lstm: self.lstm.attach(tape, trainable),
            head: self.head.attach(tape, trainable),
        }
    }

    /// Mixture parameters for every latent row (no gradients).
    pub fn encode_latent(&self, z: &LatentBatch) -> Result<Vec<GmmSequence>> {
        let mut tape = Tape::new();
        let vars = self.attach(&mut tape, false);
        let zv = tape.constant(z.0.clone());
        let nodes = forward_on_tape(&mut tape, &vars, zv, self.config)?;
        Ok(nodes.sequences(&tape))
    }

    /// Draws one path per latent row and records its log-density under the
    /// generating row's mixture sequence.
    pub fn sample_paths<R: Rng + ?Sized>(&self, z: &LatentBatch, lat: &LatticeSpec, rng: &mut R) -> Result<PathBatch> {
        if lat.n_tau() != self.config.n_tau {
            return Err(Error::LengthMismatch {
                expected: self.config.n_tau,
                got: lat.n_tau(),
            });
        }
        let mut tape = Tape::new();
        let vars = self.attach(&mut tape, false);
        let zv = tape.constant(z.0.clone());
        let nodes = forward_on_tape(&mut tape, &vars, zv, self.config)?;
        let positions = nodes.sample(&tape, rng);
        let log_q = nodes.log_prob_values(&tape, &positions);
        let mut batch = PathBatch::new(self.config.n_tau, positions)?;
        batch.log_q = Some(log_q);
        Ok(batch)
    }

    /// `sum_k log q_k(x_k | z)` for a single latent row.
    pub fn path_log_prob(&self, z: [f64; 2], path: &[f64]) -> Result<f64> {
        if path.len() != self.config.n_tau {
            return Err(Error::LengthMismatch {
                expected: self.config.n_tau,
                got: path.len(),
            });
        }
        if path.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("path".into()));
        }
        let seq = self.encode_latent(&LatentBatch::new(Tensor::row_vector(z.to_vec()))?)?;
        Ok(seq[0].log_prob(path))
    }
}

/// Standard-normal latent draws, `batch x 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentBatch(Tensor);

impl LatentBatch {
    pub fn new(z: Tensor) -> Result<Self> {
        if z.cols() != LATENT_DIM || z.rows() == 0 {
            return Err(Error::Shape {
                op: "LatentBatch",
                detail: format!("expected batch x {LATENT_DIM}, got {:?}", z.shape()),
            });
        }
        if !z.is_finite() {
            return Err(Error::NonFinite("latent batch".into()));
        }
        Ok(Self(z))
    }

    pub fn sample<R: Rng + ?Sized>(batch: usize, rng: &mut R) -> Self {
        let data = (0..batch * LATENT_DIM).map(|_| StandardNormal.sample(rng)).collect();
        Self(Tensor::new(batch, LATENT_DIM, data).expect("shape"))
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.rows() == 0
    }

    pub fn row(&self, i: usize) -> [f64; 2] {
        let r = self.0.row(i);
        [r[0], r[1]]
    }
}

/// Per-stamp mixture parameters for one latent row.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmSequence {
    components: usize,
    weights: Vec<f64>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl GmmSequence {
    pub fn new(components: usize, weights: Vec<f64>, means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if components == 0 || n % components != 0 || means.len() != n || stds.len() != n {
            return Err(Error::Shape {
                op: "GmmSequence",
                detail: format!("{components} components with {n}/{}/{} entries", means.len(), stds.len()),
            });
        }
        for k in 0..n / components {
            let w = &weights[k * components..(k + 1) * components];
            if w.iter().any(|&g| !(0.0..=1.0).contains(&g)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("weights at stamp {k} are not on the simplex")));
            }
        }
        if stds.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidArgument("mixture standard deviations must be > 0".into()));
        }
        Ok(Self {
            components,
            weights,
            means,
            stds,
        })
    }

    pub fn n_tau(&self) -> usize {
        self.weights.len() / self.components
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn weights(&self, k: usize) -> &[f64] {
        &self.weights[k * self.components..(k + 1) * self.components]
    }

    pub fn means(&self, k: usize) -> &[f64] {
        &self.means[k * self.components..(k + 1) * self.components]
    }

    pub fn stds(&self, k: usize) -> &[f64] {
        &self.stds[k * self.components..(k + 1) * self.components]
    }

    pub fn log_prob(&self, path: &[f64]) -> f64 {
        let mut scratch = vec![0.0; self.components];
        let mut lw = vec![0.0; self.components];
        let mut total = 0.0;
        for (k, &x) in path.iter().enumerate() {
            for (l, w) in lw.iter_mut().zip(self.weights(k)) {
                *l = w.ln();
            }
            total += gmm_log_prob_log_weights(&lw, self.means(k), self.stds(k), x, &mut scratch);
        }
        total
    }

    /// Per-stamp mixture mean `sum_j gamma_j mu_j`.
    pub fn mean_path(&self) -> Vec<f64> {
        (0..self.n_tau())
            .map(|k| self.weights(k).iter().zip(self.means(k)).map(|(w, m)| w * m).sum())
            .collect()
    }
}

/// Tape handles of the mixture parameters, one `B x N_c` node per stamp.
#[derive(Debug, Clone)]
pub struct GmmNodes {
    pub log_w: Vec<Var>,
    pub mu: Vec<Var>,
    pub sigma: Vec<Var>,
}

/// Repeat(z) -> LSTM -> Dense -> (log-softmax, identity, softplus + floor).
pub fn forward_on_tape(tape: &mut Tape, vars: &ModelVars, z: Var, config: ModelConfig) -> Result<GmmNodes> {
    let b = tape.value(z).rows();
    let (h, c) = (config.hidden, config.components);
    let proj = lstm_input_projection(tape, &vars.lstm, z)?;
    let mut hidden = tape.constant(Tensor::zeros(b, h));
    let mut cell = tape.constant(Tensor::zeros(b, h));
    let mut nodes = GmmNodes {
        log_w: Vec::with_capacity(config.n_tau),
        mu: Vec::with_capacity(config.n_tau),
        sigma: Vec::with_capacity(config.n_tau),
    };
    for _ in 0..config.n_tau {
        let (hn, cn) = lstm_cell_step_projected(tape, &vars.lstm, proj, hidden, cell)?;
        hidden = hn;
        cell = cn;
        let out = dense_forward(tape, &vars.head, hidden)?;
        let logits = tape.slice_cols(out, 0, c)?;
        let mu = tape.slice_cols(out, c, c)?;
        let pre = tape.slice_cols(out, 2 * c, c)?;
        let log_w = tape.log_softmax_rows(logits);
        let sp = tape.softplus(pre);
        let sigma = tape.add_scalar(sp, SIGMA_FLOOR);
        nodes.log_w.push(log_w);
        nodes.mu.push(mu);
        nodes.sigma.push(sigma);
    }
    Ok(nodes)
}

impl GmmNodes {
    pub fn n_tau(&self) -> usize {
        self.mu.len()
    }

    pub fn batch(&self, tape: &Tape) -> usize {
        tape.value(self.mu[0]).rows()
    }

    /// Samples one path per row: component `j ~ Cat(gamma)`, then `x ~ N(mu_j, sigma_j)`.
    pub fn sample<R: Rng + ?Sized>(&self, tape: &Tape, rng: &mut R) -> Vec<f64> {
        let (b, n) = (self.batch(tape), self.n_tau());
        let mut out = vec![0.0; b * n];
        for row in 0..b {
            for k in 0..n {
                let lw = tape.value(self.log_w[k]).row(row);
                let mu = tape.value(self.mu[k]).row(row);
                let sg = tape.value(self.sigma[k]).row(row);
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut j = lw.len() - 1;
                for (idx, l) in lw.iter().enumerate() {
                    acc += l.exp();
                    if u < acc {
                        j = idx;
                        break;
                    }
                }
                let eps: f64 = StandardNormal.sample(rng);
                out[row * n + k] = mu[j] + sg[j] * eps;
            }
        }
        out
    }

    /// Plain-value log-densities of `positions` (`B x N_tau`, row-major).
    pub fn log_prob_values(&self, tape: &Tape, positions: &[f64]) -> Vec<f64> {
        let (b, n) = (self.batch(tape), self.n_tau());
        let c = tape.value(self.mu[0]).cols();
        let mut scratch = vec![0.0; c];
        (0..b)
            .map(|row| {
                let mut total = 0.0;
                for k in 0..n {
                    total += gmm_log_prob_log_weights(
                        tape.value(self.log_w[k]).row(row),
                        tape.value(self.mu[k]).row(row),
                        tape.value(self.sigma[k]).row(row),
                        positions[row * n + k],
                        &mut scratch,
                    );
                }
                total
            })
            .collect()
    }

    /// Differentiable `B x 1` path log-densities of fixed `positions`.
    pub fn log_prob_on_tape(&self, tape: &mut Tape, positions: &[f64]) -> Result<Var> {
        let (b, n) = (self.batch(tape), self.n_tau());
        if positions.len() != b * n {
            return Err(Error::Shape {
                op: "log_prob_on_tape",
                detail: format!("{} positions for {b}x{n}", positions.len()),
            });
        }
        let mut total: Option<Var> = None;
        for k in 0..n {
            let col: Vec<f64> = (0..b).map(|row| positions[row * n + k]).collect();
            let x = tape.constant(Tensor::column(col));
            let lp = tape.gmm_log_prob(self.log_w[k], self.mu[k], self.sigma[k], x)?;
            total = Some(match total {
                None => lp,
                Some(t) => tape.add(t, lp)?,
            });
        }
        Ok(total.expect("n_tau >= 1"))
    }

    pub fn sequences(&self, tape: &Tape) -> Vec<GmmSequence> {
        let (b, n) = (self.batch(tape), self.n_tau());
        let c = tape.value(self.mu[0]).cols();
        (0..b)
            .map(|row| {
                let mut weights = Vec::with_capacity(n * c);
                let mut means = Vec::with_capacity(n * c);
                let mut stds = Vec::with_capacity(n * c);
                for k in 0..n {
                    weights.extend(tape.value(self.log_w[k]).row(row).iter().map(|l| l.exp()));
                    means.extend_from_slice(tape.value(self.mu[k]).row(row));
                    stds.extend_from_slice(tape.value(self.sigma[k]).row(row));
                }
                GmmSequence {
                    components: c,
                    weights,
                    means,
                    stds,
                }
            })
            .collect()
    }
}

/// `softplus(0) + floor`, the std emitted by an all-zero head.
pub fn zero_head_sigma() -> f64 {
    softplus(0.0) + SIGMA_FLOOR
}
