//! Loss construction, the score-function gradient estimator, and the
//! training loop.

use std::path::PathBuf;

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::lattice::{action_unchecked, LatticeSpec, PathBatch, Potential};
use crate::model::{
    forward_on_tape, save_checkpoint, GmmNodes, GmmSequence, LatentBatch, ModelConfig, ModelParams, TENSOR_NAMES,
};
use crate::optim::{Adam, AdamConfig};
use crate::output::CsvTable;
use crate::rng::{stream, stream_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub lattice: LatticeSpec,
    pub potential: Potential,
    pub model: ModelConfig,
    pub learning_rate: f64,
    pub latent_sample_count: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    /// Epochs between checkpoints; 0 disables periodic checkpoints.
    pub checkpoint_interval: usize,
    pub checkpoint_dir: Option<PathBuf>,
    /// Multiplier on the endpoint penalties.
    pub penalty_weight: f64,
}

impl TrainConfig {
    /// Default hyperparameters for the given system. `N_c` defaults to
    /// the batch size.
    pub fn new(lattice: LatticeSpec, potential: Potential) -> Self {
        let batch_size = 128;
        Self {
            model: ModelConfig::new(crate::model::DEFAULT_HIDDEN, batch_size, lattice.n_tau()),
            lattice,
            potential,
            learning_rate: 1e-4,
            latent_sample_count: 2048,
            batch_size,
            max_epochs: 3000,
            seed: 0,
            checkpoint_interval: 0,
            checkpoint_dir: None,
            penalty_weight: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.n_tau != self.lattice.n_tau() {
            return Err(Error::LengthMismatch {
                expected: self.lattice.n_tau(),
                got: self.model.n_tau,
            });
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument("batch_size must be >= 2 for the baseline".into()));
        }
        if self.latent_sample_count == 0 || self.latent_sample_count % self.batch_size != 0 {
            return Err(Error::InvalidArgument(format!(
                "latent_sample_count {} must be a positive multiple of batch_size {}",
                self.latent_sample_count, self.batch_size
            )));
        }
        if !(self.penalty_weight >= 0.0) || !self.penalty_weight.is_finite() {
            return Err(Error::InvalidArgument("penalty_weight must be finite and >= 0".into()));
        }
        if self.checkpoint_interval > 0 && self.checkpoint_dir.is_none() {
            return Err(Error::InvalidArgument("checkpoint_interval set without checkpoint_dir".into()));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            ..AdamConfig::default()
        }
    }
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean of `F = S + hbar ln q` over the epoch's generated paths.
    pub f_mean: f64,
    /// Ensemble standard deviation of `F`.
    pub f_std: f64,
    pub samples: usize,
    /// Batch-averaged penalties, before the multiplier.
    pub l1: f64,
    pub l2: f64,
    pub endpoint_dev_start: f64,
    pub endpoint_dev_end: f64,
}

impl EpochStats {
    pub fn f_sem(&self) -> f64 {
        self.f_std / (self.samples as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub epochs: Vec<EpochStats>,
}

pub const RUN_STATS_COLUMNS: [&str; 7] = ["epoch", "F_mean", "F_std", "L1", "L2", "endpoint_dev_start", "endpoint_dev_end"];

impl RunStats {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn last(&self) -> Option<&EpochStats> {
        self.epochs.last()
    }

    pub fn final_free_energy(&self) -> Option<f64> {
        self.last().map(|e| e.f_mean)
    }

    pub fn final_free_energy_std(&self) -> Option<f64> {
        self.last().map(|e| e.f_std)
    }

    pub fn f_means(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.f_mean).collect()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&RUN_STATS_COLUMNS);
        for e in &self.epochs {
            t.push(vec![
                e.epoch as f64,
                e.f_mean,
                e.f_std,
                e.l1,
                e.l2,
                e.endpoint_dev_start,
                e.endpoint_dev_end,
            ])
            .expect("arity");
        }
        t
    }
}

/// `F = S + hbar ln q` for one path.
pub fn per_path_free_energy(path: &[f64], log_q: f64, lat: &LatticeSpec, pot: &Potential) -> Result<f64> {
    Ok(crate::lattice::euclidean_action(path, lat, pot)? + lat.hbar() * log_q)
}

/// `F` for every path of a batch whose `log_q` is populated. Fills in the
/// action column if missing.
pub fn batch_free_energy(batch: &mut PathBatch, lat: &LatticeSpec, pot: &Potential) -> Result<Vec<f64>> {
    let log_q = batch
        .log_q
        .clone()
        .ok_or_else(|| Error::InvalidArgument("path batch has no log_q".into()))?;
    let action = match &batch.action {
        Some(a) => a.clone(),
        None => {
            batch.compute_action(lat, pot)?;
            batch.action.clone().expect("just computed")
        }
    };
    Ok(action.iter().zip(&log_q).map(|(s, l)| s + lat.hbar() * l).collect())
}

/// `mean(F) / hbar`.
pub fn kl_loss(free_energies: &[f64], hbar: f64) -> Result<f64> {
    if free_energies.is_empty() {
        return Err(Error::InvalidArgument("kl_loss of an empty batch".into()));
    }
    Ok(free_energies.iter().sum::<f64>() / free_energies.len() as f64 / hbar)
}

/// `(L1, L2)` for one mixture sequence:
/// `N_tau * sum_j (mu_j - x_end)^2 + sigma_j^2` at the first and last stamp.
pub fn endpoint_penalties(gmm: &GmmSequence, lat: &LatticeSpec) -> (f64, f64) {
    let n = gmm.n_tau();
    let pen = |k: usize, target: f64| -> f64 {
        gmm.means(k)
            .iter()
            .zip(gmm.stds(k))
            .map(|(m, s)| (m - target).powi(2) + s * s)
            .sum::<f64>()
            * lat.n_tau() as f64
    };
    (pen(0, lat.x_start()), pen(n - 1, lat.x_end()))
}

/// Per-path coefficients of `grad log q` in the score-function estimate of
/// `grad E[F]/hbar`.
///
/// With `f_b = F_b / hbar` and batch mean `m`, the coefficient is
/// `(f_b - m) / (B - 1)`. Relative to the plain batch-mean baseline
/// `(f_b - m) / B` this is rescaled by `B / (B - 1)`, which removes the
/// `1/B` shrinkage caused by each sample's own term in `m`; the result is
/// identical to a leave-one-out baseline and is unbiased.
pub fn score_weights(free_energies: &[f64], hbar: f64) -> Result<Vec<f64>> {
    let b = free_energies.len();
    if b < 2 {
        return Err(Error::InvalidArgument("score-function baseline needs a batch of >= 2".into()));
    }
    // Centre on the first entry so a constant batch gives exact zeros.
    let f0 = free_energies[0];
    let shift = free_energies.iter().map(|f| f - f0).sum::<f64>() / b as f64;
    let denom = (b - 1) as f64;
    Ok(free_energies.iter().map(|f| ((f - f0) - shift) / hbar / denom).collect())
}

/// Differentiable `lambda * (L1 + L2)` averaged over the batch.
pub fn penalty_on_tape(tape: &mut Tape, nodes: &GmmNodes, lat: &LatticeSpec, weight: f64) -> Result<(Var, f64, f64)> {
    let b = nodes.batch(tape) as f64;
    let n = nodes.n_tau();
    let scale = lat.n_tau() as f64 / b;
    let mut stamp = |k: usize, target: f64| -> Result<Var> {
        let d = tape.add_scalar(nodes.mu[k], -target);
        let d2 = tape.square(d);
        let s2 = tape.square(nodes.sigma[k]);
        let both = tape.add(d2, s2)?;
        let total = tape.sum(both);
        Ok(tape.scale(total, scale))
    };
    let l1 = stamp(0, lat.x_start())?;
    let l2 = stamp(n - 1, lat.x_end())?;
    let (v1, v2) = (tape.value(l1).item(), tape.value(l2).item());
    let sum = tape.add(l1, l2)?;
    Ok((tape.scale(sum, weight), v1, v2))
}

/// Surrogate whose gradient is the training gradient:
/// `sum_b w_b ln q_b + lambda (L1 + L2)` with constant score weights `w`.
pub fn surrogate_on_tape(
    tape: &mut Tape,
    nodes: &GmmNodes,
    positions: &[f64],
    weights: &[f64],
    lat: &LatticeSpec,
    penalty_weight: f64,
) -> Result<(Var, f64, f64)> {
    let lq = nodes.log_prob_on_tape(tape, positions)?;
    let kl = tape.dot_const(lq, weights.to_vec())?;
    let (pen, l1, l2) = penalty_on_tape(tape, nodes, lat, penalty_weight)?;
    Ok((tape.add(kl, pen)?, l1, l2))
}

/// Result of one estimator evaluation on a batch.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub paths: PathBatch,
    pub free_energies: Vec<f64>,
    pub l1: f64,
    pub l2: f64,
    /// Gradients of the training loss, in [`TENSOR_NAMES`] order.
    pub gradients: Vec<Tensor>,
}

impl StepReport {
    /// `mean(F)/hbar + lambda (L1 + L2)`.
    pub fn total_loss(&self, hbar: f64, penalty_weight: f64) -> f64 {
        kl_loss(&self.free_energies, hbar).unwrap_or(f64::NAN) + penalty_weight * (self.l1 + self.l2)
    }
}

/// Samples one path per latent row with the current parameters and returns
/// the estimated gradient of the total loss. Does not update parameters.
pub fn estimate_gradient<R: rand::Rng + ?Sized>(
    model: &ModelParams,
    lat: &LatticeSpec,
    pot: &Potential,
    z: &LatentBatch,
    penalty_weight: f64,
    rng: &mut R,
) -> Result<StepReport> {
    let mut tape = Tape::new();
    let vars = model.attach(&mut tape, true);
    let zv = tape.constant(z.tensor().clone());
    let nodes = forward_on_tape(&mut tape, &vars, zv, model.config())?;
    let positions = nodes.sample(&tape, rng);
    let log_q = nodes.log_prob_values(&tape, &positions);
    let n = lat.n_tau();
    let action: Vec<f64> = positions.chunks_exact(n).map(|p| action_unchecked(p, lat, pot)).collect();
    let free_energies: Vec<f64> = action.iter().zip(&log_q).map(|(s, l)| s + lat.hbar() * l).collect();
    if let Some(i) = free_energies.iter().position(|f| !f.is_finite()) {
        return Err(Error::NonFinite(format!("free energy of path {i}")));
    }
    let weights = score_weights(&free_energies, lat.hbar())?;
    let (loss, l1, l2) = surrogate_on_tape(&mut tape, &nodes, &positions, &weights, lat, penalty_weight)?;
    let mut grads = tape.backward(loss)?;
    let gradients: Vec<Tensor> = vars.as_array().iter().map(|v| grads.take(*v)).collect();
    for (name, g) in TENSOR_NAMES.iter().zip(&gradients) {
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient {
                tensor: (*name).to_string(),
            });
        }
    }
    let mut paths = PathBatch::new(n, positions)?;
    paths.action = Some(action);
    paths.log_q = Some(log_q);
    Ok(StepReport {
        paths,
        free_energies,
        l1,
        l2,
        gradients,
    })
}

/// Gradient estimate followed by an Adam update.
pub fn loss_gradient_step<R: rand::Rng + ?Sized>(
    model: &mut ModelParams,
    optimizer: &mut Adam,
    lat: &LatticeSpec,
    pot: &Potential,
    z: &LatentBatch,
    penalty_weight: f64,
    rng: &mut R,
) -> Result<StepReport> {
    let report = estimate_gradient(model, lat, pot, z, penalty_weight, rng)?;
    optimizer.step(&mut model.tensors_mut(), &report.gradients)?;
    Ok(report)
}

pub fn new_optimizer(model: &ModelParams, config: AdamConfig) -> Result<Adam> {
    let shapes: Vec<usize> = model.tensors().iter().map(|t| t.len()).collect();
    Adam::new(config, &shapes)
}

pub fn initial_model(config: &TrainConfig) -> Result<ModelParams> {
    ModelParams::init(config.model, &mut stream_rng(config.seed, &[stream::INIT]))
}

pub fn train(config: &TrainConfig) -> Result<(ModelParams, RunStats)> {
    train_with_observer(config, |_, _, _| Ok(()))
}

/// Runs the full epoch budget. `observer` is called after every epoch with
/// the epoch index, the updated parameters and that epoch's statistics.
///
/// On a non-finite loss or gradient the parameters from before the failing
/// step are written to `last_good.ckpt` in the checkpoint directory (if one
/// is configured) and the error is returned.
pub fn train_with_observer<F>(config: &TrainConfig, mut observer: F) -> Result<(ModelParams, RunStats)>
where
    F: FnMut(usize, &ModelParams, &EpochStats) -> Result<()>,
{
    config.validate()?;
    let lat = &config.lattice;
    let pot = &config.potential;
    let mut model = initial_model(config)?;
    let mut optimizer = new_optimizer(&model, config.adam())?;
    let mut stats = RunStats::default();
    let batches = config.latent_sample_count / config.batch_size;
    let n = lat.n_tau();

    for epoch in 0..config.max_epochs {
        let z_all = LatentBatch::sample(config.latent_sample_count, &mut stream_rng(config.seed, &[stream::LATENT, epoch as u64]));
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let (mut l1, mut l2, mut dev0, mut dev1) = (0.0, 0.0, 0.0, 0.0);
        for b in 0..batches {
            let rows: Vec<f64> = z_all.tensor().data()[b * config.batch_size * 2..(b + 1) * config.batch_size * 2].to_vec();
            let z = LatentBatch::new(Tensor::new(config.batch_size, 2, rows)?)?;
            let mut rng = stream_rng(config.seed, &[stream::SAMPLE, epoch as u64, b as u64]);
            let before = model.clone();
            let report = match loss_gradient_step(&mut model, &mut optimizer, lat, pot, &z, config.penalty_weight, &mut rng) {
                Ok(r) => r,
                Err(e @ (Error::NonFinite(_) | Error::NonFiniteGradient { .. })) => {
                    if let Some(dir) = &config.checkpoint_dir {
                        std::fs::create_dir_all(dir).map_err(|io| Error::io(dir, io))?;
                        save_checkpoint(&before, &dir.join("last_good.ckpt"))?;
                    }
                    return Err(match e {
                        Error::NonFinite(_) => Error::NonFiniteLoss { epoch },
                        other => other,
                    });
                }
                Err(e) => return Err(e),
            };
            if model.tensors().iter().any(|t| !t.is_finite()) {
                if let Some(dir) = &config.checkpoint_dir {
                    std::fs::create_dir_all(dir).map_err(|io| Error::io(dir, io))?;
                    save_checkpoint(&before, &dir.join("last_good.ckpt"))?;
                }
                return Err(Error::NonFiniteLoss { epoch });
            }
            for f in &report.free_energies {
                sum += f;
                sum_sq += f * f;
            }
            l1 += report.l1;
            l2 += report.l2;
            for p in report.paths.rows() {
                dev0 += (p[0] - lat.x_start()).abs();
                dev1 += (p[n - 1] - lat.x_end()).abs();
            }
        }
        let count = config.latent_sample_count as f64;
        let mean = sum / count;
        let var = ((sum_sq - count * mean * mean) / (count - 1.0)).max(0.0);
        let es = EpochStats {
            epoch,
            f_mean: mean,
            f_std: var.sqrt(),
            samples: config.latent_sample_count,
            l1: l1 / batches as f64,
            l2: l2 / batches as f64,
            endpoint_dev_start: dev0 / count,
            endpoint_dev_end: dev1 / count,
        };
        stats.epochs.push(es);
        observer(epoch, &model, &es)?;
        if config.checkpoint_interval > 0 && (epoch + 1) % config.checkpoint_interval == 0 {
            let dir = config.checkpoint_dir.as_ref().expect("validated");
            std::fs::create_dir_all(dir).map_err(|io| Error::io(dir, io))?;
            save_checkpoint(&model, &dir.join(format!("epoch_{:06}.ckpt", epoch + 1)))?;
            save_checkpoint(&model, &dir.join("last_good.ckpt"))?;
        }
    }
    Ok((model, stats))
}
