//! Single-site Metropolis sampling of `exp(-S_E/hbar)` with fixed endpoints.

use rand::Rng;

use super::{path_action, potential_at};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, PathBatch, Potential};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetropolisConfig {
    /// Recorded sweeps (after burn-in, before thinning).
    pub n_sweeps: usize,
    /// Half-width of the uniform proposal.
    pub step_width: f64,
    pub burn_in: usize,
    /// Keep every `thin`-th sweep.
    pub thin: usize,
}

impl MetropolisConfig {
    pub fn new(n_sweeps: usize, step_width: f64) -> Self {
        Self {
            n_sweeps,
            step_width,
            burn_in: 1000,
            thin: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetropolisRun {
    /// One path per kept sweep, `action` populated.
    pub samples: PathBatch,
    pub acceptance_rate: f64,
    /// Set when the acceptance rate is outside `[0.2, 0.8]`.
    pub warning: Option<String>,
}

fn local_action(x: f64, left: f64, right: f64, m: f64, dt: f64, pot: &Potential) -> f64 {
    m * ((x - left).powi(2) + (right - x).powi(2)) / (2.0 * dt) + dt * potential_at(pot, x)
}

pub fn metropolis_sampler<R: Rng + ?Sized>(
    lat: &LatticeSpec,
    pot: &Potential,
    cfg: &MetropolisConfig,
    rng: &mut R,
) -> Result<MetropolisRun> {
    if !(cfg.step_width > 0.0) || cfg.thin == 0 || cfg.n_sweeps == 0 {
        return Err(Error::InvalidArgument(
            "Metropolis needs step_width > 0, thin >= 1, n_sweeps >= 1".into(),
        ));
    }
    let n = lat.n_tau();
    let dt = lat.total_time() / (n - 1) as f64;
    let m = lat.mass();
    let hbar = lat.hbar();
    let mut path: Vec<f64> = (0..n)
        .map(|k| lat.x_start() + (lat.x_end() - lat.x_start()) * k as f64 / (n - 1) as f64)
        .collect();
    let mut positions = Vec::with_capacity(cfg.n_sweeps / cfg.thin * n);
    let mut accepted = 0u64;
    let mut proposed = 0u64;
    for sweep in 0..cfg.burn_in + cfg.n_sweeps {
        for j in 1..n - 1 {
            let old = path[j];
            let new = old + cfg.step_width * (2.0 * rng.gen::<f64>() - 1.0);
            let ds = local_action(new, path[j - 1], path[j + 1], m, dt, pot)
                - local_action(old, path[j - 1], path[j + 1], m, dt, pot);
            proposed += 1;
            if ds <= 0.0 || rng.gen::<f64>() < (-ds / hbar).exp() {
                path[j] = new;
                accepted += 1;
            }
        }
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thin == 0 {
            positions.extend_from_slice(&path);
        }
    }
    let acceptance_rate = accepted as f64 / proposed.max(1) as f64;
    let warning = (!(0.2..=0.8).contains(&acceptance_rate))
        .then(|| format!("Metropolis acceptance rate {acceptance_rate:.3} outside [0.2, 0.8]; adjust step_width"));
    let mut samples = PathBatch::new(n, positions)?;
    let actions = samples.rows().map(|r| path_action(r, lat, pot)).collect();
    samples.action = Some(actions);
    Ok(MetropolisRun {
        samples,
        acceptance_rate,
        warning,
    })
}

/// Metropolis on per-stamp grids: each site proposes a uniformly chosen
/// different grid point. Returns the grid indices after every sweep.
pub fn metropolis_discrete<R: Rng + ?Sized>(
    lat: &LatticeSpec,
    pot: &Potential,
    grids: &[Vec<f64>],
    n_sweeps: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let n = lat.n_tau();
    if grids.len() != n - 2 {
        return Err(Error::LengthMismatch {
            expected: n - 2,
            got: grids.len(),
        });
    }
    if grids.iter().any(|g| g.len() < 2) {
        return Err(Error::InvalidArgument("discrete Metropolis needs >= 2 points per stamp".into()));
    }
    let dt = lat.total_time() / (n - 1) as f64;
    let m = lat.mass();
    let hbar = lat.hbar();
    let mut idx = vec![0usize; n - 2];
    let mut path = vec![0.0; n];
    path[0] = lat.x_start();
    path[n - 1] = lat.x_end();
    for (k, g) in grids.iter().enumerate() {
        path[k + 1] = g[0];
    }
    let mut chain = Vec::with_capacity(n_sweeps);
    for _ in 0..n_sweeps {
        for j in 1..n - 1 {
            let g = &grids[j - 1];
            let mut c = rng.gen_range(0..g.len() - 1);
            if c >= idx[j - 1] {
                c += 1;
            }
            let ds = local_action(g[c], path[j - 1], path[j + 1], m, dt, pot)
                - local_action(path[j], path[j - 1], path[j + 1], m, dt, pot);
            if ds <= 0.0 || rng.gen::<f64>() < (-ds / hbar).exp() {
                idx[j - 1] = c;
                path[j] = g[c];
            }
        }
        chain.push(idx.clone());
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{brute_force_partition, gaussian_mean_action};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    /// Standard error of a correlated series by non-overlapping batch means.
    fn batch_means_sem(x: &[f64], batches: usize) -> f64 {
        let len = x.len() / batches;
        let means: Vec<f64> = (0..batches).map(|b| x[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64).collect();
        let mu = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (batches - 1) as f64;
        (var / batches as f64).sqrt()
    }

    #[test]
    fn mean_action_matches_gaussian_moment() {
        let lat = LatticeSpec::new(5, 1.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let cfg = MetropolisConfig::new(200_000, 0.8);
        let run = metropolis_sampler(&lat, &pot, &cfg, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert!(run.warning.is_none(), "{:?}", run.warning);
        let s = run.samples.action.as_ref().unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let sem = batch_means_sem(s, 100);
        let exact = gaussian_mean_action(&lat, &pot).unwrap();
        assert!((mean - exact).abs() < 3.0 * sem, "{mean} vs {exact} (sem {sem})");
    }

    #[test]
    fn endpoints_fixed_and_warning() {
        let lat = LatticeSpec::new(6, 1.0, -0.5, 0.7, 1.0, 1.0).unwrap();
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let mut cfg = MetropolisConfig::new(50, 20.0);
        cfg.burn_in = 10;
        let run = metropolis_sampler(&lat, &pot, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!(run.warning.is_some());
        for r in run.samples.rows() {
            assert_eq!(r[0], -0.5);
            assert_eq!(r[5], 0.7);
        }
    }

    #[test]
    fn middle_marginal_matches_enumeration() {
        let lat = LatticeSpec::new(5, 1.0, 0.0, 0.5, 1.0, 1.0).unwrap();
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..9).map(|i| -1.5 + 0.375 * i as f64).collect();
        let grids = vec![grid.clone(); 3];
        let exact = brute_force_partition(&lat, &pot, &grids).unwrap().marginal(1);
        let chain = metropolis_discrete(&lat, &pot, &grids, 400_000, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        // thin by 20 so the counts are close to independent
        let kept: Vec<usize> = chain.iter().skip(1000).step_by(20).map(|c| c[1]).collect();
        let n = kept.len() as f64;
        let mut counts = vec![0.0; grid.len()];
        for k in kept {
            counts[k] += 1.0;
        }
        let chi2: f64 = counts.iter().zip(&exact).map(|(o, p)| (o - n * p).powi(2) / (n * p)).sum();
        let p = 1.0 - ChiSquared::new((grid.len() - 1) as f64).unwrap().cdf(chi2);
        assert!(p > 0.01, "chi2 {chi2}, p {p}");
    }

    #[test]
    fn two_state_reversibility() {
        let lat = LatticeSpec::new(3, 1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let chain = metropolis_discrete(&lat, &pot, &[vec![-0.3, 0.6]], 100_001, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let (mut ab, mut ba) = (0i64, 0i64);
        for w in chain.windows(2) {
            match (w[0][0], w[1][0]) {
                (0, 1) => ab += 1,
                (1, 0) => ba += 1,
                _ => {}
            }
        }
        assert!((ab - ba).abs() <= 1);
        assert!(ab > 1000);
    }
}
