//! Exhaustive enumeration of position-discretized paths.

use rand::Rng;

use super::path_action;
use crate::error::{Error, Result};
use crate::estimate::PathGenerator;
use crate::lattice::{LatticeSpec, PathBatch, Potential};

pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// Exact Boltzmann weights over every interior configuration on the given
/// per-stamp grids.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForcePartition {
    pub lattice: LatticeSpec,
    pub grids: Vec<Vec<f64>>,
    /// `ln sum_c exp(-S(c)/hbar)`.
    pub log_z_sum: f64,
    /// `sum_k ln dx_k`, the cell volume for uniform grids (0 if any grid has
    /// a single point).
    pub log_cell_volume: f64,
    /// Riemann-sum estimate of the continuum `ln Z`: `log_z_sum + log_cell_volume`.
    pub log_z: f64,
    /// Normalized, indexed in mixed radix with the first interior stamp fastest.
    pub probabilities: Vec<f64>,
    pub actions: Vec<f64>,
}

pub fn brute_force_partition(lat: &LatticeSpec, pot: &Potential, grids: &[Vec<f64>]) -> Result<BruteForcePartition> {
    let d = lat.n_tau() - 2;
    if grids.len() != d {
        return Err(Error::LengthMismatch {
            expected: d,
            got: grids.len(),
        });
    }
    if grids.iter().any(|g| g.is_empty() || g.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidArgument("every stamp grid needs at least one finite point".into()));
    }
    let total = grids.iter().fold(1u128, |a, g| a.saturating_mul(g.len() as u128));
    if total > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget { configurations: total });
    }
    let total = total as usize;
    let hbar = lat.hbar();
    let mut path = vec![0.0; lat.n_tau()];
    path[0] = lat.x_start();
    path[d + 1] = lat.x_end();
    let mut actions = Vec::with_capacity(total);
    for c in 0..total {
        let mut r = c;
        for (k, g) in grids.iter().enumerate() {
            path[k + 1] = g[r % g.len()];
            r /= g.len();
        }
        actions.push(path_action(&path, lat, pot));
    }
    let smin = actions.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = actions.iter().map(|s| (-(s - smin) / hbar).exp()).collect();
    let sum: f64 = weights.iter().sum();
    let log_z_sum = -smin / hbar + sum.ln();
    let probabilities = weights.into_iter().map(|w| w / sum).collect();
    let log_cell_volume = if grids.iter().all(|g| g.len() > 1) {
        grids.iter().map(|g| ((g[g.len() - 1] - g[0]) / (g.len() - 1) as f64).ln()).sum()
    } else {
        0.0
    };
    Ok(BruteForcePartition {
        lattice: lat.clone(),
        grids: grids.to_vec(),
        log_z_sum,
        log_cell_volume,
        log_z: log_z_sum + log_cell_volume,
        probabilities,
        actions,
    })
}

impl BruteForcePartition {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Grid indices of configuration `c`.
    pub fn indices(&self, c: usize) -> Vec<usize> {
        let mut r = c;
        self.grids
            .iter()
            .map(|g| {
                let i = r % g.len();
                r /= g.len();
                i
            })
            .collect()
    }

    /// Full path (endpoints included) of configuration `c`.
    pub fn path(&self, c: usize) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.grids.len() + 2);
        p.push(self.lattice.x_start());
        for (g, i) in self.grids.iter().zip(self.indices(c)) {
            p.push(g[i]);
        }
        p.push(self.lattice.x_end());
        p
    }

    /// Marginal distribution of interior stamp `k` (0-based) over its grid.
    pub fn marginal(&self, k: usize) -> Vec<f64> {
        let mut m = vec![0.0; self.grids[k].len()];
        for (c, p) in self.probabilities.iter().enumerate() {
            m[self.indices(c)[k]] += p;
        }
        m
    }

    /// `sum_c p_c (S_c + hbar ln p_c) = -hbar log_z_sum`.
    pub fn exact_free_energy(&self) -> f64 {
        -self.lattice.hbar() * self.log_z_sum
    }
}

/// The exact discrete target as a sampler: paths drawn with probability
/// `p_c`, `log_q = ln p_c`.
#[derive(Debug, Clone)]
pub struct DiscretePathDistribution {
    table: BruteForcePartition,
    cdf: Vec<f64>,
}

impl DiscretePathDistribution {
    pub fn new(table: BruteForcePartition) -> Self {
        let mut acc = 0.0;
        let cdf = table
            .probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { table, cdf }
    }

    pub fn table(&self) -> &BruteForcePartition {
        &self.table
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen::<f64>() * self.cdf[self.cdf.len() - 1];
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

impl PathGenerator for DiscretePathDistribution {
    fn n_tau(&self) -> usize {
        self.table.lattice.n_tau()
    }

    fn generate<R: Rng + ?Sized>(&self, lat: &LatticeSpec, n: usize, rng: &mut R) -> Result<PathBatch> {
        if lat.n_tau() != self.n_tau() {
            return Err(Error::LengthMismatch {
                expected: self.n_tau(),
                got: lat.n_tau(),
            });
        }
        let mut positions = Vec::with_capacity(n * self.n_tau());
        let mut log_q = Vec::with_capacity(n);
        for _ in 0..n {
            let c = self.sample_index(rng);
            positions.extend(self.table.path(c));
            log_q.push(self.table.probabilities[c].ln());
        }
        let mut batch = PathBatch::new(self.n_tau(), positions)?;
        batch.log_q = Some(log_q);
        Ok(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::gaussian_lattice_partition;
    use rand::SeedableRng;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn single_site_by_hand() {
        let lat = LatticeSpec::new(3, 1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let g = brute_force_partition(&lat, &Potential::Free, &[vec![-1.0, 0.0, 1.0]]).unwrap();
        // S(x) = x^2 / dt with dt = 0.5
        let z = 1.0 + 2.0 * (-2.0f64).exp();
        assert!((g.log_z_sum - z.ln()).abs() < 1e-15);
        assert!((g.probabilities[1] - 1.0 / z).abs() < 1e-15);
        assert_eq!(g.log_cell_volume, 0.0);
    }

    #[test]
    fn converges_to_gaussian_partition() {
        let lat = LatticeSpec::new(5, 1.0, 0.0, 0.5, 1.0, 1.0).unwrap();
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let exact = gaussian_lattice_partition(&lat, &pot).unwrap().log_z;
        let mut prev = f64::INFINITY;
        let err = |n| (brute_force_partition(&lat, &pot, &vec![grid(-3.5, 4.0, n); 3]).unwrap().log_z - exact).abs();
        for n in [5, 9, 17] {
            let e = err(n);
            assert!(e < prev, "n={n}: {e} !< {prev}");
            prev = e;
        }
        assert!(err(65) < 1e-9);
    }

    #[test]
    fn budget_and_shape_errors() {
        let lat = LatticeSpec::new(5, 1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let big = vec![grid(-1.0, 1.0, 300); 3];
        assert!(matches!(
            brute_force_partition(&lat, &Potential::Free, &big),
            Err(Error::EnumerationBudget { .. })
        ));
        assert!(brute_force_partition(&lat, &Potential::Free, &big[..2]).is_err());
    }

    #[test]
    fn exact_target_free_energy_is_minus_log_z() {
        let lat = LatticeSpec::new(5, 1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let g = brute_force_partition(&lat, &pot, &vec![grid(-1.0, 1.0, 5); 3]).unwrap();
        let f: f64 = g.probabilities.iter().zip(&g.actions).map(|(p, s)| p * (s + p.ln())).sum();
        assert!((f - g.exact_free_energy()).abs() < 1e-12);
        let marg: f64 = g.marginal(1).iter().sum();
        assert!((marg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_frequencies() {
        let lat = LatticeSpec::new(4, 1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let dist = DiscretePathDistribution::new(brute_force_partition(&lat, &pot, &vec![grid(-1.0, 1.0, 3); 2]).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut counts = vec![0usize; dist.table().len()];
        for _ in 0..n {
            counts[dist.sample_index(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(&dist.table().probabilities) {
            let sd = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() < 5.0 * sd + 1e-12);
        }
        let b = dist.generate(&lat, 10, &mut rng).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b.row(0)[0], 0.0);
        assert!(b.log_q.unwrap().iter().all(|l| *l <= 0.0));
    }
}
