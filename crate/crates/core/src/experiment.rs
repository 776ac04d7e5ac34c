//! Experiment orchestration: `N_r`-run training campaigns per endpoint pair,
//! propagator scans, ground-state densities, the scatter diagnostic, and
//! oracle-only output.
//!
//! Seeding: run `r` of point `j` in group `g` (0 off-diagonal, 1 diagonal,
//! 2 single-run kinds) trains with seed `derive_seed(master, [RUN, g, j, r])`;
//! the free-energy estimate after training draws from
//! `stream_rng(run_seed, [ESTIMATE])`. Inside training, epochs and batches
//! are keyed as documented in [`crate::train`].

use std::path::Path;

use crate::config::{ExperimentConfig, ExperimentKind, PotentialKind};
use crate::error::{Error, Result};
use crate::estimate::{error_bars, estimate_free_energy, gaussian_fit, scatter_diagnostic, trace_normalize_log, ErrorBars, GaussianFit};
use crate::lattice::{LatticeSpec, Potential};
use crate::model::{save_checkpoint, ModelParams};
use crate::oracles::{
    exact_diagonalization, free_log_kernel, gaussian_lattice_partition, ho_exact_log_kernel, richardson_spectral_kernel, Grid,
    SpectralResult,
};
use crate::output::{CsvTable, OutputDir};
use crate::rng::{derive_seed, stream, stream_rng};
use crate::train::{train, train_with_observer, RunStats, TrainConfig};

pub const GROUP_SCAN: u64 = 0;
pub const GROUP_DIAGONAL: u64 = 1;
pub const GROUP_SINGLE: u64 = 2;

/// Free energies of the `N_r` runs at one endpoint pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub x_start: f64,
    pub x_end: f64,
    /// Final free-energy estimate of each run.
    pub free_energies: Vec<f64>,
    /// Ensemble standard deviation of `F` within each run's final estimate.
    pub ensemble_stds: Vec<f64>,
    pub bars: Option<ErrorBars>,
}

pub fn run_seed(master: u64, group: u64, point: usize, run: usize) -> u64 {
    derive_seed(master, &[stream::RUN, group, point as u64, run as u64])
}

/// Trains one model and estimates its free energy from `samples` fresh paths.
pub fn train_and_estimate(config: &TrainConfig, samples: usize) -> Result<(ModelParams, RunStats, f64, f64)> {
    let (model, stats) = train(config)?;
    let est = estimate_free_energy(
        &model,
        &config.lattice,
        &config.potential,
        samples,
        &mut stream_rng(config.seed, &[stream::ESTIMATE]),
    )?;
    Ok((model, stats, est.mean, est.std))
}

/// `N_r` independent trainings at `(x_i, x_f)`; threads when `parallel_runs`.
pub fn campaign_point(exp: &ExperimentConfig, x_i: f64, x_f: f64, group: u64, point: usize) -> Result<PointResult> {
    let mut base = exp.train_config()?;
    base.lattice = base.lattice.with_endpoints(x_i, x_f)?;
    let configs: Vec<TrainConfig> = (0..exp.runs)
        .map(|r| {
            let mut c = base.clone();
            c.seed = run_seed(exp.seed, group, point, r);
            c
        })
        .collect();
    let results: Vec<Result<(f64, f64)>> = if exp.parallel_runs {
        std::thread::scope(|s| {
            let handles: Vec<_> = configs
                .iter()
                .map(|c| s.spawn(move || train_and_estimate(c, exp.estimate_samples).map(|(_, _, f, sd)| (f, sd))))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Estimation("training thread panicked".into()))))
                .collect()
        })
    } else {
        configs
            .iter()
            .map(|c| train_and_estimate(c, exp.estimate_samples).map(|(_, _, f, sd)| (f, sd)))
            .collect()
    };
    let mut free_energies = Vec::with_capacity(exp.runs);
    let mut ensemble_stds = Vec::with_capacity(exp.runs);
    for r in results {
        let (f, sd) = r?;
        free_energies.push(f);
        ensemble_stds.push(sd);
    }
    let bars = if free_energies.len() >= 2 {
        Some(error_bars(&free_energies, exp.hbar)?)
    } else {
        None
    };
    Ok(PointResult {
        x_start: x_i,
        x_end: x_f,
        free_energies,
        ensemble_stds,
        bars,
    })
}

/// Diagonal campaign `x_i = x_f = x` over the configured grid.
pub fn diagonal_campaign(exp: &ExperimentConfig) -> Result<Vec<PointResult>> {
    exp.diagonal
        .values()
        .iter()
        .enumerate()
        .map(|(j, &x)| campaign_point(exp, x, x, GROUP_DIAGONAL, j))
        .collect()
}

fn log_values(points: &[PointResult]) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            p.bars
                .map(|b| b.log_value)
                .ok_or_else(|| Error::Estimation("point has fewer than 2 runs".into()))
        })
        .collect()
}

/// Relative 2-sigma half-width, `2 delta_F / (hbar sqrt(N_r))`.
fn rel_two_sigma(p: &PointResult, hbar: f64) -> f64 {
    p.bars.map_or(0.0, |b| 2.0 * b.free_energy_std / (hbar * (b.runs as f64).sqrt()))
}

/// Normalized kernel values with 2-sigma bars; the bar is the point's own
/// relative uncertainty (the trace is treated as exact).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCurve {
    pub x: Vec<f64>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub two_sigma: Vec<f64>,
}

fn normalized_curve(exp: &ExperimentConfig, points: &[PointResult], x: Vec<f64>, diagonal: &[PointResult]) -> Result<NormalizedCurve> {
    let diag_x = exp.diagonal.values();
    let log_raw = log_values(points)?;
    let normalized = trace_normalize_log(&log_raw, &diag_x, &log_values(diagonal)?)?;
    let two_sigma = normalized
        .iter()
        .zip(points)
        .map(|(k, p)| k * rel_two_sigma(p, exp.hbar))
        .collect();
    Ok(NormalizedCurve {
        x,
        raw: log_raw.iter().map(|l| l.exp()).collect(),
        normalized,
        two_sigma,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub scan: Vec<PointResult>,
    pub diagonal: Vec<PointResult>,
    pub curve: NormalizedCurve,
}

/// Off-diagonal scan `K(x_f, T; x_i, 0)` over the configured `x_f` grid,
/// trace-normalized with the diagonal campaign.
pub fn propagator_scan(exp: &ExperimentConfig) -> Result<ScanResult> {
    let xs = exp.scan.values();
    let scan: Vec<PointResult> = xs
        .iter()
        .enumerate()
        .map(|(j, &xf)| campaign_point(exp, exp.x_start, xf, GROUP_SCAN, j))
        .collect::<Result<_>>()?;
    let diagonal = diagonal_campaign(exp)?;
    let curve = normalized_curve(exp, &scan, xs, &diagonal)?;
    Ok(ScanResult { scan, diagonal, curve })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityResult {
    pub diagonal: Vec<PointResult>,
    pub curve: NormalizedCurve,
    pub fit: Option<GaussianFit>,
}

/// `rho(x) = K(x,T;x,0) / integral K(x,T;x,0) dx` from a diagonal campaign.
pub fn ground_state_scan(exp: &ExperimentConfig) -> Result<DensityResult> {
    let diagonal = diagonal_campaign(exp)?;
    let curve = normalized_curve(exp, &diagonal, exp.diagonal.values(), &diagonal)?;
    let fit = gaussian_fit(&curve.x, &curve.normalized).ok();
    Ok(DensityResult { diagonal, curve, fit })
}

/// Exact Euclidean kernel of the configured system: closed forms for the
/// free particle and the oscillator, Richardson-extrapolated exact
/// diagonalization otherwise.
#[derive(Debug, Clone)]
pub enum ReferenceKernel {
    Free { m: f64, hbar: f64, t: f64 },
    Harmonic { m: f64, omega: f64, hbar: f64, t: f64 },
    Spectral { coarse: SpectralResult, fine: SpectralResult, t: f64, n_terms: usize },
}

impl ReferenceKernel {
    pub fn for_config(exp: &ExperimentConfig) -> Result<Self> {
        let (m, hbar, t) = (exp.mass, exp.hbar, exp.total_time);
        Ok(match exp.potential {
            PotentialKind::Free => ReferenceKernel::Free { m, hbar, t },
            PotentialKind::Harmonic => ReferenceKernel::Harmonic {
                m,
                omega: exp.omega,
                hbar,
                t,
            },
            PotentialKind::DoubleWell => {
                let pot = exp.potential()?;
                let grid = Grid::new(-exp.ed_box, exp.ed_box, exp.ed_points)?;
                let coarse = exact_diagonalization(&pot, grid, m, hbar, exp.ed_states)?;
                let fine = exact_diagonalization(&pot, grid.refined(), m, hbar, exp.ed_states)?;
                ReferenceKernel::Spectral {
                    coarse,
                    fine,
                    t,
                    n_terms: exp.ed_states - 1,
                }
            }
        })
    }

    pub fn log_kernel(&self, x_i: f64, x_f: f64) -> Result<f64> {
        match self {
            ReferenceKernel::Free { m, hbar, t } => free_log_kernel(x_i, x_f, *t, *m, *hbar),
            ReferenceKernel::Harmonic { m, omega, hbar, t } => ho_exact_log_kernel(x_i, x_f, *t, *m, *omega, *hbar),
            ReferenceKernel::Spectral { coarse, fine, t, n_terms } => {
                let k = richardson_spectral_kernel(coarse, fine, x_i, x_f, *t, *n_terms)?;
                if !(k.value > 0.0) {
                    return Err(Error::Estimation(format!("reference kernel not positive at ({x_i}, {x_f})")));
                }
                Ok(k.value.ln())
            }
        }
    }

    /// `ln tr K = ln sum_n exp(-T E_n / hbar)`; `None` for the free particle.
    pub fn log_trace(&self) -> Option<f64> {
        match self {
            ReferenceKernel::Free { .. } => None,
            ReferenceKernel::Harmonic { omega, t, .. } => Some(-(2.0 * (0.5 * omega * t).sinh()).ln()),
            ReferenceKernel::Spectral { coarse, fine, t, n_terms } => {
                let z = |s: &SpectralResult| {
                    s.energies[..*n_terms]
                        .iter()
                        .map(|e| (-t * e / s.hbar).exp())
                        .sum::<f64>()
                };
                Some(((4.0 * z(fine) - z(coarse)) / 3.0).ln())
            }
        }
    }

    /// `K(x_i, x_f) / tr K`.
    pub fn normalized(&self, x_i: f64, x_f: f64) -> Result<f64> {
        let tr = self
            .log_trace()
            .ok_or_else(|| Error::Estimation("the free-particle kernel has no finite trace".into()))?;
        Ok((self.log_kernel(x_i, x_f)? - tr).exp())
    }
}

fn curve_table(curve: &NormalizedCurve, first: &str, value: &str) -> Result<CsvTable> {
    let mut t = if value == "K_norm" {
        CsvTable::new(&[first, "K_raw", "K_norm", "err2sigma"])
    } else {
        CsvTable::new(&[first, value, "err2sigma"])
    };
    for i in 0..curve.x.len() {
        if value == "K_norm" {
            t.push(vec![curve.x[i], curve.raw[i], curve.normalized[i], curve.two_sigma[i]])?;
        } else {
            t.push(vec![curve.x[i], curve.normalized[i], curve.two_sigma[i]])?;
        }
    }
    Ok(t)
}

fn runs_table(groups: &[(f64, &[PointResult])]) -> Result<CsvTable> {
    let mut t = CsvTable::new(&["group", "x_start", "x_end", "run", "F", "F_ensemble_std"]);
    for (g, points) in groups {
        for p in points.iter() {
            for (r, (f, sd)) in p.free_energies.iter().zip(&p.ensemble_stds).enumerate() {
                t.push(vec![*g, p.x_start, p.x_end, r as f64, *f, *sd])?;
            }
        }
    }
    Ok(t)
}

fn overlay_table(reference: &ReferenceKernel, xs: &[f64], f: impl Fn(f64) -> (f64, f64)) -> Result<CsvTable> {
    let mut t = CsvTable::new(&["x", "value"]);
    for &x in xs {
        let (a, b) = f(x);
        t.push(vec![x, reference.normalized(a, b)?])?;
    }
    Ok(t)
}

fn dense(min: f64, max: f64) -> Vec<f64> {
    (0..=200).map(|i| min + (max - min) * i as f64 / 200.0).collect()
}

/// Runs `exp` and writes its artifacts plus `resolved.cfg` and `MANIFEST`
/// under `out`. On failure the MANIFEST is written with status `incomplete`
/// and the error is returned.
pub fn run_experiment(exp: &ExperimentConfig, out: &Path) -> Result<()> {
    exp.validate()?;
    let mut dir = OutputDir::create(out)?;
    dir.write_bytes("resolved.cfg", exp.render().as_bytes())?;
    match run_kind(exp, &mut dir) {
        Ok(()) => {
            dir.write_manifest(true)?;
            Ok(())
        }
        Err(e) => {
            let _ = dir.write_manifest(false);
            Err(e)
        }
    }
}

fn record_checkpoints(dir: &mut OutputDir, ckpt: &Path) -> Result<()> {
    let mut names: Vec<String> = std::fs::read_dir(ckpt)
        .map_err(|e| Error::io(ckpt, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for n in names {
        dir.record(&format!("checkpoints/{n}"));
    }
    Ok(())
}

fn summary_line(s: &mut String, key: &str, v: f64) {
    s.push_str(key);
    s.push(' ');
    s.push_str(&crate::output::fmt_f64(v));
    s.push('\n');
}

fn run_kind(exp: &ExperimentConfig, dir: &mut OutputDir) -> Result<()> {
    let lat = exp.lattice()?;
    let pot = exp.potential()?;
    match exp.kind {
        ExperimentKind::Train => {
            let mut cfg = exp.train_config()?;
            cfg.seed = run_seed(exp.seed, GROUP_SINGLE, 0, 0);
            let ckpt = dir.path("checkpoints");
            std::fs::create_dir_all(&ckpt).map_err(|e| Error::io(&ckpt, e))?;
            cfg.checkpoint_dir = Some(ckpt.clone());
            let trained = train_and_estimate(&cfg, exp.estimate_samples);
            record_checkpoints(dir, &ckpt)?;
            let (model, stats, f, sd) = trained?;
            save_checkpoint(&model, &dir.path("model.ckpt"))?;
            dir.record("model.ckpt");
            dir.write_csv("run_stats.csv", &stats.to_csv())?;
            let mut s = String::new();
            summary_line(&mut s, "free_energy", f);
            summary_line(&mut s, "free_energy_ensemble_std", sd);
            if let Ok(g) = gaussian_lattice_partition(&lat, &pot) {
                summary_line(&mut s, "lattice_free_energy", -exp.hbar * g.log_z);
                summary_line(&mut s, "gap", f + exp.hbar * g.log_z);
            }
            dir.write_bytes("summary.txt", s.as_bytes())?;
        }
        ExperimentKind::Scan => {
            let res = propagator_scan(exp)?;
            dir.write_csv("scan.csv", &curve_table(&res.curve, "x_f", "K_norm")?)?;
            let diag = normalized_curve(exp, &res.diagonal, exp.diagonal.values(), &res.diagonal)?;
            dir.write_csv("diagonal.csv", &curve_table(&diag, "x", "K_norm")?)?;
            dir.write_csv(
                "runs.csv",
                &runs_table(&[(GROUP_SCAN as f64, &res.scan), (GROUP_DIAGONAL as f64, &res.diagonal)])?,
            )?;
            if exp.potential != PotentialKind::Free {
                let reference = ReferenceKernel::for_config(exp)?;
                let xs = dense(exp.scan.min, exp.scan.max);
                dir.write_csv("overlay.csv", &overlay_table(&reference, &xs, |x| (exp.x_start, x))?)?;
            }
        }
        ExperimentKind::GroundState => {
            let res = ground_state_scan(exp)?;
            dir.write_csv("density.csv", &curve_table(&res.curve, "x", "rho")?)?;
            dir.write_csv("runs.csv", &runs_table(&[(GROUP_DIAGONAL as f64, &res.diagonal)])?)?;
            if exp.potential != PotentialKind::Free {
                let reference = ReferenceKernel::for_config(exp)?;
                let xs = dense(exp.diagonal.min, exp.diagonal.max);
                dir.write_csv("overlay.csv", &overlay_table(&reference, &xs, |x| (x, x))?)?;
            }
            if let Some(fit) = res.fit {
                let mut s = String::new();
                summary_line(&mut s, "fit_mean", fit.mean);
                summary_line(&mut s, "fit_variance", fit.variance);
                dir.write_bytes("summary.txt", s.as_bytes())?;
            }
        }
        ExperimentKind::Diagnose => {
            let mut cfg = exp.train_config()?;
            cfg.seed = run_seed(exp.seed, GROUP_SINGLE, 0, 0);
            let snaps = exp.diagnose_snapshots.max(1);
            let every = (exp.max_epochs / snaps).max(1);
            let mut traj = CsvTable::new(&["epoch", "median_d", "mean_d", "F"]);
            let (model, stats) = train_with_observer(&cfg, |epoch, model, _| {
                if (epoch + 1) % every == 0 {
                    let mut rng = stream_rng(cfg.seed, &[stream::ESTIMATE, epoch as u64 + 1]);
                    let sc = scatter_diagnostic(model, &lat, &pot, exp.diagnose_paths, &mut rng)?;
                    traj.push(vec![(epoch + 1) as f64, sc.median_distance(), sc.mean_distance(), sc.free_energy])?;
                }
                Ok(())
            })?;
            let sc = scatter_diagnostic(&model, &lat, &pot, exp.diagnose_paths, &mut stream_rng(cfg.seed, &[stream::ESTIMATE]))?;
            let mut t = CsvTable::new(&["s_shift", "logq_shift", "d"]);
            for p in &sc.points {
                t.push(vec![p.action_shift, p.log_q_shift, p.distance])?;
            }
            dir.write_csv("scatter.csv", &t)?;
            dir.write_csv("scatter_trajectory.csv", &traj)?;
            dir.write_csv("run_stats.csv", &stats.to_csv())?;
            save_checkpoint(&model, &dir.path("model.ckpt"))?;
            dir.record("model.ckpt");
        }
        ExperimentKind::Oracle => {
            let mut s = String::new();
            if let Ok(g) = gaussian_lattice_partition(&lat, &pot) {
                summary_line(&mut s, "lattice_log_z", g.log_z);
                summary_line(&mut s, "lattice_action_min", g.action_min);
            }
            if exp.potential != PotentialKind::Free {
                let reference = ReferenceKernel::for_config(exp)?;
                let xs = dense(exp.scan.min, exp.scan.max);
                dir.write_csv("kernel.csv", &overlay_table(&reference, &xs, |x| (exp.x_start, x))?)?;
                let xd = dense(exp.diagonal.min, exp.diagonal.max);
                dir.write_csv("density.csv", &overlay_table(&reference, &xd, |x| (x, x))?)?;
                if let Some(tr) = reference.log_trace() {
                    summary_line(&mut s, "log_trace", tr);
                }
                let spec = exact_diagonalization(
                    &pot,
                    Grid::new(-exp.ed_box, exp.ed_box, exp.ed_points)?,
                    exp.mass,
                    exp.hbar,
                    exp.ed_states.min(10),
                )?;
                let mut lv = CsvTable::new(&["n", "energy"]);
                for (n, e) in spec.energies.iter().enumerate() {
                    lv.push(vec![n as f64, *e])?;
                }
                dir.write_csv("levels.csv", &lv)?;
            }
            dir.write_bytes("summary.txt", s.as_bytes())?;
        }
    }
    Ok(())
}

/// Lattice and potential of an experiment with different endpoints.
pub fn system_at(exp: &ExperimentConfig, x_i: f64, x_f: f64) -> Result<(LatticeSpec, Potential)> {
    Ok((exp.lattice()?.with_endpoints(x_i, x_f)?, exp.potential()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(kind: ExperimentKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::with_kind(kind);
        c.n_tau = 6;
        c.hidden = 3;
        c.components = 2;
        c.latent_sample_count = 16;
        c.batch_size = 8;
        c.max_epochs = 2;
        c.learning_rate = 1e-2;
        c.runs = 2;
        c.estimate_samples = 32;
        c.scan.points = 3;
        c.diagonal = crate::config::GridSpec {
            min: -3.0,
            max: 3.0,
            points: 5,
        };
        c.diagnose_paths = 50;
        c.diagnose_snapshots = 2;
        c.ed_box = 10.0;
        c.ed_points = 999;
        c.ed_states = 12;
        c
    }

    #[test]
    fn seeds_are_distinct_per_run_and_point() {
        let a = run_seed(1, GROUP_SCAN, 0, 0);
        assert_ne!(a, run_seed(1, GROUP_SCAN, 0, 1));
        assert_ne!(a, run_seed(1, GROUP_SCAN, 1, 0));
        assert_ne!(a, run_seed(1, GROUP_DIAGONAL, 0, 0));
        assert_ne!(a, run_seed(2, GROUP_SCAN, 0, 0));
    }

    #[test]
    fn scan_writes_schema_and_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let c = tiny(ExperimentKind::Scan);
        run_experiment(&c, &dir.path().join("a")).unwrap();
        run_experiment(&c, &dir.path().join("b")).unwrap();
        for f in ["scan.csv", "diagonal.csv", "runs.csv", "overlay.csv", "resolved.cfg", "MANIFEST"] {
            let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
            let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
            assert_eq!(a, b, "{f} differs");
        }
        let scan = std::fs::read_to_string(dir.path().join("a/scan.csv")).unwrap();
        assert!(scan.starts_with("x_f,K_raw,K_norm,err2sigma\n"));
        assert_eq!(scan.lines().count(), 4);
        let manifest = std::fs::read_to_string(dir.path().join("a/MANIFEST")).unwrap();
        assert!(manifest.starts_with("status complete\n"));
        assert!(manifest.contains("  scan.csv\n"));
        let resolved = std::fs::read_to_string(dir.path().join("a/resolved.cfg")).unwrap();
        assert_eq!(ExperimentConfig::parse(&resolved).unwrap(), c);
    }

    #[test]
    fn parallel_runs_match_sequential() {
        let mut c = tiny(ExperimentKind::Scan);
        let seq = campaign_point(&c, 0.0, 1.0, GROUP_SCAN, 0).unwrap();
        c.parallel_runs = true;
        let par = campaign_point(&c, 0.0, 1.0, GROUP_SCAN, 0).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn other_kinds_write_outputs() {
        let dir = tempfile::tempdir().unwrap();
        for (kind, file) in [
            (ExperimentKind::Train, "run_stats.csv"),
            (ExperimentKind::GroundState, "density.csv"),
            (ExperimentKind::Diagnose, "scatter.csv"),
            (ExperimentKind::Oracle, "kernel.csv"),
        ] {
            let out = dir.path().join(kind.as_str());
            run_experiment(&tiny(kind), &out).unwrap();
            assert!(out.join(file).exists(), "{file}");
            assert!(out.join("MANIFEST").exists());
        }
        let sc = std::fs::read_to_string(dir.path().join("diagnose/scatter.csv")).unwrap();
        assert!(sc.starts_with("s_shift,logq_shift,d\n"));
        assert_eq!(sc.lines().count(), 51);
    }

    #[test]
    fn failure_marks_manifest_incomplete() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(ExperimentKind::Train);
        c.learning_rate = 1e300;
        c.max_epochs = 20;
        let out = dir.path().join("bad");
        assert!(run_experiment(&c, &out).is_err());
        let m = std::fs::read_to_string(out.join("MANIFEST")).unwrap();
        assert!(m.starts_with("status incomplete\n"));
        assert!(m.contains("  checkpoints/last_good.ckpt\n"));
    }

    #[test]
    fn reference_kernel_trace_matches_diagonal_integral() {
        let mut c = tiny(ExperimentKind::Oracle);
        c.total_time = 0.5;
        let r = ReferenceKernel::for_config(&c).unwrap();
        let xs: Vec<f64> = (0..=400).map(|i| -10.0 + 0.05 * i as f64).collect();
        let integral: f64 = xs.iter().map(|&x| r.normalized(x, x).unwrap() * 0.05).sum();
        assert!((integral - 1.0).abs() < 1e-9);
        c.potential = PotentialKind::DoubleWell;
        c.total_time = 2.0;
        c.ed_box = 12.0;
        c.ed_points = 2999;
        c.ed_states = 30;
        let r = ReferenceKernel::for_config(&c).unwrap();
        let integral: f64 = xs.iter().map(|&x| r.normalized(x, x).unwrap() * 0.05).sum();
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    }
}
