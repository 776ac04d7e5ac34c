//! Line-based `key = value` experiment configuration.
//!
//! `#` starts a comment. Unknown keys, malformed values and violated
//! constraints are reported with their line number. Everything except
//! `kind` has a default; [`ExperimentConfig::render`] writes every key, so
//! the rendered text (saved as `resolved.cfg`) reproduces a run exactly.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Potential};
use crate::model::ModelConfig;
use crate::train::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Train,
    Scan,
    GroundState,
    Diagnose,
    Oracle,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Train => "train",
            ExperimentKind::Scan => "scan",
            ExperimentKind::GroundState => "ground-state",
            ExperimentKind::Diagnose => "diagnose",
            ExperimentKind::Oracle => "oracle",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "train" => ExperimentKind::Train,
            "scan" => ExperimentKind::Scan,
            "ground-state" => ExperimentKind::GroundState,
            "diagnose" => ExperimentKind::Diagnose,
            "oracle" => ExperimentKind::Oracle,
            other => return Err(format!("unknown kind `{other}` (train|scan|ground-state|diagnose|oracle)")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Free,
    Harmonic,
    DoubleWell,
}

impl PotentialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PotentialKind::Free => "free",
            PotentialKind::Harmonic => "harmonic",
            PotentialKind::DoubleWell => "double_well",
        }
    }
}

impl FromStr for PotentialKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "free" => PotentialKind::Free,
            "harmonic" => PotentialKind::Harmonic,
            "double_well" => PotentialKind::DoubleWell,
            other => return Err(format!("unknown potential `{other}` (free|harmonic|double_well)")),
        })
    }
}

/// Uniform grid of `points` values on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub potential: PotentialKind,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n_tau: usize,
    pub total_time: f64,
    pub x_start: f64,
    pub x_end: f64,
    pub hbar: f64,
    pub mass: f64,
    pub hidden: usize,
    pub components: usize,
    pub position_feedback: bool,
    pub learning_rate: f64,
    pub latent_sample_count: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub checkpoint_interval: usize,
    pub penalty_weight: f64,
    pub seed: u64,
    /// `N_r`, independent trainings per endpoint pair.
    pub runs: usize,
    pub parallel_runs: bool,
    /// Paths drawn from each trained model to estimate its free energy.
    pub estimate_samples: usize,
    /// Off-diagonal endpoints `x_f` for `scan`.
    pub scan: GridSpec,
    /// Diagonal points `x_i = x_f = x` for the trace and the density.
    pub diagonal: GridSpec,
    pub diagnose_paths: usize,
    /// Number of evenly spaced training snapshots at which `diagnose`
    /// records the scatter summary.
    pub diagnose_snapshots: usize,
    /// Exact-diagonalization box half-width and grid size.
    pub ed_box: f64,
    pub ed_points: usize,
    pub ed_states: usize,
}

const KEYS: &[&str] = &[
    "kind",
    "potential",
    "omega",
    "alpha",
    "beta",
    "n_tau",
    "total_time",
    "x_start",
    "x_end",
    "hbar",
    "mass",
    "hidden",
    "components",
    "position_feedback",
    "learning_rate",
    "latent_sample_count",
    "batch_size",
    "max_epochs",
    "checkpoint_interval",
    "penalty_weight",
    "seed",
    "runs",
    "parallel_runs",
    "estimate_samples",
    "scan_min",
    "scan_max",
    "scan_points",
    "diagonal_min",
    "diagonal_max",
    "diagonal_points",
    "diagnose_paths",
    "diagnose_snapshots",
    "ed_box",
    "ed_points",
    "ed_states",
];

impl ExperimentConfig {
    /// Defaults for everything but `kind`.
    pub fn with_kind(kind: ExperimentKind) -> Self {
        Self {
            kind,
            potential: PotentialKind::Harmonic,
            omega: 1.0,
            alpha: 0.05,
            beta: -1.0,
            n_tau: 32,
            total_time: 0.5,
            x_start: 0.0,
            x_end: 1.0,
            hbar: 1.0,
            mass: 1.0,
            hidden: crate::model::DEFAULT_HIDDEN,
            components: 128,
            position_feedback: false,
            learning_rate: 1e-4,
            latent_sample_count: 2048,
            batch_size: 128,
            max_epochs: 3000,
            checkpoint_interval: 0,
            penalty_weight: 1.0,
            seed: 0,
            runs: 10,
            parallel_runs: false,
            estimate_samples: 4096,
            scan: GridSpec {
                min: -2.0,
                max: 2.0,
                points: 9,
            },
            diagonal: GridSpec {
                min: -6.5,
                max: 6.5,
                points: 27,
            },
            diagnose_paths: 10_000,
            diagnose_snapshots: 10,
            ed_box: 15.0,
            ed_points: 7499,
            ed_states: 61,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_inner(text, None)
    }

    /// Like [`Self::parse`] for a known experiment kind: the `kind` key may be
    /// omitted, and if present it must agree.
    pub fn parse_as(text: &str, expected: ExperimentKind) -> Result<Self> {
        let c = Self::parse_inner(text, Some(expected))?;
        if c.kind != expected {
            return Err(Error::ConfigValue(format!(
                "file declares kind `{}` but `{}` was requested",
                c.kind.as_str(),
                expected.as_str()
            )));
        }
        Ok(c)
    }

    fn parse_inner(text: &str, default_kind: Option<ExperimentKind>) -> Result<Self> {
        let mut kind: Option<ExperimentKind> = None;
        let mut pairs: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("unknown key `{k}`"),
                });
            }
            if pairs.iter().any(|(_, seen, _)| seen == k) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("duplicate key `{k}`"),
                });
            }
            if k == "kind" {
                kind = Some(v.parse().map_err(|m| Error::Config { line: line_no, message: m })?);
            }
            pairs.push((line_no, k.to_string(), v.to_string()));
        }
        let kind = kind
            .or(default_kind)
            .ok_or_else(|| Error::ConfigValue("missing key: kind".into()))?;
        let mut c = Self::with_kind(kind);
        for (line, k, v) in &pairs {
            c.set(k, v).map_err(|message| Error::Config { line: *line, message })?;
            c.check_key(k).map_err(|message| Error::Config { line: *line, message })?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        fn p<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse::<T>()
                .map_err(|_| format!("`{key}`: cannot parse `{v}` as {}", std::any::type_name::<T>()))
        }
        match key {
            "kind" => self.kind = v.parse()?,
            "potential" => self.potential = v.parse()?,
            "omega" => self.omega = p(key, v)?,
            "alpha" => self.alpha = p(key, v)?,
            "beta" => self.beta = p(key, v)?,
            "n_tau" => self.n_tau = p(key, v)?,
            "total_time" => self.total_time = p(key, v)?,
            "x_start" => self.x_start = p(key, v)?,
            "x_end" => self.x_end = p(key, v)?,
            "hbar" => self.hbar = p(key, v)?,
            "mass" => self.mass = p(key, v)?,
            "hidden" => self.hidden = p(key, v)?,
            "components" => self.components = p(key, v)?,
            "position_feedback" => self.position_feedback = p(key, v)?,
            "learning_rate" => self.learning_rate = p(key, v)?,
            "latent_sample_count" => self.latent_sample_count = p(key, v)?,
            "batch_size" => self.batch_size = p(key, v)?,
            "max_epochs" => self.max_epochs = p(key, v)?,
            "checkpoint_interval" => self.checkpoint_interval = p(key, v)?,
            "penalty_weight" => self.penalty_weight = p(key, v)?,
            "seed" => self.seed = p(key, v)?,
            "runs" => self.runs = p(key, v)?,
            "parallel_runs" => self.parallel_runs = p(key, v)?,
            "estimate_samples" => self.estimate_samples = p(key, v)?,
            "scan_min" => self.scan.min = p(key, v)?,
            "scan_max" => self.scan.max = p(key, v)?,
            "scan_points" => self.scan.points = p(key, v)?,
            "diagonal_min" => self.diagonal.min = p(key, v)?,
            "diagonal_max" => self.diagonal.max = p(key, v)?,
            "diagonal_points" => self.diagonal.points = p(key, v)?,
            "diagnose_paths" => self.diagnose_paths = p(key, v)?,
            "diagnose_snapshots" => self.diagnose_snapshots = p(key, v)?,
            "ed_box" => self.ed_box = p(key, v)?,
            "ed_points" => self.ed_points = p(key, v)?,
            "ed_states" => self.ed_states = p(key, v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Per-key constraints, so parse errors can point at the offending line.
    fn check_key(&self, key: &str) -> std::result::Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("`{name}` must be finite and > 0, got {v}"))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("`{name}` must be finite, got {v}"))
            }
        };
        match key {
            "omega" => positive(key, self.omega),
            "alpha" => positive(key, self.alpha),
            "beta" => finite(key, self.beta),
            "total_time" => positive(key, self.total_time),
            "hbar" => positive(key, self.hbar),
            "mass" => positive(key, self.mass),
            "learning_rate" => positive(key, self.learning_rate),
            "ed_box" => positive(key, self.ed_box),
            "x_start" => finite(key, self.x_start),
            "x_end" => finite(key, self.x_end),
            "penalty_weight" => {
                if self.penalty_weight.is_finite() && self.penalty_weight >= 0.0 {
                    Ok(())
                } else {
                    Err(format!("`penalty_weight` must be finite and >= 0, got {}", self.penalty_weight))
                }
            }
            "n_tau" if self.n_tau < 3 => Err(format!("`n_tau` must be >= 3, got {}", self.n_tau)),
            "runs" if self.runs == 0 => Err("`runs` must be >= 1".into()),
            "position_feedback" if self.position_feedback => {
                Err("`position_feedback = true` is reserved and not implemented".into())
            }
            _ => Ok(()),
        }
    }

    /// Whole-config constraints.
    pub fn validate(&self) -> Result<()> {
        for k in KEYS {
            self.check_key(k).map_err(Error::ConfigValue)?;
        }
        for (name, g) in [("scan", self.scan), ("diagonal", self.diagonal)] {
            if g.points == 0 || !g.min.is_finite() || !g.max.is_finite() || (g.points > 1 && !(g.max > g.min)) {
                return Err(Error::ConfigValue(format!(
                    "{name} grid must be increasing with >= 1 point (got [{}, {}], {})",
                    g.min, g.max, g.points
                )));
            }
        }
        if matches!(self.kind, ExperimentKind::Scan | ExperimentKind::GroundState) && self.diagonal.points < 5 {
            return Err(Error::ConfigValue("diagonal grid needs >= 5 points for the trace quadrature".into()));
        }
        if matches!(self.kind, ExperimentKind::Scan | ExperimentKind::GroundState) && self.runs < 2 {
            return Err(Error::ConfigValue("error bars need runs >= 2".into()));
        }
        if self.estimate_samples < 2 || self.diagnose_paths < 2 {
            return Err(Error::ConfigValue("estimate_samples and diagnose_paths must be >= 2".into()));
        }
        self.train_config()?.validate()?;
        Ok(())
    }

    pub fn lattice(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.n_tau, self.total_time, self.x_start, self.x_end, self.hbar, self.mass)
    }

    /// For the harmonic case the oscillator mass is the particle mass.
    pub fn potential(&self) -> Result<Potential> {
        match self.potential {
            PotentialKind::Free => Ok(Potential::Free),
            PotentialKind::Harmonic => Potential::harmonic(self.mass, self.omega),
            PotentialKind::DoubleWell => Potential::double_well(self.alpha, self.beta),
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let mut model = ModelConfig::new(self.hidden, self.components, self.n_tau);
        model.position_feedback = self.position_feedback;
        let mut t = TrainConfig::new(self.lattice()?, self.potential()?);
        t.model = model;
        t.learning_rate = self.learning_rate;
        t.latent_sample_count = self.latent_sample_count;
        t.batch_size = self.batch_size;
        t.max_epochs = self.max_epochs;
        t.seed = self.seed;
        t.checkpoint_interval = self.checkpoint_interval;
        t.penalty_weight = self.penalty_weight;
        Ok(t)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("kind", self.kind.as_str().into());
        put("potential", self.potential.as_str().into());
        put("omega", self.omega.to_string());
        put("alpha", self.alpha.to_string());
        put("beta", self.beta.to_string());
        put("n_tau", self.n_tau.to_string());
        put("total_time", self.total_time.to_string());
        put("x_start", self.x_start.to_string());
        put("x_end", self.x_end.to_string());
        put("hbar", self.hbar.to_string());
        put("mass", self.mass.to_string());
        put("hidden", self.hidden.to_string());
        put("components", self.components.to_string());
        put("position_feedback", self.position_feedback.to_string());
        put("learning_rate", self.learning_rate.to_string());
        put("latent_sample_count", self.latent_sample_count.to_string());
        put("batch_size", self.batch_size.to_string());
        put("max_epochs", self.max_epochs.to_string());
        put("checkpoint_interval", self.checkpoint_interval.to_string());
        put("penalty_weight", self.penalty_weight.to_string());
        put("seed", self.seed.to_string());
        put("runs", self.runs.to_string());
        put("parallel_runs", self.parallel_runs.to_string());
        put("estimate_samples", self.estimate_samples.to_string());
        put("scan_min", self.scan.min.to_string());
        put("scan_max", self.scan.max.to_string());
        put("scan_points", self.scan.points.to_string());
        put("diagonal_min", self.diagonal.min.to_string());
        put("diagonal_max", self.diagonal.max.to_string());
        put("diagonal_points", self.diagonal.points.to_string());
        put("diagnose_paths", self.diagnose_paths.to_string());
        put("diagnose_snapshots", self.diagnose_snapshots.to_string());
        put("ed_box", self.ed_box.to_string());
        put("ed_points", self.ed_points.to_string());
        put("ed_states", self.ed_states.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_as_fills_or_checks_kind() {
        let c = ExperimentConfig::parse_as("omega = 2\n", ExperimentKind::Scan).unwrap();
        assert_eq!(c.kind, ExperimentKind::Scan);
        assert_eq!(c.omega, 2.0);
        assert!(ExperimentConfig::parse_as("kind = train\n", ExperimentKind::Scan).is_err());
    }

    #[test]
    fn empty_file_needs_kind() {
        let e = ExperimentConfig::parse("# nothing here\n\n").unwrap_err();
        assert_eq!(e.to_string(), "config: missing key: kind");
    }

    #[test]
    fn defaults_and_overrides() {
        let c = ExperimentConfig::parse("kind = scan\nomega = 5 # stiffer\n").unwrap();
        assert_eq!(c.kind, ExperimentKind::Scan);
        assert_eq!(c.omega, 5.0);
        assert_eq!(c.runs, 10);
        assert_eq!(c.scan.values().len(), 9);
        assert_eq!(c.scan.values()[0], -2.0);
        assert_eq!(c.scan.values()[8], 2.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = ExperimentConfig::parse("kind = train\n\nhbar = -1\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }), "{e}");
        assert!(e.to_string().contains("hbar"));
        let e = ExperimentConfig::parse("kind = train\nwidth = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let e = ExperimentConfig::parse("kind = train\nn_tau = many\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let e = ExperimentConfig::parse("kind = train\nseed\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        let e = ExperimentConfig::parse("kind = dance\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
        assert!(ExperimentConfig::parse("kind = train\nposition_feedback = true\n").is_err());
        assert!(ExperimentConfig::parse("kind = train\nlatent_sample_count = 100\n").is_err());
    }

    #[test]
    fn render_round_trip() {
        let mut c = ExperimentConfig::with_kind(ExperimentKind::GroundState);
        c.omega = 0.1 + 0.2;
        c.x_end = -1.0 / 3.0;
        c.potential = PotentialKind::DoubleWell;
        assert_eq!(ExperimentConfig::parse(&c.render()).unwrap(), c);
    }

    proptest! {
        #[test]
        fn round_trip_any_values(
            omega in 1e-3f64..1e3,
            x_end in -10.0f64..10.0,
            lr in 1e-6f64..1.0,
            seed in any::<u64>(),
            runs in 2usize..50,
        ) {
            let mut c = ExperimentConfig::with_kind(ExperimentKind::Scan);
            c.omega = omega;
            c.x_end = x_end;
            c.learning_rate = lr;
            c.seed = seed;
            c.runs = runs;
            prop_assert_eq!(ExperimentConfig::parse(&c.render()).unwrap(), c);
        }
    }
}
