//! From trained generators to physics: free energy, propagator, trace
//! normalization, ground-state density, run-to-run error bars and the
//! log-probability/action scatter.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{minimal_action_path, LatticeSpec, PathBatch, Potential};
use crate::model::{LatentBatch, ModelParams};

/// Anything that can draw fixed-length paths together with their log-density.
pub trait PathGenerator {
    fn n_tau(&self) -> usize;

    /// Draws `n` paths with `log_q` populated.
    fn generate<R: Rng + ?Sized>(&self, lat: &LatticeSpec, n: usize, rng: &mut R) -> Result<PathBatch>;
}

const SAMPLE_CHUNK: usize = 1024;

impl PathGenerator for ModelParams {
    fn n_tau(&self) -> usize {
        ModelParams::n_tau(self)
    }

    fn generate<R: Rng + ?Sized>(&self, lat: &LatticeSpec, n: usize, rng: &mut R) -> Result<PathBatch> {
        let mut out: Option<PathBatch> = None;
        let mut left = n;
        while left > 0 {
            let m = left.min(SAMPLE_CHUNK);
            let z = LatentBatch::sample(m, rng);
            let b = self.sample_paths(&z, lat, rng)?;
            match &mut out {
                None => out = Some(b),
                Some(o) => o.extend(b)?,
            }
            left -= m;
        }
        out.ok_or_else(|| Error::InvalidArgument("cannot generate zero paths".into()))
    }
}

/// Monte Carlo estimate of the variational free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyEstimate {
    pub mean: f64,
    /// Ensemble standard deviation of `F`.
    pub std: f64,
    pub samples: usize,
}

impl FreeEnergyEstimate {
    pub fn sem(&self) -> f64 {
        self.std / (self.samples as f64).sqrt()
    }
}

/// Mean and sample standard deviation, centred on the first entry so that
/// identical values give exactly zero spread.
fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let v0 = v[0];
    let shift = v.iter().map(|x| x - v0).sum::<f64>() / n;
    let var = v.iter().map(|x| (x - v0 - shift).powi(2)).sum::<f64>() / (n - 1.0);
    (v0 + shift, var.sqrt())
}

pub fn free_energy_of_batch(batch: &mut PathBatch, lat: &LatticeSpec, pot: &Potential) -> Result<FreeEnergyEstimate> {
    let f = crate::train::batch_free_energy(batch, lat, pot)?;
    if f.len() < 2 {
        return Err(Error::Estimation("need at least 2 samples".into()));
    }
    let (mean, std) = mean_std(&f);
    Ok(FreeEnergyEstimate {
        mean,
        std,
        samples: f.len(),
    })
}

pub fn estimate_free_energy<G: PathGenerator, R: Rng + ?Sized>(
    model: &G,
    lat: &LatticeSpec,
    pot: &Potential,
    n_samples: usize,
    rng: &mut R,
) -> Result<FreeEnergyEstimate> {
    if n_samples < 2 {
        return Err(Error::Estimation(format!("n_samples must be >= 2, got {n_samples}")));
    }
    let mut batch = model.generate(lat, n_samples, rng)?;
    free_energy_of_batch(&mut batch, lat, pot)
}

/// `K_E = exp(-F/hbar)`, stored as its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorEstimate {
    pub log_value: f64,
    pub free_energy: f64,
    /// One-sigma uncertainty of `K_E` (zero for a single run).
    pub uncertainty: f64,
    pub x_start: f64,
    pub x_end: f64,
    pub total_time: f64,
    pub runs: usize,
}

/// Largest `|ln K|` for which `K` is representable without overflow.
pub const LOG_OVERFLOW: f64 = 700.0;

impl PropagatorEstimate {
    pub fn from_free_energy(free_energy: f64, lat: &LatticeSpec) -> Self {
        Self {
            log_value: -free_energy / lat.hbar(),
            free_energy,
            uncertainty: 0.0,
            x_start: lat.x_start(),
            x_end: lat.x_end(),
            total_time: lat.total_time(),
            runs: 1,
        }
    }

    /// `K_E`, or an error when it would overflow; use `log_value` then.
    pub fn value(&self) -> Result<f64> {
        if self.log_value > LOG_OVERFLOW {
            return Err(Error::Estimation(format!(
                "K_E overflows (ln K_E = {}); use the log value",
                self.log_value
            )));
        }
        Ok(self.log_value.exp())
    }
}

pub fn estimate_propagator<G: PathGenerator, R: Rng + ?Sized>(
    model: &G,
    lat: &LatticeSpec,
    pot: &Potential,
    n_samples: usize,
    rng: &mut R,
) -> Result<PropagatorEstimate> {
    let f = estimate_free_energy(model, lat, pot, n_samples, rng)?;
    Ok(PropagatorEstimate::from_free_energy(f.mean, lat))
}

/// Aggregate of `N_r` independent runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBars {
    /// `exp(-mean(F)/hbar)`.
    pub value: f64,
    pub log_value: f64,
    pub free_energy_mean: f64,
    /// Sample standard deviation of `F` across runs.
    pub free_energy_std: f64,
    /// `K delta_F / (hbar sqrt(N_r))`.
    pub uncertainty: f64,
    pub runs: usize,
}

impl ErrorBars {
    /// Plotted bar half-width, two standard deviations.
    pub fn two_sigma(&self) -> f64 {
        2.0 * self.uncertainty
    }
}

pub fn error_bars(free_energies: &[f64], hbar: f64) -> Result<ErrorBars> {
    let n = free_energies.len();
    if n < 2 {
        return Err(Error::Estimation(format!("error bars need N_r >= 2 runs, got {n}")));
    }
    if free_energies.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite("per-run free energy".into()));
    }
    let (mean, std) = mean_std(free_energies);
    let log_value = -mean / hbar;
    let value = log_value.exp();
    Ok(ErrorBars {
        value,
        log_value,
        free_energy_mean: mean,
        free_energy_std: std,
        uncertainty: value * std / (hbar * (n as f64).sqrt()),
        runs: n,
    })
}

/// Natural cubic spline through `(x_k, y_k)` on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InvalidArgument(format!("spline needs >= 3 matching knots, got {n}/{}", y.len())));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("spline knots must be strictly increasing".into()));
        }
        // Tridiagonal system for interior second derivatives.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Simpson subintervals per knot interval when integrating the spline.
const SIMPSON_REFINE: usize = 8;

/// `integral` of the natural cubic spline through the samples, by composite
/// Simpson's rule on a refinement of the (uniform) knot grid.
pub fn spline_integral(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() < 5 {
        return Err(Error::Estimation(format!(
            "trace integration needs at least 5 grid points, got {}",
            x.len()
        )));
    }
    let h0 = x[1] - x[0];
    if x.windows(2).any(|w| ((w[1] - w[0]) - h0).abs() > 1e-9 * h0.abs().max(1.0)) {
        return Err(Error::Estimation("trace integration needs a uniform grid".into()));
    }
    let spline = CubicSpline::natural(x, y)?;
    let n = (x.len() - 1) * SIMPSON_REFINE;
    let (a, b) = (x[0], x[x.len() - 1]);
    let h = (b - a) / n as f64;
    let mut s = spline.eval(a) + spline.eval(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * spline.eval(a + k as f64 * h);
    }
    Ok(s * h / 3.0)
}

/// `tr K = integral K(x, T; x, 0) dx` from a diagonal scan.
pub fn propagator_trace(diag_x: &[f64], diag_k: &[f64]) -> Result<f64> {
    if diag_k.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(Error::Estimation("diagonal kernel values must be finite and >= 0".into()));
    }
    let tr = spline_integral(diag_x, diag_k)?;
    if !(tr > 0.0) {
        return Err(Error::Estimation(format!("non-positive trace {tr}")));
    }
    Ok(tr)
}

/// Divides raw kernel values by the trace of the diagonal scan.
pub fn trace_normalize(raw: &[f64], diag_x: &[f64], diag_k: &[f64]) -> Result<Vec<f64>> {
    let tr = propagator_trace(diag_x, diag_k)?;
    Ok(raw.iter().map(|k| k / tr).collect())
}

/// Same as [`trace_normalize`] but for log-kernels, shifting by the largest
/// diagonal log value before exponentiating.
pub fn trace_normalize_log(log_raw: &[f64], diag_x: &[f64], diag_log_k: &[f64]) -> Result<Vec<f64>> {
    let shift = diag_log_k.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let diag: Vec<f64> = diag_log_k.iter().map(|l| (l - shift).exp()).collect();
    let tr = propagator_trace(diag_x, &diag)?;
    Ok(log_raw.iter().map(|l| (l - shift).exp() / tr).collect())
}

/// `|psi_0(x)|^2 ~ K(x,T;x,0) / integral K(x,T;x,0) dx` on the scan grid.
///
/// Only meaningful when `T >> hbar / (E_1 - E_0)`; the caller decides.
pub fn ground_state_density(diag_x: &[f64], diag_k: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = diag_k.iter().position(|k| *k < 0.0) {
        return Err(Error::Estimation(format!(
            "negative kernel value {} at x = {}",
            diag_k[i], diag_x[i]
        )));
    }
    trace_normalize(diag_k, diag_x, diag_k)
}

/// Gaussian `A exp(-(x - mu)^2 / (2 var))` fitted to positive samples by
/// weighted least squares on `ln y` with weights `y^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn gaussian_fit(x: &[f64], y: &[f64]) -> Result<GaussianFit> {
    if x.len() < 3 || y.len() != x.len() {
        return Err(Error::Estimation("Gaussian fit needs >= 3 matching points".into()));
    }
    // Normal equations for ln y = c0 + c1 x + c2 x^2.
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        if !(yi > 0.0) {
            continue;
        }
        let w = yi * yi;
        let basis = [1.0, xi, xi * xi];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] += w * basis[r] * basis[c];
            }
            rhs[r] += w * basis[r] * yi.ln();
        }
    }
    let c = solve3(a, rhs).ok_or_else(|| Error::Estimation("singular Gaussian fit".into()))?;
    if !(c[2] < 0.0) {
        return Err(Error::Estimation("fitted curvature is not concave".into()));
    }
    let variance = -1.0 / (2.0 * c[2]);
    let mean = c[1] * variance;
    Ok(GaussianFit {
        amplitude: (c[0] + mean * mean / (2.0 * variance)).exp(),
        mean,
        variance,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Positions of local maxima of a sampled curve, refined by a parabola
/// through the three neighbouring samples.
pub fn local_maxima(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
            let denom = y0 - 2.0 * y1 + y2;
            let h = x[i + 1] - x[i];
            let off = if denom != 0.0 { 0.5 * (y0 - y2) / denom } else { 0.0 };
            out.push(x[i] + off.clamp(-1.0, 1.0) * h);
        }
    }
    out
}

/// One generated path in the log-probability/action plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    /// `(S - S_min) / hbar`
    pub action_shift: f64,
    /// `ln q + b` with `b = (S_min - F_mean) / hbar`
    pub log_q_shift: f64,
    /// `|F - F_mean|`
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterDiagnostic {
    pub action_min: f64,
    pub free_energy: f64,
    pub points: Vec<ScatterPoint>,
}

impl ScatterDiagnostic {
    /// Builds the diagnostic from a batch with `log_q` populated. `s_min` is
    /// lowered to the smallest action in the batch if needed.
    pub fn from_batch(batch: &mut PathBatch, lat: &LatticeSpec, pot: &Potential, s_min: f64) -> Result<Self> {
        let f = crate::train::batch_free_energy(batch, lat, pot)?;
        let action = batch.action.as_ref().expect("filled by batch_free_energy");
        let log_q = batch.log_q.as_ref().expect("checked by batch_free_energy");
        let hbar = lat.hbar();
        let s_min = action.iter().fold(s_min, |a, &b| a.min(b));
        let f_mean = f.iter().sum::<f64>() / f.len() as f64;
        let b = (s_min - f_mean) / hbar;
        let points = action
            .iter()
            .zip(log_q)
            .zip(&f)
            .map(|((s, l), fv)| ScatterPoint {
                action_shift: (s - s_min) / hbar,
                log_q_shift: l + b,
                distance: (fv - f_mean).abs(),
            })
            .collect();
        Ok(Self {
            action_min: s_min,
            free_energy: f_mean,
            points,
        })
    }

    pub fn median_distance(&self) -> f64 {
        let mut d: Vec<f64> = self.points.iter().map(|p| p.distance).collect();
        d.sort_by(f64::total_cmp);
        let n = d.len();
        if n == 0 {
            return f64::NAN;
        }
        if n % 2 == 1 {
            d[n / 2]
        } else {
            0.5 * (d[n / 2 - 1] + d[n / 2])
        }
    }

    /// Standard error of `median_distance` from the order statistics at
    /// ranks `n/2 ± sqrt(n)/2`, which bracket the median by one binomial sd.
    pub fn median_distance_sem(&self) -> f64 {
        let mut d: Vec<f64> = self.points.iter().map(|p| p.distance).collect();
        d.sort_by(f64::total_cmp);
        let n = d.len();
        if n < 4 {
            return f64::NAN;
        }
        let half = ((n as f64).sqrt() / 2.0).ceil() as usize;
        let lo = (n / 2).saturating_sub(half);
        let hi = (n / 2 + half).min(n - 1);
        0.5 * (d[hi] - d[lo])
    }

    pub fn mean_distance(&self) -> f64 {
        self.points.iter().map(|p| p.distance).sum::<f64>() / self.points.len() as f64
    }
}

pub fn scatter_diagnostic<G: PathGenerator, R: Rng + ?Sized>(
    model: &G,
    lat: &LatticeSpec,
    pot: &Potential,
    n_paths: usize,
    rng: &mut R,
) -> Result<ScatterDiagnostic> {
    let x_cl = minimal_action_path(lat, pot, 1e-10)?;
    let s_cl = crate::lattice::euclidean_action(&x_cl, lat, pot)?;
    let mut batch = model.generate(lat, n_paths, rng)?;
    ScatterDiagnostic::from_batch(&mut batch, lat, pot, s_cl)
}

/// Mean over paths and stamps of `(x_k - x_cl,k)^2`.
pub fn mean_squared_deviation(batch: &PathBatch, reference: &[f64]) -> Result<f64> {
    if reference.len() != batch.n_tau() {
        return Err(Error::LengthMismatch {
            expected: batch.n_tau(),
            got: reference.len(),
        });
    }
    let total: f64 = batch
        .rows()
        .map(|p| p.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
        .sum();
    Ok(total / (batch.len() * batch.n_tau()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> LatticeSpec {
        LatticeSpec::new(8, 0.5, 0.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn propagator_examples() {
        let p = PropagatorEstimate::from_free_energy(0.0, &lat());
        assert_eq!(p.value().unwrap(), 1.0);
        let p = PropagatorEstimate::from_free_energy(1.0, &lat());
        assert!((p.value().unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        let p = PropagatorEstimate::from_free_energy(-800.0, &lat());
        assert!(p.value().is_err());
        assert_eq!(p.log_value, 800.0);
    }

    #[test]
    fn median_sem_of_uniform_distances() {
        // Uniform(0,1): asymptotic sem of the median is 1 / (2 sqrt n)
        let n = 10_000;
        let points = (0..n)
            .map(|i| ScatterPoint { action_shift: 0.0, log_q_shift: 0.0, distance: (i as f64 + 0.5) / n as f64 })
            .collect();
        let sc = ScatterDiagnostic { action_min: 0.0, free_energy: 0.0, points };
        assert!((sc.median_distance() - 0.5).abs() < 1e-12);
        assert!((sc.median_distance_sem() - 0.005).abs() < 1e-4);
    }

    #[test]
    fn error_bar_examples() {
        let e = error_bars(&[0.3; 10], 1.0).unwrap();
        assert_eq!(e.uncertainty, 0.0);
        assert!(error_bars(&[1.0], 1.0).is_err());
        // K = 0.5, delta F = 0.1, N_r = 10
        let k = 0.5f64;
        let f0 = -k.ln();
        // alternating +-a has sample std a * sqrt(10/9)
        let a = 0.1 * (0.9f64).sqrt();
        let fs: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { f0 + a } else { f0 - a }).collect();
        let e = error_bars(&fs, 1.0).unwrap();
        assert!((e.free_energy_std - 0.1).abs() < 1e-12);
        assert!((e.value - 0.5).abs() < 1e-12);
        assert!((e.uncertainty - 0.015_811_388_300_841_9).abs() < 1e-12);
        let fs4: Vec<f64> = fs.iter().cycle().take(40).copied().collect();
        let e4 = error_bars(&fs4, 1.0).unwrap();
        assert!((e4.uncertainty / e4.free_energy_std * e.free_energy_std - e.uncertainty / 2.0).abs() < 1e-12);
    }

    #[test]
    fn spline_reproduces_cubics_integral() {
        // natural spline is exact for linear data; Simpson exact for cubics
        let x: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        assert!((spline_integral(&x, &y).unwrap() - 4.0).abs() < 1e-12);
        let s = CubicSpline::natural(&x, &y).unwrap();
        assert!((s.eval(0.3) - 1.9).abs() < 1e-12);
        assert!(spline_integral(&x[..4], &y[..4]).is_err());
    }

    #[test]
    fn spline_integral_of_gaussian_converges() {
        let exact = std::f64::consts::PI.sqrt();
        let mut last = f64::INFINITY;
        for n in [17, 33, 65] {
            let x: Vec<f64> = (0..n).map(|i| -6.0 + 12.0 * i as f64 / (n - 1) as f64).collect();
            let y: Vec<f64> = x.iter().map(|v| (-v * v).exp()).collect();
            let err = (spline_integral(&x, &y).unwrap() - exact).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn uniform_kernel_normalizes_to_inverse_width() {
        let x: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
        let k = vec![3.7; 9];
        let n = trace_normalize(&k, &x, &k).unwrap();
        assert!(n.iter().all(|v| (v - 0.25).abs() < 1e-12));
        let rho = ground_state_density(&x, &k).unwrap();
        assert!(rho.iter().all(|v| (v - 0.25).abs() < 1e-12));
        let neg: Vec<f64> = (0..9).map(|i| if i == 4 { -1.0 } else { 1.0 }).collect();
        assert!(ground_state_density(&x, &neg).is_err());
    }

    #[test]
    fn log_normalization_matches_linear() {
        let x: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
        let k: Vec<f64> = x.iter().map(|v| (-(v * v)).exp() * 1e-3).collect();
        let lk: Vec<f64> = k.iter().map(|v| v.ln()).collect();
        let a = trace_normalize(&k, &x, &k).unwrap();
        let b = trace_normalize_log(&lk, &x, &lk).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_fit_recovers_parameters() {
        let x: Vec<f64> = (0..21).map(|i| -1.5 + 0.15 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * (-(v - 0.2f64).powi(2) / 0.2).exp()).collect();
        let g = gaussian_fit(&x, &y).unwrap();
        assert!((g.variance - 0.1).abs() < 1e-10);
        assert!((g.mean - 0.2).abs() < 1e-10);
        assert!((g.amplitude - 2.0).abs() < 1e-9);
    }

    #[test]
    fn maxima_of_bimodal_curve() {
        let x: Vec<f64> = (0..41).map(|i| -5.0 + 0.25 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (-(v - 3.1f64).powi(2)).exp() + (-(v + 3.1f64).powi(2)).exp()).collect();
        let m = local_maxima(&x, &y);
        assert_eq!(m.len(), 2);
        assert!((m[0] + 3.1).abs() < 0.05 && (m[1] - 3.1).abs() < 0.05);
    }
}
