//! Imaginary-time lattice, potentials and the discretized Euclidean action.
//!
//! A path is a sequence of `n_tau` real positions at times
//! `tau_k = k * delta_tau`, `delta_tau = T / (n_tau - 1)`. The action uses a
//! forward-difference kinetic term over the `n_tau - 1` links plus a
//! trapezoidal potential term:
//!
//! ```text
//! S_E = sum_k m (x_{k+1} - x_k)^2 / (2 dtau) + dtau * [V_0/2 + V_1 + ... + V_{N-1}/2]
//! ```
//!
//! Summation runs left to right so results are reproducible bit for bit.

use crate::error::{Error, Result};

/// Time discretization, fixed endpoints and physical constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    n_tau: usize,
    total_time: f64,
    x_start: f64,
    x_end: f64,
    hbar: f64,
    mass: f64,
}

impl LatticeSpec {
    pub fn new(
        n_tau: usize,
        total_time: f64,
        x_start: f64,
        x_end: f64,
        hbar: f64,
        mass: f64,
    ) -> Result<Self> {
        if n_tau < 3 {
            return Err(Error::InvalidLattice(format!("n_tau must be >= 3, got {n_tau}")));
        }
        for (name, v) in [("total_time", total_time), ("hbar", hbar), ("mass", mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidLattice(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !x_start.is_finite() || !x_end.is_finite() {
            return Err(Error::InvalidLattice("endpoints must be finite".into()));
        }
        Ok(Self {
            n_tau,
            total_time,
            x_start,
            x_end,
            hbar,
            mass,
        })
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn delta_tau(&self) -> f64 {
        self.total_time / (self.n_tau - 1) as f64
    }

    /// Same lattice with different endpoints.
    pub fn with_endpoints(&self, x_start: f64, x_end: f64) -> Result<Self> {
        Self::new(self.n_tau, self.total_time, x_start, x_end, self.hbar, self.mass)
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Self::new(self.n_tau, self.total_time, self.x_start, self.x_end, hbar, self.mass)
    }

    /// Straight line between the endpoints.
    pub fn linear_path(&self) -> Vec<f64> {
        let last = (self.n_tau - 1) as f64;
        (0..self.n_tau)
            .map(|k| self.x_start + (self.x_end - self.x_start) * k as f64 / last)
            .collect()
    }
}

/// One-dimensional potential energy.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `V = 0`.
    Free,
    /// `V = m omega^2 x^2 / 2`.
    Harmonic { mass: f64, omega: f64 },
    /// `V = alpha x^4 + beta x^2`.
    DoubleWell { alpha: f64, beta: f64 },
    /// `V = sum_n c_n x^n`, coefficients ascending by power.
    Polynomial(Vec<f64>),
}

impl Potential {
    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0 && mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "harmonic needs omega > 0 and mass > 0, got omega={omega}, mass={mass}"
            )));
        }
        Ok(Potential::Harmonic { mass, omega })
    }

    pub fn double_well(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "double well needs alpha > 0, got alpha={alpha}"
            )));
        }
        Ok(Potential::DoubleWell { alpha, beta })
    }

    /// Polynomial potential; the highest nonzero power must be even with a
    /// positive coefficient.
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("non-finite coefficient".into()));
        }
        let top = coefficients.iter().rposition(|&c| c != 0.0);
        match top {
            Some(p) if p > 0 && p % 2 == 0 && coefficients[p] > 0.0 => {
                let mut c = coefficients;
                c.truncate(p + 1);
                Ok(Potential::Polynomial(c))
            }
            _ => Err(Error::InvalidPotential(
                "polynomial is not confining: leading power must be even with positive coefficient".into(),
            )),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Harmonic { mass, omega } => 0.5 * mass * omega * omega * x * x,
            Potential::DoubleWell { alpha, beta } => {
                let x2 = x * x;
                alpha * x2 * x2 + beta * x2
            }
            Potential::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &cn| acc * x + cn),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Harmonic { mass, omega } => mass * omega * omega * x,
            Potential::DoubleWell { alpha, beta } => 4.0 * alpha * x * x * x + 2.0 * beta * x,
            Potential::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (n, &cn)| acc * x + n as f64 * cn),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Harmonic { mass, omega } => mass * omega * omega,
            Potential::DoubleWell { alpha, beta } => 12.0 * alpha * x * x + 2.0 * beta,
            Potential::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (n, &cn)| acc * x + (n * (n - 1)) as f64 * cn),
        }
    }

    /// Lower bound of `V` over the real line, used for sanity bounds on the action.
    pub fn minimum_value(&self) -> f64 {
        match self {
            Potential::Free | Potential::Harmonic { .. } => 0.0,
            Potential::DoubleWell { alpha, beta } => {
                if *beta < 0.0 {
                    -beta * beta / (4.0 * alpha)
                } else {
                    0.0
                }
            }
            Potential::Polynomial(_) => {
                // dense scan over [-20, 20]; only used as a sanity bound
                let mut best = f64::INFINITY;
                for i in -20_000..=20_000 {
                    let x = i as f64 * 1e-3;
                    best = best.min(self.value(x));
                }
                best
            }
        }
    }
}

/// `V(x)`; rejects non-finite positions.
pub fn potential_value(pot: &Potential, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("potential argument".into()));
    }
    Ok(pot.value(x))
}

/// Discretized Euclidean action of a single path.
pub fn euclidean_action(path: &[f64], lat: &LatticeSpec, pot: &Potential) -> Result<f64> {
    if path.len() != lat.n_tau {
        return Err(Error::LengthMismatch {
            expected: lat.n_tau,
            got: path.len(),
        });
    }
    if path.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("path".into()));
    }
    Ok(action_unchecked(path, lat, pot))
}

pub(crate) fn action_unchecked(path: &[f64], lat: &LatticeSpec, pot: &Potential) -> f64 {
    let dt = lat.delta_tau();
    let kin_scale = 0.5 * lat.mass / dt;
    let mut kinetic = 0.0;
    for w in path.windows(2) {
        let d = w[1] - w[0];
        kinetic += d * d;
    }
    let n = path.len();
    let mut potential = 0.5 * pot.value(path[0]);
    for &x in &path[1..n - 1] {
        potential += pot.value(x);
    }
    potential += 0.5 * pot.value(path[n - 1]);
    kin_scale * kinetic + dt * potential
}

/// `-S_E / hbar`, the log of the unnormalized target path density.
pub fn target_log_density_unnormalized(path: &[f64], lat: &LatticeSpec, pot: &Potential) -> Result<f64> {
    Ok(-euclidean_action(path, lat, pot)? / lat.hbar)
}

/// Gradient of the action with respect to the interior positions; the
/// endpoint entries are zero.
pub fn action_gradient(path: &[f64], lat: &LatticeSpec, pot: &Potential) -> Vec<f64> {
    let dt = lat.delta_tau();
    let k = lat.mass / dt;
    let n = path.len();
    let mut g = vec![0.0; n];
    for i in 1..n - 1 {
        g[i] = k * (2.0 * path[i] - path[i - 1] - path[i + 1]) + dt * pot.derivative(path[i]);
    }
    g
}

const MAX_NEWTON_ITERATIONS: usize = 500;

/// Fixed-endpoint stationary path of the discretized action, found by damped
/// Newton iteration from the linear interpolant. The interior Hessian is
/// tridiagonal; where it is not positive definite a diagonal shift is added
/// (Levenberg style) until the step decreases the action.
///
/// Stops when the sup-norm of the interior gradient is at most `tolerance`.
pub fn minimal_action_path(lat: &LatticeSpec, pot: &Potential, tolerance: f64) -> Result<Vec<f64>> {
    let n = lat.n_tau();
    let dt = lat.delta_tau();
    let k = lat.mass / dt;
    let mut x = lat.linear_path();
    let mut s = action_unchecked(&x, lat, pot);
    let mut shift = 0.0f64;
    let mut trial = x.clone();
    let mut gnorm = f64::INFINITY;
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let g = action_gradient(&x, lat, pot);
        gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm <= tolerance {
            return Ok(x);
        }
        let diag: Vec<f64> = (1..n - 1).map(|i| 2.0 * k + dt * pot.second_derivative(x[i])).collect();
        loop {
            let step = diag
                .iter()
                .map(|d| d + shift)
                .collect::<Vec<_>>();
            let dx = solve_tridiagonal_spd(&step, -k, &g[1..n - 1]);
            if let Some(dx) = dx {
                for i in 1..n - 1 {
                    trial[i] = x[i] - dx[i - 1];
                }
                let s_trial = action_unchecked(&trial, lat, pot);
                if s_trial <= s || (s_trial - s).abs() <= 1e-14 * s.abs().max(1.0) {
                    std::mem::swap(&mut x, &mut trial);
                    s = s_trial;
                    shift *= 0.1;
                    if shift < 1e-12 * k {
                        shift = 0.0;
                    }
                    break;
                }
            }
            shift = if shift == 0.0 { 1e-3 * k } else { shift * 10.0 };
            if shift > 1e20 * k {
                return Err(Error::NoConvergence {
                    iterations: 0,
                    grad_norm: gnorm,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_NEWTON_ITERATIONS,
        grad_norm: gnorm,
    })
}

/// Solves `A y = r` for symmetric tridiagonal `A` with diagonal `diag` and
/// constant off-diagonal `off`. Returns `None` if a pivot is not positive.
fn solve_tridiagonal_spd(diag: &[f64], off: f64, r: &[f64]) -> Option<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut piv = diag[0];
    if !(piv > 0.0) {
        return None;
    }
    c[0] = off / piv;
    y[0] = r[0] / piv;
    for i in 1..m {
        piv = diag[i] - off * c[i - 1];
        if !(piv > 0.0) {
            return None;
        }
        c[i] = off / piv;
        y[i] = (r[i] - off * y[i - 1]) / piv;
    }
    for i in (0..m - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    Some(y)
}

/// A batch of discretized paths, stored row-major (`batch_size x n_tau`).
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    n_tau: usize,
    positions: Vec<f64>,
    pub action: Option<Vec<f64>>,
    pub log_q: Option<Vec<f64>>,
}

impl PathBatch {
    pub fn new(n_tau: usize, positions: Vec<f64>) -> Result<Self> {
        if n_tau == 0 || positions.len() % n_tau != 0 {
            return Err(Error::Shape {
                op: "PathBatch::new",
                detail: format!("{} positions not divisible by n_tau={n_tau}", positions.len()),
            });
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("path batch".into()));
        }
        Ok(Self {
            n_tau,
            positions,
            action: None,
            log_q: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_tau = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_tau) {
            return Err(Error::Shape {
                op: "PathBatch::from_rows",
                detail: "ragged rows".into(),
            });
        }
        Self::new(n_tau, rows.concat())
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.n_tau
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.positions[i * self.n_tau..(i + 1) * self.n_tau]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.n_tau)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Evaluates and stores the action of every row.
    pub fn compute_action(&mut self, lat: &LatticeSpec, pot: &Potential) -> Result<&[f64]> {
        if self.n_tau != lat.n_tau() {
            return Err(Error::LengthMismatch {
                expected: lat.n_tau(),
                got: self.n_tau,
            });
        }
        let a: Vec<f64> = self.rows().map(|r| action_unchecked(r, lat, pot)).collect();
        self.action = Some(a);
        Ok(self.action.as_deref().unwrap())
    }

    /// Appends the rows of `other`; per-row fields are kept only when both
    /// batches carry them.
    pub fn extend(&mut self, other: PathBatch) -> Result<()> {
        if self.is_empty() && self.action.is_none() && self.log_q.is_none() {
            *self = other;
            return Ok(());
        }
        if other.n_tau != self.n_tau {
            return Err(Error::LengthMismatch {
                expected: self.n_tau,
                got: other.n_tau,
            });
        }
        self.positions.extend(other.positions);
        self.action = match (self.action.take(), other.action) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            _ => None,
        };
        self.log_q = match (self.log_q.take(), other.log_q) {
            (Some(mut a), Some(b)) => {
                a.extend(b);
                Some(a)
            }
            _ => None,
        };
        Ok(())
    }
}
