//! Exact diagonalization of the 1-D Hamiltonian on a finite-difference grid
//! with hard walls, and the truncated spectral kernel built from it.

use super::potential_at;
use crate::error::{Error, Result};
use crate::lattice::Potential;

/// Uniform interior grid `x_j = x_min + (j + 1) dx`, `j = 0..n_points`,
/// with `dx = (x_max - x_min) / (n_points + 1)`; `psi` vanishes at the walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_max > x_min) || n_points < 64 {
            return Err(Error::InvalidArgument(format!(
                "ED grid needs x_max > x_min and >= 64 points (got [{x_min}, {x_max}], {n_points})"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points + 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.x_min + (j + 1) as f64 * self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub grid: Grid,
    /// Ascending.
    pub energies: Vec<f64>,
    /// `vectors[n][j] = psi_n(x_j)`, normalized so `sum_j psi^2 dx = 1`,
    /// sign fixed so the first entry above `1e-3 max|psi|` is positive.
    pub vectors: Vec<Vec<f64>>,
    pub hbar: f64,
}

/// Amplitude (relative to the peak) allowed at the outermost grid nodes.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

/// Lowest `n_states` eigenpairs of `-hbar^2/(2m) d^2/dx^2 + V` with the
/// three-point Laplacian. Eigenvalues by Sturm-sequence bisection, vectors
/// by inverse iteration.
pub fn exact_diagonalization(pot: &Potential, grid: Grid, m: f64, hbar: f64, n_states: usize) -> Result<SpectralResult> {
    if !(m > 0.0) || !(hbar > 0.0) {
        return Err(Error::InvalidArgument("ED needs m, hbar > 0".into()));
    }
    if n_states == 0 || n_states > grid.n_points {
        return Err(Error::InvalidArgument(format!(
            "n_states must be in 1..={}, got {n_states}",
            grid.n_points
        )));
    }
    let n = grid.n_points;
    let dx = grid.spacing();
    let kin = hbar * hbar / (2.0 * m * dx * dx);
    let diag: Vec<f64> = (0..n).map(|j| 2.0 * kin + potential_at(pot, grid.node(j))).collect();
    let off = -kin;

    // Gershgorin bounds.
    let lo = diag.iter().fold(f64::INFINITY, |a, &d| a.min(d)) - 2.0 * kin;
    let hi = diag.iter().fold(f64::NEG_INFINITY, |a, &d| a.max(d)) + 2.0 * kin;

    let mut energies = Vec::with_capacity(n_states);
    for k in 0..n_states {
        energies.push(bisect_eigenvalue(&diag, off, k, lo, hi));
    }

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n_states);
    for (k, &e) in energies.iter().enumerate() {
        let mut v = inverse_iteration(&diag, off, e, k as u64);
        // Re-orthogonalize against close neighbours (near-degenerate doublets).
        for (prev_e, prev) in energies[..k].iter().zip(&vectors) {
            if (e - prev_e).abs() < 1e-6 * (1.0 + e.abs()) {
                let d: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() * dx;
                for (a, b) in v.iter_mut().zip(prev) {
                    *a -= d * b;
                }
            }
        }
        let norm = (v.iter().map(|a| a * a).sum::<f64>() * dx).sqrt();
        for a in v.iter_mut() {
            *a /= norm;
        }
        let peak = v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if let Some(first) = v.iter().find(|a| a.abs() > 1e-3 * peak) {
            if *first < 0.0 {
                for a in v.iter_mut() {
                    *a = -*a;
                }
            }
        }
        let edge = v[0].abs().max(v[n - 1].abs());
        if edge > BOUNDARY_TOLERANCE * peak {
            return Err(Error::BoundaryDecay {
                state: k,
                amplitude: edge / peak,
            });
        }
        vectors.push(v);
    }
    Ok(SpectralResult {
        grid,
        energies,
        vectors,
        hbar,
    })
}

/// Number of eigenvalues strictly below `x` (Sturm sequence of `T - x`).
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let off2 = off * off;
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for &d in &diag[1..] {
        let prev = if q == 0.0 { f64::EPSILON * (off.abs() + 1.0) } else { q };
        q = d - x - off2 / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(diag: &[f64], off: f64, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    // Invariant: count(lo) <= k < count(hi).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift) y = b` for symmetric tridiagonal `T` with Gaussian
/// elimination and partial pivoting.
fn solve_shifted(diag: &[f64], off: f64, shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // Rows after elimination have up to two super-diagonals (pivoting).
    let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
    let mut u1 = vec![off; n];
    let mut u2 = vec![0.0; n];
    let mut l = vec![off; n];
    let mut rhs = b.to_vec();
    for i in 0..n - 1 {
        if l[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let (di, u1i, u2i, ri) = (d[i], u1[i], u2[i], rhs[i]);
            d[i] = l[i];
            u1[i] = d[i + 1];
            u2[i] = if i + 1 < n - 1 { u1[i + 1] } else { 0.0 };
            rhs[i] = rhs[i + 1];
            l[i] = di;
            d[i + 1] = u1i;
            u1[i + 1] = u2i;
            rhs[i + 1] = ri;
        }
        let piv = if d[i] == 0.0 { f64::EPSILON } else { d[i] };
        let f = l[i] / piv;
        d[i + 1] -= f * u1[i];
        if i + 1 < n - 1 {
            u1[i + 1] -= f * u2[i];
        }
        rhs[i + 1] -= f * rhs[i];
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * y[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * y[i + 2];
        }
        let piv = if d[i] == 0.0 { f64::EPSILON } else { d[i] };
        y[i] = s / piv;
    }
    y
}

fn inverse_iteration(diag: &[f64], off: f64, e: f64, salt: u64) -> Vec<f64> {
    let n = diag.len();
    // Deterministic pseudo-random start vector.
    let mut state = 0x2545_F491_4F6C_DD1Du64 ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    for _ in 0..4 {
        let y = solve_shifted(diag, off, e, &v);
        let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        v = y.into_iter().map(|a| a / norm).collect();
    }
    v
}

impl SpectralResult {
    /// `psi_n(x)` by 4-point Lagrange interpolation on the grid; zero
    /// outside the walls.
    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        let g = self.grid;
        let dx = g.spacing();
        let v = &self.vectors[n];
        let at = |j: isize| -> f64 {
            if j < 0 || j as usize >= g.n_points {
                0.0
            } else {
                v[j as usize]
            }
        };
        // fractional index relative to node 0 (node -1 is the left wall)
        let s = (x - g.x_min) / dx - 1.0;
        if s <= -1.0 || s >= g.n_points as f64 {
            return 0.0;
        }
        let j0 = s.floor() as isize;
        let t = s - j0 as f64;
        let (p0, p1, p2, p3) = (at(j0 - 1), at(j0), at(j0 + 1), at(j0 + 2));
        // Lagrange basis on nodes -1, 0, 1, 2 evaluated at t.
        -t * (t - 1.0) * (t - 2.0) / 6.0 * p0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * p1
            - (t + 1.0) * t * (t - 2.0) / 2.0 * p2
            + (t + 1.0) * t * (t - 1.0) / 6.0 * p3
    }

    pub fn n_states(&self) -> usize {
        self.energies.len()
    }

    /// `ln Z_box = ln sum_n exp(-T E_n / hbar)` over the computed states.
    pub fn log_partition(&self, t: f64) -> f64 {
        let e0 = self.energies[0];
        -t * e0 / self.hbar + self.energies.iter().map(|e| (-t * (e - e0) / self.hbar).exp()).sum::<f64>().ln()
    }
}

/// Truncated spectral sum and its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralKernel {
    pub value: f64,
    /// `exp(-T E_{n_terms} / hbar) * max|psi|^2` over the retained states,
    /// `+inf` when no further eigenvalue is available to bound the tail.
    pub truncation_bound: f64,
}

pub fn spectral_kernel(spec: &SpectralResult, x_i: f64, x_f: f64, t: f64, n_terms: usize) -> Result<SpectralKernel> {
    if n_terms == 0 || n_terms > spec.n_states() {
        return Err(Error::InvalidArgument(format!(
            "n_terms {n_terms} exceeds the {} available eigenpairs",
            spec.n_states()
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("T must be > 0, got {t}")));
    }
    let hbar = spec.hbar;
    let mut value = 0.0;
    let mut max_psi2 = 0.0f64;
    for n in 0..n_terms {
        value += (-t * spec.energies[n] / hbar).exp() * spec.eigenfunction(n, x_i) * spec.eigenfunction(n, x_f);
        let peak = spec.vectors[n].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        max_psi2 = max_psi2.max(peak * peak);
    }
    let truncation_bound = if n_terms < spec.n_states() {
        (-t * spec.energies[n_terms] / hbar).exp() * max_psi2
    } else {
        f64::INFINITY
    };
    Ok(SpectralKernel { value, truncation_bound })
}

/// Richardson extrapolation `(4 K_fine - K_coarse) / 3` of two spectral
/// kernels whose grid spacings differ by exactly a factor of two, removing
/// the leading `O(dx^2)` error of the three-point Laplacian.
pub fn richardson_spectral_kernel(
    coarse: &SpectralResult,
    fine: &SpectralResult,
    x_i: f64,
    x_f: f64,
    t: f64,
    n_terms: usize,
) -> Result<SpectralKernel> {
    let ratio = coarse.grid.spacing() / fine.grid.spacing();
    if (ratio - 2.0).abs() > 1e-9 || coarse.hbar != fine.hbar {
        return Err(Error::InvalidArgument(format!(
            "Richardson needs fine spacing = coarse / 2 and equal hbar (ratio {ratio})"
        )));
    }
    let a = spectral_kernel(coarse, x_i, x_f, t, n_terms)?;
    let b = spectral_kernel(fine, x_i, x_f, t, n_terms)?;
    Ok(SpectralKernel {
        value: (4.0 * b.value - a.value) / 3.0,
        truncation_bound: a.truncation_bound.max(b.truncation_bound),
    })
}

impl Grid {
    /// Same box, half the spacing.
    pub fn refined(&self) -> Grid {
        Grid {
            n_points: 2 * self.n_points + 1,
            ..*self
        }
    }
}


#[cfg(test)]
mod fine_grid {
    use super::*;
    use crate::oracles::ho_exact_kernel;

    #[test]
    fn extrapolated_kernel_matches_mehler() {
        let pot = Potential::harmonic(1.0, 1.0).unwrap();
        let grid = Grid::new(-15.0, 15.0, 7_499).unwrap();
        let coarse = exact_diagonalization(&pot, grid, 1.0, 1.0, 61).unwrap();
        let fine = exact_diagonalization(&pot, grid.refined(), 1.0, 1.0, 61).unwrap();
        for xf in [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
            let s = richardson_spectral_kernel(&coarse, &fine, 0.0, xf, 0.5, 60).unwrap();
            let e = ho_exact_kernel(0.0, xf, 0.5, 1.0, 1.0, 1.0).unwrap();
            assert!((s.value - e).abs() < 1e-7, "x_f={xf}: {} vs {e}", s.value);
            assert!(s.truncation_bound < 1e-10);
        }
        assert!(richardson_spectral_kernel(&coarse, &coarse, 0.0, 0.0, 0.5, 60).is_err());
    }
}
