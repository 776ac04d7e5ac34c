//! Tensor-product Gauss-Hermite quadrature.

use super::path_action;
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Potential};

/// Maximum number of integrand evaluations.
pub const QUADRATURE_BUDGET: u128 = 10_000_000;

/// Nodes (ascending) and weights for `int exp(-y^2) f(y) dy`, by Newton
/// iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 200 {
        return Err(Error::InvalidArgument(format!("Gauss-Hermite order must be in 1..=200, got {n}")));
    }
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        // standard asymptotic starting guesses for the largest roots
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * (1.0 + z.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Estimation(format!("Gauss-Hermite root {i} of order {n} did not converge")));
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    nodes.reverse();
    weights.reverse();
    Ok((nodes, weights))
}

/// `ln int exp(log_f(x)) dx` over R^d with the affine change of variables
/// `x = center + T y` (`transform` row-major d x d) and `n` nodes per axis.
pub fn gauss_hermite_log_integral<F>(center: &[f64], transform: &[f64], n: usize, mut log_f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let d = center.len();
    if transform.len() != d * d || d == 0 {
        return Err(Error::Shape {
            op: "gauss_hermite_log_integral",
            detail: format!("transform has {} entries for dimension {d}", transform.len()),
        });
    }
    let total = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total > QUADRATURE_BUDGET {
        return Err(Error::EnumerationBudget { configurations: total });
    }
    let (nodes, weights) = gauss_hermite(n)?;
    let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let log_abs_det = log_abs_det(transform, d)?;

    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut terms = Vec::with_capacity(total as usize);
    loop {
        let mut base = 0.0;
        for (a, xa) in x.iter_mut().enumerate() {
            *xa = center[a];
            for b in 0..d {
                *xa += transform[a * d + b] * nodes[idx[b]];
            }
        }
        for &i in &idx {
            base += log_w[i] + nodes[i] * nodes[i];
        }
        terms.push(base + log_f(&x));
        // odometer
        let mut a = 0;
        loop {
            if a == d {
                let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if !mx.is_finite() {
                    return Err(Error::NonFinite("quadrature integrand".into()));
                }
                let s: f64 = terms.iter().map(|t| (t - mx).exp()).sum();
                return Ok(mx + s.ln() + log_abs_det);
            }
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// `ln |det A|` by Gaussian elimination with partial pivoting.
fn log_abs_det(a: &[f64], d: usize) -> Result<f64> {
    let mut m = a.to_vec();
    let mut acc = 0.0;
    for col in 0..d {
        let p = (col..d)
            .max_by(|&i, &j| m[i * d + col].abs().total_cmp(&m[j * d + col].abs()))
            .unwrap();
        if m[p * d + col] == 0.0 {
            return Err(Error::InvalidArgument("singular quadrature transform".into()));
        }
        if p != col {
            for j in 0..d {
                m.swap(p * d + j, col * d + j);
            }
        }
        let pv = m[col * d + col];
        acc += pv.abs().ln();
        for i in col + 1..d {
            let f = m[i * d + col] / pv;
            for j in col..d {
                m[i * d + j] -= f * m[col * d + j];
            }
        }
    }
    Ok(acc)
}

/// Dense Cholesky `A = L L^T`, row-major lower triangle.
fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// `ln Z` of `exp(-S_E/hbar)` over interior positions by Gauss-Hermite
/// quadrature centred on the action minimum, with axes from the Cholesky
/// factor of a finite-difference Hessian. Exact for quadratic actions at any
/// order; for other potentials it converges as `n_nodes` grows.
pub fn gauss_hermite_partition(lat: &LatticeSpec, pot: &Potential, n_nodes: usize) -> Result<f64> {
    let n = lat.n_tau();
    let d = n - 2;
    let hbar = lat.hbar();
    let full = |y: &[f64]| -> Vec<f64> {
        let mut p = Vec::with_capacity(n);
        p.push(lat.x_start());
        p.extend_from_slice(y);
        p.push(lat.x_end());
        p
    };
    let s = |y: &[f64]| path_action(&full(y), lat, pot);

    let h = 1e-3;
    let grad_hess = |y: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut g = vec![0.0; d];
        let mut hm = vec![0.0; d * d];
        let s0 = s(y);
        let mut yy = y.to_vec();
        for i in 0..d {
            yy[i] = y[i] + h;
            let sp = s(&yy);
            yy[i] = y[i] - h;
            let sm = s(&yy);
            yy[i] = y[i];
            g[i] = (sp - sm) / (2.0 * h);
            hm[i * d + i] = (sp - 2.0 * s0 + sm) / (h * h);
            for j in 0..i {
                let mut e = |di: f64, dj: f64| {
                    yy[i] = y[i] + di;
                    yy[j] = y[j] + dj;
                    let v = s(&yy);
                    yy[i] = y[i];
                    yy[j] = y[j];
                    v
                };
                let v = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
                hm[i * d + j] = v;
                hm[j * d + i] = v;
            }
        }
        (g, hm)
    };

    // Newton from the straight line between the endpoints.
    let mut y: Vec<f64> = (1..n - 1)
        .map(|k| lat.x_start() + (lat.x_end() - lat.x_start()) * k as f64 / (n - 1) as f64)
        .collect();
    let mut hess = Vec::new();
    for _ in 0..100 {
        let (g, hm) = grad_hess(&y);
        let l = cholesky(&hm, d)
            .ok_or_else(|| Error::Estimation("action Hessian not positive definite on Newton path".into()))?;
        // solve L L^T step = g
        let mut z = g.clone();
        for i in 0..d {
            for k in 0..i {
                z[i] -= l[i * d + k] * z[k];
            }
            z[i] /= l[i * d + i];
        }
        for i in (0..d).rev() {
            for k in i + 1..d {
                z[i] -= l[k * d + i] * z[k];
            }
            z[i] /= l[i * d + i];
        }
        let step = z.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for (yi, zi) in y.iter_mut().zip(&z) {
            *yi -= zi;
        }
        hess = hm;
        if step < 1e-10 {
            break;
        }
    }

    let scaled: Vec<f64> = hess.iter().map(|v| v / hbar).collect();
    let l = cholesky(&scaled, d).ok_or_else(|| Error::Estimation("action Hessian not positive definite".into()))?;
    // T = sqrt(2) L^{-T}
    let mut t = vec![0.0; d * d];
    for col in 0..d {
        let mut e = vec![0.0; d];
        e[col] = 1.0;
        for i in (0..d).rev() {
            for k in i + 1..d {
                e[i] -= l[k * d + i] * e[k];
            }
            e[i] /= l[i * d + i];
        }
        for i in 0..d {
            t[i * d + col] = std::f64::consts::SQRT_2 * e[i];
        }
    }
    gauss_hermite_log_integral(&y, &t, n_nodes, |x| -s(x) / hbar)
}
