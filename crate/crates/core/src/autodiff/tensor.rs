use crate::error::{Error, Result};

/// Dense row-major matrix of doubles. Vectors are `1 x n` or `n x 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape {
                op: "Tensor::new",
                detail: format!("{rows}x{cols} needs {} values, got {}", rows * cols, data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn scalar(v: f64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    pub fn row_vector(values: Vec<f64>) -> Self {
        Self {
            rows: 1,
            cols: values.len(),
            data: values,
        }
    }

    pub fn column(values: Vec<f64>) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape {
                op: "Tensor::from_rows",
                detail: "ragged rows".into(),
            });
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.rows, self.cols]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn item(&self) -> f64 {
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    if !logits.is_finite() {
        return Err(Error::NonFinite("softmax logits".into()));
    }
    let mut out = logits.clone();
    for r in 0..out.rows {
        let row = &mut out.data[r * out.cols..(r + 1) * out.cols];
        softmax_in_place(row);
    }
    Ok(out)
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let m = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut s = 0.0;
    for v in row.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in row.iter_mut() {
        *v /= s;
    }
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// `log sum_j w_j N(x; mu_j, sigma_j)` evaluated with log-sum-exp.
pub fn gmm_log_prob(weights: &[f64], means: &[f64], stds: &[f64], x: f64) -> Result<f64> {
    let n = weights.len();
    if means.len() != n || stds.len() != n || n == 0 {
        return Err(Error::Shape {
            op: "gmm_log_prob",
            detail: format!("{} weights, {} means, {} stds", n, means.len(), stds.len()),
        });
    }
    if stds.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument("mixture standard deviations must be > 0".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("gmm_log_prob argument".into()));
    }
    let terms: Vec<f64> = (0..n)
        .map(|j| weights[j].ln() + gaussian_log_density(x, means[j], stds[j]))
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Same as [`gmm_log_prob`] but with log-weights; no validation.
pub(crate) fn gmm_log_prob_log_weights(log_w: &[f64], mu: &[f64], sigma: &[f64], x: f64, scratch: &mut [f64]) -> f64 {
    for j in 0..log_w.len() {
        scratch[j] = log_w[j] + gaussian_log_density(x, mu[j], sigma[j]);
    }
    log_sum_exp(&scratch[..log_w.len()])
}

#[inline]
pub(crate) fn gaussian_log_density(x: f64, mu: f64, sigma: f64) -> f64 {
    let u = (x - mu) / sigma;
    -HALF_LN_TWO_PI - sigma.ln() - 0.5 * u * u
}
