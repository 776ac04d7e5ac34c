//! Matrix-valued reverse-mode tape.
//!
//! Every primitive appends one node holding its output value and the indices
//! of its inputs. Nodes are created in execution order, so reverse index
//! order is a valid topological order for the backward sweep.

use super::tensor::{gaussian_log_density, log_sum_exp, softmax_in_place, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    /// `a (r x k) * w^T` with `w (c x k)`.
    MatMulT(Var, Var),
    /// `a (r x c) + b (1 x c)` broadcast over rows.
    AddRow(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Sigmoid(Var),
    Tanh(Var),
    Softplus(Var),
    Exp(Var),
    Square(Var),
    SliceCols(Var, usize),
    SoftmaxRows(Var),
    LogSoftmaxRows(Var),
    GatherCols(Var, Vec<usize>),
    /// Mixture log-density; `resp` caches the per-row component responsibilities.
    GmmLogProb {
        log_w: Var,
        mu: Var,
        sigma: Var,
        x: Var,
        resp: Vec<f64>,
    },
    SumCols(Var),
    Sum(Var),
    DotConst(Var, Vec<f64>),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Record of primitive applications for one forward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    consumed: bool,
}

/// Gradients produced by [`Tape::backward`], indexed by node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<[usize; 2]>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`; zeros if `v` did not
    /// participate.
    pub fn get(&self, v: Var) -> Tensor {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => {
                let [r, c] = self.shapes[v.0];
                Tensor::zeros(r, c)
            }
        }
    }

    pub fn take(&mut self, v: Var) -> Tensor {
        match self.grads[v.0].take() {
            Some(g) => g,
            None => {
                let [r, c] = self.shapes[v.0];
                Tensor::zeros(r, c)
            }
        }
    }
}

fn shape_err(op: &'static str, detail: String) -> Error {
    Error::Shape { op, detail }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        debug_assert!(value.is_finite(), "non-finite output from {op:?}");
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, vs: &[Var]) -> bool {
        vs.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// Trainable leaf.
    pub fn param(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, true)
    }

    /// Leaf excluded from differentiation.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    pub fn leaf(&mut self, t: Tensor, requires_grad: bool) -> Var {
        self.push(t, Op::Leaf, requires_grad)
    }

    pub fn matmul_t(&mut self, a: Var, w: Var) -> Result<Var> {
        let (av, wv) = (self.value(a), self.value(w));
        let [r, k] = av.shape();
        let [c, k2] = wv.shape();
        if k != k2 {
            return Err(shape_err("matmul_t", format!("{r}x{k} * ({c}x{k2})^T")));
        }
        let mut out = vec![0.0; r * c];
        let (ad, wd) = (av.data(), wv.data());
        for i in 0..r {
            let arow = &ad[i * k..(i + 1) * k];
            let orow = &mut out[i * c..(i + 1) * c];
            for (o, wrow) in orow.iter_mut().zip(wd.chunks_exact(k)) {
                *o = dot(arow, wrow);
            }
        }
        let rg = self.rg(&[a, w]);
        Ok(self.push(Tensor::new(r, c, out)?, Op::MatMulT(a, w), rg))
    }

    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if bv.rows() != 1 || bv.cols() != av.cols() {
            return Err(shape_err(
                "add_row",
                format!("{:?} + row {:?}", av.shape(), bv.shape()),
            ));
        }
        let c = av.cols();
        let mut out = av.clone();
        for (i, v) in out.data_mut().iter_mut().enumerate() {
            *v += bv.data()[i % c];
        }
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, Op::AddRow(a, b), rg))
    }

    fn binary(&mut self, a: Var, b: Var, name: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() {
            return Err(shape_err(name, format!("{:?} vs {:?}", av.shape(), bv.shape())));
        }
        let data = av.data().iter().zip(bv.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(av.rows(), av.cols(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.binary(a, b, "add", |x, y| x + y)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, Op::Add(a, b), rg))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.binary(a, b, "sub", |x, y| x - y)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, Op::Sub(a, b), rg))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let out = self.binary(a, b, "mul", |x, y| x * y)?;
        let rg = self.rg(&[a, b]);
        Ok(self.push(out, Op::Mul(a, b), rg))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).map(|x| x * c);
        let rg = self.rg(&[a]);
        self.push(out, Op::Scale(a, c), rg)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let out = self.value(a).map(|x| x + c);
        let rg = self.rg(&[a]);
        self.push(out, Op::AddScalar(a), rg)
    }

    fn unary(&mut self, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let out = self.value(a).map(f);
        let rg = self.rg(&[a]);
        self.push(out, op, rg)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, Op::Sigmoid(a), sigmoid)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, Op::Tanh(a), f64::tanh)
    }

    /// `ln(1 + e^x)`.
    pub fn softplus(&mut self, a: Var) -> Var {
        self.unary(a, Op::Softplus(a), softplus)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, Op::Exp(a), f64::exp)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.unary(a, Op::Square(a), |x| x * x)
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        let av = self.value(a);
        let [r, c] = av.shape();
        if start + len > c {
            return Err(shape_err("slice_cols", format!("[{start}, {}) of {c} columns", start + len)));
        }
        let mut out = Vec::with_capacity(r * len);
        for i in 0..r {
            out.extend_from_slice(&av.row(i)[start..start + len]);
        }
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::new(r, len, out)?, Op::SliceCols(a, start), rg))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let mut out = self.value(a).clone();
        let c = out.cols();
        for row in out.data_mut().chunks_exact_mut(c) {
            softmax_in_place(row);
        }
        let rg = self.rg(&[a]);
        self.push(out, Op::SoftmaxRows(a), rg)
    }

    pub fn log_softmax_rows(&mut self, a: Var) -> Var {
        let mut out = self.value(a).clone();
        let c = out.cols();
        for row in out.data_mut().chunks_exact_mut(c) {
            let lse = log_sum_exp(row);
            for v in row.iter_mut() {
                *v -= lse;
            }
        }
        let rg = self.rg(&[a]);
        self.push(out, Op::LogSoftmaxRows(a), rg)
    }

    /// Picks column `idx[i]` of row `i`, giving an `r x 1` column.
    pub fn gather_cols(&mut self, a: Var, idx: Vec<usize>) -> Result<Var> {
        let av = self.value(a);
        if idx.len() != av.rows() || idx.iter().any(|&j| j >= av.cols()) {
            return Err(shape_err("gather_cols", format!("{} indices into {:?}", idx.len(), av.shape())));
        }
        let out: Vec<f64> = idx.iter().enumerate().map(|(i, &j)| av.get(i, j)).collect();
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::column(out), Op::GatherCols(a, idx), rg))
    }

    /// Row-wise mixture log-density `log sum_j exp(log_w_ij) N(x_i; mu_ij, sigma_ij)`.
    ///
    /// `log_w`, `mu`, `sigma` are `r x C`, `x` is `r x 1`; output is `r x 1`.
    pub fn gmm_log_prob(&mut self, log_w: Var, mu: Var, sigma: Var, x: Var) -> Result<Var> {
        let [r, c] = self.value(log_w).shape();
        if self.value(mu).shape() != [r, c] || self.value(sigma).shape() != [r, c] || self.value(x).shape() != [r, 1] {
            return Err(shape_err(
                "gmm_log_prob",
                format!(
                    "log_w {:?}, mu {:?}, sigma {:?}, x {:?}",
                    self.value(log_w).shape(),
                    self.value(mu).shape(),
                    self.value(sigma).shape(),
                    self.value(x).shape()
                ),
            ));
        }
        if self.value(sigma).data().iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidArgument("mixture standard deviations must be > 0".into()));
        }
        let (lw, m, s, xv) = (
            self.value(log_w).data(),
            self.value(mu).data(),
            self.value(sigma).data(),
            self.value(x).data(),
        );
        let mut resp = vec![0.0; r * c];
        let mut out = vec![0.0; r];
        for i in 0..r {
            let row = &mut resp[i * c..(i + 1) * c];
            for j in 0..c {
                let idx = i * c + j;
                row[j] = lw[idx] + gaussian_log_density(xv[i], m[idx], s[idx]);
            }
            let lse = log_sum_exp(row);
            out[i] = lse;
            for v in row.iter_mut() {
                *v = (*v - lse).exp();
            }
        }
        let rg = self.rg(&[log_w, mu, sigma, x]);
        Ok(self.push(
            Tensor::column(out),
            Op::GmmLogProb {
                log_w,
                mu,
                sigma,
                x,
                resp,
            },
            rg,
        ))
    }

    /// Sum across columns: `r x c -> r x 1`.
    pub fn sum_cols(&mut self, a: Var) -> Var {
        let av = self.value(a);
        let out: Vec<f64> = (0..av.rows()).map(|i| av.row(i).iter().sum()).collect();
        let rg = self.rg(&[a]);
        self.push(Tensor::column(out), Op::SumCols(a), rg)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s: f64 = self.value(a).data().iter().sum();
        let rg = self.rg(&[a]);
        self.push(Tensor::scalar(s), Op::Sum(a), rg)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let n = self.value(a).len() as f64;
        let s = self.sum(a);
        self.scale(s, 1.0 / n)
    }

    /// `sum_i a_i c_i` with constant coefficients.
    pub fn dot_const(&mut self, a: Var, coeffs: Vec<f64>) -> Result<Var> {
        let av = self.value(a);
        if coeffs.len() != av.len() {
            return Err(shape_err("dot_const", format!("{} coefficients for {:?}", coeffs.len(), av.shape())));
        }
        let s: f64 = av.data().iter().zip(&coeffs).map(|(x, c)| x * c).sum();
        let rg = self.rg(&[a]);
        Ok(self.push(Tensor::scalar(s), Op::DotConst(a, coeffs), rg))
    }

    /// Reverse sweep from a scalar `loss`. The tape can be swept only once.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients> {
        if self.consumed {
            return Err(Error::TapeConsumed);
        }
        let [lr, lc] = self.value(loss).shape();
        if lr != 1 || lc != 1 {
            return Err(Error::NonScalarLoss { rows: lr, cols: lc });
        }
        self.consumed = true;
        let n = self.nodes.len();
        let shapes: Vec<[usize; 2]> = self.nodes.iter().map(|nd| nd.value.shape()).collect();
        let mut grads: Vec<Option<Tensor>> = (0..n).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            if !self.nodes[idx].requires_grad {
                continue;
            }
            let node = &self.nodes[idx];
            let nodes = &self.nodes;
            let acc = |v: Var, t: Tensor, grads: &mut Vec<Option<Tensor>>| {
                if !nodes[v.0].requires_grad {
                    return;
                }
                match &mut grads[v.0] {
                    Some(existing) => existing.add_assign(&t),
                    slot @ None => *slot = Some(t),
                }
            };
            let out = &node.value;
            match &node.op {
                Op::Leaf => {
                    grads[idx] = Some(g);
                    continue;
                }
                Op::MatMulT(a, w) => {
                    let (av, wv) = (&nodes[a.0].value, &nodes[w.0].value);
                    let [r, k] = av.shape();
                    let c = wv.rows();
                    let gd = g.data();
                    if nodes[a.0].requires_grad {
                        let mut ga = vec![0.0; r * k];
                        for i in 0..r {
                            let garow = &mut ga[i * k..(i + 1) * k];
                            for j in 0..c {
                                let gij = gd[i * c + j];
                                if gij == 0.0 {
                                    continue;
                                }
                                axpy(garow, gij, wv.row(j));
                            }
                        }
                        acc(*a, Tensor::new(r, k, ga)?, &mut grads);
                    }
                    if nodes[w.0].requires_grad {
                        let mut gw = vec![0.0; c * k];
                        for i in 0..r {
                            let arow = av.row(i);
                            for j in 0..c {
                                let gij = gd[i * c + j];
                                if gij == 0.0 {
                                    continue;
                                }
                                axpy(&mut gw[j * k..(j + 1) * k], gij, arow);
                            }
                        }
                        acc(*w, Tensor::new(c, k, gw)?, &mut grads);
                    }
                }
                Op::AddRow(a, b) => {
                    let c = g.cols();
                    let mut gb = vec![0.0; c];
                    for row in g.data().chunks_exact(c) {
                        for (s, v) in gb.iter_mut().zip(row) {
                            *s += v;
                        }
                    }
                    acc(*b, Tensor::row_vector(gb), &mut grads);
                    acc(*a, g, &mut grads);
                }
                Op::Add(a, b) => {
                    acc(*b, g.clone(), &mut grads);
                    acc(*a, g, &mut grads);
                }
                Op::Sub(a, b) => {
                    acc(*b, g.map(|v| -v), &mut grads);
                    acc(*a, g, &mut grads);
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (&nodes[a.0].value, &nodes[b.0].value);
                    if nodes[a.0].requires_grad {
                        acc(*a, zip_map(&g, bv, |x, y| x * y), &mut grads);
                    }
                    if nodes[b.0].requires_grad {
                        acc(*b, zip_map(&g, av, |x, y| x * y), &mut grads);
                    }
                }
                Op::Scale(a, c) => {
                    let c = *c;
                    acc(*a, g.map(|v| v * c), &mut grads);
                }
                Op::AddScalar(a) => acc(*a, g, &mut grads),
                Op::Sigmoid(a) => acc(*a, zip_map(&g, out, |gv, y| gv * y * (1.0 - y)), &mut grads),
                Op::Tanh(a) => acc(*a, zip_map(&g, out, |gv, y| gv * (1.0 - y * y)), &mut grads),
                Op::Softplus(a) => {
                    let x = &nodes[a.0].value;
                    acc(*a, zip_map(&g, x, |gv, xv| gv * sigmoid(xv)), &mut grads)
                }
                Op::Exp(a) => acc(*a, zip_map(&g, out, |gv, y| gv * y), &mut grads),
                Op::Square(a) => {
                    let x = &nodes[a.0].value;
                    acc(*a, zip_map(&g, x, |gv, xv| 2.0 * gv * xv), &mut grads)
                }
                Op::SliceCols(a, start) => {
                    let [r, c] = nodes[a.0].value.shape();
                    let len = g.cols();
                    let mut ga = vec![0.0; r * c];
                    for i in 0..r {
                        ga[i * c + start..i * c + start + len].copy_from_slice(g.row(i));
                    }
                    acc(*a, Tensor::new(r, c, ga)?, &mut grads);
                }
                Op::SoftmaxRows(a) => {
                    let c = out.cols();
                    let mut ga = g.clone();
                    for (grow, yrow) in ga.data_mut().chunks_exact_mut(c).zip(out.data().chunks_exact(c)) {
                        let dot: f64 = grow.iter().zip(yrow).map(|(x, y)| x * y).sum();
                        for (gv, y) in grow.iter_mut().zip(yrow) {
                            *gv = y * (*gv - dot);
                        }
                    }
                    acc(*a, ga, &mut grads);
                }
                Op::LogSoftmaxRows(a) => {
                    let c = out.cols();
                    let mut ga = g.clone();
                    for (grow, yrow) in ga.data_mut().chunks_exact_mut(c).zip(out.data().chunks_exact(c)) {
                        let total: f64 = grow.iter().sum();
                        for (gv, y) in grow.iter_mut().zip(yrow) {
                            *gv -= y.exp() * total;
                        }
                    }
                    acc(*a, ga, &mut grads);
                }
                Op::GatherCols(a, ix) => {
                    let [r, c] = nodes[a.0].value.shape();
                    let mut ga = vec![0.0; r * c];
                    for (i, &j) in ix.iter().enumerate() {
                        ga[i * c + j] = g.data()[i];
                    }
                    acc(*a, Tensor::new(r, c, ga)?, &mut grads);
                }
                Op::GmmLogProb {
                    log_w,
                    mu,
                    sigma,
                    x,
                    resp,
                } => {
                    let [r, c] = nodes[mu.0].value.shape();
                    let (m, s, xv) = (
                        nodes[mu.0].value.data(),
                        nodes[sigma.0].value.data(),
                        nodes[x.0].value.data(),
                    );
                    let mut gw = vec![0.0; r * c];
                    let mut gm = vec![0.0; r * c];
                    let mut gs = vec![0.0; r * c];
                    let mut gx = vec![0.0; r];
                    for i in 0..r {
                        let gi = g.data()[i];
                        for j in 0..c {
                            let id = i * c + j;
                            let w = gi * resp[id];
                            let inv = 1.0 / s[id];
                            let u = (xv[i] - m[id]) * inv;
                            gw[id] = w;
                            gm[id] = w * u * inv;
                            gs[id] = w * (u * u - 1.0) * inv;
                            gx[i] -= w * u * inv;
                        }
                    }
                    acc(*log_w, Tensor::new(r, c, gw)?, &mut grads);
                    acc(*mu, Tensor::new(r, c, gm)?, &mut grads);
                    acc(*sigma, Tensor::new(r, c, gs)?, &mut grads);
                    acc(*x, Tensor::column(gx), &mut grads);
                }
                Op::SumCols(a) => {
                    let [r, c] = nodes[a.0].value.shape();
                    let mut ga = vec![0.0; r * c];
                    for i in 0..r {
                        ga[i * c..(i + 1) * c].fill(g.data()[i]);
                    }
                    acc(*a, Tensor::new(r, c, ga)?, &mut grads);
                }
                Op::Sum(a) => {
                    let [r, c] = nodes[a.0].value.shape();
                    acc(*a, Tensor::filled(r, c, g.item()), &mut grads);
                }
                Op::DotConst(a, coeffs) => {
                    let [r, c] = nodes[a.0].value.shape();
                    let gv = g.item();
                    acc(*a, Tensor::new(r, c, coeffs.iter().map(|k| k * gv).collect())?, &mut grads);
                }
            }
        }
        Ok(Gradients { grads, shapes })
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yv, xv) in y.iter_mut().zip(x) {
        *yv += a * xv;
    }
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::new(a.rows(), a.cols(), data).expect("same shape")
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}
