use alloc::vec;
use alloc::vec::Vec;

use super::design::DesignMatrix;
use crate::linalg::{lstsq, Matrix};
use crate::math::abs;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticNetOptions {
    /// Relative tolerance on the objective between sweeps.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Keep the objective after every sweep in [`SparseFit::trace`].
    pub record_trace: bool,
}

impl Default for ElasticNetOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_sweeps: 10_000, record_trace: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseFit {
    /// Minimizer of the penalized objective, output-major.
    pub xi: Vec<f64>,
    /// Least-squares refit on each output's support, output-major.
    pub refit: Vec<f64>,
    pub outputs: usize,
    pub lambda: f64,
    pub beta: f64,
    /// Mean squared loss of `refit`.
    pub loss: f64,
    /// Penalized objective at `xi`.
    pub objective: f64,
    /// Candidates with a nonzero coefficient in some output.
    pub active: Vec<usize>,
    pub sweeps: usize,
    /// Some refit needed the pseudo-inverse.
    pub rank_deficient: bool,
    /// Per-output objective after each sweep, when requested.
    pub trace: Vec<Vec<f64>>,
}

/// `(1/R_total) Σ_o |Φ ξ_o - y_o|²` with `xi` output-major.
pub fn mse_loss(design: &DesignMatrix, xi: &[f64]) -> f64 {
    let nc = design.cols();
    let mut s = 0.0;
    for (o, y) in design.targets.iter().enumerate() {
        let r = design.phi.mul_vec(&xi[o * nc..(o + 1) * nc]);
        s += r.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    s / design.stacked_rows() as f64
}

/// Plain least squares per output; a rank-deficient `Φ` gets the
/// minimum-norm solution and the flag.
pub fn least_squares_fit(design: &DesignMatrix) -> (Vec<f64>, bool) {
    let sols = crate::linalg::lstsq_multi(&design.phi, &design.targets.iter().map(Vec::as_slice).collect::<Vec<_>>());
    let flag = sols.iter().any(|s| s.rank_deficient);
    (sols.into_iter().flat_map(|s| s.x).collect(), flag)
}

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

struct Quadratic {
    n: usize,
    // Φ^T Φ / R
    g: Vec<f64>,
    // Φ^T y / R
    c: Vec<f64>,
    // |y|^2 / R
    yy: f64,
}

impl Quadratic {
    fn value(&self, x: &[f64], l1: f64, l2: f64) -> f64 {
        let n = self.n;
        let mut q = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            let gi = &self.g[i * n..(i + 1) * n];
            let gx: f64 = gi.iter().zip(x).map(|(a, b)| a * b).sum();
            q += x[i] * (gx - 2.0 * self.c[i]);
        }
        let pen: f64 = x.iter().map(|v| l2 * v * v + 2.0 * l1 * abs(*v)).sum();
        q + self.yy + pen
    }
}

/// Cyclic coordinate descent for
/// `(1/R)|Φξ - y|² + λ_eff (β|ξ|² + (1-β)|ξ|₁)`, written with
/// `l1 = λ_eff (1-β)/2` and `l2 = λ_eff β`. Returns `(ξ, objective, sweeps)`.
fn coordinate_descent(
    q: &Quadratic,
    l1: f64,
    l2: f64,
    opts: &ElasticNetOptions,
    trace: &mut Vec<f64>,
) -> Result<(Vec<f64>, f64, usize), Error> {
    let n = q.n;
    let mut x = vec![0.0; n];
    // gx = G x
    let mut gx = vec![0.0; n];
    let t0 = q.yy;
    let mut t_prev = t0;
    for sweep in 1..=opts.max_sweeps {
        for j in 0..n {
            let gjj = q.g[j * n + j];
            let den = gjj + l2;
            let old = x[j];
            let new = if den > 0.0 {
                let rho = q.c[j] - (gx[j] - gjj * old);
                soft(rho, l1) / den
            } else {
                0.0
            };
            if new != old {
                let d = new - old;
                for (k, g) in gx.iter_mut().enumerate() {
                    *g += q.g[k * n + j] * d;
                }
                x[j] = new;
            }
        }
        let t = q.value(&x, l1, l2);
        if opts.record_trace {
            trace.push(t);
        }
        debug_assert!(t <= t_prev + 1e-9 * (abs(t_prev) + t0), "objective increased: {t_prev} -> {t}");
        let gap = t_prev - t;
        if gap <= opts.tol * t_prev.max(1e-12 * t0) {
            return Ok((x, t, sweep));
        }
        t_prev = t;
    }
    let t = q.value(&x, l1, l2);
    Err(Error::NonConvergence { sweeps: opts.max_sweeps, relative_gap: abs(t_prev - t) / t_prev.max(f64::MIN_POSITIVE) })
}

/// Solves the KKT system on the support and sign pattern of `x`; keeps the
/// result if it satisfies the optimality conditions and does not raise the
/// objective.
fn polish(q: &Quadratic, x: &mut [f64], l1: f64, l2: f64) {
    let n = q.n;
    let support: Vec<usize> = (0..n).filter(|&j| x[j] != 0.0).collect();
    if support.is_empty() {
        return;
    }
    let k = support.len();
    let mut a = Matrix::zeros(k, k);
    let mut b = vec![0.0; k];
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            a.set(r, c, q.g[i * n + j] + if r == c { l2 } else { 0.0 });
        }
        b[r] = q.c[i] - if x[i] > 0.0 { l1 } else { -l1 };
    }
    let sol = lstsq(&a, &b);
    if sol.rank_deficient {
        return;
    }
    if support.iter().zip(&sol.x).any(|(&i, v)| !(v * x[i] > 0.0)) {
        return;
    }
    let mut y = vec![0.0; n];
    for (&i, v) in support.iter().zip(&sol.x) {
        y[i] = *v;
    }
    let scale = q.c.iter().fold(0.0f64, |m, v| m.max(abs(*v))) + l1;
    for j in 0..n {
        if y[j] != 0.0 {
            continue;
        }
        let gy: f64 = (0..n).map(|i| q.g[j * n + i] * y[i]).sum();
        if abs(q.c[j] - gy) > l1 + 1e-10 * scale {
            return;
        }
    }
    let before = q.value(x, l1, l2);
    let after = q.value(&y, l1, l2);
    if after <= before + 1e-12 * abs(before) {
        x.copy_from_slice(&y);
    }
}

/// Elastic-net fit of every output (`β = 1` is ridge,
/// `β = 0` lasso). The stacked objective separates over outputs, each with
/// the penalty weight scaled by the output count.
pub fn elastic_net_fit(design: &DesignMatrix, lambda: f64, beta: f64) -> Result<SparseFit, Error> {
    elastic_net_fit_with(design, lambda, beta, &ElasticNetOptions::default())
}

pub fn elastic_net_fit_with(
    design: &DesignMatrix,
    lambda: f64,
    beta: f64,
    opts: &ElasticNetOptions,
) -> Result<SparseFit, Error> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput("lambda must be non-negative".into()));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidInput("beta must lie in [0, 1]".into()));
    }
    if !design.phi.is_finite() || design.targets.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("design contains non-finite values".into()));
    }
    let rows = design.rows();
    let n = design.cols();
    let outputs = design.outputs();
    if rows == 0 {
        return Err(Error::InvalidInput("design has no rows".into()));
    }
    let inv_r = 1.0 / rows as f64;
    let phi = &design.phi;
    let mut g = vec![0.0; n * n];
    for r in 0..rows {
        let row = phi.row(r);
        for i in 0..n {
            if row[i] == 0.0 {
                continue;
            }
            for j in i..n {
                g[i * n + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..n {
        for j in i..n {
            let v = g[i * n + j] * inv_r;
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    let lam = lambda * outputs as f64;
    let l1 = lam * (1.0 - beta) / 2.0;
    let l2 = lam * beta;
    let mut xi = Vec::with_capacity(n * outputs);
    let mut refit = Vec::with_capacity(n * outputs);
    let mut objective = 0.0;
    let mut sweeps = 0;
    let mut rank_deficient = false;
    let mut trace = Vec::new();
    for y in &design.targets {
        let mut c = vec![0.0; n];
        for r in 0..rows {
            let row = phi.row(r);
            for j in 0..n {
                c[j] += row[j] * y[r];
            }
        }
        c.iter_mut().for_each(|v| *v *= inv_r);
        let yy = y.iter().map(|v| v * v).sum::<f64>() * inv_r;
        let q = Quadratic { n, g: g.clone(), c, yy };
        let mut t = Vec::new();
        let (mut x, _, s) = coordinate_descent(&q, l1, l2, opts, &mut t)?;
        if opts.record_trace {
            trace.push(t);
        }
        polish(&q, &mut x, l1, l2);
        objective += q.value(&x, l1, l2) / outputs as f64;
        sweeps = sweeps.max(s);
        // least-squares refit on this output's support
        let support: Vec<usize> = (0..n).filter(|&j| x[j] != 0.0).collect();
        let mut full = vec![0.0; n];
        if !support.is_empty() {
            let sol = lstsq(&phi.select_columns(&support), y);
            rank_deficient |= sol.rank_deficient;
            for (&j, v) in support.iter().zip(&sol.x) {
                full[j] = *v;
            }
        }
        xi.extend_from_slice(&x);
        refit.extend_from_slice(&full);
    }
    let active = (0..n).filter(|&j| (0..outputs).any(|o| xi[o * n + j] != 0.0)).collect();
    let loss = mse_loss(design, &refit);
    Ok(SparseFit { xi, refit, outputs, lambda, beta, loss, objective, active, sweeps, rank_deficient, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(rows: &[Vec<f64>], y: Vec<f64>) -> DesignMatrix {
        DesignMatrix::new(Matrix::from_rows(rows), vec![y]).unwrap()
    }

    #[test]
    fn scalar_closed_form() {
        let d = design(&[vec![1.0]], vec![1.0]);
        let f = elastic_net_fit(&d, 0.2, 0.5).unwrap();
        assert!((f.xi[0] - 0.95 / 1.1).abs() < 1e-12, "{}", f.xi[0]);
        assert_eq!(f.refit, vec![1.0]);
        assert!(f.loss < 1e-30);
    }

    #[test]
    fn unregularized_is_least_squares() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.5]];
        let d = design(&rows, vec![0.1, 1.2, 1.9, 3.7]);
        let f = elastic_net_fit(&d, 0.0, 0.8).unwrap();
        let (ls, _) = least_squares_fit(&d);
        for (a, b) in f.xi.iter().zip(&ls) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn huge_lambda_zeroes_everything() {
        let d = design(&[vec![1.0, 2.0], vec![0.5, -1.0]], vec![1.0, 2.0]);
        for beta in [0.0, 0.5, 0.99] {
            let f = elastic_net_fit(&d, 1e6, beta).unwrap();
            assert!(f.xi.iter().all(|v| *v == 0.0 || beta > 0.9), "{beta}: {:?}", f.xi);
        }
        let lasso = elastic_net_fit(&d, 1e6, 0.0).unwrap();
        assert!(lasso.active.is_empty());
        assert!((lasso.loss - 2.5).abs() < 1e-12);
    }

    #[test]
    fn two_outputs_separate() {
        let phi = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let d = DesignMatrix::new(phi, vec![vec![1.0, 0.0, 1.0], vec![0.0, 2.0, 2.0]]).unwrap();
        let f = elastic_net_fit(&d, 1e-3, 0.8).unwrap();
        assert_eq!(f.outputs, 2);
        assert!((f.refit[0] - 1.0).abs() < 1e-12 && f.refit[1].abs() < 1e-12);
        assert!((f.refit[3] - 2.0).abs() < 1e-12);
        assert!(f.loss < 1e-24);
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = design(&[vec![1.0]], vec![1.0]);
        assert!(elastic_net_fit(&d, -1.0, 0.5).is_err());
        assert!(elastic_net_fit(&d, 1.0, 1.5).is_err());
    }

    #[test]
    fn mse_definition() {
        let d = design(&[vec![1.0], vec![2.0]], vec![1.0, 3.0]);
        assert_eq!(mse_loss(&d, &[0.0]), 5.0);
        assert_eq!(mse_loss(&d, &[1.0]), 0.5);
    }
}
