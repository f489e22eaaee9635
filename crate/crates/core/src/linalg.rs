//! Small dense linear algebra: row-major matrices, least squares by
//! column-pivoted Householder QR, with a Jacobi SVD pseudo-inverse for
//! rank-deficient systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, hypot, norm, sqrt};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, keep.len());
        for r in 0..self.rows {
            for (j, &c) in keep.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| crate::math::dot(self.row(r), x)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Result of a least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub x: Vec<f64>,
    pub rank: usize,
    /// Set when the system was rank deficient and the minimum-norm
    /// pseudo-inverse solution was returned instead.
    pub rank_deficient: bool,
}

/// Column-pivoted Householder QR of an `m x n` matrix, `m >= n` not required.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    m: usize,
    n: usize,
    /// Householder vectors below the diagonal, R on and above (column-major).
    qr: Vec<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn factor(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut qr = vec![0.0; m * n];
        for r in 0..m {
            for c in 0..n {
                qr[c * m + r] = a.get(r, c);
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut colnorm: Vec<f64> = (0..n).map(|c| norm(&qr[c * m..(c + 1) * m])).collect();
        let steps = m.min(n);
        let mut tau = vec![0.0; steps];
        for k in 0..steps {
            // pivot: largest remaining column norm
            let mut best = k;
            for c in k + 1..n {
                if colnorm[c] > colnorm[best] {
                    best = c;
                }
            }
            if best != k {
                for r in 0..m {
                    qr.swap(k * m + r, best * m + r);
                }
                colnorm.swap(k, best);
                perm.swap(k, best);
            }
            let col = &mut qr[k * m..(k + 1) * m];
            let alpha = norm(&col[k..]);
            if alpha == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let beta = if col[k] > 0.0 { -alpha } else { alpha };
            let v0 = col[k] - beta;
            for v in col[k + 1..].iter_mut() {
                *v /= v0;
            }
            tau[k] = (beta - col[k]) / beta;
            col[k] = beta;
            // apply H = I - tau v v^T to remaining columns
            for c in k + 1..n {
                let (head, tail) = qr.split_at_mut(c * m);
                let v = &head[k * m..(k + 1) * m];
                let target = &mut tail[..m];
                let mut s = target[k];
                for r in k + 1..m {
                    s += v[r] * target[r];
                }
                s *= tau[k];
                target[k] -= s;
                for r in k + 1..m {
                    target[r] -= s * v[r];
                }
                colnorm[c] = norm(&target[k + 1..]);
            }
        }
        let rmax = if steps > 0 { abs(qr[0]) } else { 0.0 };
        let tol = rmax * (m.max(n) as f64) * f64::EPSILON * 16.0;
        let mut rank = 0;
        for k in 0..steps {
            if abs(qr[k * m + k]) > tol && rmax > 0.0 {
                rank += 1;
            } else {
                break;
            }
        }
        Self { m, n, qr, tau, perm, rank }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.n && self.n <= self.m
    }

    /// Solves in the least-squares sense; only meaningful when full rank.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (m, n) = (self.m, self.n);
        assert_eq!(b.len(), m);
        let mut y = b.to_vec();
        for k in 0..m.min(n) {
            if self.tau[k] == 0.0 {
                continue;
            }
            let v = &self.qr[k * m..(k + 1) * m];
            let mut s = y[k];
            for r in k + 1..m {
                s += v[r] * y[r];
            }
            s *= self.tau[k];
            y[k] -= s;
            for r in k + 1..m {
                y[r] -= s * v[r];
            }
        }
        let mut z = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in k + 1..n {
                s -= self.qr[c * m + k] * z[c];
            }
            z[k] = s / self.qr[k * m + k];
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }
}

/// Least-squares solution of `a x ≈ b`. Rank-deficient systems fall back to
/// the minimum-norm solution and are flagged.
pub fn lstsq(a: &Matrix, b: &[f64]) -> LstsqSolution {
    lstsq_multi(a, &[b]).pop().expect("one right-hand side")
}

/// [`lstsq`] for several right-hand sides sharing one factorization.
pub fn lstsq_multi(a: &Matrix, bs: &[&[f64]]) -> Vec<LstsqSolution> {
    if a.cols() == 0 {
        return bs
            .iter()
            .map(|_| LstsqSolution { x: Vec::new(), rank: 0, rank_deficient: false })
            .collect();
    }
    let qr = PivotedQr::factor(a);
    if qr.is_full_rank() {
        return bs
            .iter()
            .map(|b| LstsqSolution { x: qr.solve(b), rank: qr.rank(), rank_deficient: false })
            .collect();
    }
    let svd = JacobiSvd::new(a);
    bs.iter()
        .map(|b| {
            let (x, rank) = svd.pinv_solve(b);
            LstsqSolution { x, rank, rank_deficient: true }
        })
        .collect()
}

/// One-sided Jacobi SVD, `a = U diag(s) V^T`.
#[derive(Debug, Clone)]
pub struct JacobiSvd {
    /// Left vectors scaled by singular values, column-major `m x k`.
    us: Vec<f64>,
    v: Vec<f64>,
    s: Vec<f64>,
    m: usize,
    n: usize,
    transposed: bool,
}

impl JacobiSvd {
    pub fn new(a: &Matrix) -> Self {
        let transposed = a.rows() < a.cols();
        let work = if transposed { a.transpose() } else { a.clone() };
        let (m, n) = (work.rows(), work.cols());
        let mut u = vec![0.0; m * n];
        for r in 0..m {
            for c in 0..n {
                u[c * m + r] = work.get(r, c);
            }
        }
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                    for r in 0..m {
                        let up = u[p * m + r];
                        let uq = u[q * m + r];
                        alpha += up * up;
                        beta += uq * uq;
                        gamma += up * uq;
                    }
                    if gamma == 0.0 || abs(gamma) <= f64::EPSILON * sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let sign = if zeta < 0.0 { -1.0 } else { 1.0 };
                    let t = sign / (abs(zeta) + hypot(1.0, zeta));
                    let c = 1.0 / sqrt(1.0 + t * t);
                    let s = c * t;
                    for r in 0..m {
                        let up = u[p * m + r];
                        let uq = u[q * m + r];
                        u[p * m + r] = c * up - s * uq;
                        u[q * m + r] = s * up + c * uq;
                    }
                    for r in 0..n {
                        let vp = v[p * n + r];
                        let vq = v[q * n + r];
                        v[p * n + r] = c * vp - s * vq;
                        v[q * n + r] = s * vp + c * vq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let s = (0..n).map(|c| norm(&u[c * m..(c + 1) * m])).collect();
        Self { us: u, v, s, m, n, transposed }
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.s
    }

    /// Minimum-norm least-squares solution and numerical rank.
    pub fn pinv_solve(&self, b: &[f64]) -> (Vec<f64>, usize) {
        let (m, n) = (self.m, self.n);
        let smax = self.s.iter().cloned().fold(0.0, f64::max);
        let tol = smax * (m.max(n) as f64) * f64::EPSILON * 16.0;
        let rank = self.s.iter().filter(|&&s| s > tol).count();
        if !self.transposed {
            // x = V S^-1 U^T b, with us = U S
            let mut x = vec![0.0; n];
            for k in 0..n {
                let sk = self.s[k];
                if sk <= tol {
                    continue;
                }
                let col = &self.us[k * m..(k + 1) * m];
                let coef = crate::math::dot(col, b) / (sk * sk);
                for r in 0..n {
                    x[r] += coef * self.v[k * n + r];
                }
            }
            (x, rank)
        } else {
            // a^T = U S V^T  =>  a = V S U^T, pinv(a) = U S^-1 V^T
            let mut x = vec![0.0; m];
            for k in 0..n {
                let sk = self.s[k];
                if sk <= tol {
                    continue;
                }
                let vk = &self.v[k * n..(k + 1) * n];
                let coef = crate::math::dot(vk, b) / (sk * sk);
                let col = &self.us[k * m..(k + 1) * m];
                for r in 0..m {
                    x[r] += coef * col[r];
                }
            }
            (x, rank)
        }
    }
}
