//! Symmetric generalized eigenproblems `A x = lambda B x` with `B` positive
//! definite: dense, tridiagonal (Sturm bisection) and block tridiagonal
//! (shift-invert Lanczos with locking).

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Largest problem handed to the dense solver.
pub const DENSE_LIMIT: usize = 4000;

/// Dense generalized eigenpairs in ascending order, eigenvectors
/// `B`-orthonormal in the columns.
pub fn generalized_dense(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Eigensolver("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let mut c = a.clone();
    l.solve_lower_triangular_mut(&mut c);
    let mut c = c.transpose();
    l.solve_lower_triangular_mut(&mut c);
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut y = eig.eigenvectors.column(i).into_owned();
        l.tr_solve_lower_triangular_mut(&mut y);
        vecs.set_column(col, &y);
    }
    Ok((vals, vecs))
}

/// Symmetric tridiagonal pencil; `*_off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone)]
pub struct TridiagonalPencil {
    pub a_diag: Vec<f64>,
    pub a_off: Vec<f64>,
    pub b_diag: Vec<f64>,
    pub b_off: Vec<f64>,
}

impl TridiagonalPencil {
    pub fn dim(&self) -> usize {
        self.a_diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `A - x B`).
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.dim();
        let mut count = 0;
        let mut d = 0.0;
        for i in 0..n {
            let diag = self.a_diag[i] - x * self.b_diag[i];
            d = if i == 0 {
                diag
            } else {
                let e = self.a_off[i - 1] - x * self.b_off[i - 1];
                diag - e * e / d
            };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = -1.0;
        while self.count_below(lo) > 0 {
            lo *= 2.0;
        }
        let mut hi = 1.0;
        while self.count_below(hi) < n {
            hi *= 2.0;
        }
        (lo, hi)
    }

    /// Eigenvalue of index `k` (0 based) by bisection on the inertia.
    pub fn eigenvalue(&self, k: usize) -> Result<f64> {
        if k >= self.dim() {
            return Err(Error::Eigensolver(format!("index {k} beyond dimension {}", self.dim())));
        }
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn eigenvalues_below(&self, window: f64) -> Result<Vec<f64>> {
        (0..self.count_below(window)).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn lowest(&self, count: usize) -> Result<Vec<f64>> {
        (0..count.min(self.dim())).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn apply_b(&self, x: &[f64]) -> Vec<f64> {
        tridiag_mul(&self.b_diag, &self.b_off, x)
    }

    pub fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        tridiag_mul(&self.a_diag, &self.a_off, x)
    }

    /// Eigenvector for a computed eigenvalue by inverse iteration,
    /// normalised so that `x^T B x = 1` with a positive first nonzero entry.
    pub fn eigenvector(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let shift = lambda - 1e-10 * lambda.abs().max(1e-300);
        let diag: Vec<f64> = (0..n).map(|i| self.a_diag[i] - shift * self.b_diag[i]).collect();
        let off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| self.a_off[i] - shift * self.b_off[i]).collect();
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin()).collect();
        for _ in 0..4 {
            let rhs = self.apply_b(&x);
            x = solve_tridiagonal(&off, &diag, &off, &rhs)?;
            let nb = dot(&x, &self.apply_b(&x)).sqrt();
            if !nb.is_finite() || nb == 0.0 {
                return Err(Error::Eigensolver("inverse iteration broke down".into()));
            }
            x.iter_mut().for_each(|v| *v /= nb);
        }
        if let Some(first) = x.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
        Ok(x)
    }
}

fn tridiag_mul(d: &[f64], e: &[f64], x: &[f64]) -> Vec<f64> {
    let n = d.len();
    (0..n)
        .map(|i| {
            let mut v = d[i] * x[i];
            if i > 0 {
                v += e[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += e[i] * x[i + 1];
            }
            v
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Tridiagonal solve with partial pivoting; `lower[i]` is entry `(i+1, i)`,
/// `upper[i]` is entry `(i, i+1)`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut du = upper.to_vec();
    du.push(0.0);
    let mut du2 = vec![0.0; n];
    let mut dl = lower.to_vec();
    dl.push(0.0);
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = 1e-300;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = f;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
            dl[i] = f;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = 1e-300;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        if i + 1 < n {
            v -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= du2[i] * x[i + 2];
        }
        x[i] = v / d[i];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("singular tridiagonal system".into()));
    }
    Ok(x)
}

/// Symmetric block tridiagonal matrix; `off[i]` is block `(i, i + 1)`.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub diag: Vec<DMatrix<f64>>,
    pub off: Vec<DMatrix<f64>>,
}

impl BlockTridiagonal {
    pub fn zeros(blocks: usize, size: usize) -> Self {
        Self {
            diag: vec![DMatrix::zeros(size, size); blocks],
            off: vec![DMatrix::zeros(size, size); blocks.saturating_sub(1)],
        }
    }

    pub fn blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn block_size(&self) -> usize {
        self.diag.first().map_or(0, |d| d.nrows())
    }

    pub fn dim(&self) -> usize {
        self.blocks() * self.block_size()
    }

    pub fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.block_size();
        let mut y = DVector::zeros(self.dim());
        for i in 0..self.blocks() {
            let mut yi = y.rows_mut(i * n, n);
            yi.gemv(1.0, &self.diag[i], &x.rows(i * n, n), 0.0);
            if i + 1 < self.blocks() {
                yi.gemv(1.0, &self.off[i], &x.rows((i + 1) * n, n), 1.0);
            }
            if i > 0 {
                yi.gemv_tr(1.0, &self.off[i - 1], &x.rows((i - 1) * n, n), 1.0);
            }
        }
        y
    }

    /// `self - sigma * other`.
    pub fn shifted(&self, sigma: f64, other: &Self) -> Self {
        Self {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a - b * sigma).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| a - b * sigma).collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.block_size();
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.blocks() {
            m.view_mut((i * n, i * n), (n, n)).copy_from(&self.diag[i]);
            if i + 1 < self.blocks() {
                m.view_mut((i * n, (i + 1) * n), (n, n)).copy_from(&self.off[i]);
                m.view_mut(((i + 1) * n, i * n), (n, n)).copy_from(&self.off[i].transpose());
            }
        }
        m
    }

    pub fn cholesky(&self) -> Option<BlockCholesky> {
        let mut l = Vec::with_capacity(self.blocks());
        let mut w = Vec::with_capacity(self.off.len());
        let mut d = self.diag[0].clone();
        for i in 0..self.blocks() {
            let li = d.cholesky()?.l();
            if i + 1 < self.blocks() {
                let mut wi = self.off[i].clone();
                li.solve_lower_triangular_mut(&mut wi);
                d = &self.diag[i + 1] - wi.transpose() * &wi;
                w.push(wi);
            } else {
                d = DMatrix::zeros(0, 0);
            }
            l.push(li);
        }
        let _ = d;
        Some(BlockCholesky { l, w })
    }

    /// Number of negative eigenvalues, from the block LDL^T Schur complements.
    pub fn negative_count(&self) -> usize {
        let mut count = 0;
        let mut d = self.diag[0].clone();
        for i in 0..self.blocks() {
            let eig = SymmetricEigen::new(0.5 * (&d + d.transpose()));
            let scale = eig.eigenvalues.amax().max(1e-300);
            count += eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
            if i + 1 < self.blocks() {
                let inv: DVector<f64> = eig.eigenvalues.map(|v| {
                    let v = if v.abs() < 1e-15 * scale { -1e-15 * scale } else { v };
                    1.0 / v
                });
                let vt_c = eig.eigenvectors.transpose() * &self.off[i];
                let mut scaled = vt_c.clone();
                for (r, s) in inv.iter().enumerate() {
                    scaled.row_mut(r).scale_mut(*s);
                }
                d = &self.diag[i + 1] - vt_c.transpose() * scaled;
            }
        }
        count
    }
}

#[derive(Debug, Clone)]
pub struct BlockCholesky {
    l: Vec<DMatrix<f64>>,
    w: Vec<DMatrix<f64>>,
}

impl BlockCholesky {
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let nb = self.l.len();
        let n = self.l[0].nrows();
        let mut y = b.clone();
        for i in 0..nb {
            if i > 0 {
                let prev = y.rows((i - 1) * n, n).into_owned();
                y.rows_mut(i * n, n).gemv_tr(-1.0, &self.w[i - 1], &prev, 1.0);
            }
            let mut yi = y.rows(i * n, n).into_owned();
            self.l[i].solve_lower_triangular_mut(&mut yi);
            y.rows_mut(i * n, n).copy_from(&yi);
        }
        for i in (0..nb).rev() {
            if i + 1 < nb {
                let next = y.rows((i + 1) * n, n).into_owned();
                y.rows_mut(i * n, n).gemv(-1.0, &self.w[i], &next, 1.0);
            }
            let mut yi = y.rows(i * n, n).into_owned();
            self.l[i].tr_solve_lower_triangular_mut(&mut yi);
            y.rows_mut(i * n, n).copy_from(&yi);
        }
        y
    }
}

/// Eigenpairs of a block tridiagonal pencil.
#[derive(Debug, Clone)]
pub struct PencilEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
}

/// All eigenpairs of `(A, B)` strictly below `window`. `sigma` must lie below
/// the spectrum; it is lowered automatically if `A - sigma B` is not definite.
pub fn block_eigen_below(
    a: &BlockTridiagonal,
    b: &BlockTridiagonal,
    window: f64,
    sigma: f64,
    tol: f64,
) -> Result<PencilEigen> {
    let count = a.shifted(window, b).negative_count();
    if count == 0 {
        return Ok(PencilEigen { values: vec![], vectors: vec![] });
    }
    if a.dim() <= DENSE_LIMIT {
        let (vals, vecs) = generalized_dense(&a.to_dense(), &b.to_dense())?;
        return Ok(PencilEigen {
            values: vals[..count].to_vec(),
            vectors: (0..count).map(|j| vecs.column(j).into_owned()).collect(),
        });
    }
    let mut sigma = sigma;
    let mut chol = None;
    for _ in 0..30 {
        if let Some(c) = a.shifted(sigma, b).cholesky() {
            chol = Some(c);
            break;
        }
        sigma -= sigma.abs().max(1e-300);
    }
    let chol = chol.ok_or_else(|| Error::Eigensolver("could not find a definite shift".into()))?;
    lanczos(a, b, &chol, sigma, window, count, tol)
}

fn start_vector(n: usize, seed: u64) -> DVector<f64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ seed.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    DVector::from_fn(n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    })
}

fn lanczos(
    a: &BlockTridiagonal,
    b: &BlockTridiagonal,
    chol: &BlockCholesky,
    sigma: f64,
    window: f64,
    count: usize,
    tol: f64,
) -> Result<PencilEigen> {
    let n = a.dim();
    let theta_min = 1.0 / (window - sigma);
    let mut locked: Vec<(DVector<f64>, DVector<f64>)> = Vec::new();
    let mut restart = 0u64;
    let mut stalls = 0;
    while locked.len() < count {
        let need = count - locked.len();
        let m = (2 * need + 40 + 20 * stalls).min(n - locked.len());
        let mut q: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
        let mut bq: Vec<DVector<f64>> = Vec::with_capacity(m + 1);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);

        let mut v = start_vector(n, restart);
        restart += 1;
        for _ in 0..2 {
            for (x, bx) in &locked {
                let c = bx.dot(&v);
                v.axpy(-c, x, 1.0);
            }
        }
        let bv = b.mul(&v);
        let nv = v.dot(&bv).sqrt();
        q.push(v / nv);
        bq.push(bv / nv);

        let mut steps = 0;
        for j in 0..m {
            let mut w = chol.solve(&bq[j]);
            let aj = bq[j].dot(&w);
            w.axpy(-aj, &q[j], 1.0);
            if j > 0 {
                w.axpy(-beta[j - 1], &q[j - 1], 1.0);
            }
            for _ in 0..2 {
                for (x, bx) in &locked {
                    let c = bx.dot(&w);
                    w.axpy(-c, x, 1.0);
                }
                for (x, bx) in q.iter().zip(&bq) {
                    let c = bx.dot(&w);
                    w.axpy(-c, x, 1.0);
                }
            }
            alpha.push(aj);
            steps = j + 1;
            let bw = b.mul(&w);
            let bj = w.dot(&bw).max(0.0).sqrt();
            if bj <= 1e-14 * aj.abs() || j + 1 == m {
                beta.push(bj);
                break;
            }
            beta.push(bj);
            q.push(w / bj);
            bq.push(bw / bj);
        }

        let t = DMatrix::from_fn(steps, steps, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let last_beta = beta[steps - 1];
        let mut newly = 0;
        for i in 0..steps {
            let theta = eig.eigenvalues[i];
            if theta <= theta_min {
                continue;
            }
            let s = eig.eigenvectors.column(i);
            let res = (last_beta * s[steps - 1]).abs();
            if res > tol * theta {
                continue;
            }
            let mut x = DVector::zeros(n);
            for (k, qk) in q.iter().take(steps).enumerate() {
                x.axpy(s[k], qk, 1.0);
            }
            for _ in 0..2 {
                for (y, by) in &locked {
                    let c = by.dot(&x);
                    x.axpy(-c, y, 1.0);
                }
            }
            let bx = b.mul(&x);
            let nx = x.dot(&bx).sqrt();
            if !(nx > 0.5) {
                continue;
            }
            locked.push((x / nx, bx / nx));
            newly += 1;
            if locked.len() == count {
                break;
            }
        }
        if newly == 0 {
            stalls += 1;
            if stalls > 8 {
                return Err(Error::Eigensolver(format!(
                    "Lanczos stalled with {} of {} eigenpairs",
                    locked.len(),
                    count
                )));
            }
        }
    }
    let mut pairs: Vec<(f64, DVector<f64>)> = locked
        .into_iter()
        .map(|(x, bx)| {
            let ax = a.mul(&x);
            (x.dot(&ax) / x.dot(&bx), x)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(PencilEigen {
        values: pairs.iter().map(|p| p.0).collect(),
        vectors: pairs.into_iter().map(|p| p.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_pencil(n: usize) -> TridiagonalPencil {
        let hx = 1.0 / (n + 1) as f64;
        TridiagonalPencil {
            a_diag: vec![2.0 / hx; n],
            a_off: vec![-1.0 / hx; n - 1],
            b_diag: vec![4.0 * hx / 6.0; n],
            b_off: vec![hx / 6.0; n - 1],
        }
    }

    #[test]
    fn tridiagonal_bisection_matches_dense() {
        let p = laplacian_pencil(40);
        let a = DMatrix::from_fn(40, 40, |i, j| match i.abs_diff(j) {
            0 => p.a_diag[i],
            1 => p.a_off[i.min(j)],
            _ => 0.0,
        });
        let b = DMatrix::from_fn(40, 40, |i, j| match i.abs_diff(j) {
            0 => p.b_diag[i],
            1 => p.b_off[i.min(j)],
            _ => 0.0,
        });
        let (dense, _) = generalized_dense(&a, &b).unwrap();
        for k in 0..40 {
            let v = p.eigenvalue(k).unwrap();
            assert!((v - dense[k]).abs() < 1e-10 * dense[k].abs());
        }
        let x = p.eigenvector(dense[0]).unwrap();
        let ax = p.apply_a(&x);
        let bx = p.apply_b(&x);
        let r: f64 = ax.iter().zip(&bx).map(|(u, v)| (u - dense[0] * v).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-8);
    }

    #[test]
    fn tridiagonal_solver_with_pivoting() {
        let lower = [1.0, 5.0, 0.5];
        let diag = [1e-14, 2.0, 0.1, 3.0];
        let upper = [2.0, -1.0, 4.0];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut v = diag[i] * x_true[i];
                if i > 0 {
                    v += lower[i - 1] * x_true[i - 1];
                }
                if i < 3 {
                    v += upper[i] * x_true[i + 1];
                }
                v
            })
            .collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for i in 0..4 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    fn random_blocks(nb: usize, n: usize, seed: u64, spd: bool) -> BlockTridiagonal {
        let mut bt = BlockTridiagonal::zeros(nb, n);
        let mut r = start_vector(nb * n * n * 2, seed).into_iter().copied().collect::<Vec<_>>().into_iter();
        for i in 0..nb {
            let m = DMatrix::from_fn(n, n, |_, _| r.next().unwrap());
            bt.diag[i] = &m + m.transpose();
            if spd {
                bt.diag[i] += DMatrix::identity(n, n) * (4.0 * n as f64);
            }
            if i + 1 < nb {
                bt.off[i] = DMatrix::from_fn(n, n, |_, _| r.next().unwrap());
            }
        }
        bt
    }

    #[test]
    fn block_inertia_and_cholesky() {
        let a = random_blocks(6, 4, 1, false);
        let dense = a.to_dense();
        let eig = SymmetricEigen::new(dense.clone());
        let neg = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
        assert_eq!(a.negative_count(), neg);
        let spd = random_blocks(6, 4, 2, true);
        let chol = spd.cholesky().unwrap();
        let x = start_vector(24, 9);
        let y = chol.solve(&spd.mul(&x));
        assert!((y - x).norm() < 1e-10);
        assert!((spd.mul(&start_vector(24, 3)) - spd.to_dense() * start_vector(24, 3)).norm() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let a = random_blocks(30, 5, 4, false);
        let b = random_blocks(30, 5, 5, true);
        let (dense, _) = generalized_dense(&a.to_dense(), &b.to_dense()).unwrap();
        let window = dense[12] + 0.5 * (dense[13] - dense[12]);
        let lo = dense[0] - 1.0;
        let chol = a.shifted(lo, &b).cholesky().unwrap();
        let got = lanczos(&a, &b, &chol, lo, window, 13, 1e-12).unwrap();
        assert_eq!(got.values.len(), 13);
        for k in 0..13 {
            assert!((got.values[k] - dense[k]).abs() < 1e-9 * dense[k].abs().max(1.0), "{k}");
        }
    }
}
