//! Row-major dense real matrices and the few kernels the oracle needs.

use rayon::prelude::*;

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

const ROW_BLOCK: usize = 8;

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Fills entry `(i, j)` with `f(i, j)`, rows in parallel.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| self.data[j * n + i])
    }

    /// `max |M_ij - M_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        worst
    }

    /// `(M + M^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| 0.5 * (self.data[i * n + j] + self.data[j * n + i]))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x^T M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `A B`, blocked over output rows so each row of `B` is reused.
pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.n;
    assert_eq!(n, b.n);
    let mut out = vec![0.0; n * n];
    if n == 0 {
        return Mat { n, data: out };
    }
    out.par_chunks_mut(ROW_BLOCK * n)
        .enumerate()
        .for_each(|(blk, chunk)| {
            let i0 = blk * ROW_BLOCK;
            let rows = chunk.len() / n;
            for k in 0..n {
                let brow = &b.data[k * n..(k + 1) * n];
                for r in 0..rows {
                    let aik = a.data[(i0 + r) * n + k];
                    if aik == 0.0 {
                        continue;
                    }
                    let orow = &mut chunk[r * n..(r + 1) * n];
                    for (o, bv) in orow.iter_mut().zip(brow) {
                        *o += aik * bv;
                    }
                }
            }
        });
    Mat { n, data: out }
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// if a nonpositive pivot appears.
pub fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.n;
    let mut l = Mat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let (li, lj) = (i * n, j * n);
            let dot: f64 = l.data[li..li + j]
                .iter()
                .zip(&l.data[lj..lj + j])
                .map(|(x, y)| x * y)
                .sum();
            let v = a.data[li + j] - dot;
            if i == j {
                if !(v > 0.0) {
                    return None;
                }
                l.data[li + i] = v.sqrt();
            } else {
                l.data[li + j] = v / l.data[lj + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` in place.
pub fn cholesky_solve(l: &Mat, x: &mut [f64]) {
    let n = l.n;
    for i in 0..n {
        let row = l.row(i);
        let s: f64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
        x[i] = (x[i] - s) / row[i];
    }
    for i in (0..n).rev() {
        x[i] /= l.data[i * n + i];
        let xi = x[i];
        let row = l.row(i);
        for k in 0..i {
            x[k] -= row[k] * xi;
        }
    }
}

/// Inverse of a symmetric positive definite matrix via `L^-T L^-1`.
pub fn spd_inverse(a: &Mat) -> Option<Mat> {
    let l = cholesky(a)?;
    let n = a.n;
    // Columns of L^-1, stored as rows (i.e. L^-T).
    let mut linv_t = vec![0.0; n * n];
    linv_t.par_chunks_mut(n).enumerate().for_each(|(j, col)| {
        col[j] = 1.0 / l.data[j * n + j];
        for i in j + 1..n {
            let row = l.row(i);
            let s: f64 = row[j..i].iter().zip(&col[j..i]).map(|(a, b)| a * b).sum();
            col[i] = -s / row[i];
        }
    });
    let lt = Mat { n, data: linv_t };
    // A^-1 = L^-T L^-1 = lt * lt^T
    Some(matmul(&lt, &lt.transpose()).symmetrized())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Mat {
        Mat::from_fn(n, |i, j| {
            let d = (i as f64 - j as f64).abs();
            1.0 / (1.0 + d) + if i == j { n as f64 } else { 0.0 }
        })
    }

    #[test]
    fn matmul_matches_naive() {
        let n = 19;
        let a = Mat::from_fn(n, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0);
        let b = Mat::from_fn(n, |i, j| ((i * 2 + j * 5) % 13) as f64 * 0.5);
        let c = matmul(&a, &b);
        for i in 0..n {
            for j in 0..n {
                let want: f64 = (0..n).map(|k| a[(i, k)] * b[(k, j)]).sum();
                assert!((c[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_and_solve() {
        let a = spd(23);
        let inv = spd_inverse(&a).unwrap();
        let p = matmul(&a, &inv);
        for i in 0..23 {
            for j in 0..23 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - want).abs() < 1e-13);
            }
        }
        let l = cholesky(&a).unwrap();
        let b: Vec<f64> = (0..23).map(|i| i as f64).collect();
        let mut x = b.clone();
        cholesky_solve(&l, &mut x);
        let ax = a.matvec(&x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = Mat::identity(3);
        a[(1, 1)] = -1.0;
        assert!(cholesky(&a).is_none());
    }
}
