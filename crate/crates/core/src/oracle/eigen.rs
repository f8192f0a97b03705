//! Symmetric eigensolvers: Householder tridiagonalization with implicit QL
//! for full spectra, and shifted inverse iteration for the lowest pair.

use super::dense::{cholesky, cholesky_solve, Mat};
use crate::error::{EmhError, Result};

/// QL sweeps allowed per eigenvalue.
pub const MAX_QL_SWEEPS: usize = 30;

/// Inverse-iteration steps allowed for the lowest pair.
pub const MAX_INVERSE_STEPS: usize = 200;

/// Householder reduction to tridiagonal form; returns `(diagonal, subdiagonal)`
/// with `sub[0] = 0` and `sub[i]` coupling `i - 1` and `i`.
fn tridiagonalize(m: &Mat) -> (Vec<f64>, Vec<f64>) {
    let n = m.n();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i)[..=i].to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        if l == 0 {
            e[i] = a[i][l];
            continue;
        }
        let scale: f64 = a[i][..=l].iter().map(|v| v.abs()).sum();
        if scale == 0.0 {
            e[i] = a[i][l];
            continue;
        }
        let mut h = 0.0;
        for v in a[i][..=l].iter_mut() {
            *v /= scale;
            h += *v * *v;
        }
        let f = a[i][l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        a[i][l] = f - g;
        let u: Vec<f64> = a[i][..=l].to_vec();

        // p = A u / h using the stored lower triangle, row access only.
        let mut p = vec![0.0; l + 1];
        for j in 0..=l {
            let row = &a[j];
            let mut s = row[j] * u[j];
            for k in 0..j {
                s += row[k] * u[k];
                p[k] += row[k] * u[j];
            }
            p[j] += s;
        }
        let mut f = 0.0;
        for j in 0..=l {
            p[j] /= h;
            f += p[j] * u[j];
        }
        let hh = f / (h + h);
        for j in 0..=l {
            p[j] -= hh * u[j];
        }
        for j in 0..=l {
            let (fj, gj) = (u[j], p[j]);
            let row = &mut a[j];
            for k in 0..=j {
                row[k] -= fj * p[k] + gj * u[k];
            }
        }
    }
    for i in 0..n {
        d[i] = a[i][i];
    }
    (d, e)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_QL_SWEEPS {
                return Err(EmhError::Iteration(MAX_QL_SWEEPS));
            }
            iter += 1;
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Mat) -> Result<Vec<f64>> {
    let (d, e) = tridiagonalize(m);
    tridiagonal_eigenvalues(d, e)
}

/// Lowest eigenpair found by inverse iteration on `M - shift I`.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual_norm: f64,
}

/// Inverse iteration with a Cholesky factor of `M - shift I`; `shift` must
/// lie below the spectrum. Returns `None` if the shifted matrix is not
/// positive definite.
pub fn lowest_eigenpair(m: &Mat, shift: f64, start: &[f64]) -> Result<Option<Eigenpair>> {
    let n = m.n();
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= shift;
    }
    let Some(l) = cholesky(&shifted) else {
        return Ok(None);
    };
    let scale = m.max_abs().max(1.0);
    let mut x = start.to_vec();
    normalize(&mut x);
    let mut value = m.quadratic_form(&x);
    for _ in 0..MAX_INVERSE_STEPS {
        cholesky_solve(&l, &mut x);
        normalize(&mut x);
        let mx = m.matvec(&x);
        let next: f64 = mx.iter().zip(&x).map(|(a, b)| a * b).sum();
        let residual = mx
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - next * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let settled = (next - value).abs() <= 1e-15 * scale;
        value = next;
        if settled && residual <= 1e-12 * scale {
            return Ok(Some(Eigenpair {
                value,
                vector: x,
                residual_norm: residual,
            }));
        }
    }
    Err(EmhError::Iteration(MAX_INVERSE_STEPS))
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Mat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    #[test]
    fn diagonal_spectrum() {
        let mut m = Mat::zeros(5);
        for (i, v) in [3.0, -1.0, 2.0, 0.5, 7.0].iter().enumerate() {
            m[(i, i)] = *v;
        }
        assert_eq!(symmetric_eigenvalues(&m).unwrap(), vec![-1.0, 0.5, 2.0, 3.0, 7.0]);
    }

    #[test]
    fn known_tridiagonal_spectrum() {
        // 1D Dirichlet Laplacian: 2 - 2 cos(k pi / (n + 1)).
        let n = 40;
        let m = Mat::from_fn(n, |i, j| {
            if i == j {
                2.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let ev = symmetric_eigenvalues(&m).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - want).abs() < 1e-13);
        }
    }

    #[test]
    fn invariants_of_random_matrix() {
        let n = 60;
        let m = random_symmetric(n, 7);
        let ev = symmetric_eigenvalues(&m).unwrap();
        let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
        assert!((ev.iter().sum::<f64>() - trace).abs() < 1e-11);
        let frob: f64 = (0..n).flat_map(|i| m.row(i).to_vec()).map(|v| v * v).sum();
        assert!((ev.iter().map(|v| v * v).sum::<f64>() - frob).abs() < 1e-10);
        let start = vec![1.0; n];
        let low = lowest_eigenpair(&m, ev[0] - 1.0, &start).unwrap().unwrap();
        assert!((low.value - ev[0]).abs() < 1e-12);
        assert!(low.residual_norm < 1e-9);
    }

    #[test]
    fn shift_above_spectrum_is_rejected() {
        let m = Mat::identity(4);
        assert!(lowest_eigenpair(&m, 2.0, &[1.0; 4]).unwrap().is_none());
    }
}
