//! Fourier-Galerkin discretization of `-div(eps^-1 grad u) = nu^2 u` with
//! Bloch quasimomentum `q`, in the basis `u = sum_G c_G e^{i (q+G).r}`.
//!
//! Two rules for the Fourier representation of `eps^-1` in the gradient
//! operator are available:
//!
//! * [`Factorization::Laurent`]: the plain Toeplitz matrix of `1/eps`. The
//!   discrete operator is an exact Galerkin restriction, so eigenvalues
//!   converge from above, but only like `1/N` for a discontinuous `eps`.
//! * [`Factorization::NormalVector`]: tangential field components use the
//!   Toeplitz matrix of `1/eps`, the normal component the inverse of the
//!   Toeplitz matrix of `eps`, with the normal field of the circle. This
//!   converges much faster for the same basis.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::bessel::jinc;
use super::dense::{matmul, spd_inverse, Mat};
use super::eigen::{lowest_eigenpair, symmetric_eigenvalues};
use crate::error::{EmhError, Result};
use crate::fieldexp::BlochParams;
use crate::lattice::LatticeSpec;

/// Smallest accepted reciprocal-lattice cutoff.
pub const MIN_CUTOFF: usize = 4;

/// Default reciprocal-lattice cutoff.
pub const DEFAULT_CUTOFF: usize = 12;

/// Default real-space grid for the normal-field Fourier coefficients.
pub const DEFAULT_NORMAL_GRID: usize = 256;

/// Largest allowed `max |M - M^T|` of the assembled matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factorization {
    Laurent,
    NormalVector,
}

impl Factorization {
    pub fn label(&self) -> &'static str {
        match self {
            Factorization::Laurent => "laurent",
            Factorization::NormalVector => "normal_vector",
        }
    }
}

/// Discretization settings for the plane-wave oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub cutoff: usize,
    pub factorization: Factorization,
    pub normal_grid: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            factorization: Factorization::NormalVector,
            normal_grid: DEFAULT_NORMAL_GRID,
        }
    }
}

impl OracleSettings {
    pub fn with_cutoff(cutoff: usize) -> Self {
        Self {
            cutoff,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.cutoff < MIN_CUTOFF {
            return Err(EmhError::Domain(format!(
                "plane-wave cutoff must be at least {MIN_CUTOFF}, got {}",
                self.cutoff
            )));
        }
        if self.factorization == Factorization::NormalVector && self.normal_grid <= 4 * self.cutoff {
            return Err(EmhError::Domain(format!(
                "normal-field grid {} must exceed 4 x cutoff = {}",
                self.normal_grid,
                4 * self.cutoff
            )));
        }
        Ok(())
    }
}

/// Reciprocal vectors `G = 2 pi (m / tau1, n / tau2)`, `|m|, |n| <= N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    cutoff: usize,
    indices: Vec<(i64, i64)>,
    g_vectors: Vec<[f64; 2]>,
}

impl PlaneWaveBasis {
    pub fn new(lattice: &LatticeSpec, cutoff: usize) -> Self {
        let n = cutoff as i64;
        let mut indices = Vec::with_capacity((2 * cutoff + 1).pow(2));
        for m in -n..=n {
            for k in -n..=n {
                indices.push((m, k));
            }
        }
        let g_vectors = indices
            .iter()
            .map(|&(m, k)| reciprocal(lattice, m, k))
            .collect();
        Self {
            cutoff,
            indices,
            g_vectors,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[(i64, i64)] {
        &self.indices
    }

    pub fn g_vectors(&self) -> &[[f64; 2]] {
        &self.g_vectors
    }

    /// Position of `G = 0`.
    pub fn zero_index(&self) -> usize {
        self.size() / 2
    }
}

fn reciprocal(lattice: &LatticeSpec, m: i64, n: i64) -> [f64; 2] {
    [TAU * m as f64 / lattice.tau1(), TAU * n as f64 / lattice.tau2()]
}

/// Fourier coefficient of a cylinder indicator scaled by `jump`:
/// `delta_G0 + jump f 2 J1(|G|a)/(|G|a)`.
fn step_coefficient(lattice: &LatticeSpec, g: [f64; 2], jump: f64) -> f64 {
    let f = lattice.fill_fraction();
    let ga = g[0].hypot(g[1]) * lattice.radius();
    let base = if ga == 0.0 { 1.0 } else { 0.0 };
    base + jump * f * jinc(ga)
}

/// Fourier coefficient of `1/eps(r)` at reciprocal vector `G`.
pub fn inv_eps_fourier(lattice: &LatticeSpec, g: [f64; 2]) -> f64 {
    step_coefficient(lattice, g, 1.0 / lattice.eps_in() - 1.0)
}

/// Fourier coefficient of `eps(r)` at reciprocal vector `G`.
pub fn eps_fourier(lattice: &LatticeSpec, g: [f64; 2]) -> f64 {
    step_coefficient(lattice, g, lattice.eps_in() - 1.0)
}

/// Coefficients on the difference grid `(dm, dn)`, `|dm|, |dn| <= 2N`.
struct DifferenceTable {
    span: i64,
    values: Vec<f64>,
}

impl DifferenceTable {
    fn new(cutoff: usize, f: impl Fn(i64, i64) -> f64 + Sync) -> Self {
        let span = 2 * cutoff as i64;
        let width = (2 * span + 1) as usize;
        let values = (0..width * width)
            .into_par_iter()
            .map(|idx| {
                let dm = (idx / width) as i64 - span;
                let dn = (idx % width) as i64 - span;
                f(dm, dn)
            })
            .collect();
        Self { span, values }
    }

    fn get(&self, dm: i64, dn: i64) -> f64 {
        let width = 2 * self.span + 1;
        self.values[((dm + self.span) * width + dn + self.span) as usize]
    }

    fn toeplitz(&self, basis: &PlaneWaveBasis) -> Mat {
        let idx = basis.indices();
        Mat::from_fn(basis.size(), |i, j| {
            self.get(idx[i].0 - idx[j].0, idx[i].1 - idx[j].1)
        })
    }
}

/// Fourier coefficients of `n_x^2`, `n_x n_y`, `n_y^2` for the radial unit
/// field, sampled on an `ng x ng` grid over the cell.
fn normal_field_tables(lattice: &LatticeSpec, cutoff: usize, ng: usize) -> [DifferenceTable; 3] {
    let wrap = |j: usize| {
        let c = j as f64 / ng as f64;
        if c >= 0.5 {
            c - 1.0
        } else {
            c
        }
    };
    let mut fields = [
        vec![Complex64::new(0.0, 0.0); ng * ng],
        vec![Complex64::new(0.0, 0.0); ng * ng],
        vec![Complex64::new(0.0, 0.0); ng * ng],
    ];
    for j in 0..ng {
        let x = wrap(j) * lattice.tau1();
        for k in 0..ng {
            let y = wrap(k) * lattice.tau2();
            let r = x.hypot(y);
            let (nx, ny) = if r == 0.0 { (0.0, 0.0) } else { (x / r, y / r) };
            fields[0][j * ng + k] = Complex64::new(nx * nx, 0.0);
            fields[1][j * ng + k] = Complex64::new(nx * ny, 0.0);
            fields[2][j * ng + k] = Complex64::new(ny * ny, 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(ng);
    let norm = 1.0 / (ng * ng) as f64;
    fields.map(|mut data| {
        fft2(&mut data, ng, &*fft);
        let at = |dm: i64, dn: i64| {
            let j = dm.rem_euclid(ng as i64) as usize;
            let k = dn.rem_euclid(ng as i64) as usize;
            data[j * ng + k].re
        };
        // Real even field: average G and -G to make the table exactly even.
        DifferenceTable::new(cutoff, |dm, dn| 0.5 * (at(dm, dn) + at(-dm, -dn)) * norm)
    })
}

fn fft2(data: &mut [Complex64], ng: usize, fft: &dyn rustfft::Fft<f64>) {
    for row in data.chunks_mut(ng) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); ng];
    for k in 0..ng {
        for j in 0..ng {
            col[j] = data[j * ng + k];
        }
        fft.process(&mut col);
        for j in 0..ng {
            data[j * ng + k] = col[j];
        }
    }
}

/// Lowest eigenvalues of the discrete Bloch operator.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending `nu^2` values.
    pub eigenvalues: Vec<f64>,
    /// `|H x - nu^2 x|` for the lowest mode.
    pub residual_norm: f64,
    pub basis_cutoff: usize,
    /// Plane-wave coefficients of the lowest mode (unit norm).
    pub lowest_vector: Vec<f64>,
}

/// The `q`-independent part of the discrete operator: `H(q) = P^T K P` with
/// `P = q + G` and a 2x2 block matrix `K`.
pub struct PlaneWaveOperator {
    lattice: LatticeSpec,
    basis: PlaneWaveBasis,
    settings: OracleSettings,
    kappa: DifferenceTable,
    kxx: Mat,
    kxy: Option<Mat>,
    kyy: Option<Mat>,
}

impl PlaneWaveOperator {
    pub fn new(lattice: &LatticeSpec, settings: OracleSettings) -> Result<Self> {
        settings.check()?;
        let basis = PlaneWaveBasis::new(lattice, settings.cutoff);
        let l = *lattice;
        let kappa = DifferenceTable::new(settings.cutoff, |dm, dn| {
            inv_eps_fourier(&l, reciprocal(&l, dm, dn))
        });
        let kap = kappa.toeplitz(&basis);
        let (kxx, kxy, kyy) = match settings.factorization {
            Factorization::Laurent => (kap, None, None),
            Factorization::NormalVector => {
                let eps_table = DifferenceTable::new(settings.cutoff, |dm, dn| {
                    eps_fourier(&l, reciprocal(&l, dm, dn))
                });
                let eps_inv = spd_inverse(&eps_table.toeplitz(&basis)).ok_or_else(|| {
                    EmhError::Convergence("permittivity Toeplitz matrix is not positive definite".into())
                })?;
                let n = basis.size();
                let d = Mat::from_fn(n, |i, j| eps_inv[(i, j)] - kap[(i, j)]);
                let [nxx, nxy, nyy] = normal_field_tables(lattice, settings.cutoff, settings.normal_grid);
                let blend = |table: &DifferenceTable, diag: bool| {
                    let x = matmul(&d, &table.toeplitz(&basis));
                    Mat::from_fn(n, |i, j| {
                        let base = if diag { kap[(i, j)] } else { 0.0 };
                        base + 0.5 * (x[(i, j)] + x[(j, i)])
                    })
                };
                (blend(&nxx, true), Some(blend(&nxy, false)), Some(blend(&nyy, true)))
            }
        };
        Ok(Self {
            lattice: *lattice,
            basis,
            settings,
            kappa,
            kxx,
            kxy,
            kyy,
        })
    }

    pub fn basis(&self) -> &PlaneWaveBasis {
        &self.basis
    }

    pub fn settings(&self) -> &OracleSettings {
        &self.settings
    }

    fn shifted(&self, q: [f64; 2]) -> (Vec<f64>, Vec<f64>) {
        let g = self.basis.g_vectors();
        (
            g.iter().map(|v| q[0] + v[0]).collect(),
            g.iter().map(|v| q[1] + v[1]).collect(),
        )
    }

    /// Assembled matrix `H(q)`.
    pub fn matrix(&self, q: [f64; 2]) -> Mat {
        let (px, py) = self.shifted(q);
        let n = self.basis.size();
        match (&self.kxy, &self.kyy) {
            (Some(kxy), Some(kyy)) => Mat::from_fn(n, |i, j| {
                (px[i] * px[j]) * self.kxx[(i, j)]
                    + (px[i] * py[j] + py[i] * px[j]) * kxy[(i, j)]
                    + (py[i] * py[j]) * kyy[(i, j)]
            }),
            _ => Mat::from_fn(n, |i, j| (px[i] * px[j] + py[i] * py[j]) * self.kxx[(i, j)]),
        }
    }

    fn check_zone(&self, q: [f64; 2]) -> Result<()> {
        let lim = [
            std::f64::consts::PI / self.lattice.tau1(),
            std::f64::consts::PI / self.lattice.tau2(),
        ];
        if q[0].abs() > lim[0] * (1.0 + 1e-12) || q[1].abs() > lim[1] * (1.0 + 1e-12) {
            return Err(EmhError::Domain(format!(
                "quasimomentum ({}, {}) lies outside the first Brillouin zone",
                q[0], q[1]
            )));
        }
        Ok(())
    }

    /// The `n_modes` smallest eigenvalues at quasimomentum `bloch`.
    pub fn eigenvalues(&self, bloch: &BlochParams, n_modes: usize) -> Result<EigenResult> {
        let q = bloch.q_vector();
        self.check_zone(q)?;
        let n = self.basis.size();
        if n_modes == 0 || n_modes > n {
            return Err(EmhError::Domain(format!(
                "n_modes must be in 1..={n}, got {n_modes}"
            )));
        }
        let h = self.matrix(q);
        let asym = h.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(EmhError::NonHermitian(asym));
        }
        let mut start = vec![0.0; n];
        start[self.basis.zero_index()] = 1.0;
        let lowest = lowest_eigenpair(&h, -1.0, &start)?;
        let (mut eigenvalues, lowest) = match (lowest, n_modes) {
            (Some(pair), 1) => (vec![pair.value], pair),
            (found, _) => {
                let all = symmetric_eigenvalues(&h)?;
                let pair = match found {
                    Some(p) => p,
                    None => lowest_eigenpair(&h, all[0] - 1e-6 * (1.0 + all[0].abs()), &start)?
                        .ok_or_else(|| {
                            EmhError::Convergence("shifted operator not positive definite".into())
                        })?,
                };
                (all[..n_modes].to_vec(), pair)
            }
        };
        eigenvalues[0] = lowest.value;
        Ok(EigenResult {
            eigenvalues,
            residual_norm: lowest.residual_norm,
            basis_cutoff: self.settings.cutoff,
            lowest_vector: lowest.vector,
        })
    }

    /// `(int eps^-1 |grad u|^2, int |u|^2)` per unit cell area for the field
    /// with plane-wave coefficients `c`, using the Fourier series of `1/eps`
    /// (a convolution, independent of the assembled matrix).
    pub fn energy_and_mass(&self, bloch: &BlochParams, c: &[f64]) -> (f64, f64) {
        let (px, py) = self.shifted(bloch.q_vector());
        let idx = self.basis.indices();
        let gx: Vec<f64> = px.iter().zip(c).map(|(p, v)| p * v).collect();
        let gy: Vec<f64> = py.iter().zip(c).map(|(p, v)| p * v).collect();
        let terms: Vec<f64> = (0..c.len())
            .into_par_iter()
            .map(|i| {
                let (mut fx, mut fy) = (0.0, 0.0);
                for j in 0..c.len() {
                    let k = self.kappa.get(idx[i].0 - idx[j].0, idx[i].1 - idx[j].1);
                    fx += k * gx[j];
                    fy += k * gy[j];
                }
                gx[i] * fx + gy[i] * fy
            })
            .collect();
        let energy: f64 = terms.iter().sum();
        let mass = c.iter().map(|v| v * v).sum();
        (energy, mass)
    }
}

/// Smallest `n_modes` eigenvalues with the default discretization.
pub fn bloch_eigenvalues(
    lattice: &LatticeSpec,
    bloch: &BlochParams,
    cutoff: usize,
    n_modes: usize,
) -> Result<EigenResult> {
    PlaneWaveOperator::new(lattice, OracleSettings::with_cutoff(cutoff))?.eigenvalues(bloch, n_modes)
}
