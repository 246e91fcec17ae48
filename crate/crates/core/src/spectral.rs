//! Eigendecomposition and resolvent-based observables of a single matrix
//! draw: empirical Stieltjes transform, Green matrix, exact identity
//! residuals, local-law scans and eigenvalue counting.

use std::f64::consts::PI;
use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::MatrixSample;
use crate::error::{Error, Result};
use crate::refined_law::{quartic, solve_w, ComplexUpper, LawParams, SolveMode};

/// Largest dimension for which [`green_matrix`] builds the full resolvent.
pub const GREEN_MATRIX_MAX_N: usize = 500;

/// Default exponent of the finite-N proxy for stochastic domination:
/// `X ≺ Y` is checked as `X <= N^0.15 · Y`.
pub const DOMINATION_EXPONENT: f64 = 0.15;

/// Eigenvalues sorted descending, optionally with orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    n: usize,
    eigenvalues: Vec<f64>,
    /// `vectors[a * n + i]` is component `i` of the eigenvector of `eigenvalues[a]`.
    vectors: Option<Vec<f64>>,
}

impl SpectralSample {
    /// Spectrum from raw eigenvalues (sorted here); no eigenvectors.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptyInput("eigenvalues"));
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("eigenvalues must be finite"));
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            n: eigenvalues.len(),
            eigenvalues,
            vectors: None,
        })
    }

    /// Spectrum with eigenvectors; `vectors[a]` belongs to `eigenvalues[a]`.
    /// Pairs are reordered so eigenvalues are descending.
    pub fn from_parts(eigenvalues: Vec<f64>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let n = eigenvalues.len();
        if n == 0 {
            return Err(Error::EmptyInput("eigenvalues"));
        }
        if vectors.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: vectors.len(),
            });
        }
        if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
        Ok(Self {
            n,
            eigenvalues: order.iter().map(|&a| eigenvalues[a]).collect(),
            vectors: Some(order.iter().flat_map(|&a| vectors[a].iter().copied()).collect()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `λ_1 >= λ_2 >= … >= λ_N`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `k`-th largest eigenvalue, 1-based.
    pub fn lambda(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.eigenvalues.get(i).copied())
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    /// Eigenvector belonging to `eigenvalues()[a]`.
    pub fn vector(&self, a: usize) -> Option<&[f64]> {
        self.vectors
            .as_ref()
            .map(|v| &v[a * self.n..(a + 1) * self.n])
    }
}

/// Full symmetric eigendecomposition of `h`.
pub fn eigen(h: &MatrixSample, want_vectors: bool) -> Result<SpectralSample> {
    let n = h.n();
    let mat = Mat::<f64>::from_fn(n, n, |i, j| h.get(i, j));
    if want_vectors {
        let evd = mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::SolverFailure(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        // faer returns ascending order
        let mut eigenvalues = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * n);
        for a in (0..n).rev() {
            eigenvalues.push(s[a]);
            vectors.extend((0..n).map(|i| u[(i, a)]));
        }
        check_finite(&eigenvalues)?;
        Ok(SpectralSample {
            n,
            eigenvalues,
            vectors: Some(vectors),
        })
    } else {
        let mut eigenvalues = mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::SolverFailure(format!("{e:?}")))?;
        check_finite(&eigenvalues)?;
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Ok(SpectralSample {
            n,
            eigenvalues,
            vectors: None,
        })
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::SolverFailure("non-finite eigenvalue".into()))
    }
}

/// `m(z) = (1/N) Σ 1/(λ_i - z)`.
pub fn empirical_m(spec: &SpectralSample, z: ComplexUpper) -> Complex64 {
    let z = z.to_complex();
    let sum: Complex64 = spec.eigenvalues.iter().map(|&l| (l - z).inv()).sum();
    sum / spec.n as f64
}

/// Resolvent `G = (H - z)^{-1}` with its normalized trace.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    pub z: ComplexUpper,
    n: usize,
    entries: Vec<Complex64>,
    /// `(1/N) tr G`.
    pub m: Complex64,
}

impl GreenMatrix {
    /// Builds `G = U diag(1/(λ - z)) Uᵀ` from an eigendecomposition.
    pub fn from_spectrum(spec: &SpectralSample, z: ComplexUpper) -> Result<Self> {
        let n = spec.n;
        if n > GREEN_MATRIX_MAX_N {
            return Err(Error::SizeLimitExceeded {
                n,
                limit: GREEN_MATRIX_MAX_N,
            });
        }
        let vectors = spec.vectors.as_ref().ok_or(Error::MissingVectors)?;
        let zc = z.to_complex();
        let weights: Vec<Complex64> = spec.eigenvalues.iter().map(|&l| (l - zc).inv()).collect();
        let u = Mat::<f64>::from_fn(n, n, |i, a| vectors[a * n + i]);
        let scaled_re = Mat::<f64>::from_fn(n, n, |i, a| u[(i, a)] * weights[a].re);
        let scaled_im = Mat::<f64>::from_fn(n, n, |i, a| u[(i, a)] * weights[a].im);
        let g_re = &scaled_re * u.transpose();
        let g_im = &scaled_im * u.transpose();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(Complex64::new(g_re[(i, j)], g_im[(i, j)]));
            }
        }
        let trace: Complex64 = (0..n).map(|i| entries[i * n + i]).sum();
        Ok(Self {
            z,
            n,
            entries,
            m: trace / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }
}

pub fn green_matrix(h: &MatrixSample, z: ComplexUpper) -> Result<GreenMatrix> {
    if h.n() > GREEN_MATRIX_MAX_N {
        return Err(Error::SizeLimitExceeded {
            n: h.n(),
            limit: GREEN_MATRIX_MAX_N,
        });
    }
    GreenMatrix::from_spectrum(&eigen(h, true)?, z)
}

/// `max_k |(1/N) Σ_i |G_ik|² - Im G_kk / (N η)|`.
pub fn ward_residual(g: &GreenMatrix) -> f64 {
    let n = g.n;
    let nf = n as f64;
    let eta = g.z.im();
    (0..n)
        .map(|k| {
            let lhs: f64 = (0..n).map(|i| g.get(i, k).norm_sqr()).sum::<f64>() / nf;
            (lhs - g.get(k, k).im / (nf * eta)).abs()
        })
        .fold(0.0, f64::max)
}

/// `max_i |1 + z G_ii - Σ_k H_ik G_ki|`.
pub fn resolvent_identity_residual(h: &MatrixSample, g: &GreenMatrix) -> Result<f64> {
    if h.n() != g.n {
        return Err(Error::DimensionMismatch {
            expected: h.n(),
            found: g.n,
        });
    }
    let n = g.n;
    let z = g.z.to_complex();
    Ok((0..n)
        .map(|i| {
            let row = h.row(i);
            let hg: Complex64 = (0..n).map(|k| row[k] * g.get(k, i)).sum();
            (1.0 + z * g.get(i, i) - hg).norm()
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLawRow {
    pub e: f64,
    pub eta: f64,
    pub m: Complex64,
    pub mtilde: Complex64,
    pub lambda_err: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Comparison of the empirical Stieltjes transform with the refined law on a
/// grid of spectral parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalLawReport {
    pub n: usize,
    pub rows: Vec<LocalLawRow>,
}

pub const LOCAL_LAW_CSV_HEADER: &str = "E,eta,re_m,im_m,re_mtilde,im_mtilde,lambda_err,bound,ratio";

impl LocalLawReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{LOCAL_LAW_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.e, r.eta, r.m.re, r.m.im, r.mtilde.re, r.mtilde.im, r.lambda_err, r.bound, r.ratio
            )?;
        }
        Ok(())
    }

    /// Fraction of rows with `ratio <= threshold`.
    pub fn fraction_within(&self, threshold: f64) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        self.rows.iter().filter(|r| r.ratio <= threshold).count() as f64 / self.rows.len() as f64
    }
}

/// Uniform `E` grid of 50 points over `[-3 + 1e-3, 3 - 1e-3]` crossed with a
/// geometric `η` grid of 20 points from `1/N` to 3.
pub fn default_grid(n: usize) -> Vec<(f64, f64)> {
    grid(n, 50, 20)
}

pub fn grid(n: usize, e_points: usize, eta_points: usize) -> Vec<(f64, f64)> {
    let e_lo = -3.0 + 1e-3;
    let e_hi = 3.0 - 1e-3;
    let eta_lo = 1.0 / n as f64;
    let eta_hi = 3.0f64;
    let mut out = Vec::with_capacity(e_points * eta_points);
    for i in 0..e_points {
        let e = if e_points == 1 {
            0.0
        } else {
            e_lo + (e_hi - e_lo) * i as f64 / (e_points - 1) as f64
        };
        for j in 0..eta_points {
            let eta = if eta_points == 1 {
                eta_hi
            } else {
                eta_lo * (eta_hi / eta_lo).powf(j as f64 / (eta_points - 1) as f64)
            };
            out.push((e, eta));
        }
    }
    out
}

pub fn local_law_scan(
    spec: &SpectralSample,
    law: &LawParams,
    grid: &[(f64, f64)],
    mode: SolveMode,
) -> Result<LocalLawReport> {
    let rows = grid
        .iter()
        .map(|&(e, eta)| {
            let z = ComplexUpper::new(e, eta)?;
            let m = empirical_m(spec, z);
            let mtilde = solve_w(law, z, mode)?;
            let lambda_err = (m - mtilde).norm();
            let bound = law.local_law_bound(spec.n, eta);
            Ok(LocalLawRow {
                e,
                eta,
                m,
                mtilde,
                lambda_err,
                bound,
                ratio: lambda_err / bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalLawReport { n: spec.n, rows })
}

/// `|{i : E1 < λ_i <= E2}| / N`.
pub fn eigenvalue_counting(spec: &SpectralSample, e1: f64, e2: f64) -> f64 {
    let count = spec.eigenvalues.iter().filter(|&&l| e1 < l && l <= e2).count();
    count as f64 / spec.n as f64
}

/// `θ_η(y) = η / (π (y² + η²))`.
pub fn theta(eta: f64, y: f64) -> f64 {
    eta / (PI * (y * y + eta * eta))
}

/// `(1/N) Σ θ_η(λ_i - E)`, equal to `Im m(E + iη) / π`.
pub fn smoothed_count(spec: &SpectralSample, e: f64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::invalid(format!("eta = {eta} must be positive")));
    }
    let sum: f64 = spec.eigenvalues.iter().map(|&l| theta(eta, l - e)).sum();
    Ok(sum / spec.n as f64)
}

/// `P(m) = 1 + z m + m² + c4 m⁴` for the law's quartic coefficient.
pub fn eval_p(law: &LawParams, z: ComplexUpper, m: Complex64) -> Complex64 {
    quartic(law.c4(), z.to_complex(), m)
}

/// `max_{α, i} |u_α(i)|`.
pub fn delocalization_stat(spec: &SpectralSample) -> Result<f64> {
    let v = spec.vectors.as_ref().ok_or(Error::MissingVectors)?;
    Ok(v.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// Finite-N proxy for `x ≺ y`: `x <= N^exponent · y`.
pub fn dominated(x: f64, y: f64, n: usize, exponent: f64) -> bool {
    x <= (n as f64).powf(exponent) * y
}
