//! Random matrix ensembles: Erdős–Rényi adjacency (raw and centered),
//! diluted Wigner, a generic three-point sparse law, zero-diagonal GOE and
//! the Dyson interpolation between a sparse matrix and GOE.
//!
//! All generators fill the strict upper triangle row by row from a single
//! [`RngStream`] and mirror it, so symmetry and the zero diagonal hold
//! bitwise and a fixed stream always yields the same matrix.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Adjacency,
    CenteredEr,
    DilutedWigner,
    SparseGeneric,
    GoeZeroDiag,
    Flow,
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::Adjacency => "adjacency",
            EnsembleKind::CenteredEr => "centered-er",
            EnsembleKind::DilutedWigner => "diluted-wigner",
            EnsembleKind::SparseGeneric => "sparse-generic",
            EnsembleKind::GoeZeroDiag => "goe-zero-diag",
            EnsembleKind::Flow => "flow",
        }
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Size and sparsity of an ensemble together with the normalized cumulants
/// `s3`, `s4` of its off-diagonal entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityProfile {
    pub n: usize,
    pub q: f64,
    pub p: Option<f64>,
    pub s3: f64,
    pub s4: f64,
}

impl SparsityProfile {
    /// Profile of the centered Erdős–Rényi ensemble, `q = sqrt(N p)`.
    pub fn centered_er(n: usize, p: f64) -> Result<Self> {
        check_np(n, p)?;
        Ok(Self {
            n,
            q: (n as f64 * p).sqrt(),
            p: Some(p),
            s3: exact_s_k(p, 3)?,
            s4: exact_s_k(p, 4)?,
        })
    }

    /// Profile of the diluted Wigner ensemble with symmetric ±1 values.
    pub fn diluted_wigner(n: usize, p: f64) -> Result<Self> {
        check_np(n, p)?;
        Ok(Self {
            n,
            q: (n as f64 * p).sqrt(),
            p: Some(p),
            s3: 0.0,
            s4: 1.0 - 3.0 * p,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("N must be positive"));
        }
        if !(self.q > 0.0) || self.q > (self.n as f64).sqrt() * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "q = {} must satisfy 0 < q <= sqrt(N) = {}",
                self.q,
                (self.n as f64).sqrt()
            )));
        }
        if let Some(p) = self.p {
            let np = self.n as f64 * p;
            if !(p > 0.0 && p < 1.0) || (self.q * self.q - np).abs() > 1e-12 * np {
                return Err(Error::invalid(format!(
                    "p = {p} is inconsistent with q^2 = N p (q = {})",
                    self.q
                )));
            }
        }
        Ok(())
    }
}

/// A dense real symmetric matrix with vanishing diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    n: usize,
    entries: Vec<f64>,
    kind: EnsembleKind,
    seed: u64,
    t: f64,
}

impl MatrixSample {
    /// Wraps a row-major matrix, checking symmetry and the zero diagonal exactly.
    pub fn from_dense(n: usize, entries: Vec<f64>, kind: EnsembleKind, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("N must be positive"));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("diagonal entry ({i},{i}) is nonzero")));
            }
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::invalid(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self {
            n,
            entries,
            kind,
            seed,
            t: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Flow time; zero unless produced by [`dyson_flow`].
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Strict upper triangle, row by row.
    pub fn upper_entries(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| self.row(i)[i + 1..].iter().copied())
    }

    /// Number of nonzero entries in the strict upper triangle.
    pub fn edge_count(&self) -> usize {
        self.upper_entries().filter(|&x| x != 0.0).count()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Same nonzero pattern with every off-diagonal nonzero replaced by `value`.
    pub fn with_pattern_value(&self, value: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&x| if x != 0.0 { value } else { 0.0 })
            .collect();
        Self {
            entries,
            ..self.clone()
        }
    }
}

fn check_np(n: usize, p: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("N = {n} must be at least 2")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p = {p} must lie in (0, 1)")));
    }
    Ok(())
}

fn fill_symmetric(
    n: usize,
    kind: EnsembleKind,
    stream: RngStream,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> MatrixSample {
    let mut rng = stream.rng();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let x = draw(&mut rng);
            entries[i * n + j] = x;
            entries[j * n + i] = x;
        }
    }
    MatrixSample {
        n,
        entries,
        kind,
        seed: stream.master_seed,
        t: 0.0,
    }
}

/// Rescaled Erdős–Rényi adjacency matrix: each edge carries `1/sqrt(N p (1-p))`.
pub fn sample_adjacency(n: usize, p: f64, stream: RngStream) -> Result<MatrixSample> {
    check_np(n, p)?;
    let value = 1.0 / (n as f64 * p * (1.0 - p)).sqrt();
    Ok(fill_symmetric(n, EnsembleKind::Adjacency, stream, |rng| {
        if rng.random::<f64>() < p {
            value
        } else {
            0.0
        }
    }))
}

/// Centered Erdős–Rényi matrix `Ã = A - E A` (off the diagonal).
pub fn sample_centered_er(n: usize, p: f64, stream: RngStream) -> Result<MatrixSample> {
    check_np(n, p)?;
    let scale = 1.0 / (n as f64 * p * (1.0 - p)).sqrt();
    let hi = (1.0 - p) * scale;
    let lo = -p * scale;
    Ok(fill_symmetric(n, EnsembleKind::CenteredEr, stream, |rng| {
        if rng.random::<f64>() < p {
            hi
        } else {
            lo
        }
    }))
}

/// Diluted Wigner matrix `D_ij = B_ij V_ij` with Bernoulli `B` of height
/// `1/sqrt(N p)` and symmetric ±1 values `V`.
pub fn sample_diluted_wigner(n: usize, p: f64, stream: RngStream) -> Result<MatrixSample> {
    check_np(n, p)?;
    let height = 1.0 / (n as f64 * p).sqrt();
    Ok(fill_symmetric(n, EnsembleKind::DilutedWigner, stream, |rng| {
        let keep = rng.random::<f64>() < p;
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        if keep {
            sign * height
        } else {
            0.0
        }
    }))
}

/// GOE with vanishing diagonal: off-diagonal entries `N(0, 1/N)`.
pub fn sample_goe_zero_diag(n: usize, stream: RngStream) -> Result<MatrixSample> {
    if n < 2 {
        return Err(Error::invalid(format!("N = {n} must be at least 2")));
    }
    let sd = 1.0 / (n as f64).sqrt();
    Ok(fill_symmetric(n, EnsembleKind::GoeZeroDiag, stream, |rng| {
        let g: f64 = rng.sample(StandardNormal);
        sd * g
    }))
}

/// Two-block stochastic block model adjacency matrix. Vertices `0..n/2` form
/// the first block. Nonzeros carry `1/sqrt(N p̄ (1-p̄))` where `p̄` is the mean
/// edge probability of the model.
pub fn sample_two_block_sbm(
    n: usize,
    p_in: f64,
    p_out: f64,
    stream: RngStream,
) -> Result<MatrixSample> {
    check_np(n, p_in)?;
    check_np(n, p_out)?;
    let half = n / 2;
    let pairs = (n * (n - 1) / 2) as f64;
    let same = (half * half.saturating_sub(1) / 2 + (n - half) * (n - half - 1) / 2) as f64;
    let p_mean = (same * p_in + (pairs - same) * p_out) / pairs;
    let value = 1.0 / (n as f64 * p_mean * (1.0 - p_mean)).sqrt();

    let mut rng = stream.rng();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let p = if (i < half) == (j < half) { p_in } else { p_out };
            if rng.random::<f64>() < p {
                entries[i * n + j] = value;
                entries[j * n + i] = value;
            }
        }
    }
    Ok(MatrixSample {
        n,
        entries,
        kind: EnsembleKind::Adjacency,
        seed: stream.master_seed,
        t: 0.0,
    })
}

/// Three-point entry law `{+u, 0, -v}` matching prescribed normalized
/// cumulants: mean 0, variance `1/N`, `κ3 = s3/(N q)`, `κ4 = s4/(N q²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreePointLaw {
    pub up: f64,
    pub down: f64,
    pub p_up: f64,
    pub p_down: f64,
}

impl ThreePointLaw {
    pub fn from_cumulants(n: usize, q: f64, s3: f64, s4: f64) -> Result<Self> {
        if n < 2 || !(q > 0.0) {
            return Err(Error::invalid(format!("need N >= 2 and q > 0 (N = {n}, q = {q})")));
        }
        let nf = n as f64;
        let m2 = 1.0 / nf;
        let m3 = s3 / (nf * q);
        let m4 = s4 / (nf * q * q) + 3.0 * m2 * m2;
        // With p_up·u = p_down·v = A the moments reduce to
        //   m2 = A(u+v), m3 = m2(u-v), m4 = m2(u² - uv + v²).
        let d = m3 / m2;
        let r = m4 / m2;
        let disc = 4.0 * r - 3.0 * d * d;
        if !(disc > 0.0) {
            return Err(Error::invalid(format!(
                "no three-point law with s3 = {s3}, s4 = {s4} at q = {q}"
            )));
        }
        let down = if d == 0.0 { r.sqrt() } else { 0.5 * (-d + disc.sqrt()) };
        let up = down + d;
        if !(down > 0.0 && up > 0.0) {
            return Err(Error::invalid(format!(
                "three-point law for s3 = {s3}, s4 = {s4} has a nonpositive atom"
            )));
        }
        let a = m2 / (up + down);
        let p_up = a / up;
        let p_down = a / down;
        if !(p_up + p_down <= 1.0) {
            return Err(Error::invalid(format!(
                "three-point law for s3 = {s3}, s4 = {s4} needs total mass {} > 1",
                p_up + p_down
            )));
        }
        Ok(Self {
            up,
            down,
            p_up,
            p_down,
        })
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.p_up * self.up.powi(k) + self.p_down * (-self.down).powi(k)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        if u < self.p_up {
            self.up
        } else if u < self.p_up + self.p_down {
            -self.down
        } else {
            0.0
        }
    }
}

pub fn sample_sparse_generic(n: usize, law: &ThreePointLaw, stream: RngStream) -> Result<MatrixSample> {
    if n < 2 {
        return Err(Error::invalid(format!("N = {n} must be at least 2")));
    }
    Ok(fill_symmetric(n, EnsembleKind::SparseGeneric, stream, |rng| law.draw(rng)))
}

/// Dyson matrix flow `H_t = e^{-t/2} H_0 + sqrt(1 - e^{-t}) W`.
pub fn dyson_flow(h0: &MatrixSample, w: &MatrixSample, t: f64) -> Result<MatrixSample> {
    if h0.n != w.n {
        return Err(Error::DimensionMismatch {
            expected: h0.n,
            found: w.n,
        });
    }
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("flow time t = {t} must be nonnegative")));
    }
    let a = (-0.5 * t).exp();
    let b = (-(-t).exp_m1()).sqrt();
    let entries = h0
        .entries
        .iter()
        .zip(&w.entries)
        .map(|(&x, &y)| a * x + b * y)
        .collect();
    Ok(MatrixSample {
        n: h0.n,
        entries,
        kind: EnsembleKind::Flow,
        seed: h0.seed,
        t,
    })
}

/// Exact normalized cumulant `s^(k) = N q^{k-2} κ^(k)` of the centered
/// Erdős–Rényi entry law (`q² = N p`, so `N` drops out).
pub fn exact_s_k(p: f64, k: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p = {p} must lie in (0, 1)")));
    }
    match k {
        3 => Ok((1.0 - 2.0 * p) / (1.0 - p).sqrt()),
        4 => Ok((1.0 - 6.0 * p + 6.0 * p * p) / (1.0 - p)),
        _ => Err(Error::UnsupportedOrder(k)),
    }
}

/// Sample cumulant of `draws` scaled to the normalized cumulant `N q^{k-2} κ^(k)`.
pub fn empirical_s_k(draws: &[f64], k: u32, n: usize, q: f64) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::EmptyInput("entry draws"));
    }
    if k != 3 && k != 4 {
        return Err(Error::UnsupportedOrder(k));
    }
    let len = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / len;
    let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
    for &x in draws {
        let d = x - mean;
        let d2 = d * d;
        c2 += d2;
        c3 += d2 * d;
        c4 += d2 * d2;
    }
    let (c2, c3, c4) = (c2 / len, c3 / len, c4 / len);
    let kappa = if k == 3 { c3 } else { c4 - 3.0 * c2 * c2 };
    Ok(n as f64 * q.powi(k as i32 - 2) * kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(i: u64) -> RngStream {
        RngStream::new(2024, i)
    }

    fn assert_symmetric_zero_diag(m: &MatrixSample) {
        for i in 0..m.n() {
            assert_eq!(m.get(i, i).to_bits(), 0f64.to_bits());
            for j in 0..m.n() {
                assert_eq!(m.get(i, j).to_bits(), m.get(j, i).to_bits());
            }
        }
    }

    #[test]
    fn adjacency_small_values() {
        // N p (1-p) = 1, so every edge carries weight 1
        let m = sample_adjacency(4, 0.5, stream(0)).unwrap();
        assert_symmetric_zero_diag(&m);
        for x in m.upper_entries() {
            assert!(x == 0.0 || x == 1.0, "{x}");
        }
    }

    #[test]
    fn adjacency_near_one() {
        let m = sample_adjacency(2, 1.0 - 1e-12, stream(1)).unwrap();
        assert!(m.get(0, 1) > 0.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(sample_adjacency(1, 0.5, stream(0)), Err(Error::InvalidParameter(_))));
        assert!(matches!(sample_adjacency(10, 0.0, stream(0)), Err(Error::InvalidParameter(_))));
        assert!(matches!(sample_centered_er(10, 1.0, stream(0)), Err(Error::InvalidParameter(_))));
        assert!(matches!(sample_diluted_wigner(10, -0.1, stream(0)), Err(Error::InvalidParameter(_))));
        assert!(matches!(sample_goe_zero_diag(1, stream(0)), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn adjacency_edge_fraction() {
        // 1999000 upper entries; binomial sd of the fraction is ~7e-5.
        let m = sample_adjacency(2000, 0.01, stream(2)).unwrap();
        let total = 2000 * 1999 / 2;
        let frac = m.edge_count() as f64 / total as f64;
        assert!((frac - 0.01).abs() < 3e-4, "{frac}");
    }

    #[test]
    fn centered_er_values_and_moments() {
        let m = sample_centered_er(4, 0.5, stream(3)).unwrap();
        assert_symmetric_zero_diag(&m);
        for x in m.upper_entries() {
            assert!(x == 0.5 || x == -0.5);
        }
        // exact two-point law moments
        for &(n, p) in &[(10usize, 0.3f64), (1000, 0.01), (50, 0.9)] {
            let s = 1.0 / (n as f64 * p * (1.0 - p)).sqrt();
            let (hi, lo) = ((1.0 - p) * s, -p * s);
            let mean = p * hi + (1.0 - p) * lo;
            let m2 = p * hi * hi + (1.0 - p) * lo * lo;
            assert!(mean.abs() < 1e-15);
            assert!((m2 * n as f64 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn centered_er_empirical_variance() {
        // sd of N·x² is ~9.9 at p = 0.01, so 1e7 draws put 1% at ~3 standard errors
        let n = 1000;
        let mut sum = 0.0;
        let mut count = 0usize;
        for k in 0..20 {
            let m = sample_centered_er(n, 0.01, RngStream::new(99, k)).unwrap();
            for x in m.upper_entries() {
                sum += x * x;
                count += 1;
            }
        }
        let var = sum / count as f64;
        assert!((var * n as f64 - 1.0).abs() < 0.01, "{}", var * n as f64);
    }

    #[test]
    fn diluted_wigner_values_and_cumulants() {
        let m = sample_diluted_wigner(4, 0.25, stream(5)).unwrap();
        for x in m.upper_entries() {
            assert!(x == 0.0 || x.abs() == 1.0);
        }
        let n = 1000;
        let p = 0.04;
        let q = (n as f64 * p).sqrt();
        // ~1.5e6 draws
        let big = sample_diluted_wigner(n, p, stream(6)).unwrap();
        let mut draws: Vec<f64> = big.upper_entries().collect();
        draws.extend(sample_diluted_wigner(n, p, stream(7)).unwrap().upper_entries());
        let s3 = empirical_s_k(&draws, 3, n, q).unwrap();
        let s4 = empirical_s_k(&draws, 4, n, q).unwrap();
        // two-point oracle: m4 = p (N p)^{-2}, κ4 = m4 - 3/N² ⇒ s4 = 1 - 3p
        let m4 = p / (n as f64 * p).powi(2);
        let oracle = n as f64 * q * q * (m4 - 3.0 / (n as f64).powi(2));
        assert!((oracle - (1.0 - 3.0 * p)).abs() < 1e-12);
        assert!(s3.abs() < 0.05, "{s3}");
        assert!((s4 / oracle - 1.0).abs() < 0.05, "{s4} vs {oracle}");
    }

    #[test]
    fn goe_entries() {
        let m = sample_goe_zero_diag(2, stream(8)).unwrap();
        assert_symmetric_zero_diag(&m);
        let n = 1415; // ~1e6 upper entries
        let g = sample_goe_zero_diag(n, stream(9)).unwrap();
        let draws: Vec<f64> = g.upper_entries().collect();
        let len = draws.len() as f64;
        let var = draws.iter().map(|x| x * x).sum::<f64>() / len;
        assert!((var * n as f64 - 1.0).abs() < 0.01);
        let m4 = draws.iter().map(|x| x.powi(4)).sum::<f64>() / len;
        let excess = m4 / (var * var) - 3.0;
        assert!(excess.abs() < 0.02, "{excess}");
    }

    #[test]
    fn flow_endpoints() {
        let h0 = sample_centered_er(30, 0.2, stream(10)).unwrap();
        let w = sample_goe_zero_diag(30, stream(11)).unwrap();
        let at0 = dyson_flow(&h0, &w, 0.0).unwrap();
        assert_eq!(at0.as_slice(), h0.as_slice());
        assert_eq!(at0.kind(), EnsembleKind::Flow);
        let far = dyson_flow(&h0, &w, 100.0).unwrap();
        for (a, b) in far.as_slice().iter().zip(w.as_slice()) {
            assert!((a - b).abs() <= 1e-20 * b.abs().max(1e-300) + 1e-21);
        }
        assert_eq!(far.t(), 100.0);
        let other = sample_goe_zero_diag(31, stream(12)).unwrap();
        assert!(matches!(dyson_flow(&h0, &other, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn flow_preserves_variance_and_decays_s4() {
        let n = 1000;
        let p = 0.01;
        let q = (n as f64 * p).sqrt();
        let h0 = sample_centered_er(n, p, stream(13)).unwrap();
        let w = sample_goe_zero_diag(n, stream(14)).unwrap();
        let s4_0 = exact_s_k(p, 4).unwrap();
        for &t in &[0.3f64, 1.0] {
            let ht = dyson_flow(&h0, &w, t).unwrap();
            let qt = q * (0.5 * t).exp();
            let draws: Vec<f64> = ht.upper_entries().collect();
            let len = draws.len() as f64;
            let m2 = draws.iter().map(|x| x * x).sum::<f64>() / len;
            // sd of m2·N is about sqrt((m4/m2² - 1)/len) ≲ 0.01
            assert!((m2 * n as f64 - 1.0).abs() < 0.03, "t={t}: {}", m2 * n as f64);
            let s4 = empirical_s_k(&draws, 4, n, qt).unwrap();
            let expect = (-t).exp() * s4_0;
            assert!((s4 - expect).abs() < 0.1 * s4_0, "t={t}: {s4} vs {expect}");
        }
    }

    #[test]
    fn exact_cumulants() {
        assert!((exact_s_k(1e-9, 4).unwrap() - 1.0).abs() < 1e-8);
        assert!((exact_s_k(0.5, 4).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(exact_s_k(0.1, 5), Err(Error::UnsupportedOrder(5))));
        // moment oracle on the two-point law
        for &p in &[0.01f64, 0.2, 0.5, 0.77] {
            let n = 1000.0f64;
            let s = 1.0 / (n * p * (1.0 - p)).sqrt();
            let (hi, lo) = ((1.0 - p) * s, -p * s);
            let mk = |k: i32| p * hi.powi(k) + (1.0 - p) * lo.powi(k);
            let q: f64 = (n * p).sqrt();
            let s3 = n * q * mk(3);
            let s4 = n * q * q * (mk(4) - 3.0 * mk(2).powi(2));
            assert!((exact_s_k(p, 3).unwrap() - s3).abs() < 1e-10);
            assert!((exact_s_k(p, 4).unwrap() - s4).abs() < 1e-10);
        }
        assert!((exact_s_k(0.01, 4).unwrap() - 0.950_101).abs() < 1e-6);
    }

    #[test]
    fn empirical_cumulant_edge_cases() {
        assert_eq!(empirical_s_k(&[0.0; 10], 4, 10, 2.0).unwrap(), 0.0);
        assert!(matches!(empirical_s_k(&[], 4, 10, 2.0), Err(Error::EmptyInput(_))));
        assert!(matches!(empirical_s_k(&[1.0], 2, 10, 2.0), Err(Error::UnsupportedOrder(2))));
    }

    #[test]
    fn empirical_matches_exact_centered_er() {
        let n = 10_000;
        let p = 0.01;
        let q = (n as f64 * p).sqrt();
        let s = 1.0 / (n as f64 * p * (1.0 - p)).sqrt();
        let mut rng = stream(15).rng();
        let draws: Vec<f64> = (0..1_000_000)
            .map(|_| if rng.random::<f64>() < p { (1.0 - p) * s } else { -p * s })
            .collect();
        let est = empirical_s_k(&draws, 4, n, q).unwrap();
        let exact = exact_s_k(p, 4).unwrap();
        assert!((est / exact - 1.0).abs() < 0.05, "{est} vs {exact}");
    }

    #[test]
    fn gaussian_fourth_cumulant_vanishes() {
        let n = 500;
        let g = sample_goe_zero_diag(n, stream(16)).unwrap();
        let draws: Vec<f64> = g.upper_entries().collect();
        let s4 = empirical_s_k(&draws, 4, n, (n as f64).sqrt()).unwrap();
        // s4 = N² κ4 here; sd ≈ sqrt(24/len)
        assert!(s4.abs() < 0.05, "{s4}");
    }

    #[test]
    fn three_point_law_matches_cumulants() {
        for &(s3, s4) in &[(0.0, 1.0), (0.5, 1.2), (-0.7, 2.0), (0.0, 0.3)] {
            let n = 400;
            let q = 8.0;
            let law = ThreePointLaw::from_cumulants(n, q, s3, s4).unwrap();
            let nf = n as f64;
            assert!(law.moment(1).abs() < 1e-16);
            assert!((law.moment(2) * nf - 1.0).abs() < 1e-12);
            assert!((law.moment(3) * nf * q - s3).abs() < 1e-10);
            let k4 = law.moment(4) - 3.0 * law.moment(2).powi(2);
            assert!((k4 * nf * q * q - s4).abs() < 1e-10);
            if s3 == 0.0 {
                assert_eq!(law.up, law.down);
                assert_eq!(law.p_up, law.p_down);
            }
        }
        assert!(ThreePointLaw::from_cumulants(100, 5.0, 0.0, -30.0).is_err());
        let law = ThreePointLaw::from_cumulants(300, 6.0, 0.2, 1.0).unwrap();
        let m = sample_sparse_generic(300, &law, stream(17)).unwrap();
        assert_symmetric_zero_diag(&m);
        assert_eq!(m.kind(), EnsembleKind::SparseGeneric);
    }

    #[test]
    fn sbm_blocks() {
        let m = sample_two_block_sbm(200, 0.3, 0.02, stream(18)).unwrap();
        assert_symmetric_zero_diag(&m);
        let mut within = 0;
        let mut across = 0;
        for i in 0..200 {
            for j in i + 1..200 {
                if m.get(i, j) != 0.0 {
                    if (i < 100) == (j < 100) {
                        within += 1
                    } else {
                        across += 1
                    }
                }
            }
        }
        assert!(within > 5 * across);
    }

    #[test]
    fn profiles() {
        let prof = SparsityProfile::centered_er(1000, 0.03).unwrap();
        prof.validate().unwrap();
        assert!((prof.q * prof.q - 30.0).abs() < 1e-12);
        let bad = SparsityProfile {
            q: 40.0,
            ..prof
        };
        assert!(bad.validate().is_err());
        let dw = SparsityProfile::diluted_wigner(100, 0.1).unwrap();
        assert_eq!(dw.s3, 0.0);
    }

    #[test]
    fn from_dense_rejects_asymmetry() {
        assert!(MatrixSample::from_dense(2, vec![0.0, 1.0, 2.0, 0.0], EnsembleKind::Adjacency, 0).is_err());
        assert!(MatrixSample::from_dense(2, vec![1.0, 0.0, 0.0, 0.0], EnsembleKind::Adjacency, 0).is_err());
        assert!(MatrixSample::from_dense(2, vec![0.0, 1.0, 1.0, 0.0], EnsembleKind::Adjacency, 0).is_ok());
    }
}
