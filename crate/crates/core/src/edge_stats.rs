//! Monte Carlo harness for extremal eigenvalues: rescaled edge samples,
//! two-sample Kolmogorov–Smirnov tests, a persisted GOE reference sample
//! standing in for the Tracy–Widom law, adjacency-matrix checks and the
//! community-detection statistic built on the second adjacency eigenvalue.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    dyson_flow, exact_s_k, sample_adjacency, sample_centered_er, sample_diluted_wigner,
    sample_goe_zero_diag, sample_sparse_generic, EnsembleKind, MatrixSample, ThreePointLaw,
};
use crate::error::{Error, Result};
use crate::persist::atomic_write;
use crate::refined_law::{edge, LawParams};
use crate::rng::RngStream;
use crate::spectral::eigen;

/// Stream offset for the GOE component of flow samples, so that `H_0` of
/// sample `j` uses stream `j` and `W` uses `FLOW_W_STREAM + j`.
pub const FLOW_W_STREAM: u64 = 1 << 40;

/// Smallest accepted reference size (both `N_ref` and `M_ref`).
pub const REFERENCE_MIN: usize = 1000;

pub const REFERENCE_VERSION: u32 = 1;

pub const EDGE_SAMPLES_CSV_HEADER: &str = "sample_index,seed,lambda_raw,rescaled";

/// Sparsity input: edge probability `p` or `q` with `q² = N p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sparsity {
    P(f64),
    Q(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// Refined edge `L`.
    ShiftedL,
    /// Semicircle edge 2.
    Unshifted2,
    /// `L + a` for the second adjacency eigenvalue.
    AdjacencyLPlusA,
    /// `L - a`: the edge of `Ã - a`, which bounds the non-outlier
    /// adjacency eigenvalues through the rank-one identity.
    AdjacencyLMinusA,
}

impl Centering {
    pub fn center(&self, l: f64, a: f64) -> f64 {
        match self {
            Centering::ShiftedL => l,
            Centering::Unshifted2 => 2.0,
            Centering::AdjacencyLPlusA => l + a,
            Centering::AdjacencyLMinusA => l - a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub kind: EnsembleKind,
    pub n: usize,
    pub sparsity: Option<Sparsity>,
    pub samples: usize,
    pub master_seed: u64,
    pub workers: usize,
    /// Eigenvalue index, 1 = largest.
    pub k: usize,
    pub centering: Centering,
    /// Required for [`EnsembleKind::Flow`]: `H_t` with a centered
    /// Erdős–Rényi `H_0`.
    pub flow_time: Option<f64>,
}

impl McConfig {
    /// Largest eigenvalue, refined-edge centering, one worker.
    pub fn new(kind: EnsembleKind, n: usize, samples: usize, master_seed: u64) -> Self {
        Self {
            kind,
            n,
            sparsity: None,
            samples,
            master_seed,
            workers: 1,
            k: 1,
            centering: Centering::ShiftedL,
            flow_time: None,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.sparsity = Some(Sparsity::P(p));
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.sparsity = Some(Sparsity::Q(q));
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_index(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_centering(mut self, centering: Centering) -> Self {
        self.centering = centering;
        self
    }

    pub fn with_flow_time(mut self, t: f64) -> Self {
        self.flow_time = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("N = {} must be at least 2", self.n)));
        }
        if self.samples == 0 {
            return Err(Error::invalid("sample count M must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::invalid(format!(
                "eigenvalue index k = {} must lie in 1..={}",
                self.k, self.n
            )));
        }
        match self.kind {
            EnsembleKind::GoeZeroDiag => {}
            _ => {
                self.p()?;
            }
        }
        if self.kind == EnsembleKind::Flow {
            match self.flow_time {
                Some(t) if t >= 0.0 && t.is_finite() => {}
                _ => return Err(Error::invalid("flow samples need a nonnegative flow time")),
            }
        }
        if matches!(self.centering, Centering::AdjacencyLPlusA | Centering::AdjacencyLMinusA) {
            let q = self.q()?;
            adjacency_shift(self.n, q)?;
        }
        Ok(())
    }

    /// Edge probability; `q²/N` when `q` was given.
    pub fn p(&self) -> Result<f64> {
        let p = match self.sparsity {
            Some(Sparsity::P(p)) => p,
            Some(Sparsity::Q(q)) => q * q / self.n as f64,
            None => {
                return Err(Error::invalid(format!(
                    "ensemble {} needs a sparsity input (p or q)",
                    self.kind
                )))
            }
        };
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("p = {p} must lie in (0, 1)")));
        }
        Ok(p)
    }

    pub fn q(&self) -> Result<f64> {
        Ok((self.n as f64 * self.p()?).sqrt())
    }

    fn sampler(&self, law: &LawParams) -> Result<Sampler> {
        Ok(match self.kind {
            EnsembleKind::Adjacency => Sampler::Adjacency(self.p()?),
            EnsembleKind::CenteredEr => Sampler::CenteredEr(self.p()?),
            EnsembleKind::DilutedWigner => Sampler::DilutedWigner(self.p()?),
            EnsembleKind::GoeZeroDiag => Sampler::Goe,
            EnsembleKind::SparseGeneric => {
                Sampler::Generic(ThreePointLaw::from_cumulants(self.n, self.q()?, 0.0, law.s4)?)
            }
            EnsembleKind::Flow => Sampler::Flow {
                p: self.p()?,
                t: self.flow_time.unwrap_or(0.0),
            },
        })
    }
}

enum Sampler {
    Adjacency(f64),
    CenteredEr(f64),
    DilutedWigner(f64),
    Goe,
    Generic(ThreePointLaw),
    Flow { p: f64, t: f64 },
}

impl Sampler {
    fn draw(&self, n: usize, seed: u64, j: u64) -> Result<MatrixSample> {
        let stream = RngStream::new(seed, j);
        match self {
            Sampler::Adjacency(p) => sample_adjacency(n, *p, stream),
            Sampler::CenteredEr(p) => sample_centered_er(n, *p, stream),
            Sampler::DilutedWigner(p) => sample_diluted_wigner(n, *p, stream),
            Sampler::Goe => sample_goe_zero_diag(n, stream),
            Sampler::Generic(law) => sample_sparse_generic(n, law, stream),
            Sampler::Flow { p, t } => {
                let h0 = sample_centered_er(n, *p, stream)?;
                let w = sample_goe_zero_diag(n, RngStream::new(seed, FLOW_W_STREAM + j))?;
                dyson_flow(&h0, &w, *t)
            }
        }
    }
}

/// Matrix `j` of the Monte Carlo run described by `config`.
pub fn sample_matrix(config: &McConfig, law: &LawParams, j: u64) -> Result<MatrixSample> {
    config.validate()?;
    config.sampler(law)?.draw(config.n, config.master_seed, j)
}

/// Runs `task(j)` for `j in 0..count` on `workers` threads. Results are
/// indexed by `j`; a failure is reported for the smallest failing index.
pub fn run_indexed<T, F>(workers: usize, count: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if workers == 0 {
        return Err(Error::invalid("worker count must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::SolverFailure(format!("thread pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| (0..count).into_par_iter().map(&task).collect());
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Sample {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Rescaled extremal eigenvalues `N^{2/3} (λ_k - center)` of `M` draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSampleSet {
    pub config: McConfig,
    pub center_used: f64,
    lambda_raw: Vec<f64>,
    values: Vec<f64>,
}

fn n_two_thirds(n: usize) -> f64 {
    (n as f64).powf(2.0 / 3.0)
}

impl EdgeSampleSet {
    /// Builds a set from raw eigenvalues.
    pub fn from_raw(config: McConfig, center: f64, lambda_raw: Vec<f64>) -> Result<Self> {
        if lambda_raw.is_empty() {
            return Err(Error::EmptyInput("edge samples"));
        }
        let scale = n_two_thirds(config.n);
        let values = lambda_raw.iter().map(|&l| scale * (l - center)).collect();
        Ok(Self {
            config,
            center_used: center,
            lambda_raw,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lambda_raw(&self) -> &[f64] {
        &self.lambda_raw
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Same eigenvalues rescaled around another center.
    pub fn recentered(&self, center: f64, centering: Centering) -> Self {
        let mut config = self.config.clone();
        config.centering = centering;
        Self::from_raw(config, center, self.lambda_raw.clone()).expect("nonempty set")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{EDGE_SAMPLES_CSV_HEADER}")?;
        for (j, (raw, x)) in self.lambda_raw.iter().zip(&self.values).enumerate() {
            writeln!(out, "{j},{},{raw},{x}", self.config.master_seed)?;
        }
        Ok(())
    }
}

/// Center for `config.centering` given the law. Flow samples are centered
/// with the law at the flow time.
pub fn resolve_center(config: &McConfig, law: &LawParams) -> Result<f64> {
    match config.centering {
        Centering::Unshifted2 => Ok(2.0),
        Centering::ShiftedL => {
            let law = match (config.kind, config.flow_time) {
                (EnsembleKind::Flow, Some(t)) => law.at_time(t)?,
                _ => *law,
            };
            Ok(edge(&law)?.l)
        }
        Centering::AdjacencyLPlusA | Centering::AdjacencyLMinusA => {
            let (_, a) = adjacency_shift(config.n, config.q()?)?;
            Ok(config.centering.center(edge(law)?.l, a))
        }
    }
}

/// Draws `M` matrices on streams `(master_seed, j)`, extracts `λ_k` and
/// rescales around the configured center.
pub fn mc_extreme(config: &McConfig, law: &LawParams) -> Result<EdgeSampleSet> {
    config.validate()?;
    let center = resolve_center(config, law)?;
    let sampler = config.sampler(law)?;
    let (n, k, seed) = (config.n, config.k, config.master_seed);
    let lambda_raw = run_indexed(config.workers, config.samples, |j| {
        let h = sampler.draw(n, seed, j as u64)?;
        let spec = eigen(&h, false)?;
        Ok(spec.lambda(k).expect("k validated against N"))
    })?;
    EdgeSampleSet::from_raw(config.clone(), center, lambda_raw)
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub n1: usize,
    pub n2: usize,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test. `D` is exact; the p-value is the
/// asymptotic Kolmogorov tail at `sqrt(n1 n2 / (n1 + n2)) D`.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("KS sample"));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::invalid("KS samples contain NaN"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x = a[i].min(b[j]);
        while i < n1 && a[i] <= x {
            i += 1;
        }
        while j < n2 && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    Ok(KsResult {
        statistic: d,
        n1,
        n2,
        p_value: kolmogorov_tail(ne.sqrt() * d),
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_tail(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let p = if x < 1.18 {
        // Jacobi-transformed series converges fast for small x
        let y = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (1..=20).map(|k| ((2 * k - 1) as f64).powi(2) * y).map(f64::exp).sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * x * x).exp()
            })
            .sum();
        2.0 * s
    };
    p.clamp(0.0, 1.0)
}

/// Sorted GOE edge samples `N_ref^{2/3} (λ_1 - 2)` used as the Tracy–Widom
/// stand-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCdf {
    values: Vec<f64>,
    pub n_ref: usize,
    pub m_ref: usize,
    pub seed: u64,
    pub version: u32,
}

impl ReferenceCdf {
    pub fn from_samples(mut values: Vec<f64>, n_ref: usize, seed: u64) -> Result<Self> {
        if values.len() < REFERENCE_MIN {
            return Err(Error::invalid(format!(
                "reference needs at least {REFERENCE_MIN} samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("reference samples must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            m_ref: values.len(),
            values,
            n_ref,
            seed,
            version: REFERENCE_VERSION,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Empirical `F(x) = #{v <= x} / M_ref`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.m_ref as f64
    }

    /// Lower empirical quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let idx = ((p.clamp(0.0, 1.0) * self.m_ref as f64).ceil() as usize).clamp(1, self.m_ref);
        self.values[idx - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# reference_cdf version={} N_ref={} M_ref={} seed={}\nvalue\n",
            self.version, self.n_ref, self.m_ref, self.seed
        );
        for v in &self.values {
            writeln!(s, "{v}").expect("writing to a String");
        }
        s
    }

    pub fn persist(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_csv().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
        let mut fields = std::collections::HashMap::new();
        for token in header.trim_start_matches('#').split_whitespace().skip(1) {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| parse_err(1, format!("malformed header field {token:?}")))?;
            fields.insert(k, v);
        }
        let field = |k: &str| -> Result<u64> {
            fields
                .get(k)
                .ok_or_else(|| parse_err(1, format!("missing header field {k}")))?
                .parse()
                .map_err(|e| parse_err(1, format!("{k}: {e}")))
        };
        let version = field("version")? as u32;
        if version != REFERENCE_VERSION {
            return Err(parse_err(1, format!("unsupported version {version}")));
        }
        let (n_ref, m_ref, seed) = (field("N_ref")? as usize, field("M_ref")? as usize, field("seed")?);
        if lines.next().map(str::trim) != Some("value") {
            return Err(parse_err(2, "expected column header \"value\"".into()));
        }
        let values = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(i + 3, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != m_ref {
            return Err(parse_err(1, format!("M_ref = {m_ref} but {} values", values.len())));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(parse_err(3, "values are not sorted".into()));
        }
        let cdf = Self::from_samples(values, n_ref, seed)?;
        Ok(cdf)
    }
}

/// GOE reference sample of size `M_ref` at dimension `N_ref` (streams
/// `(seed, 0..M_ref)`).
pub fn build_reference_cdf(n_ref: usize, m_ref: usize, seed: u64, workers: usize) -> Result<ReferenceCdf> {
    if n_ref < REFERENCE_MIN || m_ref < REFERENCE_MIN {
        return Err(Error::invalid(format!(
            "reference needs N_ref, M_ref >= {REFERENCE_MIN} (got {n_ref}, {m_ref})"
        )));
    }
    let config = McConfig::new(EnsembleKind::GoeZeroDiag, n_ref, m_ref, seed)
        .with_workers(workers)
        .with_centering(Centering::Unshifted2);
    let set = mc_extreme(&config, &LawParams::semicircle())?;
    ReferenceCdf::from_samples(set.values, n_ref, seed)
}

/// Rank-one shift `(f, a)` relating the adjacency matrix to its centered
/// version: `A = Ã + f |e⟩⟨e| - a`.
pub fn adjacency_shift(n: usize, q: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    if n == 0 || !(q >= 0.0) || q * q >= nf {
        return Err(Error::invalid(format!("adjacency shift needs 0 <= q² < N (q = {q}, N = {n})")));
    }
    let f = q / (1.0 - q * q / nf).sqrt();
    Ok((f, f / nf))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierSummary {
    pub samples: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `f - a + 1/f`.
    pub predicted: f64,
    /// Sample variance of `sqrt(N/2) (λ_1 - mean)`.
    pub rescaled_variance: f64,
    pub q: f64,
}

/// Monte Carlo mean and fluctuation of the adjacency outlier `λ_1^A`.
pub fn adjacency_outlier_check(config: &McConfig) -> Result<OutlierSummary> {
    if config.kind != EnsembleKind::Adjacency || config.k != 1 {
        return Err(Error::invalid("outlier check needs adjacency samples with k = 1"));
    }
    if config.samples < 2 {
        return Err(Error::invalid("outlier check needs at least 2 samples"));
    }
    let config = config.clone().with_centering(Centering::Unshifted2);
    let set = mc_extreme(&config, &LawParams::semicircle())?;
    let q = config.q()?;
    let (f, a) = adjacency_shift(config.n, q)?;
    let raw = set.lambda_raw();
    let var = sample_variance(raw);
    Ok(OutlierSummary {
        samples: raw.len(),
        mean: mean(raw),
        stderr: (var / raw.len() as f64).sqrt(),
        predicted: f - a + 1.0 / f,
        rescaled_variance: config.n as f64 / 2.0 * var,
        q,
    })
}

/// An undirected simple graph read from an edge list, as a rescaled
/// adjacency matrix.
#[derive(Debug, Clone)]
pub struct IngestedGraph {
    pub matrix: MatrixSample,
    pub edges: usize,
    pub p_hat: f64,
}

/// Reads a whitespace-separated edge list with 0-based vertex ids. Blank
/// lines and `#` comments are skipped; a `# nodes: N` comment fixes the
/// vertex count (otherwise the largest id + 1). Self-loops and repeated
/// edges are dropped.
pub fn ingest_graph(path: &Path) -> Result<IngestedGraph> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), path)
}

pub fn parse_edge_list<R: BufRead>(reader: R, path: &Path) -> Result<IngestedGraph> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut declared: Option<usize> = None;
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        let body = line.trim();
        if let Some(comment) = body.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("nodes:") {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(lineno, format!("node count: {e}")))?;
                declared = Some(n);
            }
            continue;
        }
        if body.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(lineno, format!("expected 2 vertex ids, found {}", tokens.len())));
        }
        let id = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(lineno, format!("vertex id {s:?}: {e}")))
        };
        pairs.push((id(tokens[0])?, id(tokens[1])?, lineno));
    }
    let max_id = pairs.iter().map(|&(u, v, _)| u.max(v)).max();
    let n = match (declared, max_id) {
        (Some(n), Some(m)) if m >= n => {
            let line = pairs.iter().find(|&&(u, v, _)| u.max(v) >= n).map_or(0, |p| p.2);
            return Err(parse_err(line, format!("vertex id {m} exceeds declared node count {n}")));
        }
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => return Err(Error::EmptyGraph),
    };
    let mut pattern = vec![false; n * n];
    let mut edges = 0;
    for (u, v, _) in pairs {
        if u == v || pattern[u * n + v] {
            continue;
        }
        pattern[u * n + v] = true;
        pattern[v * n + u] = true;
        edges += 1;
    }
    if edges == 0 {
        return Err(Error::EmptyGraph);
    }
    let nf = n as f64;
    let p_hat = 2.0 * edges as f64 / (nf * (nf - 1.0));
    if !(p_hat > 0.0 && p_hat < 1.0) {
        return Err(Error::DegenerateDensity(p_hat));
    }
    let value = 1.0 / (nf * p_hat * (1.0 - p_hat)).sqrt();
    let entries = pattern.iter().map(|&b| if b { value } else { 0.0 }).collect();
    Ok(IngestedGraph {
        matrix: MatrixSample::from_dense(n, entries, EnsembleKind::Adjacency, 0)?,
        edges,
        p_hat,
    })
}

/// Writes the nonzero pattern of `a` as an edge list readable by
/// [`ingest_graph`].
pub fn write_edge_list(a: &MatrixSample, path: &Path) -> Result<()> {
    let n = a.n();
    let mut s = format!("# nodes: {n}\n");
    for i in 0..n {
        for (j, &x) in a.row(i).iter().enumerate().skip(i + 1) {
            if x != 0.0 {
                writeln!(s, "{i} {j}").expect("writing to a String");
            }
        }
    }
    atomic_write(path, s.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommunityResult {
    /// `N^{2/3} (λ_2 - center)`.
    pub statistic: f64,
    /// Right tail `1 - F_ref(T)`.
    pub p_value: f64,
    pub lambda2: f64,
    pub center: f64,
    pub p_hat: f64,
    pub q_hat: f64,
    pub law: LawParams,
    pub l: f64,
    pub a: f64,
    /// `q̂ <= N^{1/6}`: outside the regime where the edge statistic is
    /// Tracy–Widom.
    pub weak_sparsity: bool,
}

/// Community-detection statistic from the second adjacency eigenvalue.
/// Only the nonzero pattern of `a` is used: the graph is rescaled with its
/// own edge density `p̂`, and the law uses `s4 = s4(p̂)`, `q̂ = sqrt(N p̂)`.
pub fn community_statistic(
    a: &MatrixSample,
    reference: &ReferenceCdf,
    centering: Centering,
) -> Result<CommunityResult> {
    let n = a.n();
    if n < 3 {
        return Err(Error::invalid("community statistic needs N >= 3"));
    }
    let edges = a.edge_count();
    if edges == 0 {
        return Err(Error::EmptyGraph);
    }
    let nf = n as f64;
    let p_hat = 2.0 * edges as f64 / (nf * (nf - 1.0));
    if !(p_hat > 0.0 && p_hat < 1.0) {
        return Err(Error::DegenerateDensity(p_hat));
    }
    let q_hat = (nf * p_hat).sqrt();
    let weak_sparsity = q_hat <= nf.powf(1.0 / 6.0);
    if weak_sparsity {
        log::warn!("q̂ = {q_hat:.3} <= N^(1/6) = {:.3}: edge statistic may not be Tracy–Widom", nf.powf(1.0 / 6.0));
    }
    let law = LawParams::new(exact_s_k(p_hat, 4)?, q_hat, 0.0)?;
    let l = edge(&law)?.l;
    let (_, shift) = adjacency_shift(n, q_hat)?;
    let scaled = a.with_pattern_value(1.0 / (nf * p_hat * (1.0 - p_hat)).sqrt());
    let lambda2 = eigen(&scaled, false)?.lambda(2).expect("N >= 3");
    let center = centering.center(l, shift);
    let statistic = n_two_thirds(n) * (lambda2 - center);
    Ok(CommunityResult {
        statistic,
        p_value: 1.0 - reference.cdf(statistic),
        lambda2,
        center,
        p_hat,
        q_hat,
        law,
        l,
        a: shift,
        weak_sparsity,
    })
}
