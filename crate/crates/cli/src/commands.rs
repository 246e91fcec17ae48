use std::fmt::Write as _;

use sparse_edge::edge_stats::{
    build_reference_cdf, community_statistic, ingest_graph, mc_extreme, run_indexed, sample_matrix,
    two_sample_ks, Centering, McConfig, ReferenceCdf, FLOW_W_STREAM,
};
use sparse_edge::ensembles::{exact_s_k, sample_adjacency, sample_centered_er, sample_goe_zero_diag, EnsembleKind};
use sparse_edge::flow::{default_t_grid, flow_local_law_check, trajectory};
use sparse_edge::refined_law::{edge, msc, solve_w, ComplexUpper, LawParams, SolveMode};
use sparse_edge::rng::RngStream;
use sparse_edge::spectral::{
    default_grid, eigen, empirical_m, eval_p, grid, local_law_scan, resolvent_identity_residual,
    smoothed_count, ward_residual, GreenMatrix, DOMINATION_EXPONENT,
};
use sparse_edge::Error;

use crate::args::{
    CenterArg, Command, CommonArgs, CommunityArgs, DensityArgs, FlowArgs, KindArg, LocalLawArgs, TwArgs,
};
use crate::output::Outputs;

/// Seed used by `selftest` when `--seed` is absent.
pub const SELFTEST_SEED: u64 = 1;

#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit code 1.
    Validation(String),
    /// Failure while computing or writing: exit code 2.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let validation = matches!(
            e,
            Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::UnsupportedOrder(_)
                | Error::EmptyInput(_)
                | Error::Parse { .. }
                | Error::EmptyGraph
                | Error::DegenerateDensity(_)
                | Error::SizeLimitExceeded { .. }
        );
        if validation {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

type Run = Result<(Outputs, Option<u64>), Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

pub fn run(command: &Command) -> Run {
    match command {
        Command::Density(a) => density(a),
        Command::Edge(c) => edge_cmd(c),
        Command::LocalLaw(a) => local_law(a),
        Command::Tw(a) => tw(a),
        Command::Flow(a) => flow(a),
        Command::Community(a) => community(a),
        Command::BuildReference(c) => build_reference(c),
        Command::Selftest(c) => selftest(c),
    }
}

fn require_seed(c: &CommonArgs) -> Result<u64, Failure> {
    c.seed.ok_or_else(|| invalid("--seed is required for random commands"))
}

fn require_n(c: &CommonArgs) -> Result<usize, Failure> {
    c.n.ok_or_else(|| invalid("--n is required"))
}

fn workers(c: &CommonArgs) -> Result<usize, Failure> {
    match c.workers {
        Some(0) => Err(invalid("--workers must be at least 1")),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// `q` from `--q`, or `sqrt(N p)`; both given must agree.
fn resolve_q(c: &CommonArgs) -> Result<f64, Failure> {
    match (c.q, c.n, c.p) {
        (Some(q), Some(n), Some(p)) => {
            let implied = (n as f64 * p).sqrt();
            if (q - implied).abs() > 1e-9 * q.abs().max(implied) {
                return Err(invalid(format!(
                    "--q {q} contradicts --n {n} --p {p} (sqrt(N p) = {implied})"
                )));
            }
            Ok(q)
        }
        (Some(q), _, _) => Ok(q),
        (None, Some(n), Some(p)) => Ok((n as f64 * p).sqrt()),
        _ => Err(invalid("give --q, or --n with --p")),
    }
}

/// Edge probability from `--p`, or `q²/N`.
fn resolve_p(c: &CommonArgs, n: usize) -> Result<f64, Failure> {
    match (c.p, c.q) {
        (Some(p), _) => {
            resolve_q(c)?;
            Ok(p)
        }
        (None, Some(q)) => Ok(q * q / n as f64),
        (None, None) => Err(invalid("give --p or --q")),
    }
}

fn resolve_s4(c: &CommonArgs, p: Option<f64>) -> Result<f64, Failure> {
    match (c.s4, p) {
        (Some(s4), _) => Ok(s4),
        (None, Some(p)) => Ok(exact_s_k(p, 4)?),
        (None, None) => Err(invalid("give --s4 or --p")),
    }
}

fn law_from(c: &CommonArgs) -> Result<LawParams, Failure> {
    let q = resolve_q(c)?;
    let s4 = resolve_s4(c, c.p)?;
    Ok(LawParams::new(s4, q, c.t)?)
}

/// Law matching the entry distribution of `kind` (at `--t` for flow samples).
fn ensemble_law(c: &CommonArgs, kind: KindArg, n: usize) -> Result<LawParams, Failure> {
    if kind == KindArg::Goe {
        return Ok(LawParams::semicircle());
    }
    let p = resolve_p(c, n)?;
    let q = (n as f64 * p).sqrt();
    let s4 = match (kind, c.s4) {
        (_, Some(s4)) => s4,
        (KindArg::DilutedWigner, None) => 1.0 - 3.0 * p,
        (KindArg::SparseGeneric, None) => return Err(invalid("sparse-generic samples need --s4")),
        (_, None) => exact_s_k(p, 4)?,
    };
    let t = if kind == KindArg::Flow { c.t } else { 0.0 };
    Ok(LawParams::new(s4, q, t)?)
}

fn mc_config(c: &CommonArgs, kind: KindArg, n: usize, samples: usize, seed: u64, centering: Centering) -> Result<McConfig, Failure> {
    let mut config = McConfig::new(kind.kind(), n, samples, seed)
        .with_workers(workers(c)?)
        .with_index(c.which)
        .with_centering(centering);
    if kind != KindArg::Goe {
        config = config.with_p(resolve_p(c, n)?);
    }
    if kind == KindArg::Flow {
        config = config.with_flow_time(c.t);
    }
    config.validate()?;
    Ok(config)
}

fn density(a: &DensityArgs) -> Run {
    let c = &a.common;
    if a.grid < 2 {
        return Err(invalid("--grid needs at least 2 points"));
    }
    if !(a.emax > 0.0) {
        return Err(invalid("--emax must be positive"));
    }
    let law = law_from(c)?;
    let refined = edge(&law)?;
    let mode = c.mode.mode();
    let last = (a.grid - 1) as f64;
    let mut csv = String::from("E,rho\n");
    for i in 0..a.grid {
        // exact negation symmetry: E_i = -E_{grid-1-i}
        let e = a.emax * (2.0 * i as f64 - last) / last;
        writeln!(csv, "{e},{}", refined.density(e, mode)?).expect("writing to a String");
    }
    println!("L = {}\ntau = {}", refined.l, refined.tau);
    let mut out = Outputs::default();
    out.add("density.csv", csv.into_bytes());
    Ok((out, None))
}

fn edge_cmd(c: &CommonArgs) -> Run {
    let law = law_from(c)?;
    let r = edge(&law)?;
    println!("L = {}\ntau = {}\nc4 = {:e}\nqt = {}\nLdot = {:e}", r.l, r.tau, law.c4(), law.qt(), r.l_dot());
    let mut out = Outputs::default();
    out.add(
        "edge.csv",
        format!(
            "s4,q,t,qt,c4,L,tau,Ldot\n{},{},{},{},{},{},{},{}\n",
            law.s4,
            law.q,
            law.t,
            law.qt(),
            law.c4(),
            r.l,
            r.tau,
            r.l_dot()
        )
        .into_bytes(),
    );
    Ok((out, None))
}

fn local_law(a: &LocalLawArgs) -> Run {
    let c = &a.common;
    let n = require_n(c)?;
    let seed = require_seed(c)?;
    if a.e_points == 0 || a.eta_points == 0 {
        return Err(invalid("grid sizes must be positive"));
    }
    let samples = c.samples.unwrap_or(1);
    let config = mc_config(c, a.kind, n, samples, seed, Centering::Unshifted2)?;
    let law = ensemble_law(c, a.kind, n)?;
    let points = grid(n, a.e_points, a.eta_points);
    let mode = c.mode.mode();
    let threshold = (n as f64).powf(DOMINATION_EXPONENT);
    let reports = run_indexed(config.workers, samples, |j| {
        let h = sample_matrix(&config, &law, j as u64)?;
        local_law_scan(&eigen(&h, false)?, &law, &points, mode)
    })?;
    let mut out = Outputs::default();
    for (j, report) in reports.iter().enumerate() {
        println!(
            "sample {j}: fraction of grid with ratio <= N^{DOMINATION_EXPONENT} = {:.4}",
            report.fraction_within(threshold)
        );
        out.csv(format!("local_law_{j}.csv"), |w| report.write_csv(w));
    }
    Ok((out, Some(seed)))
}

fn tw(a: &TwArgs) -> Run {
    let c = &a.common;
    let n = require_n(c)?;
    let seed = require_seed(c)?;
    let samples = c.samples.unwrap_or(100);
    let centering = c.center.unwrap_or(CenterArg::Shifted).centering();
    let config = mc_config(c, a.kind, n, samples, seed, centering)?;
    let law = ensemble_law(c, a.kind, n)?;
    let reference = match &a.reference {
        Some(path) => {
            if c.which != 1 {
                return Err(invalid("a reference file holds largest-eigenvalue samples; use --which 1"));
            }
            Some(ReferenceCdf::load(path)?)
        }
        None => None,
    };
    let set = mc_extreme(&config, &law)?;
    let goe_values = match reference {
        Some(r) => r.values().to_vec(),
        None => {
            let goe = McConfig::new(EnsembleKind::GoeZeroDiag, n, samples, seed.wrapping_add(1))
                .with_workers(config.workers)
                .with_index(c.which)
                .with_centering(Centering::Unshifted2);
            mc_extreme(&goe, &LawParams::semicircle())?.values().to_vec()
        }
    };
    let ks = two_sample_ks(set.values(), &goe_values)?;
    println!(
        "center = {}\nmean rescaled = {}\nKS D = {} (n1 = {}, n2 = {}), p = {:e}",
        set.center_used,
        set.mean(),
        ks.statistic,
        ks.n1,
        ks.n2,
        ks.p_value
    );
    let mut out = Outputs::default();
    out.csv("edge_samples.csv", |w| set.write_csv(w));
    out.add(
        "ks.csv",
        format!("statistic,n1,n2,p_value\n{},{},{},{}\n", ks.statistic, ks.n1, ks.n2, ks.p_value).into_bytes(),
    );
    Ok((out, Some(seed)))
}

fn flow(a: &FlowArgs) -> Run {
    let c = &a.common;
    let n = c.n.ok_or_else(|| invalid("--n is required for the default time grid"))?;
    let law = LawParams::new(resolve_s4(c, c.p)?, resolve_q(c)?, 0.0)?;
    let t_grid = default_t_grid(n);
    let traj = trajectory(&law, &t_grid)?;
    let mut out = Outputs::default();
    out.csv("flow_trajectory.csv", |w| traj.write_csv(w));
    let last = traj.rows.last().expect("grid is nonempty");
    println!("t_max = {}\nL(0) = {}\nL(t_max) = {}", last.t, traj.rows[0].lt, last.lt);
    let mut seed = None;
    if a.local_law {
        let s = require_seed(c)?;
        let p = resolve_p(c, n)?;
        seed = Some(s);
        let h0 = sample_centered_er(n, p, RngStream::new(s, 0))?;
        let w = sample_goe_zero_diag(n, RngStream::new(s, FLOW_W_STREAM))?;
        let points = grid(n, a.e_points, a.eta_points);
        let reports = flow_local_law_check(&h0, &w, &t_grid, &law, &points, c.mode.mode())?;
        let threshold = (n as f64).powf(DOMINATION_EXPONENT);
        for (i, (report, t)) in reports.iter().zip(&t_grid).enumerate() {
            println!("t = {t:.4e}: fraction within N^{DOMINATION_EXPONENT} = {:.4}", report.fraction_within(threshold));
            out.csv(format!("flow_local_law_{i:02}.csv"), |w| report.write_csv(w));
        }
    }
    Ok((out, seed))
}

fn community(a: &CommunityArgs) -> Run {
    let c = &a.common;
    let centering = c.center.unwrap_or(CenterArg::Adjacency).centering();
    let reference = ReferenceCdf::load(&a.reference)?;
    let (matrix, seed) = match &a.graph {
        Some(path) => {
            if c.n.is_some() || c.p.is_some() {
                return Err(invalid("--graph cannot be combined with --n or --p"));
            }
            (ingest_graph(path)?.matrix, None)
        }
        None => {
            let n = require_n(c)?;
            let seed = require_seed(c)?;
            let p = resolve_p(c, n)?;
            (sample_adjacency(n, p, RngStream::new(seed, 0))?, Some(seed))
        }
    };
    let r = community_statistic(&matrix, &reference, centering)?;
    println!(
        "T = {}\np_value = {}\nlambda2 = {}\np_hat = {}\nq_hat = {}",
        r.statistic, r.p_value, r.lambda2, r.p_hat, r.q_hat
    );
    if r.weak_sparsity {
        println!("warning: q_hat <= N^(1/6); the statistic may not follow the reference law");
    }
    let mut out = Outputs::default();
    out.add(
        "community.csv",
        format!(
            "statistic,p_value,lambda2,center,p_hat,q_hat,s4,L,a\n{},{},{},{},{},{},{},{},{}\n",
            r.statistic, r.p_value, r.lambda2, r.center, r.p_hat, r.q_hat, r.law.s4, r.l, r.a
        )
        .into_bytes(),
    );
    Ok((out, seed))
}

fn build_reference(c: &CommonArgs) -> Run {
    let seed = require_seed(c)?;
    if c.out.is_none() {
        return Err(invalid("build-reference needs --out"));
    }
    let n = c.n.unwrap_or(1000);
    let m = c.samples.unwrap_or(1000);
    let reference = build_reference_cdf(n, m, seed, workers(c)?)?;
    println!(
        "median = {}\n5% = {}\n95% = {}",
        reference.quantile(0.5),
        reference.quantile(0.05),
        reference.quantile(0.95)
    );
    let mut out = Outputs::default();
    out.add("reference_cdf.csv", reference.to_csv().into_bytes());
    Ok((out, Some(seed)))
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

fn selftest(c: &CommonArgs) -> Run {
    let seed = c.seed.unwrap_or(SELFTEST_SEED);
    let points: Vec<ComplexUpper> = default_grid(200)
        .into_iter()
        .map(|(e, eta)| ComplexUpper::new(e, eta))
        .collect::<Result<_, _>>()?;
    let mut checks = Vec::new();

    let mut msc_res: f64 = 0.0;
    for z in &points {
        let m = msc(*z);
        msc_res = msc_res.max((1.0 + z.to_complex() * m + m * m).norm());
    }
    checks.push(Check {
        name: "semicircle equation residual",
        value: msc_res,
        tolerance: 1e-14,
    });

    // c4 = 0.9 / 30² = 1e-3
    let law = LawParams::new(0.9, 30.0, 0.0)?;
    let mut p_res: f64 = 0.0;
    let mut degeneration: f64 = 0.0;
    for z in &points {
        let w = solve_w(&law, *z, SolveMode::Strict)?;
        p_res = p_res.max(eval_p(&law, *z, w).norm() / (1.0 + z.to_complex().norm()));
        let w0 = solve_w(&LawParams::semicircle(), *z, SolveMode::Strict)?;
        degeneration = degeneration.max((w0 - msc(*z)).norm());
    }
    checks.push(Check {
        name: "refined law residual |P(m)|/(1+|z|)",
        value: p_res,
        tolerance: 1e-12,
    });
    checks.push(Check {
        name: "semicircle degeneration",
        value: degeneration,
        tolerance: 1e-12,
    });

    let h = sample_centered_er(100, 0.1, RngStream::new(seed, 0))?;
    let spec = eigen(&h, true)?;
    let (mut ward, mut resolvent, mut counting): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (e, eta) in [(0.5, 0.1), (1.0, 0.5), (-1.5, 0.01), (2.1, 0.05)] {
        let z = ComplexUpper::new(e, eta)?;
        let g = GreenMatrix::from_spectrum(&spec, z)?;
        ward = ward.max(ward_residual(&g));
        resolvent = resolvent.max(resolvent_identity_residual(&h, &g)?);
        let m = empirical_m(&spec, z);
        counting = counting.max((smoothed_count(&spec, e, eta)? - m.im / std::f64::consts::PI).abs());
    }
    checks.push(Check {
        name: "Ward identity",
        value: ward,
        tolerance: 1e-10,
    });
    checks.push(Check {
        name: "resolvent identity",
        value: resolvent,
        tolerance: 1e-10,
    });
    checks.push(Check {
        name: "smoothed count vs Im m / pi",
        value: counting,
        tolerance: 1e-12,
    });

    let mut csv = String::from("check,value,tolerance,pass\n");
    let mut failed = 0;
    for ch in &checks {
        let pass = ch.value <= ch.tolerance;
        failed += usize::from(!pass);
        println!(
            "{} {}: {:e} (tolerance {:e})",
            if pass { "PASS" } else { "FAIL" },
            ch.name,
            ch.value,
            ch.tolerance
        );
        writeln!(csv, "{},{},{},{}", ch.name, ch.value, ch.tolerance, pass).expect("writing to a String");
    }
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} selftest check(s) failed")));
    }
    let mut out = Outputs::default();
    out.add("selftest.csv", csv.into_bytes());
    Ok((out, Some(seed)))
}
