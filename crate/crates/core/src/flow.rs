//! Edge trajectories along the Dyson flow and local-law scans of the
//! interpolated matrices.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{dyson_flow, MatrixSample};
use crate::error::{Error, Result};
use crate::refined_law::{edge, l_dot, LawParams, SolveMode};
use crate::spectral::{eigen, local_law_scan, LocalLawReport};

pub const FLOW_TRAJECTORY_CSV_HEADER: &str = "t,qt,Lt,Ldot";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub t: f64,
    pub qt: f64,
    pub lt: f64,
    pub ldot: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub rows: Vec<FlowRow>,
}

impl FlowTrajectory {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{FLOW_TRAJECTORY_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.t, r.qt, r.lt, r.ldot)?;
        }
        Ok(())
    }
}

/// `t = 0` followed by 25 geometric points on `[1e-3, 6 log N]`.
pub fn default_t_grid(n: usize) -> Vec<f64> {
    let hi = 6.0 * (n as f64).ln();
    let lo = 1e-3f64;
    let mut grid = vec![0.0];
    grid.extend((0..25).map(|i| lo * (hi / lo).powf(i as f64 / 24.0)));
    grid
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::EmptyInput("t grid")),
        Some(&t0) if t0 != 0.0 => return Err(Error::invalid("t grid must start at 0")),
        _ => {}
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("t grid must be finite and ascending"));
    }
    Ok(())
}

/// `(t, q_t, L_t, L̇_t)` for each `t` of the grid.
pub fn trajectory(law0: &LawParams, t_grid: &[f64]) -> Result<FlowTrajectory> {
    check_grid(t_grid)?;
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let law = law0.at_time(t)?;
            Ok(FlowRow {
                t,
                qt: law.qt(),
                lt: edge(&law)?.l,
                ldot: l_dot(&law)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlowTrajectory { rows })
}

/// Law whose quartic coefficient equals `c4` at the (possibly negative)
/// time `t`: `L` depends on `t` only through `c4(t) = e^{-2t} s4 / q²`.
fn law_at_signed_time(law0: &LawParams, t: f64) -> Result<LawParams> {
    LawParams::new(law0.s4, law0.q * t.exp(), 0.0)
}

/// Centered difference `(L_{t+h} - L_{t-h}) / 2h`.
pub fn finite_difference_ldot(law0: &LawParams, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("step h = {h} must be positive")));
    }
    let plus = edge(&law_at_signed_time(law0, t + h)?)?.l;
    let minus = edge(&law_at_signed_time(law0, t - h)?)?.l;
    Ok((plus - minus) / (2.0 * h))
}

/// Local-law scans of `H_t = e^{-t/2} H_0 + sqrt(1 - e^{-t}) W` against the
/// law at time `t`, with one shared `W` for the whole path.
pub fn flow_local_law_check(
    h0: &MatrixSample,
    w: &MatrixSample,
    t_grid: &[f64],
    law0: &LawParams,
    grid: &[(f64, f64)],
    mode: SolveMode,
) -> Result<Vec<LocalLawReport>> {
    check_grid(t_grid)?;
    if h0.n() != w.n() {
        return Err(Error::DimensionMismatch {
            expected: h0.n(),
            found: w.n(),
        });
    }
    t_grid
        .par_iter()
        .map(|&t| {
            let ht = dyson_flow(h0, w, t)?;
            let spec = eigen(&ht, false)?;
            local_law_scan(&spec, &law0.at_time(t)?, grid, mode)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = default_t_grid(500);
        assert_eq!(g.len(), 26);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-3).abs() < 1e-18);
        assert!((g[25] - 6.0 * 500f64.ln()).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_validation() {
        let law = LawParams::new(1.0, 30.0, 0.0).unwrap();
        assert!(trajectory(&law, &[]).is_err());
        assert!(trajectory(&law, &[0.1, 0.2]).is_err());
        assert!(trajectory(&law, &[0.0, 0.2, 0.1]).is_err());
    }

    #[test]
    fn zero_cumulant_is_static() {
        let law = LawParams::new(0.0, 30.0, 0.0).unwrap();
        let traj = trajectory(&law, &default_t_grid(100)).unwrap();
        for r in &traj.rows {
            assert_eq!(r.lt, 2.0);
            assert_eq!(r.ldot, 0.0);
        }
    }

    #[test]
    fn closed_forms_and_monotonicity() {
        let law = LawParams::new(1.0, 30.0, 0.0).unwrap();
        let grid = default_t_grid(500);
        let traj = trajectory(&law, &grid).unwrap();
        for (r, &t) in traj.rows.iter().zip(&grid) {
            assert!((r.qt - 30.0 * (t / 2.0).exp()).abs() <= 1e-14 * r.qt);
            let c4 = law.at_time(t).unwrap().c4();
            assert!((c4 - (-2.0 * t).exp() / 900.0).abs() <= 1e-14 * c4);
            assert!(r.ldot < 0.0);
        }
        assert!(traj.rows.windows(2).all(|w| w[0].qt < w[1].qt && w[1].lt <= w[0].lt));
        let last = traj.rows.last().unwrap();
        let c4_end = law.at_time(last.t).unwrap().c4();
        assert!(c4_end <= 1e-20);
        assert!((last.lt - 2.0).abs() <= 10.0 * c4_end);
    }

    #[test]
    fn derivative_matches_at_early_times() {
        let law = LawParams::new(1.0, 30.0, 0.0).unwrap();
        for t in [0.0, 0.5, 1.0] {
            let c4 = law.at_time(t).unwrap().c4();
            let fd = finite_difference_ldot(&law, t, 1e-4).unwrap();
            let exact = l_dot(&law.at_time(t).unwrap()).unwrap();
            assert!((fd - exact).abs() <= 10.0 * c4 * c4, "t={t} fd={fd} exact={exact}");
        }
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        FlowTrajectory::default().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,qt,Lt,Ldot\n");
    }
}
