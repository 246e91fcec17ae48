//! The refined deterministic law of sparse random matrices.
//!
//! Its Stieltjes transform `m̃(z)` is the root of
//!
//! ```text
//! P(w) = 1 + z w + w² + c4 w⁴,   c4 = e^{-t} s4 / q_t² = e^{-2t} s4 / q²,
//! ```
//!
//! in the upper half plane inside the disk `|w| <= 5`. Writing `P(w) = 0` as
//! `z = Q(w) = -1/w - w - c4 w³`, the upper spectral edge is `L = Q(τ)` where
//! `τ` is the unique zero of `Q'` in `(-1, -1 + 2 s4 q_t^{-2})`.
//!
//! Roots are computed with [`crate::poly::roots`]. For `c4 <= 1/625` the
//! admissible root is unique (`Strict` mode). Larger `c4` can put a second
//! root inside the disk; `Permissive` mode then follows the physical branch
//! by continuation in `η` from `η = 3`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;
use crate::quadrature;

/// Largest `c4` for which uniqueness of the admissible root is guaranteed.
pub const STRICT_C4_MAX: f64 = 1.0 / 625.0;
/// Radius of the disk the admissible root must lie in.
pub const ROOT_RADIUS: f64 = 5.0;

const CONTINUATION_START: f64 = 3.0;
const CONTINUATION_FACTOR: f64 = 0.9;
const EDGE_TOL: f64 = 1e-13;
const EDGE_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    #[default]
    Strict,
    Permissive,
}

/// A point `E + iη` of the open upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexUpper {
    re: f64,
    im: f64,
}

impl ComplexUpper {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::invalid(format!(
                "spectral parameter {re} + {im}i is not in the upper half plane"
            )));
        }
        Ok(Self { re, im })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Whether the point lies in `{|E| < 3, 0 < η <= 3}`.
    pub fn in_domain(&self) -> bool {
        self.re.abs() < 3.0 && self.im <= 3.0
    }
}

/// Inputs of the law at flow time `t`: fourth normalized cumulant `s4`,
/// initial sparsity `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawParams {
    pub s4: f64,
    pub q: f64,
    pub t: f64,
}

impl LawParams {
    pub fn new(s4: f64, q: f64, t: f64) -> Result<Self> {
        if !s4.is_finite() || s4 < 0.0 {
            return Err(Error::invalid(format!(
                "s4 = {s4}: a negative fourth cumulant is not supported"
            )));
        }
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::invalid(format!("q = {q} must be positive")));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("t = {t} must be nonnegative")));
        }
        Ok(Self { s4, q, t })
    }

    /// Semicircle law (`c4 = 0`).
    pub fn semicircle() -> Self {
        Self {
            s4: 0.0,
            q: 1.0,
            t: 0.0,
        }
    }

    /// Same law at a different flow time.
    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.s4, self.q, t)
    }

    /// Time-dependent sparsity `q_t = q e^{t/2}`.
    pub fn qt(&self) -> f64 {
        self.q * (0.5 * self.t).exp()
    }

    /// Quartic coefficient `c4 = e^{-2t} s4 / q²`.
    pub fn c4(&self) -> f64 {
        (-2.0 * self.t).exp() * self.s4 / (self.q * self.q)
    }

    /// Local-law error scale `q_t^{-2} + (N η)^{-1}`.
    pub fn local_law_bound(&self, n: usize, eta: f64) -> f64 {
        let qt = self.qt();
        1.0 / (qt * qt) + 1.0 / (n as f64 * eta)
    }

    fn check_mode(&self, mode: SolveMode) -> Result<()> {
        if mode == SolveMode::Strict && self.c4() > STRICT_C4_MAX {
            return Err(Error::invalid(format!(
                "c4 = {:.6e} exceeds the strict-mode limit 1/625; use permissive mode",
                self.c4()
            )));
        }
        Ok(())
    }
}

/// `P(w) = 1 + z w + w² + c4 w⁴`.
pub fn quartic(c4: f64, z: Complex64, w: Complex64) -> Complex64 {
    let w2 = w * w;
    1.0 + z * w + w2 + c4 * w2 * w2
}

fn quartic_roots(c4: f64, z: Complex64) -> Result<Vec<Complex64>> {
    let one = Complex64::new(1.0, 0.0);
    poly::roots(&[one, z, one, Complex64::new(0.0, 0.0), Complex64::new(c4, 0.0)])
}

fn admissible(w: &Complex64) -> bool {
    w.im > 0.0 && w.norm() <= ROOT_RADIUS
}

/// Stieltjes transform of the semicircle law.
pub fn msc(z: ComplexUpper) -> Complex64 {
    let z = z.to_complex();
    let s = (z * z - 4.0).sqrt();
    // take the larger-modulus root directly, the other from the product = 1
    let a = (-z + s) * 0.5;
    let b = (-z - s) * 0.5;
    let (big, _) = if a.norm() >= b.norm() { (a, b) } else { (b, a) };
    let small = big.inv();
    if big.im > 0.0 {
        big
    } else {
        small
    }
}

/// The root `w(z)` of `P` with `Im w > 0` and `|w| <= 5`.
pub fn solve_w(law: &LawParams, z: ComplexUpper, mode: SolveMode) -> Result<Complex64> {
    law.check_mode(mode)?;
    let c4 = law.c4();
    if mode == SolveMode::Strict || c4 <= STRICT_C4_MAX {
        unique_root(c4, z.to_complex())
    } else {
        log::warn!(
            "c4 = {c4:.4e} > 1/625: selecting the root by continuation in eta (permissive mode)"
        );
        continued_root(c4, z.re, z.im)
    }
}

fn unique_root(c4: f64, z: Complex64) -> Result<Complex64> {
    let roots = quartic_roots(c4, z)?;
    let mut found = roots.iter().filter(|w| admissible(w));
    match (found.next(), found.next()) {
        (Some(&w), None) => Ok(w),
        (None, _) => Err(Error::NoUpperRoot { re: z.re, im: z.im }),
        (Some(_), Some(_)) => Err(Error::AmbiguousRoot {
            re: z.re,
            im: z.im,
            count: roots.iter().filter(|w| admissible(w)).count(),
        }),
    }
}

fn nearest(roots: &[Complex64], prev: Complex64, filter: impl Fn(&Complex64) -> bool) -> Option<Complex64> {
    roots
        .iter()
        .filter(|w| filter(w))
        .min_by(|a, b| (**a - prev).norm().total_cmp(&(**b - prev).norm()))
        .copied()
}

/// Follows the physical branch from `E + 3i` down to `E + i·eta`
/// (`eta = 0` lands on the real axis).
fn continued_root(c4: f64, e: f64, eta: f64) -> Result<Complex64> {
    let start = CONTINUATION_START.max(eta);
    let z0 = Complex64::new(e, start);
    let reference = msc(ComplexUpper { re: e, im: start });
    let mut w = nearest(&quartic_roots(c4, z0)?, reference, admissible)
        .ok_or(Error::NoUpperRoot { re: e, im: start })?;
    let mut current = start;
    while current > eta {
        current = (current * CONTINUATION_FACTOR).max(eta);
        if eta == 0.0 && current < 1e-12 {
            current = 0.0;
        }
        let z = Complex64::new(e, current);
        let roots = quartic_roots(c4, z)?;
        w = if current == 0.0 {
            nearest(&roots, w, |r| r.im >= 0.0 && r.norm() <= ROOT_RADIUS)
        } else {
            nearest(&roots, w, admissible)
        }
        .ok_or(Error::NoUpperRoot { re: e, im: current })?;
    }
    Ok(w)
}

/// `|z + w(z)|`.
pub fn stability_margin(law: &LawParams, z: ComplexUpper, mode: SolveMode) -> Result<f64> {
    let w = solve_w(law, z, mode)?;
    Ok((z.to_complex() + w).norm())
}

/// Edge data of the refined law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedLaw {
    pub params: LawParams,
    /// Upper edge of the support.
    pub l: f64,
    /// `m̃(L)`, the stationary point of `Q`.
    pub tau: f64,
}

fn q_of(c4: f64, w: f64) -> f64 {
    -1.0 / w - w - c4 * w * w * w
}

fn dq_of(c4: f64, w: f64) -> f64 {
    1.0 / (w * w) - 1.0 - 3.0 * c4 * w * w
}

fn d2q_of(c4: f64, w: f64) -> f64 {
    -2.0 / (w * w * w) - 6.0 * c4 * w
}

/// Locates `τ` (zero of `Q'`) by safeguarded Newton on the bracket
/// `(-1, -1 + 2 s4 q_t^{-2})` and returns `L = Q(τ)`.
pub fn edge(law: &LawParams) -> Result<RefinedLaw> {
    let c4 = law.c4();
    if c4 == 0.0 {
        return Ok(RefinedLaw {
            params: *law,
            l: 2.0,
            tau: -1.0,
        });
    }
    let qt = law.qt();
    let mut width = 2.0 * law.s4 / (qt * qt);
    if law.s4 / (qt * qt) < 1e-14 {
        width *= 2.0;
    }
    // keep a few ulps so the bracket survives rounding when c4 is tiny
    let mut lo = -1.0;
    let mut hi = (-1.0 + width.max(16.0 * f64::EPSILON)).min(-1e-3);
    let (f_lo, f_hi) = (dq_of(c4, lo), dq_of(c4, hi));
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::BracketFailure { lo, hi });
    }

    let mut w = 0.5 * (lo + hi);
    for _ in 0..EDGE_MAX_ITER {
        let f = dq_of(c4, w);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let newton = w - f / d2q_of(c4, w);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - w).abs();
        w = next;
        if step < EDGE_TOL || hi - lo < EDGE_TOL {
            break;
        }
    }
    Ok(RefinedLaw {
        params: *law,
        l: q_of(c4, w),
        tau: w,
    })
}

impl RefinedLaw {
    pub fn c4(&self) -> f64 {
        self.params.c4()
    }

    /// Density `Im w(E)/π` on the real axis; exactly zero outside `(-L, L)`.
    pub fn density(&self, e: f64, mode: SolveMode) -> Result<f64> {
        self.params.check_mode(mode)?;
        if !(e.abs() < self.l) {
            return Ok(0.0);
        }
        let c4 = self.c4();
        let w = if mode == SolveMode::Strict || c4 <= STRICT_C4_MAX {
            let roots = quartic_roots(c4, Complex64::new(e, 0.0))?;
            let mut upper = roots.iter().filter(|w| admissible(w));
            match (upper.next(), upper.next()) {
                (Some(&w), None) => w,
                // the conjugate pair merges into a real double root only
                // within rounding distance of the edge
                (None, _) if self.l - e.abs() < 1e-10 => return Ok(0.0),
                (None, _) => return Err(Error::NoUpperRoot { re: e, im: 0.0 }),
                (Some(_), Some(_)) => {
                    return Err(Error::AmbiguousRoot {
                        re: e,
                        im: 0.0,
                        count: roots.iter().filter(|w| admissible(w)).count(),
                    })
                }
            }
        } else {
            continued_root(c4, e, 0.0)?
        };
        Ok(w.im.max(0.0) / PI)
    }

    /// `∫_{E1}^{E2} ρ̃(x) dx`, absolute tolerance `1e-8`.
    ///
    /// The substitution `x = L sin θ` turns the square-root vanishing at
    /// `±L` into a smooth integrand.
    pub fn integrated_density(&self, e1: f64, e2: f64, mode: SolveMode) -> Result<f64> {
        if !(e1 < e2) {
            return Err(Error::invalid(format!("need E1 < E2 (got {e1}, {e2})")));
        }
        let a = e1.max(-self.l);
        let b = e2.min(self.l);
        if a >= b {
            return Ok(0.0);
        }
        let l = self.l;
        let ta = (a / l).clamp(-1.0, 1.0).asin();
        let tb = (b / l).clamp(-1.0, 1.0).asin();
        quadrature::integrate(
            |theta: f64| Ok(self.density(l * theta.sin(), mode)? * l * theta.cos()),
            ta,
            tb,
            1e-8,
            1e-10,
            4000,
        )
    }

    /// `dL/dt = ∂_t Q(τ) = 2 c4 τ³`.
    pub fn l_dot(&self) -> f64 {
        2.0 * self.c4() * self.tau.powi(3)
    }

    /// Distance to the nearest edge, `min(|E - L|, |E + L|)`.
    pub fn kappa(&self, e: f64) -> f64 {
        (e - self.l).abs().min((e + self.l).abs())
    }
}

pub fn density(law: &LawParams, e: f64, mode: SolveMode) -> Result<f64> {
    edge(law)?.density(e, mode)
}

pub fn integrated_density(law: &LawParams, e1: f64, e2: f64, mode: SolveMode) -> Result<f64> {
    edge(law)?.integrated_density(e1, e2, mode)
}

pub fn l_dot(law: &LawParams) -> Result<f64> {
    Ok(edge(law)?.l_dot())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zu(re: f64, im: f64) -> ComplexUpper {
        ComplexUpper::new(re, im).unwrap()
    }

    fn law(s4: f64, q: f64, t: f64) -> LawParams {
        LawParams::new(s4, q, t).unwrap()
    }

    /// Independent edge oracle: Q'(w) = 0 is a quadratic in u = w².
    fn tau_closed_form(c4: f64) -> f64 {
        -(2.0 / (1.0 + (1.0 + 12.0 * c4).sqrt())).sqrt()
    }

    #[test]
    fn msc_values() {
        let m = msc(zu(0.0, 1.0));
        assert!(m.re.abs() < 1e-16);
        assert!((m.im - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((msc(zu(2.0, 1e-9)) + 1.0).norm() < 1e-4);
        assert!((msc(zu(0.0, 10.0)) - Complex64::new(0.0, 0.0990)).norm() < 1e-3);
        for &(e, eta) in &[(0.3, 0.01), (-2.5, 1e-6), (2.9, 3.0), (1e-8, 1e-8)] {
            let m = msc(zu(e, eta));
            let z = Complex64::new(e, eta);
            assert!(m.im > 0.0);
            assert!((1.0 + z * m + m * m).norm() < 1e-14);
        }
    }

    #[test]
    fn params_validation() {
        assert!(LawParams::new(-0.1, 10.0, 0.0).is_err());
        assert!(LawParams::new(1.0, 0.0, 0.0).is_err());
        assert!(LawParams::new(1.0, 10.0, -1.0).is_err());
        let p = law(1.0, 10.0, 0.7);
        assert!((p.qt() - 10.0 * 0.35f64.exp()).abs() < 1e-14);
        assert!((p.c4() * 100.0 * (1.4f64).exp() - 1.0).abs() < 1e-14);
        assert!((p.c4() - (-0.7f64).exp() / (p.qt() * p.qt())).abs() < 1e-16);
    }

    #[test]
    fn semicircle_degeneration() {
        let sc = LawParams::semicircle();
        for i in 0..40 {
            for j in 0..20 {
                let z = zu(-2.99 + 5.98 * i as f64 / 39.0, 3.0 * 0.5f64.powi(j));
                let w = solve_w(&sc, z, SolveMode::Strict).unwrap();
                assert!((w - msc(z)).norm() <= 1e-12, "{z:?}");
            }
        }
    }

    #[test]
    fn solve_w_near_origin() {
        let c4 = 0.001;
        let p = law(c4 * 100.0, 10.0, 0.0);
        let w = solve_w(&p, zu(1e-9, 1e-6), SolveMode::Strict).unwrap();
        // at z = 0 the quartic is quadratic in w²
        let w2 = (-1.0 + (1.0 - 4.0 * c4).sqrt()) / (2.0 * c4);
        let oracle = Complex64::new(0.0, (-w2).sqrt());
        assert!((w - oracle).norm() < 1e-5, "{w} vs {oracle}");
        assert!((oracle.im - 1.0005).abs() < 1e-4);
    }

    #[test]
    fn strict_mode_limit() {
        let p = law(1.0, 10.0, 0.0); // c4 = 0.01
        assert!(matches!(solve_w(&p, zu(0.0, 1.0), SolveMode::Strict), Err(Error::InvalidParameter(_))));
        let w = solve_w(&p, zu(0.0, 1.0), SolveMode::Permissive).unwrap();
        assert!(quartic(p.c4(), Complex64::new(0.0, 1.0), w).norm() < 1e-12);
    }

    #[test]
    fn permissive_mode_two_admissible_roots() {
        // at c4 = 0.04 the quartic at z ≈ 0 has two roots in the upper disk
        let p = law(4.0, 10.0, 0.0);
        let z = Complex64::new(0.01, 0.01);
        let count = quartic_roots(p.c4(), z).unwrap().iter().filter(|w| admissible(w)).count();
        assert_eq!(count, 2);
        let w = solve_w(&p, zu(0.01, 0.01), SolveMode::Permissive).unwrap();
        // the physical branch is the one continuous with m_sc, |w| ≈ 1
        assert!(w.norm() < 2.0, "{w}");
        assert!(matches!(unique_root(p.c4(), z), Err(Error::AmbiguousRoot { count: 2, .. })));
    }

    #[test]
    fn edge_values() {
        let sc = edge(&LawParams::semicircle()).unwrap();
        assert_eq!((sc.l, sc.tau), (2.0, -1.0));
        let e = edge(&law(1.0, 10.0, 0.0)).unwrap();
        assert!(e.l >= 2.0085 && e.l <= 2.0105, "{}", e.l);
        let tau = tau_closed_form(0.01);
        assert!((e.tau - tau).abs() < 1e-12);
        assert!((e.l - q_of(0.01, tau)).abs() < 1e-13);
        assert!(dq_of(e.c4(), e.tau).abs() < 1e-12);
    }

    #[test]
    fn edge_invariants_across_regime() {
        for &c4 in &[1e-30, 1e-16, 1e-12, 1e-6, 1e-3, 0.0016, 0.01, 0.039] {
            let p = law(c4, 1.0, 0.0);
            let e = edge(&p).unwrap();
            assert!(e.l >= 2.0 && e.l < 3.0);
            assert!(e.tau >= -1.0 && e.tau < -1.0 + 2.0 * c4 + 16.0 * f64::EPSILON);
            assert!((e.tau - tau_closed_form(c4)).abs() < 1e-12, "c4 = {c4}");
            assert!(dq_of(c4, e.tau).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_remainder_is_fourth_order() {
        let qs = [10.0f64, 20.0, 40.0, 80.0];
        let pts: Vec<(f64, f64)> = qs
            .iter()
            .map(|&q| {
                let e = edge(&law(1.0, q, 0.0)).unwrap();
                (q.ln(), (e.l - 2.0 - 1.0 / (q * q)).abs().ln())
            })
            .collect();
        let slope = fit_slope(&pts);
        assert!((slope + 4.0).abs() < 0.3, "{slope}");
    }

    fn fit_slope(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn density_values() {
        let sc = edge(&LawParams::semicircle()).unwrap();
        assert!((sc.density(0.0, SolveMode::Strict).unwrap() - 1.0 / PI).abs() < 1e-15);
        let r = edge(&law(0.1, 10.0, 0.0)).unwrap(); // c4 = 0.001
        let w2 = (-1.0 + (1.0 - 4.0 * 0.001f64).sqrt()) / 0.002;
        let oracle = (-w2).sqrt() / PI;
        let d = r.density(0.0, SolveMode::Strict).unwrap();
        assert!((d - oracle).abs() < 1e-13);
        assert!((d - 0.31847).abs() < 1e-5);
        assert_eq!(r.density(r.l + 1e-6, SolveMode::Strict).unwrap(), 0.0);
        assert_eq!(r.density(-r.l - 1e-6, SolveMode::Strict).unwrap(), 0.0);
        assert!(r.density(r.l - 1e-6, SolveMode::Strict).unwrap() > 0.0);
    }

    #[test]
    fn density_symmetry() {
        let r = edge(&law(1.0, 30.0, 0.0)).unwrap();
        for i in 0..200 {
            let e = r.l * (i as f64 / 200.0);
            let a = r.density(e, SolveMode::Strict).unwrap();
            let b = r.density(-e, SolveMode::Strict).unwrap();
            assert!((a - b).abs() < 1e-12, "E = {e}");
        }
    }

    #[test]
    fn permissive_density_matches_strict_where_both_apply() {
        let r = edge(&law(1.0, 30.0, 0.0)).unwrap();
        for &e in &[0.0, 0.7, -1.5, 1.99] {
            let a = r.density(e, SolveMode::Strict).unwrap();
            let b = r.density(e, SolveMode::Permissive).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let wide = edge(&law(4.0, 10.0, 0.0)).unwrap();
        let d0 = wide.density(0.0, SolveMode::Permissive).unwrap();
        assert!(d0 > 0.2 && d0 < 0.5, "{d0}");
    }

    #[test]
    fn mass_and_symmetry_of_measure() {
        let r = edge(&law(1.0, 30.0, 0.0)).unwrap();
        let total = r.integrated_density(-r.l - 1.0, r.l + 1.0, SolveMode::Strict).unwrap();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        for &e in &[0.5, 1.3, 2.0] {
            let whole = r.integrated_density(-e, e, SolveMode::Strict).unwrap();
            let half = r.integrated_density(0.0, e, SolveMode::Strict).unwrap();
            assert!((whole - 2.0 * half).abs() < 1e-8);
        }
        assert!(r.integrated_density(1.0, 0.5, SolveMode::Strict).is_err());
        assert_eq!(r.integrated_density(r.l, r.l + 1.0, SolveMode::Strict).unwrap(), 0.0);
    }

    #[test]
    fn edge_mass_exponent() {
        let r = edge(&law(1.0, 30.0, 0.0)).unwrap();
        let pts: Vec<(f64, f64)> = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
            .iter()
            .map(|&d: &f64| {
                let m = r.integrated_density(r.l - d, r.l, SolveMode::Strict).unwrap();
                (d.ln(), m.ln())
            })
            .collect();
        let slope = fit_slope(&pts);
        assert!((slope - 1.5).abs() < 0.05, "{slope}");
    }

    #[test]
    fn l_dot_matches_finite_difference() {
        assert_eq!(edge(&LawParams::semicircle()).unwrap().l_dot(), 0.0);
        let h = 1e-4;
        // c4 depends on t only through e^{-2t}/q², so t = -h is q·e^{-h} at t = 0
        let edge_at = |q: f64, t: f64| edge(&law(1.0, q, t)).unwrap().l;
        let fd0 = (edge_at(30.0, h) - edge_at(30.0 * (-h).exp(), 0.0)) / (2.0 * h);
        let ld = l_dot(&law(1.0, 30.0, 0.0)).unwrap();
        assert!((ld - fd0).abs() < 5e-5);
        assert!((ld + 2.0 / 900.0).abs() < 5e-5, "{ld}");
        for &t in &[0.3, 1.0, 2.5] {
            let c4 = law(1.0, 30.0, t).c4();
            let fd = (edge_at(30.0, t + h) - edge_at(30.0, t - h)) / (2.0 * h);
            let ld = l_dot(&law(1.0, 30.0, t)).unwrap();
            assert!((fd - ld).abs() <= 10.0 * c4 * c4, "t = {t}: {fd} vs {ld}");
        }
        for &s4 in &[0.1, 1.0, 3.0] {
            assert!(l_dot(&law(s4, 20.0, 0.5)).unwrap() < 0.0);
        }
    }

    #[test]
    fn stability_values() {
        let m = stability_margin(&LawParams::semicircle(), zu(0.0, 1.0), SolveMode::Strict).unwrap();
        assert!((m - (1.0 + (5f64.sqrt() - 1.0) / 2.0)).abs() < 1e-14);
        let p = law(1.0, 25.0, 0.0); // c4 = 1/625
        for i in 0..=60 {
            let e = -3.0 + 1e-6 + (6.0 - 2e-6) * i as f64 / 60.0;
            for &eta in &[1e-3, 1e-2, 0.5, 3.0] {
                let m = stability_margin(&p, zu(e, eta), SolveMode::Strict).unwrap();
                assert!(m > 1.0 / 6.0, "E = {e}, eta = {eta}: {m}");
            }
        }
        let m = stability_margin(&p, zu(3.0 - 1e-6, 1e-3), SolveMode::Strict).unwrap();
        assert!(m > 1.0 / 6.0);
    }

    #[test]
    fn stieltjes_tail() {
        let p = law(1.0, 30.0, 0.0);
        for &y in &[10.0, 50.0, 100.0] {
            let w = solve_w(&p, zu(0.0, y), SolveMode::Strict).unwrap();
            let v = Complex64::new(0.0, y) * w + 1.0;
            assert!(v.norm() <= 3.0 / y);
        }
    }

    #[test]
    fn flow_monotone_edge() {
        let base = law(1.0, 20.0, 0.0);
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let t = 0.25 * k as f64;
            let l = edge(&base.at_time(t).unwrap()).unwrap().l;
            assert!(l <= prev);
            prev = l;
        }
        assert!((prev - 2.0).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn residual_and_stability(
            e in -2.999f64..2.999,
            log_eta in -9.0f64..(3f64.ln()),
            c4 in 0.0f64..STRICT_C4_MAX,
        ) {
            let p = LawParams::new(c4, 1.0, 0.0).unwrap();
            let z = zu(e, log_eta.exp().min(3.0));
            let w = solve_w(&p, z, SolveMode::Strict).unwrap();
            let zc = z.to_complex();
            prop_assert!(quartic(c4, zc, w).norm() <= 1e-12 * (1.0 + zc.norm()));
            prop_assert!(w.im > 0.0 && w.norm() <= ROOT_RADIUS);
            prop_assert!((zc + w).norm() > 1.0 / 6.0);
        }
    }
}
