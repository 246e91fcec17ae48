//! Roots of complex polynomials through the eigenvalues of a balanced
//! companion matrix, polished by Aberth iterations on the original
//! coefficients.
//!
//! The companion matrix is already upper Hessenberg, so the eigenvalues come
//! from a plain single-shift complex QR iteration with Wilkinson shifts.

use num_complex::Complex64;

use crate::error::{Error, Result};

const QR_MAX_ITER: usize = 60;
const POLISH_ITER: usize = 12;

/// Evaluates `Σ c_k w^k` and its derivative by Horner's rule.
pub fn eval_with_derivative(coeffs: &[Complex64], w: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * w + p;
        p = p * w + c;
    }
    (p, dp)
}

/// All roots of `Σ_k coeffs[k] w^k` (ascending order). Exactly-zero leading
/// coefficients are dropped, so the degree is that of the trimmed polynomial.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = match coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0)) {
        Some(d) => d,
        None => return Err(Error::invalid("zero polynomial has no isolated roots")),
    };
    let coeffs = &coeffs[..=degree];
    if degree == 0 {
        return Ok(Vec::new());
    }
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::invalid("polynomial coefficients must be finite"));
    }

    // Rescale w = s·v so that the constant and leading coefficients have
    // equal modulus; roots of very different sizes then meet in the middle.
    let lead = coeffs[degree].norm();
    let constant = coeffs[0].norm();
    let scale = if constant > 0.0 {
        (constant / lead).powf(1.0 / degree as f64)
    } else {
        1.0
    };
    let mut monic = Vec::with_capacity(degree);
    let mut s_pow = 1.0;
    let lead_scaled = coeffs[degree] * scale.powi(degree as i32);
    for c in &coeffs[..degree] {
        monic.push(*c * s_pow / lead_scaled);
        s_pow *= scale;
    }

    let mut h = companion(&monic);
    balance(&mut h);
    let mut found = hessenberg_eigenvalues(h)?;
    for r in &mut found {
        *r *= scale;
    }
    aberth_polish(coeffs, &mut found);
    Ok(found)
}

/// Frobenius companion matrix of the monic polynomial with lower
/// coefficients `monic` (ascending): ones on the subdiagonal, `-monic` in
/// the last column.
fn companion(monic: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = monic.len();
    let mut h = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 1..n {
        h[i][i - 1] = Complex64::new(1.0, 0.0);
    }
    for (i, c) in monic.iter().enumerate() {
        h[i][n - 1] = -*c;
    }
    h
}

/// Parlett–Reinsch diagonal balancing with powers of two (exact in floating
/// point). Keeps the Hessenberg structure.
fn balance(h: &mut [Vec<Complex64>]) {
    let n = h.len();
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[j][i].l1_norm();
                    r += h[i][j].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * total {
                converged = false;
                for j in 0..n {
                    h[i][j] /= f;
                    h[j][i] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

fn givens(x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (x / r, y / r)
    }
}

/// Eigenvalues of an upper Hessenberg complex matrix by shifted QR.
fn hessenberg_eigenvalues(mut h: Vec<Vec<Complex64>>) -> Result<Vec<Complex64>> {
    let n = h.len();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rotations = Vec::with_capacity(n);
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo][lo - 1].norm();
            let diag = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            if sub <= f64::EPSILON * diag || sub < f64::MIN_POSITIVE {
                h[lo][lo - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > QR_MAX_ITER {
            return Err(Error::RootFinderFailure);
        }

        let a = h[hi - 1][hi - 1];
        let b = h[hi - 1][hi];
        let c = h[hi][hi - 1];
        let d = h[hi][hi];
        let mut shift = if iter % 11 == 10 {
            // exceptional shift to break cycles
            d + h[hi][hi - 1].norm() * 0.75
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        if !shift.re.is_finite() || !shift.im.is_finite() {
            shift = d;
        }

        for k in lo..=hi {
            h[k][k] -= shift;
        }
        rotations.clear();
        for k in lo..hi {
            let (cs, sn) = givens(h[k][k], h[k + 1][k]);
            for j in k..=hi {
                let x = h[k][j];
                let y = h[k + 1][j];
                h[k][j] = cs.conj() * x + sn.conj() * y;
                h[k + 1][j] = -sn * x + cs * y;
            }
            rotations.push((cs, sn));
        }
        for (idx, &(cs, sn)) in rotations.iter().enumerate() {
            let k = lo + idx;
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let x = h[i][k];
                let y = h[i][k + 1];
                h[i][k] = x * cs + y * sn;
                h[i][k + 1] = -x * sn.conj() + y * cs.conj();
            }
        }
        for k in lo..=hi {
            h[k][k] += shift;
        }
    }
    eig[0] = h[0][0];
    Ok(eig)
}

/// Simultaneous Aberth–Ehrlich refinement; a step is kept only when it
/// lowers the residual, so good roots are never made worse.
fn aberth_polish(coeffs: &[Complex64], found: &mut [Complex64]) {
    let n = found.len();
    for _ in 0..POLISH_ITER {
        let mut moved = false;
        for k in 0..n {
            let w = found[k];
            let (p, dp) = eval_with_derivative(coeffs, w);
            if p == Complex64::new(0.0, 0.0) || dp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let mut repel = Complex64::new(0.0, 0.0);
            for (j, &other) in found.iter().enumerate() {
                if j != k && other != w {
                    repel += (w - other).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repel);
            let cand = w - step;
            if !cand.re.is_finite() || !cand.im.is_finite() {
                continue;
            }
            let (pc, _) = eval_with_derivative(coeffs, cand);
            if pc.norm() < p.norm() {
                found[k] = cand;
                if step.norm() > 4.0 * f64::EPSILON * cand.norm() {
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn expand(rs: &[Complex64]) -> Vec<Complex64> {
        let mut p = vec![c(1.0, 0.0)];
        for &r in rs {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            p = next;
        }
        p
    }

    fn matched(found: &[Complex64], expected: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; found.len()];
        expected.iter().all(|e| {
            let best = found
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|a, b| (a.1 - e).norm().partial_cmp(&(b.1 - e).norm()).unwrap());
            match best {
                Some((i, f)) if (f - e).norm() <= tol * (1.0 + e.norm()) => {
                    used[i] = true;
                    true
                }
                _ => false,
            }
        })
    }

    #[test]
    fn quadratic_and_linear() {
        let r = roots(&[c(-2.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((r[0] - c(2.0, 0.0)).norm() < 1e-15);
        let r = roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(r.len(), 2);
        assert!(matched(&r, &[c(0.0, 1.0), c(0.0, -1.0)], 1e-14));
    }

    #[test]
    fn known_quartic() {
        let expected = [c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0), c(0.2, 0.0)];
        let r = roots(&expand(&expected)).unwrap();
        assert!(matched(&r, &expected, 1e-12), "{r:?}");
    }

    #[test]
    fn near_double_root() {
        let expected = [c(1.0, 1e-6), c(1.0, -1e-6), c(-4.0, 0.0), c(4.0, 0.0)];
        let r = roots(&expand(&expected)).unwrap();
        assert!(matched(&r, &expected, 1e-9), "{r:?}");
    }

    #[test]
    fn widely_separated_roots() {
        // 1 + z w + w² + c w⁴ with tiny c: two O(1) roots and two of size c^{-1/2}
        for &cc in &[1e-6, 1e-12, 1e-20, 1e-33] {
            let z = c(0.3, 0.2);
            let coeffs = [c(1.0, 0.0), z, c(1.0, 0.0), c(0.0, 0.0), c(cc, 0.0)];
            let r = roots(&coeffs).unwrap();
            assert_eq!(r.len(), 4);
            let small: Vec<_> = r.iter().filter(|w| w.norm() < 10.0).collect();
            assert_eq!(small.len(), 2, "c = {cc}: {r:?}");
            for w in small {
                let (p, _) = eval_with_derivative(&coeffs, *w);
                assert!(p.norm() < 1e-13, "c = {cc}: residual {}", p.norm());
            }
        }
    }

    #[test]
    fn zero_polynomial_rejected() {
        assert!(roots(&[c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(roots(&[c(3.0, 0.0)]).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn recovers_random_roots(
            re in proptest::collection::vec(-3.0f64..3.0, 4),
            im in proptest::collection::vec(-3.0f64..3.0, 4),
        ) {
            let expected: Vec<_> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
            let coeffs = expand(&expected);
            let r = roots(&coeffs).unwrap();
            for w in &r {
                let (p, _) = eval_with_derivative(&coeffs, *w);
                let scale: f64 = coeffs.iter().enumerate().map(|(k, a)| a.norm() * w.norm().powi(k as i32)).sum();
                prop_assert!(p.norm() <= 1e-12 * scale);
            }
        }
    }
}
