//! The algebraic closure test for periodic caustics, evaluated in
//! 256-bit floating point.

use std::cmp::Ordering;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CausticParam, Ellipsoid};
use crate::quadrature::Knot;

pub(crate) type F = FBig<HalfEven>;

pub(crate) const PRECISION: usize = 256;

pub(crate) fn big(x: f64) -> F {
    F::try_from(x).expect("finite input").with_precision(PRECISION).value()
}

pub(crate) fn abs(x: &F) -> F {
    if x.partial_cmp(&F::ZERO) == Some(Ordering::Less) {
        -x.clone()
    } else {
        x.clone()
    }
}

pub(crate) fn to_f64(x: &F) -> f64 {
    x.to_f64().value()
}

/// Outcome of the closure test for one trial count `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CayleyReport {
    pub m: usize,
    pub rows: usize,
    pub cols: usize,
    /// Singular values of the equilibrated matrix, descending.
    pub singular_values: Vec<f64>,
    /// Rank-deficiency measure; tiny exactly when the closure condition holds.
    pub residual: f64,
    /// `sigma_min / sigma_max` of the equilibrated matrix.
    pub ratio: f64,
}

/// Taylor coefficients `h_0 .. h_count` of the square root of
/// `prod (c_i - s)`.
fn sqrt_series(roots: &[F], count: usize) -> Vec<F> {
    let mut poly = vec![big(1.0)];
    for r in roots {
        let mut next = vec![big(0.0); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] = &next[i] + &(c * r);
            next[i + 1] = &next[i + 1] - c;
        }
        poly = next;
    }
    let coef = |k: usize| if k < poly.len() { poly[k].clone() } else { big(0.0) };
    let h0 = coef(0).sqrt();
    let two_h0 = &h0 * &big(2.0);
    let mut h = vec![h0];
    for k in 1..=count {
        let mut s = coef(k);
        for i in 1..k {
            s = &s - &(&h[i] * &h[k - i]);
        }
        h.push(&s / &two_h0);
    }
    h
}

fn column_norm(m: &[Vec<F>], c: usize) -> F {
    let mut s = big(0.0);
    for row in m {
        s = &s + &(&row[c] * &row[c]);
    }
    s.sqrt()
}

/// Alternating row and column scaling to unit 2-norm.
fn equilibrate(m: &mut [Vec<F>]) {
    let cols = m[0].len();
    for _ in 0..4 {
        for row in m.iter_mut() {
            let mut s = big(0.0);
            for x in row.iter() {
                s = &s + &(x * x);
            }
            let s = s.sqrt();
            if s > F::ZERO {
                for x in row.iter_mut() {
                    *x = &*x / &s;
                }
            }
        }
        for c in 0..cols {
            let s = column_norm(m, c);
            if s > F::ZERO {
                for row in m.iter_mut() {
                    row[c] = &row[c] / &s;
                }
            }
        }
    }
}

/// One-sided Jacobi SVD; returns the singular values in descending order.
fn singular_values(mut a: Vec<Vec<F>>) -> Vec<F> {
    let cols = a[0].len();
    let tol = big(2f64.powi(-(PRECISION as i32) + 16));
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (big(0.0), big(0.0), big(0.0));
                for row in a.iter() {
                    alpha = &alpha + &(&row[i] * &row[i]);
                    beta = &beta + &(&row[j] * &row[j]);
                    gamma = &gamma + &(&row[i] * &row[j]);
                }
                if abs(&gamma) <= &tol * &(&alpha * &beta).sqrt() || gamma == F::ZERO {
                    continue;
                }
                rotated = true;
                let zeta = &(&beta - &alpha) / &(&gamma * &big(2.0));
                let root = (&big(1.0) + &(&zeta * &zeta)).sqrt();
                let t = if zeta >= F::ZERO {
                    &big(1.0) / &(&zeta + &root)
                } else {
                    &big(-1.0) / &(&root - &zeta)
                };
                let c = &big(1.0) / &(&big(1.0) + &(&t * &t)).sqrt();
                let s = &c * &t;
                for row in a.iter_mut() {
                    let (x, y) = (row[i].clone(), row[j].clone());
                    row[i] = &(&c * &x) - &(&s * &y);
                    row[j] = &(&s * &x) + &(&c * &y);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<F> = (0..cols).map(|c| column_norm(&a, c)).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    sv
}

/// Tests whether trajectories with caustics `lambda` close after `m`
/// bounces up to a reflection symmetry of the ellipsoid.
///
/// With `k = m - n` columns the residual is `sigma_k / sigma_{k-1}` of the
/// equilibrated matrix, or for a single column its largest entry over the
/// largest `|h_j|`, `n < j < 2m`.
pub fn cayley_test(e: &Ellipsoid, lambda: &CausticParam, m: usize) -> Result<CayleyReport> {
    let knots: Vec<Knot> = lambda.lambda.iter().map(|&l| Knot::exact(l)).collect();
    cayley_test_knots(e, &knots, m)
}

/// [`cayley_test`] for caustic parameters given as `anchor + offset`; the
/// sum is formed in extended precision, so a caustic close to a semiaxis
/// keeps every digit of its distance to it.
pub fn cayley_test_knots(e: &Ellipsoid, lambda: &[Knot], m: usize) -> Result<CayleyReport> {
    let n = e.n();
    if m < n + 1 {
        return Err(Error::InvalidInput(format!("the closure test needs m >= {}", n + 1)));
    }
    if lambda.len() != n {
        return Err(Error::InvalidInput(format!("expected {n} caustic parameters")));
    }
    let lambda: Vec<F> = lambda.iter().map(|k| &big(k.anchor) + &big(k.offset)).collect();
    cayley_test_exact(e, &lambda, m)
}

/// [`cayley_test`] for caustic parameters in extended precision.
pub(crate) fn cayley_test_exact(e: &Ellipsoid, lambda: &[F], m: usize) -> Result<CayleyReport> {
    let n = e.n();
    if m < n + 1 {
        return Err(Error::InvalidInput(format!("the closure test needs m >= {}", n + 1)));
    }
    let mut roots: Vec<F> = e.semiaxes().iter().map(|&a| big(a)).collect();
    roots.extend(lambda.iter().cloned());
    // a common scale keeps the coefficients within a few orders of magnitude
    let scale = roots
        .iter()
        .fold(roots[0].clone(), |x, y| if *y < x { y.clone() } else { x });
    let roots: Vec<F> = roots.iter().map(|r| r / &scale).collect();
    let h = sqrt_series(&roots, 2 * m);
    let (rows, cols) = (m - 1, m - n);
    let mut mat: Vec<Vec<F>> = (0..rows)
        .map(|r| (0..cols).map(|c| h[m + 1 + r - c].clone()).collect())
        .collect();
    if cols == 1 {
        let reference = (n + 1..2 * m)
            .map(|k| abs(&h[k]))
            .fold(big(0.0), |x, y| if y > x { y } else { x });
        let top = mat
            .iter()
            .map(|r| abs(&r[0]))
            .fold(big(0.0), |x, y| if y > x { y } else { x });
        let residual = to_f64(&(&top / &reference));
        let norm = to_f64(&column_norm(&mat, 0));
        return Ok(CayleyReport {
            m,
            rows,
            cols,
            singular_values: vec![norm],
            residual,
            ratio: residual,
        });
    }
    equilibrate(&mut mat);
    let sv = singular_values(mat);
    let residual = to_f64(&(&sv[cols - 1] / &sv[cols - 2]));
    let ratio = to_f64(&(&sv[cols - 1] / &sv[0]));
    Ok(CayleyReport {
        m,
        rows,
        cols,
        singular_values: sv.iter().map(to_f64).collect(),
        residual,
        ratio,
    })
}

/// Reports for every `m` in `n + 1 ..= m_max`.
pub fn cayley_scan(e: &Ellipsoid, lambda: &CausticParam, m_max: usize) -> Result<Vec<CayleyReport>> {
    (e.n() + 1..=m_max).map(|m| cayley_test(e, lambda, m)).collect()
}

/// `h_0 .. h_count` rounded to double precision, for diagnostics.
pub fn sqrt_series_f64(roots: &[f64], count: usize) -> Vec<f64> {
    let roots: Vec<F> = roots.iter().map(|&r| big(r)).collect();
    sqrt_series(&roots, count).iter().map(to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::minimal_caustics_2d;

    #[test]
    fn series_of_a_square() {
        // sqrt((1 - s)^2) = 1 - s
        let h = sqrt_series_f64(&[1.0, 1.0], 6);
        assert_eq!(h[0], 1.0);
        assert_eq!(h[1], -1.0);
        assert!(h[2..].iter().all(|x| x.abs() < 1e-70));
    }

    #[test]
    fn jacobi_recovers_known_singular_values() {
        let a = vec![
            vec![big(3.0), big(0.0)],
            vec![big(0.0), big(-2.0)],
            vec![big(0.0), big(0.0)],
        ];
        let sv: Vec<f64> = singular_values(a).iter().map(to_f64).collect();
        assert!((sv[0] - 3.0).abs() < 1e-60 && (sv[1] - 2.0).abs() < 1e-60);
        let b = vec![vec![big(1.0), big(1.0)], vec![big(1.0), big(1.0)]];
        let sv: Vec<f64> = singular_values(b).iter().map(to_f64).collect();
        assert!((sv[0] - 2.0).abs() < 1e-60 && sv[1].abs() < 1e-60);
    }

    #[test]
    fn planar_minimal_caustics_close() {
        let (b, a) = (4.0 / 9.0, 1.0);
        let e = Ellipsoid::new(&[b, a]).unwrap();
        let (le, lh) = minimal_caustics_2d(a, b).unwrap();
        let lh = CausticParam::new(&e, &[lh.unwrap()]).unwrap();
        let le = CausticParam::new(&e, &[le]).unwrap();
        assert!(cayley_test(&e, &lh, 2).unwrap().residual < 1e-15);
        assert!(cayley_test(&e, &le, 3).unwrap().residual < 1e-15);
        assert!(cayley_test(&e, &le, 2).unwrap().residual > 1e-6);
        assert!(cayley_test(&e, &lh, 3).unwrap().residual > 1e-6);
    }

    #[test]
    fn h3_vanishes_at_the_period_four_caustic() {
        // h_3 of sqrt((b - s)(a - s)(l - s)) as a function of l
        let (b, a) = (4.0 / 9.0, 1.0);
        let h3 = |l: f64| sqrt_series_f64(&[b, a, l], 3)[3];
        let (mut lo, mut hi) = (0.5, 0.99);
        assert!(h3(lo).signum() != h3(hi).signum());
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if h3(mid).signum() == h3(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - a * b / (a - b)).abs() < 1e-12);
    }
}
