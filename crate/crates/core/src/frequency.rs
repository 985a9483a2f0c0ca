//! The frequency map, the planar rotation number and the continuous
//! extension of both to the boundary of the caustic space.
//!
//! Interior values solve `K_0 + 2 sum (-1)^j omega_j K_j = 0`. Because the
//! quadrature works on exact knot distances, the same solve stays accurate
//! arbitrarily close to a collapse; the edge formulas are only used on the
//! boundary itself.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::asymptotics::{self, CollapseKind};
use crate::error::{Error, Result};
use crate::geometry::{CausticParam, Ellipsoid};
use crate::quadrature::{integral_table_unchecked, CollapseConfig, Entry, IntegralTable, Knot, Line, QuadratureConfig};

/// How a frequency value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    InteriorQuadrature,
    EdgeFormula,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frequency {
    pub omega: Vec<f64>,
    pub source: Source,
    /// Relative residual of the defining linear system, zero for closed forms.
    pub residual: f64,
}

/// Solves `K_0 + 2 sum_j (-1)^j omega_j K_j = 0` for `omega`.
pub fn solve_table(t: &IntegralTable) -> Result<(Vec<f64>, f64)> {
    let n = t.n();
    if n == 1 {
        let w = t.k[0][0] / (2.0 * t.k[0][1]);
        return Ok((vec![w], 0.0));
    }
    let m = DMatrix::from_fn(n, n, |i, j| {
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        2.0 * sign * t.k[i][j + 1]
    });
    let rhs = DVector::from_fn(n, |i, _| -t.k[i][0]);
    let omega = m
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem(format!("frequency matrix {m}")))?;
    let resid = (&m * &omega - &rhs).norm() / rhs.norm();
    Ok((omega.iter().copied().collect(), resid))
}

/// The frequency of a configuration at any positive gap.
pub fn frequency_of_config(c: &CollapseConfig, cfg: &QuadratureConfig) -> Result<Frequency> {
    if c.n() == 0 {
        return Ok(Frequency {
            omega: vec![],
            source: Source::InteriorQuadrature,
            residual: 0.0,
        });
    }
    let t = integral_table_unchecked(c, cfg)?;
    let (omega, residual) = solve_table(&t)?;
    Ok(Frequency {
        omega,
        source: Source::InteriorQuadrature,
        residual,
    })
}

/// The frequency of a nonsingular caustic parameter.
///
/// Fails with `NearCollapse` when some gap of the merged vector is below
/// `gap_min` times the scale; [`frequency_unguarded`] and
/// [`extended_frequency`] accept those points.
pub fn frequency(e: &Ellipsoid, lambda: &CausticParam) -> Result<Frequency> {
    frequency_with(e, lambda, &QuadratureConfig::default())
}

pub fn frequency_with(e: &Ellipsoid, lambda: &CausticParam, cfg: &QuadratureConfig) -> Result<Frequency> {
    let c = CollapseConfig::new(e, &lambda.lambda)?;
    let (_, gap) = c.min_gap();
    if gap < cfg.gap_min * c.scale() {
        return Err(Error::NearCollapse { gap });
    }
    frequency_of_config(&c, cfg)
}

/// The interior frequency without the collapse guard.
pub fn frequency_unguarded(e: &Ellipsoid, lambda: &[f64], cfg: &QuadratureConfig) -> Result<Frequency> {
    let c = CollapseConfig::new(e, lambda)?;
    frequency_of_config(&c, cfg)
}

/// `rho(lambda; b, a)` for knots at any positive distance from `0, b, a`.
pub fn rho_knots(lambda: Knot, b: Knot, a: Knot) -> Result<f64> {
    let c = CollapseConfig::from_knots(&[b, a], &[lambda])?;
    Ok(frequency_of_config(&c, &QuadratureConfig::default())?.omega[0])
}

/// The rotation number of the billiard in the ellipse with squared
/// semiaxes `b < a` and caustic parameter `lambda`.
pub fn rotation_number_2d(lambda: f64, b: f64, a: f64) -> Result<f64> {
    check_planar(b, a)?;
    if !(lambda > 0.0 && lambda < a) {
        return Err(Error::InvalidInput(format!("lambda = {lambda} is outside (0, {a})")));
    }
    let tol = QuadratureConfig::default().gap_min * a;
    if lambda < tol || (lambda - b).abs() < tol || a - lambda < tol {
        return Err(Error::SingularParameter(format!(
            "lambda = {lambda} is within {tol:e} of 0, b or a"
        )));
    }
    rho_knots(Knot::exact(lambda), Knot::exact(b), Knot::exact(a))
}

/// The rotation number extended continuously to `[0, a]`.
pub fn rho_extended(lambda: f64, b: f64, a: f64) -> Result<f64> {
    check_planar(b, a)?;
    if lambda == 0.0 {
        Ok(0.0)
    } else if lambda == b {
        Ok(0.5)
    } else if lambda == a {
        Ok(varrho(b, a))
    } else if lambda > 0.0 && lambda < a {
        rho_knots(Knot::exact(lambda), Knot::exact(b), Knot::exact(a))
    } else {
        Err(Error::InvalidInput(format!("lambda = {lambda} is outside [0, {a}]")))
    }
}

fn check_planar(b: f64, a: f64) -> Result<()> {
    if !(b > 0.0 && b < a) {
        return Err(Error::DegenerateEllipsoid(format!(
            "need 0 < b < a, got b = {b}, a = {a}"
        )));
    }
    Ok(())
}

/// `varrho(b, a)` in `(0, 1/2)` with `sin^2(pi varrho) = b / a`.
pub fn varrho(b: f64, a: f64) -> f64 {
    // the arctangent form stays accurate as b approaches a
    b.sqrt().atan2((a - b).sqrt()) / PI
}

/// `acosh(sqrt(a / b))`, the log-rate coefficient at `lambda = b`.
pub fn kappa_s_2d(b: f64, a: f64) -> f64 {
    (a / b).sqrt().acosh()
}

/// Geodesic-limit coefficients `kappa^G` of the tail `(lambda_2, ..., lambda_n)`.
pub fn kappa_g(e: &Ellipsoid, tail: &[f64]) -> Result<Vec<f64>> {
    if tail.len() + 2 != e.dim() {
        return Err(Error::InvalidInput(format!("expected {} tail parameters", e.n() - 1)));
    }
    let mut pts: Vec<Knot> = e.semiaxes().iter().map(|&x| Knot::exact(x)).collect();
    pts.extend(tail.iter().map(|&x| Knot::exact(x)));
    pts.sort_by(|x, y| x.value().total_cmp(&y.value()));
    if pts.windows(2).any(|w| w[0].value() >= w[1].value()) {
        return Err(Error::SingularCaustic("tail parameters meet a semiaxis".into()));
    }
    kappa_g_knots(&pts)
}

/// `kappa^G` for the geodesic configuration `(0, c_2, ..., c_{2n+1})`.
pub(crate) fn kappa_g_knots(rest: &[Knot]) -> Result<Vec<f64>> {
    let n = rest.len() / 2;
    let cfg = QuadratureConfig::default();
    let mut pts = vec![(Knot::ZERO, 0.5)];
    pts.extend(rest.iter().map(|k| (*k, 0.5)));
    let line = Line::new(pts);
    let prod: f64 = rest.iter().map(Knot::value).product();
    let k00 = 2.0 / prod.sqrt();
    let mut cols = Vec::with_capacity(n);
    for j in 1..=n {
        let est = line.integrate(2 * j - 1, 2 * j, n, &cfg, |s, out| {
            let mut x = 1.0;
            for o in out.iter_mut().take(n) {
                *o = x;
                x *= s;
            }
        })?;
        cols.push(est.value[..n].to_vec());
    }
    let m = DMatrix::from_fn(n, n, |i, j| {
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        2.0 * sign * cols[j][i]
    });
    let rhs = DVector::from_fn(n, |i, _| if i == 0 { -k00 } else { 0.0 });
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("geodesic system".into()))?;
    Ok(sol.iter().copied().collect())
}

/// The geodesic rotation number on the ellipsoid `(c, b, a)`, as a quotient
/// of two integrals of `s / sqrt(T^G)`.
pub fn rho_geodesic(lambda: f64, c: f64, b: f64, a: f64) -> Result<f64> {
    if !(0.0 < c && c < b && b < a) {
        return Err(Error::DegenerateEllipsoid(format!(
            "need 0 < c < b < a, got {c}, {b}, {a}"
        )));
    }
    if lambda == b {
        return Ok(1.0);
    }
    if !(lambda > c && lambda < a) {
        return Err(Error::InvalidInput(format!("lambda = {lambda} is outside (c, a)")));
    }
    let cfg = QuadratureConfig::default();
    let (lo, hi) = (Knot::exact(lambda.min(b)), Knot::exact(lambda.max(b)));
    let line = Line::new(vec![
        (Knot::ZERO, 0.5),
        (Knot::exact(c), 0.5),
        (lo, 0.5),
        (hi, 0.5),
        (Knot::exact(a), 0.5),
    ]);
    let num = line.integrate(1, 2, 1, &cfg, |s, out| out[0] = s)?.value[0];
    let den = line.integrate(3, 4, 1, &cfg, |s, out| out[0] = s)?.value[0];
    Ok(num / den)
}

/// One of the `nu` functions attached to the edges of the 3D caustic space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NuKind {
    X,
    Y,
    Z,
}

/// `nu_x(lambda)` for `lambda` in `(0, c)` or `(c, b)`.
pub fn nu_x(lambda: f64, c: f64, b: f64, a: f64) -> Result<f64> {
    nu_checked(NuKind::X, lambda, c, b, a)
}

/// `nu_y(lambda)` for `lambda` in `(b, a)`.
pub fn nu_y(lambda: f64, c: f64, b: f64, a: f64) -> Result<f64> {
    nu_checked(NuKind::Y, lambda, c, b, a)
}

/// `nu_z(lambda)` for `lambda` in `(0, c)` or `(c, b)`.
pub fn nu_z(lambda: f64, c: f64, b: f64, a: f64) -> Result<f64> {
    nu_checked(NuKind::Z, lambda, c, b, a)
}

fn nu_checked(kind: NuKind, lambda: f64, c: f64, b: f64, a: f64) -> Result<f64> {
    if !(0.0 < c && c < b && b < a) {
        return Err(Error::DegenerateEllipsoid(format!(
            "need 0 < c < b < a, got {c}, {b}, {a}"
        )));
    }
    let tol = QuadratureConfig::default().gap_min * a;
    let ends: &[f64] = match kind {
        NuKind::X | NuKind::Z => &[0.0, c, b],
        NuKind::Y => &[b, a],
    };
    let (lo, hi) = (ends[0], ends[ends.len() - 1]);
    if !(lambda > lo && lambda < hi) {
        return Err(Error::InvalidInput(format!(
            "lambda = {lambda} is outside ({lo}, {hi})"
        )));
    }
    if let Some(&end) = ends.iter().find(|&&x| (lambda - x).abs() < tol) {
        return Err(Error::NearEndpoint {
            limit: nu_limit(kind, end, c, b, a)?,
        });
    }
    nu_knot(kind, Knot::exact(lambda), c, b, a)
}

/// Endpoint values of the `nu` functions.
fn nu_limit(kind: NuKind, end: f64, c: f64, b: f64, a: f64) -> Result<f64> {
    Ok(match kind {
        NuKind::X if end == 0.0 => 0.0,
        NuKind::X if end == c => varrho(b, a),
        NuKind::X => varrho(c, a),
        NuKind::Z if end == 0.0 => 0.0,
        NuKind::Z if end == c => 0.5,
        NuKind::Z => rho_knots(Knot::exact(c), Knot::exact(b), Knot::exact(a))?,
        NuKind::Y if end == b => rho_knots(Knot::exact(c), Knot::exact(b), Knot::exact(a))?,
        NuKind::Y => varrho(c, b),
    })
}

/// Public knot-level access for exact-offset evaluations near vertices.
pub fn nu_x_knot(lambda: Knot, c: f64, b: f64, a: f64) -> Result<f64> {
    nu_knot(NuKind::X, lambda, c, b, a)
}

pub fn nu_y_knot(lambda: Knot, c: f64, b: f64, a: f64) -> Result<f64> {
    nu_knot(NuKind::Y, lambda, c, b, a)
}

pub fn nu_z_knot(lambda: Knot, c: f64, b: f64, a: f64) -> Result<f64> {
    nu_knot(NuKind::Z, lambda, c, b, a)
}

/// Solves the defining identity of a `nu` function for its value.
///
/// Each identity has the shape `I + 2 rho J +- 2 pi nu / sqrt(-T(pole)) = 0`
/// where `T` is the cubic with the three remaining roots and the pole is
/// the fourth special value.
fn nu_knot(kind: NuKind, lambda: Knot, c: f64, b: f64, a: f64) -> Result<f64> {
    let cfg = QuadratureConfig::default();
    let (ck, bk, ak) = (Knot::exact(c), Knot::exact(b), Knot::exact(a));
    let (lo, hi) = if Knot::exact(c).gap_to(&lambda) > 0.0 {
        (ck, lambda)
    } else {
        (lambda, ck)
    };
    match kind {
        NuKind::X => {
            // roots {lambda, c, b}, pole a
            let line = Line::new(vec![(Knot::ZERO, 0.0), (lo, 0.5), (hi, 0.5), (bk, 0.5), (ak, 1.0)]);
            let i = line.integrate(0, 1, 1, &cfg, |_, o| o[0] = 1.0)?.value[0];
            let j = line.integrate(2, 3, 1, &cfg, |_, o| o[0] = 1.0)?.value[0];
            let rho = rho_knots(lambda, ck, bk)?;
            let scale = (lambda.gap_to(&ak) * (a - c) * (a - b)).sqrt();
            Ok(-(i - 2.0 * rho * j) * scale / (2.0 * PI))
        }
        NuKind::Y => {
            // roots {c, lambda, a}, pole b
            let line = Line::new(vec![(Knot::ZERO, 0.0), (ck, 0.5), (bk, 1.0), (lambda, 0.5), (ak, 0.5)]);
            let i = line.integrate(0, 1, 1, &cfg, |_, o| o[0] = 1.0)?.value[0];
            let j = line.integrate(3, 4, 1, &cfg, |_, o| o[0] = 1.0)?.value[0];
            let rho = rho_knots(lambda, ck, ak)?;
            let scale = ((b - c) * bk.gap_to(&lambda) * (a - b)).sqrt();
            Ok((i + 2.0 * rho * j) * scale / (2.0 * PI))
        }
        NuKind::Z => {
            // roots {min(lambda, c), b, a}, pole max(lambda, c)
            let line = Line::new(vec![(Knot::ZERO, 0.0), (lo, 0.5), (hi, 1.0), (bk, 0.5), (ak, 0.5)]);
            let i = line.integrate(0, 1, 1, &cfg, |_, o| o[0] = 1.0)?.value[0];
            let j = line.integrate(3, 4, 1, &cfg, |_, o| o[0] = 1.0)?.value[0];
            let rho = rho_knots(lo, bk, ak)?;
            let scale = (lo.gap_to(&hi) * hi.gap_to(&bk) * hi.gap_to(&ak)).sqrt();
            Ok((i + 2.0 * rho * j) * scale / (2.0 * PI))
        }
    }
}

/// Solution of `rho(lambda) = rho0` on one side of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchRoot {
    pub lambda: f64,
    /// Signed distance `lambda - b`, exact even when `lambda` rounds to `b`.
    pub offset: f64,
    /// `+-16 (a - b) exp(-kappa^S / (1/2 - rho0))`.
    pub predicted_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaPm {
    pub minus: BranchRoot,
    pub plus: Option<BranchRoot>,
}

/// Caustic parameters with rotation number `rho0` in `E` and in `H`.
pub fn lambda_pm(rho0: f64, b: f64, a: f64) -> Result<LambdaPm> {
    let minus = lambda_minus(rho0, b, a)?;
    let plus = match lambda_plus(rho0, b, a) {
        Ok(r) => Some(r),
        Err(Error::NotInRange(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(LambdaPm { minus, plus })
}

fn predicted_offset(rho0: f64, b: f64, a: f64) -> f64 {
    16.0 * (a - b) * (-kappa_s_2d(b, a) / (0.5 - rho0)).exp()
}

/// The ellipse caustic `b - eps` with rotation number `rho0`.
pub fn lambda_minus(rho0: f64, b: f64, a: f64) -> Result<BranchRoot> {
    check_planar(b, a)?;
    if !(rho0 > 0.0 && rho0 < 0.5) {
        return Err(Error::NotInRange(format!("rho0 = {rho0} is outside (0, 1/2)")));
    }
    let f = |u: f64| -> Result<f64> { Ok(rho_knots(Knot::near(b, -u.exp()), Knot::exact(b), Knot::exact(a))? - rho0) };
    let (mut lo, mut hi) = (-700.0f64, (b * (1.0 - 1e-6)).ln());
    // rho increases towards b, so f is decreasing in u
    if f(lo)? < 0.0 {
        return Err(Error::NotInRange(format!(
            "rho0 = {rho0} needs a caustic closer to b than 1e-304"
        )));
    }
    if f(hi)? > 0.0 {
        return Err(Error::NotInRange(format!("rho0 = {rho0} is below the range")));
    }
    let u = bisect_log(&f, &mut lo, &mut hi)?;
    let eps = u.exp();
    Ok(BranchRoot {
        lambda: b - eps,
        offset: -eps,
        predicted_offset: -predicted_offset(rho0, b, a),
    })
}

/// The smallest hyperbola caustic `b + eps` with rotation number `rho0`.
pub fn lambda_plus(rho0: f64, b: f64, a: f64) -> Result<BranchRoot> {
    check_planar(b, a)?;
    if !(rho0 > varrho(b, a) && rho0 < 0.5) {
        return Err(Error::NotInRange(format!(
            "rho0 = {rho0} is not in (varrho, 1/2) = ({}, 0.5)",
            varrho(b, a)
        )));
    }
    let f = |u: f64| -> Result<f64> { Ok(rho_knots(Knot::near(b, u.exp()), Knot::exact(b), Knot::exact(a))? - rho0) };
    let top = (a - b).ln();
    let steps = 240;
    let mut prev_u = -700.0;
    let mut prev = f(prev_u)?;
    if prev < 0.0 {
        return Err(Error::NotInRange(format!(
            "rho0 = {rho0} needs a caustic closer to b than 1e-304"
        )));
    }
    for k in 1..=steps {
        let u = -700.0 + (top - 1e-9 + 700.0) * k as f64 / steps as f64;
        let cur = f(u)?;
        if cur <= 0.0 {
            let (mut lo, mut hi) = (prev_u, u);
            let root = bisect_log(&f, &mut lo, &mut hi)?;
            let eps = root.exp();
            return Ok(BranchRoot {
                lambda: b + eps,
                offset: eps,
                predicted_offset: predicted_offset(rho0, b, a),
            });
        }
        prev_u = u;
        prev = cur;
    }
    let _ = prev;
    Err(Error::NotInRange(format!(
        "no hyperbola caustic with rotation number {rho0}"
    )))
}

/// Root of a function that is positive at `lo` and negative at `hi`,
/// refined by bisection and then secant steps.
fn bisect_log(f: &dyn Fn(f64) -> Result<f64>, lo: &mut f64, hi: &mut f64) -> Result<f64> {
    let (mut flo, mut fhi) = (f(*lo)?, f(*hi)?);
    for _ in 0..200 {
        if (*hi - *lo).abs() < 1e-13 * (1.0 + lo.abs()) {
            break;
        }
        // regula falsi with a bisection fallback keeps the bracket tight
        let mut mid = *lo + (*hi - *lo) * flo / (flo - fhi);
        if !(mid > *lo && mid < *hi) || (*hi - *lo) > 4.0 {
            mid = 0.5 * (*lo + *hi);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm > 0.0 {
            *lo = mid;
            flo = fm;
        } else {
            *hi = mid;
            fhi = fm;
        }
        if flo.abs() > 4.0 * fhi.abs() || fhi.abs() > 4.0 * flo.abs() {
            let m = 0.5 * (*lo + *hi);
            let fm = f(m)?;
            if fm > 0.0 {
                *lo = m;
                flo = fm;
            } else {
                *hi = m;
                fhi = fm;
            }
        }
    }
    Ok(if flo.abs() < fhi.abs() { *lo } else { *hi })
}

/// Smallest distance from `lambda_i` to the ends of its admissible slot.
fn local_gap(e: &Ellipsoid, lambda: &[f64], i: usize) -> f64 {
    let mut marks: Vec<f64> = vec![0.0];
    marks.extend_from_slice(e.semiaxes());
    marks.extend(lambda.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, l)| *l));
    marks
        .iter()
        .map(|m| (m - lambda[i]).abs())
        .fold(f64::INFINITY, f64::min)
}

/// `d omega_j / d lambda_i` by Richardson-extrapolated central differences.
/// Entry `(j, i)` of the returned row-major matrix.
pub fn jacobian(e: &Ellipsoid, lambda: &CausticParam) -> Result<Vec<Vec<f64>>> {
    let n = e.n();
    let cfg = QuadratureConfig::default();
    let lam = &lambda.lambda;
    let mut jac = vec![vec![0.0; n]; n];
    for i in 0..n {
        let gap = local_gap(e, lam, i);
        if gap < cfg.gap_min * e.scale() {
            return Err(Error::NearCollapse { gap });
        }
        let h = 1e-5 * gap;
        let diff = |h: f64| -> Result<Vec<f64>> {
            let mut up = lam.clone();
            let mut dn = lam.clone();
            up[i] += h;
            dn[i] -= h;
            let wu = frequency_unguarded(e, &up, &cfg)?.omega;
            let wd = frequency_unguarded(e, &dn, &cfg)?.omega;
            Ok((0..n).map(|j| (wu[j] - wd[j]) / (2.0 * h)).collect())
        };
        let d1 = diff(h)?;
        let d2 = diff(0.5 * h)?;
        for j in 0..n {
            jac[j][i] = (4.0 * d2[j] - d1[j]) / 3.0;
        }
    }
    Ok(jac)
}

pub fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j]).determinant()
}

/// `(1 - exp(-|det J|))^(1/4)`, a bounded proxy for the Jacobian.
pub fn normalized_jacobian(e: &Ellipsoid, lambda: &CausticParam) -> Result<f64> {
    let d = determinant(&jacobian(e, lambda)?);
    Ok(normalize_det(d))
}

pub fn normalize_det(d: f64) -> f64 {
    (1.0 - (-d.abs()).exp()).powf(0.25)
}

/// Which piece of the closure of the caustic space a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeTag {
    Interior,
    /// `lambda_1 = 0`: the geodesic-flow limit.
    G,
    /// Regular collapse `c_{2l} = c_{2l+1}`.
    R(usize),
    /// Singular collapse `c_{2l-1} = c_{2l}`.
    S(usize),
    Vertex,
}

/// A point of the closure of the caustic space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgePoint {
    pub lambda: Vec<f64>,
    pub tag: EdgeTag,
}

impl EdgePoint {
    /// Classifies `lambda` by exact coincidences with `0`, the semiaxes and
    /// the other caustic parameters.
    pub fn new(e: &Ellipsoid, lambda: &[f64]) -> Result<EdgePoint> {
        if lambda.len() != e.n() {
            return Err(Error::InvalidInput(format!("expected {} caustic parameters", e.n())));
        }
        if lambda.windows(2).any(|w| w[0] > w[1]) || lambda.iter().any(|l| !(*l >= 0.0 && *l <= e.scale())) {
            return Err(Error::InvalidInput(format!(
                "{lambda:?} is not in the closure of the caustic space"
            )));
        }
        for (i, &l) in lambda.iter().enumerate() {
            let (lo, hi) = (e.axis(i), e.axis(i + 2).max(e.axis(i + 1)));
            if l < lo || l > hi {
                return Err(Error::InvalidInput(format!(
                    "lambda_{} = {l} is outside [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        let mut merged: Vec<(f64, bool)> = e.semiaxes().iter().map(|&a| (a, true)).collect();
        merged.extend(lambda.iter().map(|&l| (l, false)));
        merged.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut tags = Vec::new();
        if merged[0].0 == 0.0 {
            tags.push(EdgeTag::G);
        }
        for k in 1..merged.len() {
            if merged[k].0 == merged[k - 1].0 {
                // merged index k is c_{k+1}; the pair is (c_k, c_{k+1})
                let lower = k;
                tags.push(if lower % 2 == 0 {
                    EdgeTag::R(lower / 2)
                } else {
                    EdgeTag::S(lower.div_ceil(2))
                });
            }
        }
        let tag = match tags.len() {
            0 => EdgeTag::Interior,
            1 => tags[0],
            _ => EdgeTag::Vertex,
        };
        Ok(EdgePoint {
            lambda: lambda.to_vec(),
            tag,
        })
    }
}

/// The frequency map extended to the closure of the caustic space.
pub fn extended_frequency(e: &Ellipsoid, p: &EdgePoint) -> Result<Frequency> {
    let cfg = QuadratureConfig::default();
    if p.tag == EdgeTag::Interior {
        return frequency_unguarded(e, &p.lambda, &cfg);
    }
    let closed = |omega: Vec<f64>| Frequency {
        omega,
        source: Source::EdgeFormula,
        residual: 0.0,
    };
    match e.n() {
        1 => {
            let (b, a) = (e.semiaxes()[0], e.semiaxes()[1]);
            Ok(closed(vec![rho_extended(p.lambda[0], b, a)?]))
        }
        2 => Ok(closed(edge_value_3d(e, &p.lambda)?)),
        n => {
            let c = generic_boundary_config(e, &p.lambda)?;
            let kind = match p.tag {
                EdgeTag::G => return Ok(closed(vec![0.0; n])),
                EdgeTag::R(l) => CollapseKind::SimpleRegular(l),
                EdgeTag::S(l) => CollapseKind::SimpleSingular(l),
                _ => return Err(Error::UnsupportedDimension(n)),
            };
            let mut f = asymptotics::collapse_limit(&c, kind)?;
            f.source = Source::EdgeFormula;
            Ok(f)
        }
    }
}

/// Merged configuration in which coincident entries are kept as separate
/// knots; only the pair that collapsed may be equal.
fn generic_boundary_config(e: &Ellipsoid, lambda: &[f64]) -> Result<Vec<(Knot, Entry)>> {
    let mut items: Vec<(Knot, Entry)> = e
        .semiaxes()
        .iter()
        .enumerate()
        .map(|(k, &x)| (Knot::exact(x), Entry::Axis(k + 1)))
        .chain(
            lambda
                .iter()
                .enumerate()
                .map(|(k, &x)| (Knot::exact(x), Entry::Caustic(k + 1))),
        )
        .collect();
    items.sort_by(|x, y| x.0.value().total_cmp(&y.0.value()));
    Ok(items)
}

/// The edge and vertex table of the extended frequency map for `n = 2`.
fn edge_value_3d(e: &Ellipsoid, lambda: &[f64]) -> Result<Vec<f64>> {
    let (c, b, a) = (e.semiaxes()[0], e.semiaxes()[1], e.semiaxes()[2]);
    let (l1, l2) = (lambda[0], lambda[1]);
    let rho = |l: f64, lo: f64, hi: f64| rho_extended(l, lo, hi);
    let rho_x = |l: f64| rho(l, c, b);
    let rho_y = |l: f64| rho(l, c, a);
    let rho_z = |l: f64| rho(l, b, a);
    let nu = |kind: NuKind, l: f64| -> Result<f64> {
        match nu_checked(kind, l, c, b, a) {
            Ok(v) => Ok(v),
            Err(Error::NearEndpoint { limit }) => Ok(limit),
            Err(Error::InvalidInput(_)) => {
                let end = match kind {
                    NuKind::Y => {
                        if l <= b {
                            b
                        } else {
                            a
                        }
                    }
                    _ => [0.0, c, b]
                        .into_iter()
                        .min_by(|x, y| (x - l).abs().total_cmp(&(y - l).abs()))
                        .unwrap(),
                };
                nu_limit(kind, end, c, b, a)
            }
            Err(err) => Err(err),
        }
    };
    if l1 == 0.0 {
        return Ok(vec![0.0, 0.0]);
    }
    if l1 == c {
        return Ok(vec![0.5, rho_z(l2)?]);
    }
    if l2 == b {
        let r = rho_y(l1)?;
        return Ok(vec![r, r]);
    }
    if l2 == a {
        return Ok(vec![rho_x(l1)?, nu(NuKind::X, l1)?]);
    }
    if l1 == b {
        return Ok(vec![nu(NuKind::Y, l2)?, rho_y(l2)?]);
    }
    if l2 == c {
        return Ok(vec![nu(NuKind::Z, l1)?, rho_z(l1)?]);
    }
    if l1 == l2 {
        return Ok(vec![nu(NuKind::Z, l1)?, rho_z(c)?]);
    }
    Err(Error::InvalidInput(format!("({l1}, {l2}) is not on the boundary")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const B: f64 = 4.0 / 9.0;

    #[test]
    fn closed_rotation_numbers() {
        let lh = B / (1.0 - B);
        assert_relative_eq!(rotation_number_2d(lh, B, 1.0).unwrap(), 0.25, epsilon = 1e-12);
        let le = 3.0 * B / (1.0 + B + 2.0 * (1.0 - B + B * B).sqrt());
        assert_relative_eq!(rotation_number_2d(le, B, 1.0).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_number_symmetry() {
        for (l, b, a) in [(0.2, 0.5, 1.0), (0.7, 0.3, 0.9), (0.1, 0.35, 2.0)] {
            let r1 = rotation_number_2d(l, b, a).unwrap();
            let (lo, hi) = if l < b { (l, b) } else { (b, l) };
            let _ = (lo, hi);
            let r2 = rotation_number_2d(b, l, a).unwrap();
            assert_relative_eq!(r1, r2, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_parameters_are_rejected() {
        assert!(matches!(
            rotation_number_2d(B, B, 1.0),
            Err(Error::SingularParameter(_))
        ));
        assert_eq!(rho_extended(B, B, 1.0).unwrap(), 0.5);
        assert_relative_eq!(rho_extended(1.0, 0.5, 1.0).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn kappa_s_values() {
        assert_relative_eq!(kappa_s_2d(1.0, 4.0), 1.3169578969248166, epsilon = 1e-14);
        assert!(kappa_s_2d(1.0, 1.0 + 1e-12) < 1e-5);
    }

    #[test]
    fn planar_kappa_g_closed_form() {
        let e = Ellipsoid::new(&[B, 1.0]).unwrap();
        let k = kappa_g(&e, &[]).unwrap()[0];
        let want = {
            let cfg = QuadratureConfig::default();
            let v = crate::quadrature::integrate_with_ends(B, 1.0, true, true, &cfg, |s, _, _| 1.0 / s.sqrt()).unwrap();
            1.0 / (B.sqrt() * v)
        };
        assert_relative_eq!(k, want, max_relative = 1e-12);
    }

    #[test]
    fn geodesic_rotation_is_kappa_ratio() {
        let e = Ellipsoid::new(&[0.46, 0.58, 1.0]).unwrap();
        for l2 in [0.5, 0.7, 0.9] {
            let k = kappa_g(&e, &[l2]).unwrap();
            let r = rho_geodesic(l2, 0.46, 0.58, 1.0).unwrap();
            assert_relative_eq!(k[1] / k[0], r, max_relative = 1e-10);
        }
    }

    #[test]
    fn lambda_pm_period_four() {
        let r = lambda_pm(0.25, B, 1.0).unwrap();
        assert_relative_eq!(r.plus.unwrap().lambda, 0.8, epsilon = 1e-10);
        assert!(r.minus.lambda < B);
    }

    #[test]
    fn lambda_minus_is_monotone() {
        let mut prev = B;
        for rho0 in [0.3, 0.2, 0.1, 0.01] {
            let l = lambda_minus(rho0, B, 1.0).unwrap().lambda;
            assert!(l < prev);
            prev = l;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn edge_tags() {
        let e = Ellipsoid::new(&[0.46, 0.58, 1.0]).unwrap();
        let tag = |l: [f64; 2]| EdgePoint::new(&e, &l).unwrap().tag;
        assert_eq!(tag([0.0, 0.5]), EdgeTag::G);
        assert_eq!(tag([0.2, 1.0]), EdgeTag::R(2));
        assert_eq!(tag([0.58, 0.7]), EdgeTag::R(1));
        assert_eq!(tag([0.2, 0.46]), EdgeTag::R(1));
        assert_eq!(tag([0.5, 0.5]), EdgeTag::R(1));
        assert_eq!(tag([0.46, 0.5]), EdgeTag::S(1));
        assert_eq!(tag([0.2, 0.58]), EdgeTag::S(2));
        assert_eq!(tag([0.58, 0.58]), EdgeTag::Vertex);
        assert_eq!(tag([0.2, 0.5]), EdgeTag::Interior);
    }

    #[test]
    fn geodesic_edge_is_zero() {
        let e = Ellipsoid::new(&[0.46, 0.58, 1.0]).unwrap();
        let p = EdgePoint::new(&e, &[0.0, 0.7]).unwrap();
        assert_eq!(extended_frequency(&e, &p).unwrap().omega, vec![0.0, 0.0]);
        let p = EdgePoint::new(&e, &[0.46, 0.7]).unwrap();
        assert_eq!(extended_frequency(&e, &p).unwrap().omega[0], 0.5);
    }

    #[test]
    fn nu_endpoint_error_carries_limit() {
        match nu_x(0.58 - 1e-12, 0.46, 0.58, 1.0) {
            Err(Error::NearEndpoint { limit }) => assert_relative_eq!(limit, varrho(0.46, 1.0)),
            other => panic!("{other:?}"),
        }
    }
}
