//! Range of the frequency map of a triaxial ellipsoid, membership tests,
//! and the curves in the `(b, c)` triangle where a frequency appears or
//! disappears.
//!
//! Throughout, `c < b < a` are the squared semiaxes and frequency vectors
//! live in `Omega = {0 < omega_2 < omega_1 < 1/2}`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frequency::{frequency_unguarded, nu_x_knot, nu_y_knot, nu_z_knot, rho_knots, varrho};
use crate::geometry::Sigma;
use crate::quadrature::{Knot, QuadratureConfig};

pub type Point = [f64; 2];

/// Distance below which a frequency counts as lying on the boundary.
pub const BAND_TOL: f64 = 1e-6;

/// Largest distance between a sampled boundary arc and its polyline.
pub const CHORD_TOL: f64 = 1e-7;

/// Chord tolerance near a point of interest, where membership is decided.
pub const FOCUS_TOL: f64 = 1e-12;

fn check_axes(a: f64, b: f64, c: f64) -> Result<()> {
    if !(0.0 < c && c < b && b < a && a.is_finite()) {
        return Err(Error::DegenerateEllipsoid(format!(
            "need 0 < c < b < a, got a = {a}, b = {b}, c = {c}"
        )));
    }
    Ok(())
}

/// Rejects frequency vectors outside `Omega`.
pub fn check_frequency(w: &[f64]) -> Result<Point> {
    match w {
        [w1, w2] if 0.0 < *w2 && w2 < w1 && *w1 < 0.5 => Ok([*w1, *w2]),
        _ => Err(Error::InvalidInput(format!(
            "{w:?} is not in 0 < omega_2 < omega_1 < 1/2"
        ))),
    }
}

/// The four characteristic rotation numbers of the planar sections and
/// the corner points of the ranges they determine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anchors {
    pub rho_x: f64,
    pub rho_y: f64,
    pub rho_z: f64,
    pub rho_star: f64,
    pub o: Point,
    pub a: Point,
    pub b1: Point,
    pub b2: Point,
    pub c1: Point,
    pub c2: Point,
    pub d: Point,
}

pub fn anchors(a: f64, b: f64, c: f64) -> Result<Anchors> {
    check_axes(a, b, c)?;
    let rho_x = varrho(c, b);
    let rho_y = varrho(c, a);
    let rho_z = varrho(b, a);
    let rho_star = rho_knots(Knot::exact(c), Knot::exact(b), Knot::exact(a))?;
    Ok(Anchors {
        rho_x,
        rho_y,
        rho_z,
        rho_star,
        o: [0.0, 0.0],
        a: [0.5, 0.5],
        b1: [0.5, rho_star],
        b2: [0.5, rho_z],
        c1: [rho_star, rho_star],
        c2: [rho_z, rho_z],
        d: [rho_x, rho_y],
    })
}

/// Closed polyline bounding the range of one caustic type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeBoundary {
    pub sigma: Sigma,
    /// Vertices in order; the last one repeats the first.
    pub polyline: Vec<Point>,
    pub anchors: Anchors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Inside,
    Outside,
    BoundaryBand,
}

fn logistic(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((p[0] - a[0] - t * d[0]).powi(2) + (p[1] - a[1] - t * d[1]).powi(2)).sqrt()
}

/// Chord tolerance for arc sampling: coarse everywhere except around an
/// optional focus point.
#[derive(Debug, Clone, Copy)]
struct ChordTol {
    coarse: f64,
    fine: f64,
    focus: Option<Point>,
}

impl ChordTol {
    fn uniform(tol: f64) -> Self {
        ChordTol {
            coarse: tol,
            fine: tol,
            focus: None,
        }
    }

    fn focused(focus: Option<Point>) -> Self {
        ChordTol {
            coarse: CHORD_TOL,
            fine: FOCUS_TOL,
            focus,
        }
    }

    fn at(&self, p0: Point, p1: Point) -> f64 {
        match self.focus {
            Some(f) => {
                let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
                if segment_distance(f, p0, p1) < 2.0 * len + 10.0 * BAND_TOL {
                    self.fine
                } else {
                    self.coarse
                }
            }
            None => self.coarse,
        }
    }
}

/// Samples the image of `(lo, hi)` under `f`, refining until every chord
/// lies within tolerance of the arc. Points are parametrized by the logit
/// of the relative position, so both ends are approached exponentially.
fn sample_arc<F>(lo: f64, hi: f64, tol: ChordTol, f: F) -> Result<Vec<Point>>
where
    F: Fn(Knot) -> Result<Point> + Sync,
{
    let width = hi - lo;
    let at = |s: f64| -> Result<Point> {
        let k = if s < 0.0 {
            Knot::near(lo, width * logistic(s))
        } else {
            Knot::near(hi, -width * logistic(-s))
        };
        f(k)
    };
    let grid: Vec<f64> = (0..=144).map(|k| -36.0 + 0.5 * k as f64).collect();
    let base: Vec<Point> = grid.par_iter().map(|&s| at(s)).collect::<Result<_>>()?;
    let mut out = vec![base[0]];
    for k in 0..grid.len() - 1 {
        refine_arc(&at, grid[k], grid[k + 1], base[k], base[k + 1], &tol, 0, &mut out)?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn refine_arc<F>(
    at: &F,
    s0: f64,
    s1: f64,
    p0: Point,
    p1: Point,
    tol: &ChordTol,
    depth: usize,
    out: &mut Vec<Point>,
) -> Result<()>
where
    F: Fn(f64) -> Result<Point>,
{
    let sm = 0.5 * (s0 + s1);
    let pm = at(sm)?;
    if depth < 40 && segment_distance(pm, p0, p1) > tol.at(p0, p1) {
        refine_arc(at, s0, sm, p0, pm, tol, depth + 1, out)?;
        refine_arc(at, sm, s1, pm, p1, tol, depth + 1, out)?;
    } else {
        out.push(pm);
        out.push(p1);
    }
    Ok(())
}

/// Builds the boundary of `omega(Lambda_sigma)` from the images of the
/// edges of the caustic space. Straight edge images are taken from the
/// anchors; curved ones are sampled to [`CHORD_TOL`].
pub fn range_boundary(a: f64, b: f64, c: f64, sigma: &Sigma) -> Result<RangeBoundary> {
    boundary_near(a, b, c, sigma, None)
}

/// As [`range_boundary`], with the arcs resolved to [`FOCUS_TOL`] in the
/// vicinity of `focus`.
pub fn boundary_near(a: f64, b: f64, c: f64, sigma: &Sigma, focus: Option<Point>) -> Result<RangeBoundary> {
    let an = anchors(a, b, c)?;
    let tol = ChordTol::focused(focus);
    let poly = match sigma.0.as_slice() {
        [0, 0] => {
            // lambda_2 = c: (nu_z(lambda_1), rho_z(lambda_1)) from O to B1
            let red = sample_arc(0.0, c, tol, |l| {
                Ok([nu_z_knot(l, c, b, a)?, rho_knots(l, Knot::exact(b), Knot::exact(a))?])
            })?;
            let mut p = vec![an.o];
            p.extend(red);
            p.extend([an.b1, an.a, an.o]);
            p
        }
        [1, 0] => vec![an.a, an.b1, an.c1, an.a],
        [0, 1] => {
            // lambda_2 = a: (rho_x(lambda_1), nu_x(lambda_1)) from O to B2
            let cyan = sample_arc(0.0, c, tol, |l| {
                Ok([rho_knots(l, Knot::exact(c), Knot::exact(b))?, nu_x_knot(l, c, b, a)?])
            })?;
            let mut p = vec![an.o, an.a, an.b2];
            p.extend(cyan.into_iter().rev());
            p.push(an.o);
            p
        }
        [1, 1] => {
            // lambda_1 = b: (nu_y(lambda_2), rho_y(lambda_2)) from C1 to D
            let green = sample_arc(b, a, tol, |l| {
                Ok([nu_y_knot(l, c, b, a)?, rho_knots(l, Knot::exact(c), Knot::exact(a))?])
            })?;
            // lambda_2 = a: (rho_x(lambda_1), nu_x(lambda_1)) from B2 to D
            let brown = sample_arc(c, b, tol, |l| {
                Ok([rho_knots(l, Knot::exact(c), Knot::exact(b))?, nu_x_knot(l, c, b, a)?])
            })?;
            let mut p = vec![an.a, an.c1];
            p.extend(green);
            p.push(an.d);
            p.extend(brown.into_iter().rev());
            p.extend([an.b2, an.a]);
            p
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "range boundaries exist for the four types of n = 2, got {sigma}"
            )))
        }
    };
    Ok(RangeBoundary {
        sigma: sigma.clone(),
        polyline: poly,
        anchors: an,
    })
}

impl RangeBoundary {
    fn crossings(&self, w: Point) -> usize {
        self.polyline
            .windows(2)
            .filter(|s| {
                let (p, q) = (s[0], s[1]);
                if (p[1] > w[1]) == (q[1] > w[1]) {
                    return false;
                }
                let x = p[0] + (w[1] - p[1]) * (q[0] - p[0]) / (q[1] - p[1]);
                x > w[0]
            })
            .count()
    }

    pub fn distance(&self, w: Point) -> f64 {
        self.polyline
            .windows(2)
            .map(|s| segment_distance(w, s[0], s[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance to the boundary, positive inside.
    pub fn signed_distance(&self, w: Point) -> f64 {
        let d = self.distance(w);
        if self.crossings(w) % 2 == 1 {
            d
        } else {
            -d
        }
    }

    pub fn classify(&self, w: Point, band: f64) -> Membership {
        let d = self.signed_distance(w);
        if d.abs() < band {
            Membership::BoundaryBand
        } else if d > 0.0 {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    /// Enclosed area by the shoelace formula.
    pub fn area(&self) -> f64 {
        polygon_area(&self.polyline)
    }
}

pub fn polygon_area(p: &[Point]) -> f64 {
    0.5 * p
        .windows(2)
        .map(|s| s[0][0] * s[1][1] - s[1][0] * s[0][1])
        .sum::<f64>()
        .abs()
}

/// Whether `omega0` is a frequency of type `sigma` inside the ellipsoid.
pub fn in_range(w: &[f64], sigma: &Sigma, a: f64, b: f64, c: f64) -> Result<Membership> {
    let w = check_frequency(w)?;
    Ok(boundary_near(a, b, c, sigma, Some(w))?.classify(w, BAND_TOL))
}

/// Outcome of the closed-form tests for one caustic type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TypeCriteria {
    /// Some sufficient condition holds, so the frequency is in the range.
    pub sufficient: bool,
    /// Some necessary condition fails, so the frequency is not in the range.
    pub excluded: bool,
}

/// The endpoint constants of the bifurcation curves of `omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationConstants {
    /// `b^0_j`: the curve `g^0_j` lives on `[0, b^0_j]`.
    pub b0: [f64; 4],
    /// `c^0_j`.
    pub c0: [f64; 4],
    pub beta4: f64,
}

pub fn bifurcation_constants(w: &[f64]) -> Result<BifurcationConstants> {
    let [w1, w2] = check_frequency(w)?;
    let s2 = |x: f64| (PI * x).sin().powi(2);
    let b34 = s2(w2 / (2.0 * w1));
    let c13 = s2(w2) / s2(w1);
    let c24 = s2(w2);
    Ok(BifurcationConstants {
        b0: [1.0, 1.0, b34, b34],
        c0: [c13, c24, c13, c24],
        beta4: c13,
    })
}

/// Sufficient and necessary conditions for the four types of `n = 2`, in
/// the order EH1, H1H1, EH2, H1H2. Both families of tests are applied:
/// those through `rho(c; b, a)` and the purely algebraic ones.
pub fn criteria_fast(w: &[f64], a: f64, b: f64, c: f64) -> Result<[(Sigma, TypeCriteria); 4]> {
    let [w1, w2] = check_frequency(w)?;
    check_axes(a, b, c)?;
    let rs = rho_knots(Knot::exact(c), Knot::exact(b), Knot::exact(a))?;
    let k = bifurcation_constants(w)?;
    let s2 = |x: f64| (PI * x).sin().powi(2);
    let ratio = w2 / (2.0 * w1);
    let (b3, c3) = (k.b0[2], k.c0[2]);
    let (b4, c4, beta4) = (k.b0[3], k.c0[3], k.beta4);
    let eh1 = TypeCriteria {
        sufficient: w2 > rs || c < k.c0[0] * b,
        excluded: ratio <= rs || c >= k.c0[0] * a,
    };
    let h1h1 = TypeCriteria {
        sufficient: w2 > rs || c < k.c0[1] * b,
        excluded: w2 <= rs || c >= k.c0[1] * a,
    };
    let eh2 = TypeCriteria {
        sufficient: b < a * s2(w2) || (b3 - c3) * c < c3 * (b3 * a - b),
        excluded: b >= a * s2(ratio) || b >= b3 * a,
    };
    let h1h2 = TypeCriteria {
        // the triangle with vertices O, (b^0_4, 0) and (beta^0_4, c^0_4)
        sufficient: (w2 > rs && b < a * s2(w2)) || (beta4 * c < c4 * b && (b4 - beta4) * c < c4 * (b4 * a - b)),
        excluded: w1 <= rs || c >= a * s2(w2) || b >= a * s2(ratio) || b >= b4 * a || c >= c4 * a,
    };
    Ok([
        (Sigma::eh1(), eh1),
        (Sigma::h1h1(), h1h1),
        (Sigma::eh2(), eh2),
        (Sigma::h1h2(), h1h2),
    ])
}

/// One point `(b, g(b))` of a bifurcation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub b: f64,
    pub c: f64,
    /// True when every `c` in `(0, b)` carries the frequency.
    pub full: bool,
}

/// `g(b)`: the supremum of `c` such that the ellipsoid `(1, b, c)` has
/// frequency `omega0` with caustic type `sigma`.
///
/// Bisection on the sign of the distance to the range boundary, carried
/// out in `log c` so that transitions close to `c = 0` resolve as well.
pub fn trace_point(sigma: &Sigma, w: &[f64], b: f64) -> Result<CurvePoint> {
    let w = check_frequency(w)?;
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidInput(format!("b = {b} is outside (0, 1)")));
    }
    let margin = |t: f64| -> Result<f64> { Ok(boundary_near(1.0, b, t.exp(), sigma, Some(w))?.signed_distance(w)) };
    let (mut lo, mut hi) = ((b * 1e-14).ln(), (b * (1.0 - 1e-13)).ln());
    let mut f_lo = margin(lo)?;
    if f_lo <= 0.0 {
        return Err(Error::EmptySlice);
    }
    let mut f_hi = margin(hi)?;
    if f_hi > 0.0 {
        return Ok(CurvePoint { b, c: b, full: true });
    }
    // Illinois regula falsi on the signed distance, which is smooth in
    // log c near the transition
    let mut side = 0;
    for _ in 0..200 {
        if hi.exp() - lo.exp() <= 1e-13 {
            break;
        }
        let mut t = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let f = margin(t)?;
        if f.abs() <= 1e-14 {
            return Ok(CurvePoint {
                b,
                c: t.exp(),
                full: false,
            });
        }
        if f > 0.0 {
            (lo, f_lo) = (t, f);
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            (hi, f_hi) = (t, f);
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(CurvePoint {
        b,
        c: 0.5 * (lo.exp() + hi.exp()),
        full: false,
    })
}

/// [`trace_point`] over a grid of `b`, in parallel.
pub fn trace_g(sigma: &Sigma, w: &[f64], b_grid: &[f64]) -> Vec<Result<CurvePoint>> {
    b_grid.par_iter().map(|&b| trace_point(sigma, w, b)).collect()
}

/// Caustic type and frequency of the minimal periodic trajectories for
/// region `j` in `1..=4`.
pub fn minimal_frequency(j: usize) -> Result<(Sigma, [f64; 2])> {
    Ok(match j {
        1 => (Sigma::eh1(), [0.4, 0.2]),
        2 => (Sigma::h1h1(), [0.375, 0.25]),
        3 => (Sigma::eh2(), [0.4, 0.2]),
        4 => (Sigma::h1h2(), [1.0 / 3.0, 1.0 / 6.0]),
        _ => {
            return Err(Error::InvalidInput(format!(
                "minimal regions are numbered 1 to 4, got {j}"
            )))
        }
    })
}

/// The curve `g*_j` bounding the ellipsoids with minimal periodic
/// trajectories of type `j`.
pub fn minimal_regions(j: usize, b_grid: &[f64]) -> Result<Vec<Result<CurvePoint>>> {
    let (sigma, w) = minimal_frequency(j)?;
    Ok(trace_g(&sigma, &w, b_grid))
}

/// Closed form of `g*_4`.
pub fn g_star_4(b: f64) -> f64 {
    if b <= 1.0 / 3.0 {
        (1.0 - b / 2.0 - (b * (1.0 - 0.75 * b)).sqrt()) * b / (1.0 - b).powi(2)
    } else {
        (1.0 - 2.0 * b) * b / (1.0 - b).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ubiquity {
    pub full_area: f64,
    pub inner_area: f64,
    pub ratio: f64,
}

/// Compares the range of H1H1 with the image of the triangle whose sides
/// lie at distance `offset` inside the edges of `H1 x H1`.
pub fn ubiquity_ratio(a: f64, b: f64, c: f64, offset: f64) -> Result<Ubiquity> {
    let an = anchors(a, b, c)?;
    let full_area = 0.5 * (0.5 - an.rho_star).powi(2);
    let d = offset;
    let diag = std::f64::consts::SQRT_2 * d;
    let corners = [[c + d, b - d], [c + d, c + d + diag], [b - d - diag, b - d]];
    if !(corners[1][1] < corners[0][1] && corners[2][0] > corners[0][0]) {
        return Err(Error::InvalidInput(format!("offset {offset} leaves no inner triangle")));
    }
    let cfg = QuadratureConfig::default();
    let e = crate::geometry::Ellipsoid::new(&[c, b, a])?;
    let image = |l: Point| -> Result<Point> {
        let w = frequency_unguarded(&e, &l, &cfg)?.omega;
        Ok([w[0], w[1]])
    };
    let mut poly = Vec::new();
    for k in 0..3 {
        let (p, q) = (corners[k], corners[(k + 1) % 3]);
        let at = |t: f64| image([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        let grid: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
        let base: Vec<Point> = grid.par_iter().map(|&t| at(t)).collect::<Result<_>>()?;
        poly.push(base[0]);
        for k in 0..64 {
            refine_arc(
                &at,
                grid[k],
                grid[k + 1],
                base[k],
                base[k + 1],
                &ChordTol::uniform(1e-8),
                24,
                &mut poly,
            )?;
        }
        poly.pop();
    }
    poly.push(poly[0]);
    let inner_area = polygon_area(&poly);
    Ok(Ubiquity {
        full_area,
        inner_area,
        ratio: full_area / inner_area,
    })
}
