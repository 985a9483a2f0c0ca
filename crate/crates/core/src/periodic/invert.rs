//! Solving `omega(lambda) = omega0` on one component of the caustic space.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::bifurcation::{in_range, Membership};
use crate::error::{Error, Result};
use crate::frequency::{frequency_of_config, varrho};
use crate::geometry::{CausticParam, Ellipsoid, Sigma};
use crate::quadrature::{CollapseConfig, Knot, QuadratureConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inversion {
    pub param: CausticParam,
    /// The same parameters as distances to the nearest semiaxis or caustic.
    pub knots: Vec<Knot>,
    /// `|omega(lambda) - omega0|`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Samples per coordinate of the seed grid.
    pub grid: usize,
    /// Half-width of the seed grid in logit coordinates. Samples are
    /// spaced like `sinh`, dense around 0 and sparse towards the edges,
    /// where the frequency varies like `1 / |u|`.
    pub grid_extent: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub quadrature: QuadratureConfig,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            grid: 24,
            grid_extent: 300.0,
            tol: 1e-13,
            max_iter: 80,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Logit coordinates for `Lambda_sigma`. Each caustic lives in its slot,
/// and when two caustics share a slot the upper one lives above the lower.
struct Chart<'a> {
    e: &'a Ellipsoid,
    slots: Vec<(f64, f64)>,
    shared: Vec<bool>,
    cfg: QuadratureConfig,
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

impl<'a> Chart<'a> {
    fn new(e: &'a Ellipsoid, sigma: &Sigma, cfg: QuadratureConfig) -> Result<Self> {
        if sigma.n() != e.n() {
            return Err(Error::InvalidInput(format!("type {sigma} does not fit n = {}", e.n())));
        }
        let slots: Vec<(f64, f64)> = (0..e.n()).map(|i| e.slot(i + 1, sigma.0[i])).collect();
        let shared = (0..e.n()).map(|i| i > 0 && slots[i] == slots[i - 1]).collect();
        Ok(Chart { e, slots, shared, cfg })
    }

    /// Knots anchored at the nearer end of their interval, so that the
    /// distance to that end is carried exactly.
    fn knots(&self, u: &[f64]) -> Vec<Knot> {
        let mut out: Vec<Knot> = Vec::with_capacity(u.len());
        for (i, &ui) in u.iter().enumerate() {
            let (lo, hi) = self.slots[i];
            let lo_knot = if self.shared[i] { out[i - 1] } else { Knot::exact(lo) };
            let width = lo_knot.gap_to(&Knot::exact(hi));
            out.push(if ui < 0.0 {
                Knot::near(lo_knot.anchor, lo_knot.offset + width * logistic(ui))
            } else {
                Knot::near(hi, -width * logistic(-ui))
            });
        }
        out
    }

    fn omega(&self, u: &[f64]) -> Result<Vec<f64>> {
        let axes: Vec<Knot> = self.e.semiaxes().iter().map(|&a| Knot::exact(a)).collect();
        let c = CollapseConfig::from_knots(&axes, &self.knots(u))?;
        Ok(frequency_of_config(&c, &self.cfg)?.omega)
    }
}

/// Logit coordinates beyond which gaps underflow the quadrature.
const U_MAX: f64 = 680.0;
const U_DRIFT: f64 = 660.0;

/// Decides membership in the range up front where the range is known:
/// in closed form for `n = 1` and from its boundary for `n = 2`.
fn outside_range(e: &Ellipsoid, sigma: &Sigma, omega0: &[f64]) -> Result<Option<String>> {
    let a = e.semiaxes();
    match e.n() {
        1 => {
            let lo = if sigma.0[0] == 1 { varrho(a[0], a[1]) } else { 0.0 };
            let w = omega0[0];
            Ok((!(w > lo && w < 0.5)).then(|| format!("rotation number {w} is outside ({lo}, 1/2)")))
        }
        2 => {
            if !(omega0[1] > 0.0 && omega0[1] < omega0[0] && omega0[0] < 0.5) {
                return Ok(Some(format!("{omega0:?} is not in 0 < omega_2 < omega_1 < 1/2")));
            }
            let m = in_range(omega0, sigma, a[2], a[1], a[0])?;
            Ok((m == Membership::Outside).then(|| format!("{omega0:?} lies outside the range of type {sigma}")))
        }
        _ => Ok(None),
    }
}

const SEEDS: usize = 4;
const INNER: f64 = 10.0;

fn newton(
    chart: &Chart,
    mut u: Vec<f64>,
    mut w: Vec<f64>,
    omega0: &[f64],
    opts: &InversionOptions,
) -> Result<(Vec<f64>, f64, usize)> {
    let n = u.len();
    let mut res = distance(&w, omega0);
    let mut iterations = 0;
    while res > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let r = DVector::from_fn(n, |j, _| w[j] - omega0[j]);
        let h = 1e-6;
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += h;
            dn[i] -= h;
            let (wu, wd) = (chart.omega(&up)?, chart.omega(&dn)?);
            for j in 0..n {
                jac[(j, i)] = (wu[j] - wd[j]) / (2.0 * h);
            }
        }
        let step = jac
            .clone()
            .lu()
            .solve(&(-r))
            .ok_or_else(|| Error::SingularSystem(format!("frequency Jacobian in logit coordinates {jac}")))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=20 {
            let cand: Vec<f64> = (0..n).map(|i| u[i] + t * step[i]).collect();
            if cand.iter().any(|x| x.abs() > U_MAX) {
                t *= 0.5;
                continue;
            }
            if let Ok(wc) = chart.omega(&cand) {
                let rc = distance(&wc, omega0);
                if rc < res {
                    (u, w, res) = (cand, wc, rc);
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if u.iter().any(|x| x.abs() > U_DRIFT) {
            return Err(Error::NotInRange(format!(
                "Newton iterate drifts to the boundary while approaching {omega0:?}"
            )));
        }
    }
    if res > 1e-10 {
        return Err(Error::NoConvergence(format!(
            "frequency residual {res:e} after {iterations} steps"
        )));
    }
    Ok((u, res, iterations))
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

pub fn invert_frequency(e: &Ellipsoid, sigma: &Sigma, omega0: &[f64]) -> Result<Inversion> {
    invert_frequency_with(e, sigma, omega0, &InversionOptions::default())
}

/// Damped Newton in logit coordinates, seeded from the best sample of a
/// grid, retrying from the next best samples when Newton stalls. Targets outside the range are rejected before any solving for
/// `n <= 2`; beyond that the grid decides.
pub fn invert_frequency_with(
    e: &Ellipsoid,
    sigma: &Sigma,
    omega0: &[f64],
    opts: &InversionOptions,
) -> Result<Inversion> {
    let n = e.n();
    if omega0.len() != n {
        return Err(Error::InvalidInput(format!("expected {n} target frequencies")));
    }
    let chart = Chart::new(e, sigma, opts.quadrature)?;
    if let Some(reason) = outside_range(e, sigma, omega0)? {
        return Err(Error::NotInRange(reason));
    }
    let g = opts.grid.max(2);
    let top = opts.grid_extent.asinh();
    let axis: Vec<f64> = (0..g)
        .map(|k| (-top + 2.0 * top * k as f64 / (g - 1) as f64).sinh())
        .collect();
    let points: Vec<Vec<f64>> = (0..g.pow(n as u32))
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let v = axis[idx % g];
                    idx /= g;
                    v
                })
                .collect()
        })
        .collect();
    let samples: Vec<(Vec<f64>, Vec<f64>)> = points
        .into_par_iter()
        .filter_map(|u| chart.omega(&u).ok().map(|w| (u, w)))
        .collect();
    if samples.is_empty() {
        return Err(Error::NoConvergence("no grid sample could be evaluated".into()));
    }
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for (_, w) in &samples {
        for j in 0..n {
            lo[j] = lo[j].min(w[j]);
            hi[j] = hi[j].max(w[j]);
        }
    }
    let diam = distance(&lo, &hi);
    let mut seeds = samples;
    seeds.sort_by(|x, y| distance(&x.1, omega0).total_cmp(&distance(&y.1, omega0)));
    let best = distance(&seeds[0].1, omega0);
    if n > 2 && best > 0.1 * diam {
        return Err(Error::NotInRange(format!(
            "closest grid value {:?} is {best:.3e} away from {omega0:?}",
            seeds[0].1
        )));
    }
    // far out in the chart the frequency can be flat in one coordinate and
    // Newton stalls there, so the best seeds of the inner grid go along
    let inner = seeds
        .iter()
        .filter(|(u, _)| u.iter().all(|x| x.abs() <= INNER))
        .take(SEEDS)
        .cloned()
        .collect::<Vec<_>>();
    let mut first_err = None;
    let mut found = None;
    for (u, w) in seeds.into_iter().take(SEEDS).chain(inner) {
        match newton(&chart, u, w, omega0, opts) {
            Ok(hit) => {
                found = Some(hit);
                break;
            }
            Err(err) => {
                first_err.get_or_insert(err);
            }
        }
    }
    let Some((u, res, iterations)) = found else {
        return Err(first_err.unwrap());
    };
    let knots = chart.knots(&u);
    let lambda: Vec<f64> = knots.iter().map(Knot::value).collect();
    let param = CausticParam::new(e, &lambda)?;
    Ok(Inversion {
        param,
        knots,
        residual: res,
        iterations,
    })
}
