//! Gauss-Newton refinement of nearly closed orbits in caustic space.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    billiard_orbit, caustics_of_state, dot, ellipsoidal_coordinates, normalize, state_from_coordinates, Ellipsoid,
    PhasePoint,
};
use crate::periodic::winding::{closing_symmetry, sign_matrices};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refined {
    pub state: PhasePoint,
    /// Reflection with `x_m = g x_0`.
    pub g: Vec<i8>,
    pub residual: f64,
    /// Caustic parameters of the refined state; `None` for orbits along
    /// the axes, whose caustics are singular.
    pub lambda: Option<Vec<f64>>,
    pub iterations: usize,
}

/// Where on the torus a state sits: ellipsoidal coordinates, orthant and
/// the orientation of the direction along each coordinate normal.
pub(crate) struct TorusPosition {
    pub(crate) mu: Vec<f64>,
    pub(crate) q_signs: Vec<i8>,
    pub(crate) frame_signs: Vec<i8>,
}

impl TorusPosition {
    pub(crate) fn of(e: &Ellipsoid, x: &PhasePoint) -> TorusPosition {
        let a = e.semiaxes();
        let mu = ellipsoidal_coordinates(e, &x.q);
        let sign = |v: f64| if v < 0.0 { -1 } else { 1 };
        let q_signs = x.q.iter().map(|&v| sign(v)).collect();
        let mut frame_signs = vec![1];
        for &m in &mu {
            let g: Vec<f64> = (0..a.len()).map(|i| x.q[i] / (a[i] - m)).collect();
            frame_signs.push(sign(dot(&x.p, &normalize(&g))));
        }
        TorusPosition {
            mu,
            q_signs,
            frame_signs,
        }
    }

    fn state(&self, e: &Ellipsoid, lambda: &[f64]) -> Result<PhasePoint> {
        state_from_coordinates(e, &self.mu, lambda, &self.q_signs, &self.frame_signs)
    }
}

fn displacement(e: &Ellipsoid, x: &PhasePoint, m: usize, g: &[i8]) -> Result<Vec<f64>> {
    let orbit = billiard_orbit(e, x, m)?;
    let target = x.mirrored(g);
    let last = &orbit[m];
    Ok(last
        .q
        .iter()
        .zip(&target.q)
        .chain(last.p.iter().zip(&target.p))
        .map(|(u, v)| u - v)
        .collect())
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Smallest `m` in `1..=m_max` after which the orbit through `x` returns to
/// `g x` for some reflection `g`, with the residual and `g`.
pub fn closure_count(e: &Ellipsoid, x: &PhasePoint, m_max: usize, tol: f64) -> Result<Option<(usize, Vec<i8>, f64)>> {
    let orbit = billiard_orbit(e, x, m_max)?;
    for m in 1..=m_max {
        let (g, r) = closing_symmetry(x, &orbit[m]);
        if r <= tol {
            return Ok(Some((m, g, r)));
        }
    }
    Ok(None)
}

/// Moves the caustics of `x` until the orbit closes after `m0` bounces up
/// to a reflection, keeping the position of `x` on its torus.
///
/// On a resonant torus every orbit closes, so only the caustic parameters
/// need to change; the reflection is chosen once from the initial orbit.
pub fn refine_periodic(e: &Ellipsoid, x: &PhasePoint, m0: usize) -> Result<Refined> {
    let n = e.n();
    let scale = e.scale().sqrt();
    let last = billiard_orbit(e, x, m0)?.pop().unwrap();
    let (g, residual) = closing_symmetry(x, &last);
    if residual <= 1e-11 * scale {
        let lambda = caustics_of_state(e, x).ok().map(|c| c.lambda);
        return Ok(Refined {
            state: x.clone(),
            g,
            residual,
            lambda,
            iterations: 0,
        });
    }
    let pos = TorusPosition::of(e, x);
    let mut lambda = caustics_of_state(e, x)?.lambda;
    let mut state = pos.state(e, &lambda)?;
    let last = billiard_orbit(e, &state, m0)?.pop().unwrap();
    let (g, _) = closing_symmetry(&state, &last);
    debug_assert!(sign_matrices(e.dim()).contains(&g));
    let mut r = displacement(e, &state, m0, &g)?;
    let mut res = norm(&r);
    if res > 1e-3 * scale.max(1.0) {
        return Err(Error::NoConvergence(format!(
            "initial closure residual {res:e} is too large to refine"
        )));
    }
    let mut iterations = 0;
    while res > 1e-14 * scale && iterations < 30 {
        iterations += 1;
        let mut jac = DMatrix::zeros(r.len(), n);
        for i in 0..n {
            let gap = slot_gap(e, &lambda, i);
            let h = 1e-7 * gap;
            let mut up = lambda.clone();
            let mut dn = lambda.clone();
            up[i] += h;
            dn[i] -= h;
            let ru = displacement(e, &pos.state(e, &up)?, m0, &g)?;
            let rd = displacement(e, &pos.state(e, &dn)?, m0, &g)?;
            for k in 0..r.len() {
                jac[(k, i)] = (ru[k] - rd[k]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_vec(r.iter().map(|v| -v).collect());
        let svd = jac.svd(true, true);
        let step = svd.solve(&rhs, 1e-12).map_err(|m| Error::SingularSystem(m.into()))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=20 {
            let cand: Vec<f64> = (0..n).map(|i| lambda[i] + t * step[i]).collect();
            if let Ok(s) = pos.state(e, &cand) {
                if let Ok(rc) = displacement(e, &s, m0, &g) {
                    let nc = norm(&rc);
                    if nc < res {
                        (lambda, state, r, res) = (cand, s, rc, nc);
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res > 1e-10 * scale {
        return Err(Error::NoConvergence(format!(
            "closure residual {res:e} after {iterations} steps"
        )));
    }
    Ok(Refined {
        state,
        g,
        residual: res,
        lambda: Some(lambda),
        iterations,
    })
}

/// Distance from `lambda_i` to the nearest semiaxis or other caustic.
fn slot_gap(e: &Ellipsoid, lambda: &[f64], i: usize) -> f64 {
    e.semiaxes()
        .iter()
        .chain(lambda.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, l)| l))
        .chain(std::iter::once(&0.0))
        .map(|m| (m - lambda[i]).abs())
        .fold(f64::INFINITY, f64::min)
}
