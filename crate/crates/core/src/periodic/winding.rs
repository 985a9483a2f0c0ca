//! Winding numbers counted directly on a closed orbit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{billiard_orbit, caustics_of_state, dot, Ellipsoid, PhasePoint, Sigma};
use crate::quadrature::{CollapseConfig, Entry};

/// Closure tolerance relative to `sqrt(scale)`.
pub const CLOSURE_TOL: f64 = 1e-8;

const AMBIGUITY: f64 = 1e-10;

/// Winding numbers `(m_0, ..., m_n)` of a periodic trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindingNumbers {
    pub m: Vec<usize>,
    pub sigma: Sigma,
}

impl WindingNumbers {
    pub fn period(&self) -> usize {
        self.m[0]
    }

    /// `omega_j = m_j / (2 m_0)`.
    pub fn frequency(&self) -> Vec<f64> {
        self.m[1..]
            .iter()
            .map(|&mj| mj as f64 / (2.0 * self.m[0] as f64))
            .collect()
    }
}

/// What `m_j` counts for the interval `(c_{2j}, c_{2j+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountRule {
    /// Sign changes of coordinate `k` (0-based).
    Crossings(usize),
    /// Half-turns in the plane of coordinates `k`, `k + 1`.
    HalfTurns(usize),
    /// Tangential touches with the caustics `k` and `k + 1` (0-based).
    Touches(usize),
}

/// The counting rule for each `j = 1..=n`, read off the merged configuration.
pub fn count_rules(e: &Ellipsoid, lambda: &[f64]) -> Result<Vec<CountRule>> {
    let c = CollapseConfig::new(e, lambda)?;
    let prov = c.provenance();
    (1..=e.n())
        .map(|j| {
            let (lo, hi) = (prov[2 * j - 1], prov[2 * j]);
            Ok(match (lo, hi) {
                (Entry::Axis(k), Entry::Caustic(_)) => CountRule::Crossings(k - 1),
                (Entry::Caustic(_), Entry::Axis(k)) => CountRule::Crossings(k - 1),
                (Entry::Axis(k), Entry::Axis(_)) => CountRule::HalfTurns(k - 1),
                (Entry::Caustic(k), Entry::Caustic(_)) => CountRule::Touches(k - 1),
                _ => return Err(Error::InvalidInput("configuration without provenance".into())),
            })
        })
        .collect()
}

/// All `2^d` diagonal sign matrices, identity first.
pub fn sign_matrices(d: usize) -> Vec<Vec<i8>> {
    (0..1usize << d)
        .map(|m| (0..d).map(|i| if (m >> i) & 1 == 1 { -1 } else { 1 }).collect())
        .collect()
}

/// The reflection `g` minimizing `|x_m - g x_0|` and that distance.
pub fn closing_symmetry(first: &PhasePoint, last: &PhasePoint) -> (Vec<i8>, f64) {
    sign_matrices(first.q.len())
        .into_iter()
        .map(|g| {
            let d = last.distance(&first.mirrored(&g));
            (g, d)
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
}

/// Counts the winding numbers of the orbit `x_0, ..., x_m`.
///
/// The orbit must return to `g x_0` for some reflection `g`; when `g` is
/// not the identity the counts run over the doubled orbit, whose period is
/// `2m`.
pub fn winding_from_orbit(e: &Ellipsoid, orbit: &[PhasePoint], sigma: &Sigma) -> Result<WindingNumbers> {
    if orbit.len() < 2 {
        return Err(Error::InvalidInput("an orbit needs at least one segment".into()));
    }
    let m = orbit.len() - 1;
    let (g, residual) = closing_symmetry(&orbit[0], &orbit[m]);
    if residual > CLOSURE_TOL * e.scale().sqrt() {
        return Err(Error::NotClosed { residual });
    }
    let mut full: Vec<PhasePoint> = orbit[..m].to_vec();
    if g.iter().any(|&s| s < 0) {
        full.extend(orbit[..m].iter().map(|x| x.mirrored(&g)));
    }
    let period = full.len();
    full.push(full[0].clone());
    let lambda = caustics_of_state(e, &orbit[0])?;
    if &lambda.sigma != sigma {
        return Err(Error::KindMismatch(format!(
            "orbit has type {}, expected {sigma}",
            lambda.sigma
        )));
    }
    let rules = count_rules(e, &lambda.lambda)?;
    let mut m_out = vec![period];
    for rule in rules {
        m_out.push(match rule {
            CountRule::Crossings(k) => crossings(e, &full, k)?,
            CountRule::HalfTurns(k) => half_turns(e, &full, k)?,
            CountRule::Touches(k) => {
                let lo = touches(e, &full, lambda.lambda[k])?;
                let hi = touches(e, &full, lambda.lambda[k + 1])?;
                if lo != hi {
                    return Err(Error::AmbiguousCount(format!("touches {lo} and {hi} do not alternate")));
                }
                lo
            }
        });
    }
    Ok(WindingNumbers {
        m: m_out,
        sigma: sigma.clone(),
    })
}

/// Runs `m` steps from `x` and counts.
pub fn winding_from_state(e: &Ellipsoid, x: &PhasePoint, m: usize, sigma: &Sigma) -> Result<WindingNumbers> {
    let orbit = billiard_orbit(e, x, m)?;
    winding_from_orbit(e, &orbit, sigma)
}

/// Frequency estimated from `k` bounces of an arbitrary orbit: each count
/// of the winding rules divided by `2k`. Touches are averaged over the two
/// caustics bounding the interval.
pub fn counted_frequency(e: &Ellipsoid, x: &PhasePoint, k: usize) -> Result<Vec<f64>> {
    let orbit = billiard_orbit(e, x, k)?;
    let lambda = caustics_of_state(e, x)?;
    let steps = 2.0 * k as f64;
    count_rules(e, &lambda.lambda)?
        .into_iter()
        .map(|rule| {
            Ok(match rule {
                CountRule::Crossings(j) => crossings(e, &orbit, j)? as f64 / steps,
                CountRule::HalfTurns(j) => half_turn_angle(e, &orbit, j)? / steps,
                CountRule::Touches(j) => {
                    let lo = touches(e, &orbit, lambda.lambda[j])?;
                    let hi = touches(e, &orbit, lambda.lambda[j + 1])?;
                    (lo + hi) as f64 / (2.0 * steps)
                }
            })
        })
        .collect()
}

fn crossings(e: &Ellipsoid, orbit: &[PhasePoint], k: usize) -> Result<usize> {
    let tol = AMBIGUITY * e.semiaxes()[k].sqrt();
    let mut count = 0;
    for w in orbit.windows(2) {
        let (x, y) = (w[0].q[k], w[1].q[k]);
        if x.abs() < tol || y.abs() < tol {
            return Err(Error::AmbiguousCount(format!(
                "impact point within {tol:e} of the plane x_{}",
                k + 1
            )));
        }
        if (x < 0.0) != (y < 0.0) {
            count += 1;
        }
    }
    Ok(count)
}

fn half_turns(e: &Ellipsoid, orbit: &[PhasePoint], k: usize) -> Result<usize> {
    let turns = half_turn_angle(e, orbit, k)?;
    let rounded = turns.round();
    if (turns - rounded).abs() > 1e-6 {
        return Err(Error::AmbiguousCount(format!(
            "accumulated angle is {turns} half-turns"
        )));
    }
    Ok(rounded as usize)
}

/// Accumulated angle in the plane of coordinates `k`, `k + 1`, in units of `pi`.
fn half_turn_angle(e: &Ellipsoid, orbit: &[PhasePoint], k: usize) -> Result<f64> {
    let tol = AMBIGUITY * e.scale().sqrt();
    let mut total = 0.0;
    for w in orbit.windows(2) {
        let (p, q) = ((w[0].q[k], w[0].q[k + 1]), (w[1].q[k], w[1].q[k + 1]));
        // distance from the axis to the projected segment
        let d = (q.0 - p.0, q.1 - p.1);
        let len2 = d.0 * d.0 + d.1 * d.1;
        let t = if len2 > 0.0 {
            (-(p.0 * d.0 + p.1 * d.1) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let closest = ((p.0 + t * d.0).powi(2) + (p.1 + t * d.1).powi(2)).sqrt();
        if closest < tol {
            return Err(Error::AmbiguousCount(format!(
                "segment passes within {closest:e} of an axis"
            )));
        }
        let cross = p.0 * q.1 - p.1 * q.0;
        let inner = p.0 * q.0 + p.1 * q.1;
        total += cross.atan2(inner);
    }
    Ok(total.abs() / std::f64::consts::PI)
}

/// Number of segments whose tangency point with `Q_lambda` lies strictly
/// inside the segment.
fn touches(e: &Ellipsoid, orbit: &[PhasePoint], lambda: f64) -> Result<usize> {
    let a = e.semiaxes();
    let mut count = 0;
    for w in orbit.windows(2) {
        let (q, u) = (&w[0].q, &w[1].p);
        let len = dot(&sub(&w[1].q, q), u);
        let num: f64 = (0..a.len()).map(|i| q[i] * u[i] / (a[i] - lambda)).sum();
        let den: f64 = (0..a.len()).map(|i| u[i] * u[i] / (a[i] - lambda)).sum();
        let t = -num / den;
        if (t.abs() < AMBIGUITY * len) || ((t - len).abs() < AMBIGUITY * len) {
            return Err(Error::AmbiguousCount("tangency at an impact point".into()));
        }
        if t > 0.0 && t < len {
            count += 1;
        }
    }
    Ok(count)
}

fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}
