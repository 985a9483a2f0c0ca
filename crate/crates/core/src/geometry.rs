//! Ellipsoids, the billiard map and caustic parameters.
//!
//! Coordinates follow the semiaxis order: coordinate `i` is the one whose
//! squared semiaxis is `a[i]`, and `a` is strictly increasing. In the plane
//! this puts the minor axis first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative distance below which a caustic value counts as singular.
pub const TOL_SINGULAR: f64 = 1e-10;
/// Shortest admissible chord, relative to the largest semiaxis.
pub const MU_MIN: f64 = 1e-12;

/// A nondegenerate ellipsoid `sum x_i^2 / a_i = 1` with `0 < a_1 < ... < a_{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    a: Vec<f64>,
}

impl Ellipsoid {
    /// Builds an ellipsoid from squared semiaxes given in increasing order.
    pub fn new(a: &[f64]) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::DegenerateEllipsoid(format!(
                "need at least two semiaxes, got {}",
                a.len()
            )));
        }
        if a.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::DegenerateEllipsoid(format!("{a:?}")));
        }
        if a.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::DegenerateEllipsoid(format!("{a:?} is not strictly increasing")));
        }
        Ok(Ellipsoid { a: a.to_vec() })
    }

    /// Sorts the semiaxes first, so `[1.0, 4.0 / 9.0]` is accepted.
    pub fn from_unsorted(a: &[f64]) -> Result<Self> {
        let mut v = a.to_vec();
        v.sort_by(f64::total_cmp);
        Self::new(&v)
    }

    /// Rescales so that the largest semiaxis equals one.
    pub fn normalized(&self) -> Self {
        let s = self.scale();
        Ellipsoid {
            a: self.a.iter().map(|x| x / s).collect(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Ellipsoid {
            a: self.a.iter().map(|x| x * t).collect(),
        }
    }

    pub fn semiaxes(&self) -> &[f64] {
        &self.a
    }

    /// Number of caustics, one less than the ambient dimension.
    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn scale(&self) -> f64 {
        *self.a.last().unwrap()
    }

    /// `a_k` with the convention `a_0 = 0`; `k` is 1-based.
    pub fn axis(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.a[k - 1]
        }
    }

    /// Open interval that caustic `i` (1-based) occupies for the given type bit.
    pub fn slot(&self, i: usize, sigma_i: u8) -> (f64, f64) {
        let k = i + sigma_i as usize;
        (self.axis(k - 1), self.axis(k))
    }

    pub fn level(&self, q: &[f64]) -> f64 {
        q.iter().zip(&self.a).map(|(x, a)| x * x / a).sum()
    }

    /// Unit outward normal at a point of the ellipsoid.
    pub fn normal(&self, q: &[f64]) -> Vec<f64> {
        let g: Vec<f64> = q.iter().zip(&self.a).map(|(x, a)| x / a).collect();
        normalize(&g)
    }
}

/// A billiard state: impact point `q` and the unit direction `p` that
/// arrives at `q`, which points outward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    /// Validates the state against the ellipsoid.
    pub fn new(e: &Ellipsoid, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != e.dim() || p.len() != e.dim() {
            return Err(Error::InvalidInput("state dimension mismatch".into()));
        }
        if (e.level(&q) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "point is off the ellipsoid by {:e}",
                e.level(&q) - 1.0
            )));
        }
        if (norm(&p) - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidInput("direction is not a unit vector".into()));
        }
        if dot(&p, &e.normal(&q)) <= 0.0 {
            return Err(Error::InvalidInput("direction does not point outward".into()));
        }
        Ok(PhasePoint { q, p })
    }

    /// Applies a diagonal sign matrix to both position and direction.
    pub fn mirrored(&self, signs: &[i8]) -> PhasePoint {
        let f = |v: &[f64]| v.iter().zip(signs).map(|(x, s)| x * *s as f64).collect();
        PhasePoint {
            q: f(&self.q),
            p: f(&self.p),
        }
    }

    /// Euclidean distance between two states in (q, p) space.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let dq: f64 = self.q.iter().zip(&other.q).map(|(a, b)| (a - b).powi(2)).sum();
        let dp: f64 = self.p.iter().zip(&other.p).map(|(a, b)| (a - b).powi(2)).sum();
        (dq + dp).sqrt()
    }
}

/// Caustic type vector. Bit `i` is 0 when `lambda_i < a_i` and 1 otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sigma(pub Vec<u8>);

impl Sigma {
    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// All `2^n` types in lexicographic order of their bit vectors.
    pub fn all(n: usize) -> Vec<Sigma> {
        (0..1usize << n)
            .map(|m| Sigma((0..n).map(|i| ((m >> (n - 1 - i)) & 1) as u8).collect()))
            .collect()
    }

    pub const E: [u8; 1] = [0];
    pub const H: [u8; 1] = [1];

    pub fn eh1() -> Sigma {
        Sigma(vec![0, 0])
    }
    pub fn h1h1() -> Sigma {
        Sigma(vec![1, 0])
    }
    pub fn eh2() -> Sigma {
        Sigma(vec![0, 1])
    }
    pub fn h1h2() -> Sigma {
        Sigma(vec![1, 1])
    }
}

impl fmt::Display for Sigma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [0] => write!(f, "E"),
            [1] => write!(f, "H"),
            [0, 0] => write!(f, "EH1"),
            [1, 0] => write!(f, "H1H1"),
            [0, 1] => write!(f, "EH2"),
            [1, 1] => write!(f, "H1H2"),
            bits => {
                let s: Vec<String> = bits.iter().map(|b| b.to_string()).collect();
                write!(f, "({})", s.join(","))
            }
        }
    }
}

impl FromStr for Sigma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Sigma> {
        let t = s.trim().to_ascii_lowercase();
        let bits = match t.as_str() {
            "e" => vec![0],
            "h" => vec![1],
            "eh1" => vec![0, 0],
            "h1h1" => vec![1, 0],
            "eh2" => vec![0, 1],
            "h1h2" => vec![1, 1],
            _ => t
                .trim_matches(|c| c == '(' || c == ')')
                .split(',')
                .map(|b| match b.trim() {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::InvalidInput(format!("bad caustic type bit {other:?}"))),
                })
                .collect::<Result<Vec<u8>>>()?,
        };
        Ok(Sigma(bits))
    }
}

/// Ordered caustic parameters together with their type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausticParam {
    pub lambda: Vec<f64>,
    pub sigma: Sigma,
}

impl CausticParam {
    /// Validates `lambda` against the nonsingular caustic space of `e`.
    pub fn new(e: &Ellipsoid, lambda: &[f64]) -> Result<Self> {
        if lambda.len() != e.n() {
            return Err(Error::InvalidInput(format!(
                "expected {} caustic parameters, got {}",
                e.n(),
                lambda.len()
            )));
        }
        if lambda.iter().any(|l| !l.is_finite() || *l <= 0.0 || *l >= e.scale()) {
            return Err(Error::InvalidInput(format!(
                "caustic parameters must lie in (0, {}): {lambda:?}",
                e.scale()
            )));
        }
        if lambda.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!("{lambda:?} is not increasing")));
        }
        if let Some(l) = lambda.iter().find(|l| e.semiaxes().contains(l)) {
            return Err(Error::SingularCaustic(format!("lambda = {l} is a semiaxis")));
        }
        let sigma = classify(e, lambda)?;
        Ok(CausticParam {
            lambda: lambda.to_vec(),
            sigma,
        })
    }

    /// Scales ellipsoid-independent data, for homogeneity checks.
    pub fn scaled(&self, t: f64) -> CausticParam {
        CausticParam {
            lambda: self.lambda.iter().map(|l| l * t).collect(),
            sigma: self.sigma.clone(),
        }
    }
}

fn classify(e: &Ellipsoid, lambda: &[f64]) -> Result<Sigma> {
    let mut bits = Vec::with_capacity(lambda.len());
    for (i, &l) in lambda.iter().enumerate() {
        let ai = e.semiaxes()[i];
        let bit = if l < ai { 0 } else { 1 };
        let (lo, hi) = e.slot(i + 1, bit);
        if !(l > lo && l < hi) {
            return Err(Error::InvalidInput(format!(
                "lambda_{} = {l} is not in an admissible interval",
                i + 1
            )));
        }
        bits.push(bit);
    }
    Ok(Sigma(bits))
}

/// Householder reflection of `p` in the tangent plane at `q`.
pub fn reflect(e: &Ellipsoid, x: &PhasePoint) -> Vec<f64> {
    let n = e.normal(&x.q);
    let pn = dot(&x.p, &n);
    x.p.iter().zip(&n).map(|(p, n)| p - 2.0 * pn * n).collect()
}

/// Second intersection of the ray `q + t p_in` with the ellipsoid.
///
/// Returns the new point and the chord length.
pub fn next_impact(e: &Ellipsoid, q: &[f64], p_in: &[f64]) -> Result<(Vec<f64>, f64)> {
    let a = e.semiaxes();
    let qp: f64 = (0..a.len()).map(|i| q[i] * p_in[i] / a[i]).sum();
    let pp: f64 = (0..a.len()).map(|i| p_in[i] * p_in[i] / a[i]).sum();
    let mut mu = -2.0 * qp / pp;
    if !(mu >= MU_MIN * e.scale()) {
        return Err(Error::DegenerateChord { step: 0 });
    }
    let point = |mu: f64| -> Vec<f64> { q.iter().zip(p_in).map(|(q, p)| q + mu * p).collect() };
    let y = point(mu);
    let f = e.level(&y) - 1.0;
    let df: f64 = 2.0 * (0..a.len()).map(|i| y[i] * p_in[i] / a[i]).sum::<f64>();
    if df != 0.0 {
        mu -= f / df;
    }
    Ok((point(mu), mu))
}

/// One bounce: reflect, then travel to the next impact.
pub fn billiard_step(e: &Ellipsoid, x: &PhasePoint) -> Result<PhasePoint> {
    let p_in = normalize(&reflect(e, x));
    let (q, _) = next_impact(e, &x.q, &p_in)?;
    Ok(PhasePoint { q, p: p_in })
}

/// The first `k + 1` states of the orbit through `x`.
pub fn billiard_orbit(e: &Ellipsoid, x: &PhasePoint, k: usize) -> Result<Vec<PhasePoint>> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(x.clone());
    for step in 1..=k {
        let next = billiard_step(e, out.last().unwrap()).map_err(|err| match err {
            Error::DegenerateChord { .. } => Error::DegenerateChord { step },
            other => other,
        })?;
        out.push(next);
    }
    Ok(out)
}

/// Coefficients, lowest degree first, of the tangency polynomial of the
/// line `q + t v`. For unit `v` this is `prod_j (lambda_j - mu)`.
///
/// The Lagrange identity turns the discriminant of the line against the
/// confocal quadric into a polynomial with no poles at the semiaxes.
pub fn tangency_polynomial(e: &Ellipsoid, q: &[f64], v: &[f64]) -> Vec<f64> {
    let a = e.semiaxes();
    let d = a.len();
    let mut out = vec![0.0; d];
    for i in 0..d {
        let others: Vec<f64> = (0..d).filter(|&m| m != i).map(|m| a[m]).collect();
        add_scaled(&mut out, &linear_product(&others), v[i] * v[i]);
    }
    for i in 0..d {
        for l in i + 1..d {
            let w = q[i] * v[l] - q[l] * v[i];
            let others: Vec<f64> = (0..d).filter(|&m| m != i && m != l).map(|m| a[m]).collect();
            add_scaled(&mut out, &linear_product(&others), -w * w);
        }
    }
    out
}

/// Direct evaluation of the tangency polynomial, free of coefficient
/// cancellation.
pub fn tangency_value(e: &Ellipsoid, q: &[f64], v: &[f64], mu: f64) -> f64 {
    let a = e.semiaxes();
    let d = a.len();
    let mut total = 0.0;
    for i in 0..d {
        let mut prod = v[i] * v[i];
        for m in (0..d).filter(|&m| m != i) {
            prod *= a[m] - mu;
        }
        total += prod;
    }
    for i in 0..d {
        for l in i + 1..d {
            let w = q[i] * v[l] - q[l] * v[i];
            let mut prod = -w * w;
            for m in (0..d).filter(|&m| m != i && m != l) {
                prod *= a[m] - mu;
            }
            total += prod;
        }
    }
    total
}

/// The caustic parameters of the line through `q` with direction `v`.
///
/// A tangent line has `lambda_1 = 0`; that value is returned as is.
pub fn caustics_of_line(e: &Ellipsoid, q: &[f64], v: &[f64]) -> Result<CausticParam> {
    let v = normalize(v);
    let n = e.n();
    let scale = e.scale();
    let coeffs = tangency_polynomial(e, q, &v);
    let pad = 1e-9 * scale;
    let f = |mu: f64| tangency_value(e, q, &v, mu);
    let mut roots = real_roots(&coeffs, -pad, scale + pad, &f);
    if roots.len() != n {
        return Err(Error::SingularCaustic(format!(
            "found {} distinct caustics instead of {n}",
            roots.len()
        )));
    }
    let tol = TOL_SINGULAR * scale;
    if roots[0] < 0.0 {
        roots[0] = 0.0;
    }
    for (k, &r) in roots.iter().enumerate() {
        if let Some(aj) = e.semiaxes().iter().find(|aj| (r - *aj).abs() < tol) {
            return Err(Error::SingularCaustic(format!("lambda = {r} meets the semiaxis {aj}")));
        }
        if k > 0 && r - roots[k - 1] < tol {
            return Err(Error::SingularCaustic(format!("caustics {} and {} coincide", k, k + 1)));
        }
    }
    let sigma = Sigma(
        roots
            .iter()
            .enumerate()
            .map(|(i, &r)| u8::from(r >= e.semiaxes()[i]))
            .collect(),
    );
    Ok(CausticParam { lambda: roots, sigma })
}

/// Caustic parameters of the chord leaving state `x`.
pub fn caustics_of_state(e: &Ellipsoid, x: &PhasePoint) -> Result<CausticParam> {
    caustics_of_line(e, &x.q, &x.p)
}

/// The ellipsoidal coordinates `mu_1 < ... < mu_n` of a point on the
/// ellipsoid; `mu_k` lies in `[a_k, a_{k+1}]`.
pub fn ellipsoidal_coordinates(e: &Ellipsoid, q: &[f64]) -> Vec<f64> {
    let a = e.semiaxes();
    let g = |mu: f64| -> f64 { q.iter().zip(a).map(|(x, a)| x * x / (a - mu)).sum::<f64>() - 1.0 };
    (1..=e.n())
        .map(|k| {
            let (mut lo, mut hi) = (a[k - 1], a[k]);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Subinterval of `(a_k, a_{k+1})` where a state with caustics `lambda`
/// may have its k-th ellipsoidal coordinate.
pub fn admissible_coordinate_interval(e: &Ellipsoid, lambda: &[f64], k: usize) -> (f64, f64) {
    let (lo, hi) = (e.axis(k), e.axis(k + 1));
    let mut cuts = vec![lo];
    cuts.extend(lambda.iter().copied().filter(|l| *l > lo && *l < hi));
    cuts.push(hi);
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let below = lambda.iter().filter(|l| **l < mid).count();
        if below % 2 == k % 2 {
            return (w[0], w[1]);
        }
    }
    (lo, hi)
}

/// Builds the state at ellipsoidal coordinates `mu` (with `mu_0 = 0`
/// implicit) whose chord is tangent to the caustics `lambda`.
///
/// `q_signs` fixes the orthant of the point and `frame_signs[k]` the sign
/// of the direction along the k-th coordinate normal; `frame_signs[0]` is
/// ignored because the direction must point outward.
pub fn state_from_coordinates(
    e: &Ellipsoid,
    mu: &[f64],
    lambda: &[f64],
    q_signs: &[i8],
    frame_signs: &[i8],
) -> Result<PhasePoint> {
    let a = e.semiaxes();
    let d = a.len();
    let mut coords = Vec::with_capacity(d);
    coords.push(0.0);
    coords.extend_from_slice(mu);
    let q: Vec<f64> = (0..d)
        .map(|i| {
            let num: f64 = coords.iter().map(|m| a[i] - m).product();
            let den: f64 = (0..d).filter(|&l| l != i).map(|l| a[i] - a[l]).product();
            q_signs[i] as f64 * (num / den).max(0.0).sqrt()
        })
        .collect();
    let mut p = vec![0.0; d];
    for k in 0..d {
        let mk = coords[k];
        let g: Vec<f64> = (0..d).map(|i| q[i] / (a[i] - mk)).collect();
        let g = normalize(&g);
        let num: f64 = lambda.iter().map(|l| l - mk).product();
        let den: f64 = (0..d).filter(|&l| l != k).map(|l| coords[l] - mk).product();
        let c2 = num / den;
        if c2 < -1e-9 {
            return Err(Error::InvalidInput(format!(
                "coordinate {k} is not admissible for these caustics"
            )));
        }
        let sign = if k == 0 { 1.0 } else { frame_signs[k] as f64 };
        let c = sign * c2.max(0.0).sqrt();
        for i in 0..d {
            p[i] += c * g[i];
        }
    }
    let p = normalize(&p);
    Ok(PhasePoint { q, p })
}

/// Forward construction of a state with prescribed nonsingular caustics.
///
/// `fractions[k]` places the k-th ellipsoidal coordinate inside its
/// admissible subinterval; the signs choose orthant and frame orientation.
pub fn state_from_caustics(
    e: &Ellipsoid,
    lambda: &[f64],
    fractions: &[f64],
    q_signs: &[i8],
    frame_signs: &[i8],
) -> Result<PhasePoint> {
    let mu: Vec<f64> = (1..=e.n())
        .map(|k| {
            let (lo, hi) = admissible_coordinate_interval(e, lambda, k);
            lo + (hi - lo) * fractions[k - 1]
        })
        .collect();
    state_from_coordinates(e, &mu, lambda, q_signs, frame_signs)
}

/// Generic state on the caustics `lambda`, in the positive orthant.
pub fn generic_state(e: &Ellipsoid, lambda: &[f64]) -> Result<PhasePoint> {
    let d = e.dim();
    let fractions: Vec<f64> = (0..e.n()).map(|k| 0.37 + 0.11 * k as f64).collect();
    state_from_caustics(e, lambda, &fractions, &vec![1; d], &vec![1; d])
}

/// Birkhoff coordinates of the planar billiard: angle on the ellipse and
/// tangential momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffCoord {
    pub phi: f64,
    pub r: f64,
}

fn planar_axes(e: &Ellipsoid) -> Result<(f64, f64)> {
    if e.n() != 1 {
        return Err(Error::UnsupportedDimension(e.n()));
    }
    Ok((e.semiaxes()[0], e.semiaxes()[1]))
}

/// State at angle `phi` with tangential momentum `r`. The point is
/// `sqrt(a) cos(phi)` along the major axis and `sqrt(b) sin(phi)` along the
/// minor one.
pub fn phase_to_state(e: &Ellipsoid, c: BirkhoffCoord) -> Result<PhasePoint> {
    let (b, a) = planar_axes(e)?;
    let (s, co) = c.phi.sin_cos();
    let speed2 = a * s * s + b * co * co;
    if !(c.r * c.r < speed2) {
        return Err(Error::OutsideAnnulus);
    }
    let q = vec![b.sqrt() * s, a.sqrt() * co];
    let speed = speed2.sqrt();
    let t = [b.sqrt() * co / speed, -a.sqrt() * s / speed];
    let nrm = e.normal(&q);
    let along = c.r / speed;
    let across = (1.0 - along * along).sqrt();
    let p = vec![along * t[0] + across * nrm[0], along * t[1] + across * nrm[1]];
    Ok(PhasePoint { q, p: normalize(&p) })
}

/// Caustic parameter of the chord with Birkhoff coordinates `(phi, r)`.
pub fn lambda_of_phase(e: &Ellipsoid, c: BirkhoffCoord) -> Result<f64> {
    let (b, a) = planar_axes(e)?;
    let s = c.phi.sin();
    if !(c.r * c.r < a * s * s + b * (1.0 - s * s)) {
        return Err(Error::OutsideAnnulus);
    }
    Ok((a - b) * s * s + b - c.r * c.r)
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub(crate) fn normalize(x: &[f64]) -> Vec<f64> {
    let r = norm(x);
    x.iter().map(|v| v / r).collect()
}

/// Coefficients of `prod (r_k - mu)`, lowest degree first.
fn linear_product(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k] += r * ck;
            next[k + 1] -= ck;
        }
        c = next;
    }
    c
}

fn add_scaled(acc: &mut [f64], p: &[f64], s: f64) {
    for (k, &pk) in p.iter().enumerate() {
        acc[k] += s * pk;
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ck| acc * x + ck)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, ck)| k as f64 * ck).collect()
}

/// Real roots in `[lo, hi]` of a polynomial whose roots are all real.
///
/// Critical points of the derivative split the interval into pieces on
/// which the polynomial is monotone, so each sign change brackets exactly
/// one root. `exact` evaluates the polynomial accurately and drives the
/// final bisection.
fn real_roots(c: &[f64], lo: f64, hi: f64, exact: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return vec![];
    }
    let dc = derivative(c);
    let crit = real_roots(&dc, lo, hi, &|x| horner(&dc, x));
    let mut pts = vec![lo];
    pts.extend(crit.into_iter().filter(|x| *x > lo && *x < hi));
    pts.push(hi);
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (mut x0, mut x1) = (w[0], w[1]);
        let (f0, f1) = (exact(x0), exact(x1));
        if f0 == 0.0 {
            if roots.last() != Some(&x0) {
                roots.push(x0);
            }
            continue;
        }
        if f0.signum() == f1.signum() {
            continue;
        }
        let s0 = f0.signum();
        for _ in 0..200 {
            let mid = 0.5 * (x0 + x1);
            if mid <= x0 || mid >= x1 {
                break;
            }
            let fm = exact(mid);
            if fm == 0.0 {
                x0 = mid;
                x1 = mid;
                break;
            }
            if fm.signum() == s0 {
                x0 = mid;
            } else {
                x1 = mid;
            }
        }
        let mut r = 0.5 * (x0 + x1);
        for _ in 0..2 {
            let d = horner(&dc, r);
            if d != 0.0 {
                let cand = r - exact(r) / d;
                if cand >= w[0] && cand <= w[1] {
                    r = cand;
                }
            }
        }
        roots.push(r);
    }
    if let Some(&last) = pts.last() {
        if exact(last) == 0.0 && roots.last() != Some(&last) {
            roots.push(last);
        }
    }
    roots
}
