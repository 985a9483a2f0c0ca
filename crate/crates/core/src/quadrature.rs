//! Hyperelliptic integrals over the merged parameter vector.
//!
//! Each entry of a configuration is a [`Knot`]: an anchor plus a small
//! offset. Distances between knots sharing an anchor are then exact, so an
//! integration interval of length `1e-41` next to a semiaxis of size one is
//! represented without loss. Every integrand is evaluated from those
//! distances, never from `s` itself, which keeps near-collapse integrals
//! accurate to the working tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Ellipsoid;

/// Widest vector integrand handled in one pass.
pub const MAXW: usize = 9;

pub(crate) type Vecw = [f64; MAXW];

/// Tolerances for every integral computed by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Shortest interval accepted by the checked entry points, relative to scale.
    pub gap_min: f64,
    /// Closest pole accepted by [`weighted_k`], relative to scale.
    pub pole_min: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-13,
            max_panels: 6000,
            gap_min: 1e-9,
            pole_min: 1e-9,
        }
    }
}

/// A real number written as `anchor + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Knot {
    pub anchor: f64,
    pub offset: f64,
}

impl Knot {
    pub const ZERO: Knot = Knot {
        anchor: 0.0,
        offset: 0.0,
    };

    pub fn exact(x: f64) -> Knot {
        Knot { anchor: x, offset: 0.0 }
    }

    pub fn near(anchor: f64, offset: f64) -> Knot {
        Knot { anchor, offset }
    }

    pub fn value(&self) -> f64 {
        self.anchor + self.offset
    }

    /// `other - self`, exact when the anchors agree.
    pub fn gap_to(&self, other: &Knot) -> f64 {
        (other.anchor - self.anchor) + (other.offset - self.offset)
    }

    pub fn scaled(&self, t: f64) -> Knot {
        Knot {
            anchor: self.anchor * t,
            offset: self.offset * t,
        }
    }

    fn cmp_value(&self, other: &Knot) -> Ordering {
        let g = self.gap_to(other);
        if g > 0.0 {
            Ordering::Less
        } else if g < 0.0 {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    }
}

/// Where an entry of the merged vector came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Entry {
    /// Semiaxis `a_k`, 1-based.
    Axis(usize),
    /// Caustic parameter `lambda_k`, 1-based.
    Caustic(usize),
    /// Entry without a recorded origin.
    Free,
}

/// The ordered vector `c_1 < ... < c_{2n+1}` of semiaxes and caustic
/// parameters; `c_0 = 0` is implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseConfig {
    knots: Vec<Knot>,
    provenance: Vec<Entry>,
}

impl CollapseConfig {
    pub fn new(e: &Ellipsoid, lambda: &[f64]) -> Result<Self> {
        let axes: Vec<Knot> = e.semiaxes().iter().map(|&a| Knot::exact(a)).collect();
        let lam: Vec<Knot> = lambda.iter().map(|&l| Knot::exact(l)).collect();
        Self::from_knots(&axes, &lam)
    }

    /// Builds a configuration from knots. Caustics may be anchored at a
    /// semiaxis to express tiny gaps exactly.
    pub fn from_knots(axes: &[Knot], lambda: &[Knot]) -> Result<Self> {
        if axes.len() != lambda.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} semiaxes need {} caustic parameters",
                axes.len(),
                axes.len().saturating_sub(1)
            )));
        }
        let mut items: Vec<(Knot, Entry)> = axes
            .iter()
            .enumerate()
            .map(|(k, &x)| (x, Entry::Axis(k + 1)))
            .chain(lambda.iter().enumerate().map(|(k, &x)| (x, Entry::Caustic(k + 1))))
            .collect();
        items.sort_by(|x, y| x.0.cmp_value(&y.0));
        Self::from_sorted(items)
    }

    /// Configuration from an increasing list of values with no provenance.
    pub fn from_values(c: &[f64]) -> Result<Self> {
        if c.len() % 2 == 0 {
            return Err(Error::InvalidInput("a configuration has odd length 2n+1".into()));
        }
        Self::from_sorted(c.iter().map(|&x| (Knot::exact(x), Entry::Free)).collect())
    }

    pub(crate) fn from_sorted(items: Vec<(Knot, Entry)>) -> Result<Self> {
        let mut prev = Knot::ZERO;
        for (k, _) in &items {
            if !(prev.gap_to(k) > 0.0) || !k.value().is_finite() {
                return Err(Error::InvalidInput(format!(
                    "configuration entries must be positive and strictly increasing (at {})",
                    k.value()
                )));
            }
            prev = *k;
        }
        let (knots, provenance) = items.into_iter().unzip();
        Ok(CollapseConfig { knots, provenance })
    }

    pub fn n(&self) -> usize {
        self.knots.len() / 2
    }

    /// Entry `c_k` for `k` in `0..=2n+1`.
    pub fn knot(&self, k: usize) -> Knot {
        if k == 0 {
            Knot::ZERO
        } else {
            self.knots[k - 1]
        }
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn values(&self) -> Vec<f64> {
        self.knots.iter().map(Knot::value).collect()
    }

    pub fn provenance(&self) -> &[Entry] {
        &self.provenance
    }

    pub fn scale(&self) -> f64 {
        self.knots.last().unwrap().value()
    }

    /// `c_k - c_{k-1}` for `k` in `1..=2n+1`.
    pub fn gap(&self, k: usize) -> f64 {
        self.knot(k - 1).gap_to(&self.knot(k))
    }

    /// Smallest of all consecutive gaps, including `c_1 - 0`.
    pub fn min_gap(&self) -> (usize, f64) {
        (1..=self.knots.len())
            .map(|k| (k, self.gap(k)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap()
    }

    /// Length of the integration interval `(c_{2j}, c_{2j+1})`.
    pub fn interval_length(&self, j: usize) -> f64 {
        self.gap(2 * j + 1)
    }

    pub fn scaled(&self, t: f64) -> CollapseConfig {
        CollapseConfig {
            knots: self.knots.iter().map(|k| k.scaled(t)).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// The knot line of `1/sqrt(T)` with the origin as a regular point.
    pub(crate) fn line(&self) -> Line {
        let mut pts = vec![(Knot::ZERO, 0.0)];
        pts.extend(self.knots.iter().map(|k| (*k, 0.5)));
        Line::new(pts)
    }

    fn check_interval(&self, j: usize, cfg: &QuadratureConfig) -> Result<()> {
        let length = self.interval_length(j);
        let threshold = cfg.gap_min * self.scale();
        if length < threshold {
            return Err(Error::CollapsedInterval { length, threshold });
        }
        Ok(())
    }
}

/// The `n x (n+1)` table of integrals `K_ij`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralTable {
    pub k: Vec<Vec<f64>>,
    pub rel_err: Vec<Vec<f64>>,
}

impl IntegralTable {
    pub fn n(&self) -> usize {
        self.k.len()
    }

    /// Column `K_j` as a vector over `i`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.k.iter().map(|row| row[j]).collect()
    }
}

/// Signed and absolute values of a pole-weighted integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weighted {
    pub signed: f64,
    pub absolute: f64,
}

/// `K_ij = int_{c_{2j}}^{c_{2j+1}} s^i / sqrt(T(s)) ds`.
pub fn hyperelliptic_k(c: &CollapseConfig, i: usize, j: usize, cfg: &QuadratureConfig) -> Result<f64> {
    let n = c.n();
    if i >= n || j > n {
        return Err(Error::InvalidInput(format!("K_{i}{j} is undefined for n = {n}")));
    }
    c.check_interval(j, cfg)?;
    Ok(k_column_unchecked(c, j, cfg)?[i])
}

/// All `K_ij` for one interval, without the collapse guard.
pub fn k_column_unchecked(c: &CollapseConfig, j: usize, cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    let n = c.n();
    let line = c.line();
    let est = line.integrate(2 * j, 2 * j + 1, n, cfg, |s, out| {
        let mut x = 1.0;
        for o in out.iter_mut().take(n) {
            *o = x;
            x *= s;
        }
    })?;
    Ok(est.value[..n].to_vec())
}

/// The full table with the collapse guard on every interval.
pub fn integral_table(c: &CollapseConfig, cfg: &QuadratureConfig) -> Result<IntegralTable> {
    for j in 0..=c.n() {
        c.check_interval(j, cfg)?;
    }
    integral_table_unchecked(c, cfg)
}

/// The full table at any positive gap, relying on exact knot distances.
pub fn integral_table_unchecked(c: &CollapseConfig, cfg: &QuadratureConfig) -> Result<IntegralTable> {
    let n = c.n();
    let line = c.line();
    let mut k = vec![vec![0.0; n + 1]; n];
    let mut rel_err = vec![vec![0.0; n + 1]; n];
    for j in 0..=n {
        let est = line.integrate(2 * j, 2 * j + 1, n, cfg, |s, out| {
            let mut x = 1.0;
            for o in out.iter_mut().take(n) {
                *o = x;
                x *= s;
            }
        })?;
        for i in 0..n {
            k[i][j] = est.value[i];
            rel_err[i][j] = est.rel_err;
        }
    }
    Ok(IntegralTable { k, rel_err })
}

/// `int s^i ds / ((alpha - s) sqrt(T(s)))` over interval `j`.
pub fn weighted_k(c: &CollapseConfig, j: usize, pole: f64, i: usize, cfg: &QuadratureConfig) -> Result<Weighted> {
    let lo = c.knot(2 * j).value();
    let hi = c.knot(2 * j + 1).value();
    let distance = if pole < lo { lo - pole } else { pole - hi };
    if !(distance >= cfg.pole_min * c.scale()) {
        return Err(Error::PoleTooClose { distance });
    }
    weighted_k_knot(c, j, Knot::exact(pole), i, cfg)
}

pub(crate) fn weighted_k_knot(
    c: &CollapseConfig,
    j: usize,
    pole: Knot,
    i: usize,
    cfg: &QuadratureConfig,
) -> Result<Weighted> {
    let mut pts = vec![(Knot::ZERO, 0.0)];
    pts.extend(c.knots().iter().map(|k| (*k, 0.5)));
    let above = c.knot(2 * j + 1).gap_to(&pole) > 0.0;
    pts.push((pole, 1.0));
    let line = Line::new(pts);
    let (lo, hi) = line.locate_interval(c.knot(2 * j), c.knot(2 * j + 1));
    let est = line.integrate(lo, hi, 1, cfg, |s, out| out[0] = s.powi(i as i32))?;
    let absolute = est.value[0];
    Ok(Weighted {
        signed: if above { absolute } else { -absolute },
        absolute,
    })
}

/// A sorted list of knots, each with the exponent of `|c - s|` in the
/// denominator of the integrand. Exponent 0 marks a regular point.
#[derive(Debug, Clone)]
pub(crate) struct Line {
    knots: Vec<Knot>,
    expo: Vec<f64>,
}

impl Line {
    pub(crate) fn new(mut pts: Vec<(Knot, f64)>) -> Line {
        pts.sort_by(|x, y| x.0.cmp_value(&y.0));
        let (knots, expo) = pts.into_iter().unzip();
        Line { knots, expo }
    }

    pub(crate) fn locate_interval(&self, lo: Knot, hi: Knot) -> (usize, usize) {
        let find = |k: Knot| {
            self.knots
                .iter()
                .position(|x| x.cmp_value(&k) == Ordering::Equal)
                .unwrap()
        };
        (find(lo), find(hi))
    }

    /// `int_{knot lo}^{knot hi} f(s) / prod |c_k - s|^{e_k} ds`, vector valued.
    ///
    /// Square-root endpoints are removed by a trigonometric substitution;
    /// other knots enter only through exact distances.
    pub(crate) fn integrate<F>(
        &self,
        lo: usize,
        hi: usize,
        width: usize,
        cfg: &QuadratureConfig,
        f: F,
    ) -> Result<Estimate>
    where
        F: Fn(f64, &mut Vecw),
    {
        assert!(lo < hi && width <= MAXW);
        let length = self.knots[lo].gap_to(&self.knots[hi]);
        let (elo, ehi) = (self.expo[lo], self.expo[hi]);
        if [elo, ehi].iter().any(|e| *e != 0.0 && *e != 0.5) {
            return Err(Error::InvalidInput(
                "only regular or square-root endpoints are supported".into(),
            ));
        }
        let below: Vec<(f64, f64)> = (0..lo)
            .filter(|&k| self.expo[k] != 0.0)
            .map(|k| (self.knots[k].gap_to(&self.knots[lo]), self.expo[k]))
            .collect();
        let above: Vec<(f64, f64)> = (hi + 1..self.knots.len())
            .filter(|&k| self.expo[k] != 0.0)
            .map(|k| (self.knots[hi].gap_to(&self.knots[k]), self.expo[k]))
            .collect();
        let inner: Vec<(usize, f64)> = (lo + 1..hi)
            .filter(|&k| self.expo[k] != 0.0)
            .map(|k| (k, self.expo[k]))
            .collect();
        if !inner.is_empty() {
            return Err(Error::InvalidInput(
                "singular knot inside the integration interval".into(),
            ));
        }
        let start_lo = self.knots[lo];
        let start_hi = self.knots[hi];
        let eval = |d_lo: f64, d_hi: f64, jac: f64, out: &mut Vecw| {
            let s = if d_lo <= d_hi {
                start_lo.value() + d_lo
            } else {
                start_hi.value() - d_hi
            };
            let mut root = 1.0;
            let mut lin = 1.0;
            for &(g, e) in &below {
                if e == 0.5 {
                    root *= g + d_lo;
                } else {
                    lin *= g + d_lo;
                }
            }
            for &(g, e) in &above {
                if e == 0.5 {
                    root *= g + d_hi;
                } else {
                    lin *= g + d_hi;
                }
            }
            let w = jac / (root.sqrt() * lin);
            f(s, out);
            for o in out.iter_mut().take(width) {
                *o *= w;
            }
        };
        integrate_ends(length, elo == 0.5, ehi == 0.5, width, cfg, eval)
    }
}

/// `int_lo^hi f(s, d_lo, d_hi) / (d_lo^{e_lo} d_hi^{e_hi}) ds` where each end
/// exponent is 0 or 1/2 and `d_lo = s - lo`, `d_hi = hi - s`.
///
/// The closure receives both distances so it can form factors that vanish
/// at an endpoint without cancellation.
pub fn integrate_with_ends<F>(
    lo: f64,
    hi: f64,
    lo_root: bool,
    hi_root: bool,
    cfg: &QuadratureConfig,
    f: F,
) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let length = hi - lo;
    let call = |d_lo: f64, d_hi: f64, jac: f64, out: &mut Vecw| {
        let s = if d_lo <= d_hi { lo + d_lo } else { hi - d_hi };
        out[0] = jac * f(s, d_lo, d_hi);
    };
    let est = integrate_ends(length, lo_root, hi_root, 1, cfg, call)?;
    Ok(est.value[0])
}

/// Integrates `call(d_lo, d_hi, jac)` over an interval of the given length
/// after removing square-root endpoints. Each half of the interval is
/// parametrized from its own end, so both distances stay accurate to the
/// last bit however close to an endpoint the integrand is evaluated.
fn integrate_ends<F>(
    length: f64,
    lo_root: bool,
    hi_root: bool,
    width: usize,
    cfg: &QuadratureConfig,
    call: F,
) -> Result<Estimate>
where
    F: Fn(f64, f64, f64, &mut Vecw),
{
    let (a, b) = match (lo_root, hi_root) {
        (true, true) => {
            let half = |t: f64| {
                let (sh, ch) = (0.5 * t).sin_cos();
                (length * sh * sh, length * ch * ch)
            };
            (
                integrate_adaptive(0.0, PI / 2.0, width, cfg, |t, out| {
                    let (near, far) = half(t);
                    call(near, far, 1.0, out)
                })?,
                integrate_adaptive(0.0, PI / 2.0, width, cfg, |t, out| {
                    let (near, far) = half(t);
                    call(far, near, 1.0, out)
                })?,
            )
        }
        (false, false) => (
            integrate_adaptive(0.0, 0.5 * length, width, cfg, |t, out| call(t, length - t, 1.0, out))?,
            integrate_adaptive(0.0, 0.5 * length, width, cfg, |t, out| call(length - t, t, 1.0, out))?,
        ),
        (lo_root, _) => {
            // s at angle t from the root end: distance 2L sin^2(t/2) there and
            // L cos(t) to the regular end, with t = pi/2 - tau near the latter
            let root = (2.0 * length).sqrt();
            let mirror = |d_root: f64, d_reg: f64| if lo_root { (d_root, d_reg) } else { (d_reg, d_root) };
            (
                integrate_adaptive(0.0, PI / 4.0, width, cfg, |t, out| {
                    let sh = (0.5 * t).sin();
                    let (dl, dh) = mirror(2.0 * length * sh * sh, length * t.cos());
                    call(dl, dh, root * (0.5 * t).cos(), out)
                })?,
                integrate_adaptive(0.0, PI / 4.0, width, cfg, |tau, out| {
                    let t = PI / 2.0 - tau;
                    let sh = (0.5 * t).sin();
                    let (dl, dh) = mirror(2.0 * length * sh * sh, length * tau.sin());
                    call(dl, dh, root * (0.5 * t).cos(), out)
                })?,
            )
        }
    };
    let mut value = [0.0; MAXW];
    for k in 0..width {
        value[k] = a.value[k] + b.value[k];
    }
    Ok(Estimate {
        value,
        rel_err: a.rel_err.max(b.rel_err),
    })
}

/// Value and relative error estimate of a vector integral.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Estimate {
    pub value: Vecw,
    pub rel_err: f64,
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

const ORDERS: [usize; 8] = [8, 16, 32, 64, 128, 256, 512, 1024];

fn rules() -> &'static [Rule] {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    RULES.get_or_init(|| ORDERS.iter().map(|&n| gauss_legendre(n)).collect())
}

fn rule(order: usize) -> &'static Rule {
    &rules()[ORDERS.iter().position(|&o| o == order).expect("tabulated order")]
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the three-term recurrence.
fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn apply_rule<F: Fn(f64, &mut Vecw)>(r: &Rule, a: f64, b: f64, width: usize, f: &F) -> (Vecw, Vecw) {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut sum = [0.0; MAXW];
    let mut abs = [0.0; MAXW];
    let mut buf = [0.0; MAXW];
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        f(mid + half * x, &mut buf);
        for k in 0..width {
            sum[k] += w * buf[k];
            abs[k] += w * buf[k].abs();
        }
    }
    for k in 0..width {
        sum[k] *= half;
        abs[k] *= half;
    }
    (sum, abs)
}

struct Panel {
    a: f64,
    b: f64,
    value: Vecw,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Gauss-Legendre with order doubling, then adaptive bisection when the
/// integrand has features the global rule cannot resolve.
pub(crate) fn integrate_adaptive<F>(t0: f64, t1: f64, width: usize, cfg: &QuadratureConfig, f: F) -> Result<Estimate>
where
    F: Fn(f64, &mut Vecw),
{
    let tol = cfg.rel_tol;
    let (mut prev, _) = apply_rule(rule(8), t0, t1, width, &f);
    let mut scale = [0.0; MAXW];
    for &order in &ORDERS[1..5] {
        let (cur, abs) = apply_rule(rule(order), t0, t1, width, &f);
        scale = abs;
        let worst = (0..width)
            .map(|k| (cur[k] - prev[k]).abs() / abs[k].max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if worst <= tol {
            return Ok(Estimate {
                value: cur,
                rel_err: worst,
            });
        }
        prev = cur;
    }
    if (0..width).any(|k| !scale[k].is_finite()) {
        return Err(Error::NonConvergent("integrand is not finite".into()));
    }
    let norm_err = |lo: &Vecw, hi: &Vecw| -> f64 {
        (0..width)
            .map(|k| (hi[k] - lo[k]).abs() / scale[k].max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };
    let make = |a: f64, b: f64| -> Panel {
        let (v16, _) = apply_rule(rule(16), a, b, width, &f);
        let (v32, abs32) = apply_rule(rule(32), a, b, width, &f);
        // differences at the rounding level of the panel itself are noise
        let noise = (0..width).all(|k| (v32[k] - v16[k]).abs() <= 64.0 * f64::EPSILON * abs32[k]);
        let tiny = b - a <= (a.abs() + b.abs()) * 4.0 * f64::EPSILON;
        let err = if tiny || noise { 0.0 } else { norm_err(&v16, &v32) };
        Panel { a, b, value: v32, err }
    };
    let mut heap = BinaryHeap::new();
    let pieces = 8;
    let mut total_err = 0.0;
    for k in 0..pieces {
        let a = t0 + (t1 - t0) * k as f64 / pieces as f64;
        let b = t0 + (t1 - t0) * (k + 1) as f64 / pieces as f64;
        let p = make(a, b);
        total_err += p.err;
        heap.push(p);
    }
    while total_err > tol {
        if heap.len() >= cfg.max_panels {
            return Err(Error::NonConvergent(format!(
                "{} panels, estimated relative error {total_err:e}",
                heap.len()
            )));
        }
        let worst = heap.pop().unwrap();
        if worst.err == 0.0 {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (l, r) = (make(worst.a, mid), make(mid, worst.b));
        total_err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        if total_err < 0.0 {
            total_err = heap.iter().map(|p| p.err).sum();
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = [0.0; MAXW];
    let mut err = 0.0;
    for p in &panels {
        for k in 0..width {
            value[k] += p.value[k];
        }
        err += p.err;
    }
    Ok(Estimate { value, rel_err: err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Carlson's symmetric integral `R_F` by the duplication theorem.
    fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
        for _ in 0..200 {
            let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
            let l = sx * sy + sy * sz + sz * sx;
            x = 0.25 * (x + l);
            y = 0.25 * (y + l);
            z = 0.25 * (z + l);
            let m = (x + y + z) / 3.0;
            if ((x - m).abs().max((y - m).abs()).max((z - m).abs())) < 1e-15 * m {
                break;
            }
        }
        let m = (x + y + z) / 3.0;
        let (dx, dy, dz) = (1.0 - x / m, 1.0 - y / m, 1.0 - z / m);
        let e2 = dx * dy - dz * dz;
        let e3 = dx * dy * dz;
        (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / m.sqrt()
    }

    #[test]
    fn gauss_rules_integrate_polynomials() {
        for &n in &ORDERS {
            let r = rule(n);
            let s: f64 = r.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-14);
            let x6: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(6)).sum();
            assert_relative_eq!(x6, 2.0 / 7.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn planar_table_matches_carlson() {
        let cfg = QuadratureConfig::default();
        let (b, a, lam) = (4.0 / 9.0, 1.0, 0.8);
        let c = CollapseConfig::from_values(&[b, lam, a]).unwrap();
        let t = integral_table(&c, &cfg).unwrap();
        let k00 = 2.0 * carlson_rf(0.0, lam - b, a - b) - 2.0 * carlson_rf(b, lam, a);
        assert_relative_eq!(t.k[0][0], k00, max_relative = 1e-13);
        // complete integral between the two largest roots
        let k01 = 2.0 * carlson_rf(0.0, lam - b, a - b);
        assert_relative_eq!(t.k[0][1], k01, max_relative = 1e-13);
    }

    #[test]
    fn homogeneity_of_table() {
        let cfg = QuadratureConfig::default();
        let c = CollapseConfig::from_values(&[0.2, 0.46, 0.5, 0.58, 1.0]).unwrap();
        let t1 = integral_table(&c, &cfg).unwrap();
        let t2 = integral_table(&c.scaled(2.0), &cfg).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let expect = 2f64.powf(i as f64 + 0.5 - 2.0) * t1.k[i][j];
                assert_relative_eq!(t2.k[i][j], expect, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn exact_gap_survives_tiny_intervals() {
        let cfg = QuadratureConfig::default();
        let b = 4.0 / 9.0;
        let eps = 1e-41;
        let axes = [Knot::exact(b), Knot::exact(1.0)];
        let c = CollapseConfig::from_knots(&axes, &[Knot::near(1.0, -eps)]).unwrap();
        let t = integral_table_unchecked(&c, &cfg).unwrap();
        // an interval of length eps contributes pi / sqrt(1 - b) up to O(eps)
        assert_relative_eq!(t.k[0][1], PI / (1.0 - b).sqrt(), max_relative = 1e-13);
        assert!(t.k[0][0].is_finite() && t.k[0][0] > 0.0);
        assert!(matches!(integral_table(&c, &cfg), Err(Error::CollapsedInterval { .. })));
    }

    #[test]
    fn weighted_closed_form() {
        // int_0^b ds / ((a-s) sqrt(b-s)) = 2 atan(sqrt(b/(a-b))) / sqrt(a-b)
        let cfg = QuadratureConfig::default();
        let (a, b) = (1.0, 0.5);
        let v = integrate_with_ends(0.0, b, false, true, &cfg, |_, d_lo, _| 1.0 / (a - d_lo)).unwrap();
        let want = 2.0 * (b / (a - b)).sqrt().atan() / (a - b).sqrt();
        assert_relative_eq!(v, want, max_relative = 1e-14);
        assert_relative_eq!(want, PI / 2.0 * 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn pole_guard() {
        let cfg = QuadratureConfig::default();
        let c = CollapseConfig::from_values(&[0.3, 0.5, 1.0]).unwrap();
        assert!(matches!(
            weighted_k(&c, 0, 0.3 + 1e-12, 0, &cfg),
            Err(Error::PoleTooClose { .. })
        ));
        let w = weighted_k(&c, 1, 0.4, 0, &cfg).unwrap();
        assert!(w.signed < 0.0 && w.absolute > 0.0);
    }
}
