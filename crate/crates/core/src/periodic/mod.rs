//! Periodic trajectories: winding numbers, the algebraic closure test,
//! inversion of the frequency map and refinement of closed orbits, plus
//! the combinatorial lower bounds on periods.

pub mod cayley;
mod extended;
mod invert;
mod refine;
pub mod winding;

use std::collections::BTreeMap;

pub use cayley::{cayley_scan, cayley_test, cayley_test_knots, CayleyReport};
pub use extended::{close_extended, ExtendedClosure};
pub use invert::{invert_frequency, invert_frequency_with, Inversion, InversionOptions};
pub use refine::{closure_count, refine_periodic, Refined};
pub use winding::{
    closing_symmetry, counted_frequency, winding_from_orbit, winding_from_state, CountRule, WindingNumbers,
};

use crate::error::{Error, Result};
use crate::geometry::Sigma;

/// Caustic parameters of the minimal planar periodic orbits: period three
/// on an ellipse and period four on a hyperbola. The hyperbola exists only
/// for `b < a / 2`.
pub fn minimal_caustics_2d(a: f64, b: f64) -> Result<(f64, Option<f64>)> {
    if !(b > 0.0 && b < a && a.is_finite()) {
        return Err(Error::DegenerateEllipsoid(format!(
            "need 0 < b < a, got a = {a}, b = {b}"
        )));
    }
    let e = 3.0 * a * b / (a + b + 2.0 * (a * a - a * b + b * b).sqrt());
    let h = (2.0 * b < a).then(|| a * b / (a - b));
    Ok((e, h))
}

/// The index set `E_sigma` of winding numbers forced to be even.
pub fn even_set(sigma: &Sigma) -> Vec<usize> {
    let s = &sigma.0;
    let n = s.len();
    let mut set = Vec::new();
    if s[0] == 1 {
        set.push(0);
    }
    for j in 1..n {
        if !(s[j - 1] == 1 && s[j] == 0) {
            set.push(j);
        }
    }
    set.push(n);
    set
}

/// The smallest period `m_0` compatible with `m_n < ... < m_0`, `m_n >= 2`
/// and evenness on `E_sigma`.
pub fn kappa_sigma(sigma: &Sigma) -> usize {
    let n = sigma.n();
    let even = even_set(sigma);
    // taking the smallest admissible value at each step is optimal since
    // every lower bound only grows with the previous entry
    let mut m = 2;
    for j in (0..n).rev() {
        m += 1;
        if even.contains(&j) && m % 2 == 1 {
            m += 1;
        }
    }
    m
}

/// `kappa(sigma)` for every type in dimension `n`.
pub fn kappa_table(n: usize) -> BTreeMap<Sigma, usize> {
    Sigma::all(n)
        .into_iter()
        .map(|s| (s.clone(), kappa_sigma(&s)))
        .collect()
}

/// True when `w` satisfies the evenness rules of its type.
pub fn parity_holds(w: &WindingNumbers) -> bool {
    even_set(&w.sigma).iter().all(|&j| w.m[j] % 2 == 0)
}

/// True when `m_n < ... < m_0`.
pub fn strictly_decreasing(w: &WindingNumbers) -> bool {
    w.m.windows(2).all(|p| p[0] > p[1])
}
