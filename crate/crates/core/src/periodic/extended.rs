//! Closure of billiard orbits in 256-bit arithmetic.
//!
//! Double precision pins a resonant caustic parameter only to about
//! `1e-16` relative, which is far coarser than the resolution of the
//! algebraic closure test. Running the billiard map itself in extended
//! precision and solving for closure locates the resonant parameter to
//! roughly `1e-60`, purely from the dynamics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Ellipsoid, PhasePoint};
use crate::periodic::cayley::{abs, big, cayley_test_exact, to_f64, CayleyReport, F};
use crate::periodic::refine::TorusPosition;
use crate::quadrature::Knot;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedClosure {
    /// Resonant caustic parameters as `anchor + offset`, which carries
    /// about 32 significant digits.
    pub lambda: Vec<Knot>,
    /// Closure residual of the extended-precision orbit.
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    exact: Vec<F>,
}

impl ExtendedClosure {
    /// The closure test at the full extended-precision parameters.
    pub fn cayley(&self, e: &Ellipsoid, m: usize) -> Result<CayleyReport> {
        cayley_test_exact(e, &self.exact, m)
    }
}

struct State {
    q: Vec<F>,
    p: Vec<F>,
}

fn dot(x: &[F], y: &[F]) -> F {
    x.iter().zip(y).fold(big(0.0), |s, (a, b)| &s + &(a * b))
}

fn normalize(x: &[F]) -> Vec<F> {
    let r = dot(x, x).sqrt();
    x.iter().map(|v| v / &r).collect()
}

fn sign(s: i8) -> F {
    big(s as f64)
}

fn build(a: &[F], mu: &[F], lambda: &[F], pos: &TorusPosition) -> Result<State> {
    let d = a.len();
    let mut coords = vec![big(0.0)];
    coords.extend(mu.iter().cloned());
    let mut q = Vec::with_capacity(d);
    for i in 0..d {
        let mut num = big(1.0);
        let mut den = big(1.0);
        for m in &coords {
            num = &num * &(&a[i] - m);
        }
        for l in (0..d).filter(|&l| l != i) {
            den = &den * &(&a[i] - &a[l]);
        }
        let v = &num / &den;
        if v < big(0.0) {
            return Err(Error::InvalidInput("ellipsoidal coordinates out of order".into()));
        }
        q.push(&sign(pos.q_signs[i]) * &v.sqrt());
    }
    let mut p = vec![big(0.0); d];
    for k in 0..d {
        let g: Vec<F> = (0..d).map(|i| &q[i] / &(&a[i] - &coords[k])).collect();
        let g = normalize(&g);
        let mut num = big(1.0);
        let mut den = big(1.0);
        for l in lambda {
            num = &num * &(l - &coords[k]);
        }
        for l in (0..d).filter(|&l| l != k) {
            den = &den * &(&coords[l] - &coords[k]);
        }
        let c2 = &num / &den;
        if c2 < big(0.0) {
            return Err(Error::InvalidInput(format!(
                "coordinate {k} is not admissible for these caustics"
            )));
        }
        let c = if k == 0 {
            c2.sqrt()
        } else {
            &sign(pos.frame_signs[k]) * &c2.sqrt()
        };
        for i in 0..d {
            p[i] = &p[i] + &(&c * &g[i]);
        }
    }
    Ok(State { q, p: normalize(&p) })
}

fn step(a: &[F], x: &State) -> State {
    let d = a.len();
    let nrm = normalize(&(0..d).map(|i| &x.q[i] / &a[i]).collect::<Vec<F>>());
    let pn = dot(&x.p, &nrm);
    let two = big(2.0);
    let p: Vec<F> = (0..d).map(|i| &x.p[i] - &(&(&two * &pn) * &nrm[i])).collect();
    let mut qp = big(0.0);
    let mut pp = big(0.0);
    for i in 0..d {
        qp = &qp + &(&(&x.q[i] * &p[i]) / &a[i]);
        pp = &pp + &(&(&p[i] * &p[i]) / &a[i]);
    }
    let t = &(&big(-2.0) * &qp) / &pp;
    let q = (0..d).map(|i| &x.q[i] + &(&t * &p[i])).collect();
    State { q, p }
}

fn displacement(a: &[F], mu: &[F], lambda: &[F], pos: &TorusPosition, m: usize, g: &[i8]) -> Result<Vec<F>> {
    let x0 = build(a, mu, lambda, pos)?;
    let mut x = State {
        q: x0.q.clone(),
        p: x0.p.clone(),
    };
    for _ in 0..m {
        x = step(a, &x);
    }
    let d = a.len();
    let mut r = Vec::with_capacity(2 * d);
    for i in 0..d {
        r.push(&x.q[i] - &(&sign(g[i]) * &x0.q[i]));
    }
    for i in 0..d {
        r.push(&x.p[i] - &(&sign(g[i]) * &x0.p[i]));
    }
    Ok(r)
}

/// Gaussian elimination with partial pivoting.
fn solve(mut m: Vec<Vec<F>>, mut b: Vec<F>) -> Result<Vec<F>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| abs(&m[i][col]).partial_cmp(&abs(&m[j][col])).unwrap())
            .unwrap();
        if m[piv][col] == F::ZERO {
            return Err(Error::SingularSystem("closure Jacobian is singular".into()));
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                m[r][c] = &m[r][c] - &(&f * &m[col][c]);
            }
            b[r] = &b[r] - &(&f * &b[col]);
        }
    }
    let mut x = vec![big(0.0); n];
    for r in (0..n).rev() {
        let mut s = b[r].clone();
        for c in r + 1..n {
            s = &s - &(&m[r][c] * &x[c]);
        }
        x[r] = &s / &m[r][r];
    }
    Ok(x)
}

fn split(x: &F) -> Knot {
    let anchor = to_f64(x);
    Knot::near(anchor, to_f64(&(x - &big(anchor))))
}

/// Solves for the caustic parameters at which the orbit through the torus
/// position of `x` satisfies `x_m = g x_0`, starting from `lambda0`.
///
/// Gauss-Newton on the normal equations with a central-difference
/// Jacobian, all in 256-bit arithmetic.
pub fn close_extended(e: &Ellipsoid, x: &PhasePoint, lambda0: &[Knot], m: usize, g: &[i8]) -> Result<ExtendedClosure> {
    let n = e.n();
    let pos = TorusPosition::of(e, x);
    let a: Vec<F> = e.semiaxes().iter().map(|&v| big(v)).collect();
    let mu: Vec<F> = pos.mu.iter().map(|&v| big(v)).collect();
    let mut lambda: Vec<F> = lambda0.iter().map(|k| &big(k.anchor) + &big(k.offset)).collect();
    let mut r = displacement(&a, &mu, &lambda, &pos, m, g)?;
    let mut res = dot(&r, &r).sqrt();
    let target = big(1e-60 * e.scale().sqrt());
    let h = big(1e-32 * e.scale());
    let mut iterations = 0;
    while res > target && iterations < 12 {
        iterations += 1;
        let mut jac: Vec<Vec<F>> = vec![Vec::with_capacity(n); r.len()];
        for i in 0..n {
            let mut up = lambda.clone();
            let mut dn = lambda.clone();
            up[i] = &up[i] + &h;
            dn[i] = &dn[i] - &h;
            let ru = displacement(&a, &mu, &up, &pos, m, g)?;
            let rd = displacement(&a, &mu, &dn, &pos, m, g)?;
            for k in 0..r.len() {
                jac[k].push(&(&ru[k] - &rd[k]) / &(&big(2.0) * &h));
            }
        }
        let normal: Vec<Vec<F>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| jac.iter().fold(big(0.0), |s, row| &s + &(&row[i] * &row[j])))
                    .collect()
            })
            .collect();
        let rhs: Vec<F> = (0..n)
            .map(|i| jac.iter().zip(&r).fold(big(0.0), |s, (row, rk)| &s - &(&row[i] * rk)))
            .collect();
        let delta = solve(normal, rhs)?;
        let cand: Vec<F> = lambda.iter().zip(&delta).map(|(l, d)| l + d).collect();
        let rc = displacement(&a, &mu, &cand, &pos, m, g)?;
        let nc = dot(&rc, &rc).sqrt();
        if nc >= res {
            break;
        }
        (lambda, r, res) = (cand, rc, nc);
    }
    let residual = to_f64(&res);
    if residual > 1e-40 * e.scale().sqrt() {
        return Err(Error::NoConvergence(format!(
            "extended closure residual {residual:e} after {iterations} steps"
        )));
    }
    Ok(ExtendedClosure {
        lambda: lambda.iter().map(split).collect(),
        residual,
        iterations,
        exact: lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generic_state;
    use crate::periodic::minimal_caustics_2d;

    #[test]
    fn triangle_caustic_to_extended_precision() {
        let (b, a) = (4.0 / 9.0, 1.0);
        let e = Ellipsoid::new(&[b, a]).unwrap();
        let (le, _) = minimal_caustics_2d(a, b).unwrap();
        let x = generic_state(&e, &[le]).unwrap();
        let c = close_extended(&e, &x, &[Knot::exact(le)], 3, &[1, 1]).unwrap();
        // the closed form evaluated in extended precision
        let (bb, aa) = (big(b), big(a));
        let disc = (&(&(&aa * &aa) - &(&aa * &bb)) + &(&bb * &bb)).sqrt();
        let exact = &(&big(3.0) * &(&aa * &bb)) / &(&(&aa + &bb) + &(&big(2.0) * &disc));
        assert!(to_f64(&abs(&(&c.exact[0] - &exact))) < 1e-50, "{c:?}");
        assert!(c.cayley(&e, 3).unwrap().residual < 1e-40);
    }
}
