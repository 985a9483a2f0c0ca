//! The closed-form criteria, the boundary membership test and inversion of
//! the frequency map must agree.

use confocal::bifurcation::{criteria_fast, in_range, Membership};
use confocal::periodic::invert_frequency;
use confocal::{Ellipsoid, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Sample {
    w: [f64; 2],
    b: f64,
    c: f64,
}

fn samples(count: usize, seed: u64) -> Vec<Sample> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let w1 = r.random_range(0.02..0.48);
            let w2 = r.random_range(0.01..w1 - 0.01);
            let b = r.random_range(0.05..0.95);
            let c = r.random_range(0.02..b - 0.02);
            Sample { w: [w1, w2], b, c }
        })
        .collect()
}

#[test]
fn criteria_membership_and_inversion_agree() {
    let all = samples(200, 7);
    let problems: Vec<String> = all
        .par_iter()
        .flat_map_iter(|s| {
            let e = Ellipsoid::new(&[s.c, s.b, 1.0]).unwrap();
            let crit = criteria_fast(&s.w, 1.0, s.b, s.c).unwrap();
            let mut out = Vec::new();
            for (sigma, flags) in crit {
                let m = in_range(&s.w, &sigma, 1.0, s.b, s.c).unwrap();
                let tag = format!("{sigma} w={:?} b={} c={}", s.w, s.b, s.c);
                if flags.sufficient && m == Membership::Outside {
                    out.push(format!("{tag}: sufficient test holds but outside"));
                }
                if flags.excluded && m == Membership::Inside {
                    out.push(format!("{tag}: necessary test fails but inside"));
                }
                let inv = invert_frequency(&e, &sigma, &s.w);
                match (m, inv) {
                    // the solution rounds onto a semiaxis in double precision
                    (Membership::Inside, Err(Error::SingularCaustic(_))) => {}
                    (Membership::Inside, Err(err)) => out.push(format!("{tag}: inside but inversion gave {err}")),
                    (Membership::Outside, Ok(i)) => {
                        out.push(format!("{tag}: outside but inverted to {:?}", i.param.lambda))
                    }
                    (Membership::Outside, Err(err)) if !matches!(err, Error::NotInRange(_)) => {
                        out.push(format!("{tag}: outside but inversion gave {err}"))
                    }
                    _ => {}
                }
            }
            out
        })
        .collect();
    assert!(
        problems.is_empty(),
        "{} disagreements:\n{}",
        problems.len(),
        problems.join("\n")
    );
}
