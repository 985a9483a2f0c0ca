use confocal::bifurcation::{anchors, range_boundary};
use confocal::frequency::{frequency_unguarded, solve_table};
use confocal::geometry::{billiard_orbit, billiard_step, caustics_of_state, generic_state, reflect};
use confocal::periodic::{
    even_set, invert_frequency, kappa_sigma, parity_holds, refine_periodic, strictly_decreasing, winding_from_state,
};
use confocal::quadrature::{integral_table, CollapseConfig};
use confocal::{Ellipsoid, PhasePoint, QuadratureConfig, Sigma};
use proptest::prelude::*;

/// Increasing semiaxes in `[0.05, 1]` with gaps of at least `0.03`.
fn axes(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n + 1).prop_map(move |w| {
        let total: f64 = w.iter().map(|x| x + 0.1).sum();
        let mut acc = 0.05;
        w.iter()
            .map(|x| {
                acc += 0.95 * (x + 0.1) / total;
                acc
            })
            .collect::<Vec<f64>>()
            .into_iter()
            .map(|v| v.min(1.0))
            .collect()
    })
}

/// Caustic parameters of type `sigma`, each at relative distance at least
/// `margin` from the ends of its slot.
fn place(e: &Ellipsoid, sigma: &Sigma, fractions: &[f64], margin: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for i in 0..e.n() {
        let (mut lo, hi) = e.slot(i + 1, sigma.0[i]);
        if i > 0 && e.slot(i, sigma.0[i - 1]) == (lo, hi) {
            lo = out[i - 1];
        }
        let t = margin + (1.0 - 2.0 * margin) * fractions[i];
        out.push(lo + t * (hi - lo));
    }
    out
}

fn config(n: usize) -> impl Strategy<Value = (Ellipsoid, Sigma, Vec<f64>)> {
    (axes(n), 0..(1usize << n), prop::collection::vec(0.0f64..1.0, n)).prop_map(move |(a, k, f)| {
        let e = Ellipsoid::new(&a).unwrap();
        let sigma = Sigma::all(n)[k].clone();
        let lambda = place(&e, &sigma, &f, 0.02);
        (e, sigma, lambda)
    })
}

fn max_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frequency_is_homogeneous_of_degree_zero((e, _, lambda) in config(2), t in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let cfg = QuadratureConfig::default();
        let w = frequency_unguarded(&e, &lambda, &cfg).unwrap().omega;
        let lt: Vec<f64> = lambda.iter().map(|l| l * t).collect();
        let wt = frequency_unguarded(&e.scaled(t), &lt, &cfg).unwrap().omega;
        prop_assert!(max_diff(&w, &wt) < 1e-11, "{w:?} vs {wt:?}");
    }

    #[test]
    fn frequencies_are_ordered((e, sigma, lambda) in (1usize..=3).prop_flat_map(config)) {
        // monitored conjecture: a counterexample here is a finding
        let n = e.n();
        let w = frequency_unguarded(&e, &lambda, &QuadratureConfig::default()).unwrap().omega;
        prop_assert!(w[0] < 0.5 && w[n - 1] > 0.0, "{sigma} {lambda:?}: {w:?}");
        prop_assert!(w.windows(2).all(|p| p[0] > p[1]), "{sigma} {lambda:?}: {w:?}");
    }

    #[test]
    fn integrals_are_positive_and_solve_the_linear_system((e, _, lambda) in config(3)) {
        let c = CollapseConfig::new(&e, &lambda).unwrap();
        let t = integral_table(&c, &QuadratureConfig::default()).unwrap();
        prop_assert!(t.k.iter().flatten().all(|v| v.is_finite() && *v > 0.0));
        let (_, residual) = solve_table(&t).unwrap();
        let k0: f64 = t.column(0).iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(residual <= 1e-11 * k0, "residual {residual:e}");
    }

    #[test]
    fn integrals_scale_with_their_homogeneity_exponent((e, _, lambda) in config(2), t in 0.1f64..10.0) {
        let cfg = QuadratureConfig::default();
        let c = CollapseConfig::new(&e, &lambda).unwrap();
        let k = integral_table(&c, &cfg).unwrap();
        let kt = integral_table(&c.scaled(t), &cfg).unwrap();
        let n = 2;
        for i in 0..n {
            let factor = t.powf(i as f64 + 0.5 - n as f64);
            for j in 0..=n {
                prop_assert!((kt.k[i][j] / (factor * k.k[i][j]) - 1.0).abs() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn caustics_are_conserved_along_orbits((e, sigma, lambda) in config(2)) {
        let x = generic_state(&e, &lambda).unwrap();
        for y in billiard_orbit(&e, &x, 10_000).unwrap().iter().step_by(250) {
            let c = caustics_of_state(&e, y).unwrap();
            prop_assert_eq!(&c.sigma, &sigma);
            prop_assert!(max_diff(&c.lambda, &lambda) < 1e-8, "{:?} vs {lambda:?}", c.lambda);
        }
    }

    #[test]
    fn reflection_is_an_involution_and_the_map_reversible((e, _, lambda) in config(2)) {
        let x = generic_state(&e, &lambda).unwrap();
        // the reflected direction points inward, so it bypasses validation
        let p2 = reflect(&e, &PhasePoint { q: x.q.clone(), p: reflect(&e, &x) });
        prop_assert!(max_diff(&p2, &x.p) < 1e-14);
        let y = billiard_step(&e, &x).unwrap();
        // arriving at y with the reversed outgoing direction leads back to x
        let back: Vec<f64> = reflect(&e, &y).iter().map(|v| -v).collect();
        let z = billiard_step(&e, &PhasePoint::new(&e, y.q.clone(), back).unwrap()).unwrap();
        prop_assert!(max_diff(&z.q, &x.q) < 1e-10, "{:?} vs {:?}", z.q, x.q);
    }

    #[test]
    fn planar_round_trip_reproduces_winding_numbers(b in 0.2f64..0.8, m0 in 3usize..=8, k in 1usize..=3, hyperbola in any::<bool>()) {
        let m1 = 2 * k;
        prop_assume!(m1 < m0 && (!hyperbola || m0 % 2 == 0));
        let sigma = Sigma(vec![hyperbola as u8]);
        let e = Ellipsoid::new(&[b, 1.0]).unwrap();
        let w0 = m1 as f64 / (2 * m0) as f64;
        prop_assume!(!hyperbola || w0 > confocal::frequency::varrho(b, 1.0) + 0.01);
        let inv = invert_frequency(&e, &sigma, &[w0]).unwrap();
        let x = generic_state(&e, &inv.param.lambda).unwrap();
        let refined = refine_periodic(&e, &x, m0).unwrap();
        let w = winding_from_state(&e, &refined.state, m0, &sigma).unwrap();
        prop_assert_eq!(&w.m, &vec![m0, m1]);
        prop_assert!(parity_holds(&w) && strictly_decreasing(&w));
    }
}

proptest! {
    #[test]
    fn lower_bounds_obey_parity_and_ordering(n in 1usize..=8, bits in any::<u16>()) {
        let sigma = Sigma((0..n).map(|i| ((bits >> i) & 1) as u8).collect());
        let kappa = kappa_sigma(&sigma);
        prop_assert!(kappa >= n + 2 && kappa <= 2 * n + 2);
        // only ellipsoid-first types can close after an odd number of bounces
        let even = even_set(&sigma);
        prop_assert_eq!(even.contains(&0), sigma.0[0] == 1);
        if kappa % 2 == 1 {
            prop_assert_eq!(sigma.0[0], 0);
        }
    }

    #[test]
    fn range_anchors_are_ordered(b in 0.05f64..0.95, frac in 0.02f64..0.98) {
        let c = frac * b;
        let an = anchors(1.0, b, c).unwrap();
        prop_assert!(an.rho_y < an.rho_z);
        // observed, not proved
        prop_assert!(an.rho_y < an.rho_star && an.rho_star < an.rho_x, "{an:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn range_boundaries_close(b in 0.1f64..0.9, frac in 0.1f64..0.9, k in 0usize..4) {
        let sigma = Sigma::all(2)[k].clone();
        let rb = range_boundary(1.0, b, frac * b, &sigma).unwrap();
        let (first, last) = (rb.polyline[0], *rb.polyline.last().unwrap());
        prop_assert!((first[0] - last[0]).abs() < 1e-9 && (first[1] - last[1]).abs() < 1e-9);
        prop_assert!(rb.area() > 0.0);
    }
}
