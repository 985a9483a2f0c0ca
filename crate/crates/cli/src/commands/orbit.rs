use std::f64::consts::PI;

use clap::Args;
use confocal::geometry::{billiard_orbit, caustics_of_state, generic_state, lambda_of_phase, phase_to_state};
use confocal::{BirkhoffCoord, Ellipsoid, PhasePoint, Sigma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::output::{document, num, nums, Csv};
use crate::svg::{contour, Plot, PALETTE};
use crate::{ellipsoid, numbers, Common, Failure, Numbers};

#[derive(Args)]
pub struct OrbitArgs {
    /// Squared semiaxes, in any order.
    #[arg(long, value_parser = numbers)]
    axes: Numbers,
    /// Start at Birkhoff angle PHI (planar only; needs --r).
    #[arg(long, value_parser = crate::parse::number, requires = "r")]
    phi: Option<f64>,
    /// Tangential momentum of the start.
    #[arg(long, value_parser = crate::parse::number, requires = "phi")]
    r: Option<f64>,
    /// Start on the orbit with these caustic parameters.
    #[arg(long, value_parser = numbers, conflicts_with_all = ["phi", "q"])]
    lambda: Option<Numbers>,
    /// Start point on the ellipsoid (needs --p).
    #[arg(long, value_parser = numbers, requires = "p")]
    q: Option<Numbers>,
    /// Unit direction arriving at the start point.
    #[arg(long, value_parser = numbers, requires = "q")]
    p: Option<Numbers>,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[command(flatten)]
    common: Common,
}

fn random_start(e: &Ellipsoid, seed: u64) -> Result<PhasePoint, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let types = Sigma::all(e.n());
    let sigma = &types[rng.random_range(0..types.len())];
    let mut lambda: Vec<f64> = Vec::new();
    for i in 0..e.n() {
        let (mut lo, hi) = e.slot(i + 1, sigma.0[i]);
        if i > 0 && e.slot(i, sigma.0[i - 1]) == (lo, hi) {
            lo = lambda[i - 1];
        }
        lambda.push(lo + rng.random_range(0.1..0.9) * (hi - lo));
    }
    Ok(generic_state(e, &lambda)?)
}

pub fn orbit(args: &OrbitArgs) -> Result<(), Failure> {
    let e = ellipsoid(&args.axes)?;
    let (start, how) = match (args.phi.zip(args.r), &args.lambda, args.q.as_ref().zip(args.p.as_ref())) {
        (Some((phi, r)), _, _) => (
            phase_to_state(&e, BirkhoffCoord { phi, r })?,
            format!("phi={phi} r={r}"),
        ),
        (_, Some(l), _) => (generic_state(&e, &l.0)?, format!("lambda={}", nums(&l.0))),
        (_, _, Some((q, p))) => (
            PhasePoint::new(&e, q.0.clone(), p.0.clone())?,
            format!("q={} p={}", nums(&q.0), nums(&p.0)),
        ),
        _ => (
            random_start(&e, args.common.seed)?,
            format!("random seed={}", args.common.seed),
        ),
    };
    let orbit = billiard_orbit(&e, &start, args.steps)?;
    let caustics: Vec<Option<Vec<f64>>> = orbit
        .iter()
        .map(|x| caustics_of_state(&e, x).ok().map(|c| c.lambda))
        .collect();
    let sigma = caustics_of_state(&e, &start).ok().map(|c| c.sigma);
    let drift = caustics[0].as_ref().map(|l0| {
        caustics
            .iter()
            .flatten()
            .map(|l| l.iter().zip(l0).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    });

    let d = e.dim();
    let mut header: Vec<String> = vec!["step".into()];
    header.extend((1..=d).map(|i| format!("q{i}")));
    header.extend((1..=d).map(|i| format!("p{i}")));
    header.extend((1..=e.n()).map(|i| format!("lambda{i}")));
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    csv.meta("axes", nums(e.semiaxes()))
        .meta("start", &how)
        .meta("steps", args.steps);
    csv.meta("sigma", sigma.as_ref().map_or("singular".into(), |s| s.to_string()));
    csv.meta("caustic_drift", drift.map_or("n/a".into(), num));
    for (k, (x, l)) in orbit.iter().zip(&caustics).enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(x.q.iter().chain(&x.p).map(|v| num(*v)));
        match l {
            Some(l) => row.extend(l.iter().map(|v| num(*v))),
            None => row.extend((0..e.n()).map(|_| String::new())),
        }
        csv.row(row);
    }
    let sink = args.common.sink();
    sink.emit("csv", &csv.render(), true)?;
    let summary = json!({
        "axes": e.semiaxes(),
        "start": how,
        "steps": args.steps,
        "lambda": caustics[0],
        "sigma": sigma.map(|s| s.to_string()),
        "caustic_drift": drift,
    });
    sink.emit("json", &document("orbit", summary), false)?;
    Ok(())
}

#[derive(Args)]
pub struct PortraitArgs {
    /// The two squared semiaxes of the ellipse.
    #[arg(long, value_parser = numbers)]
    axes: Numbers,
    /// Grid points along each coordinate.
    #[arg(long, default_value_t = 161)]
    grid: usize,
    /// Level curves drawn on each side of the separatrix.
    #[arg(long, default_value_t = 6)]
    levels: usize,
    #[command(flatten)]
    common: Common,
}

pub fn portrait(args: &PortraitArgs) -> Result<(), Failure> {
    let e = ellipsoid(&args.axes)?;
    if e.n() != 1 {
        return Err(Failure::Usage("the phase portrait needs exactly two semiaxes".into()));
    }
    let (b, a) = (e.semiaxes()[0], e.semiaxes()[1]);
    let g = args.grid.max(3);
    let rmax = a.sqrt();
    let phis: Vec<f64> = (0..g).map(|k| 2.0 * PI * k as f64 / (g - 1) as f64).collect();
    let rs: Vec<f64> = (0..g).map(|k| -rmax + 2.0 * rmax * k as f64 / (g - 1) as f64).collect();
    let values: Vec<Vec<f64>> = phis
        .iter()
        .map(|&phi| {
            rs.iter()
                .map(|&r| lambda_of_phase(&e, BirkhoffCoord { phi, r }).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();

    let mut plot = Plot::new(
        &format!("Phase portrait, a = {a}, b = {b}"),
        (0.0, 2.0 * PI),
        (-rmax, rmax),
        "phi",
        "r",
    );
    let l = args.levels.max(1);
    let ellipses = (1..=l).map(|k| b * k as f64 / (l + 1) as f64);
    let hyperbolas = (1..=l).map(|k| b + (a - b) * k as f64 / (l + 1) as f64);
    for (level, color) in ellipses
        .map(|v| (v, PALETTE[1]))
        .chain(hyperbolas.map(|v| (v, PALETTE[0])))
    {
        for s in contour(&phis, &rs, &values, level) {
            plot.segment(s[0], s[1], color, 0.8);
        }
    }
    let fine: Vec<f64> = (0..=720).map(|k| 2.0 * PI * k as f64 / 720.0).collect();
    for sign in [1.0, -1.0] {
        let rim: Vec<[f64; 2]> = fine
            .iter()
            .map(|&p| [p, sign * (a * p.sin().powi(2) + b * p.cos().powi(2)).sqrt()])
            .collect();
        plot.polyline(&rim, PALETTE[5], 1.2);
        let sep: Vec<[f64; 2]> = fine.iter().map(|&p| [p, sign * (a - b).sqrt() * p.sin()]).collect();
        plot.polyline(&sep, PALETTE[2], 1.6);
    }
    plot.legend(&[
        ("ellipse caustics", PALETTE[1]),
        ("hyperbola caustics", PALETTE[0]),
        ("separatrix", PALETTE[2]),
    ]);

    let mut csv = Csv::new(&["phi", "r", "lambda"]);
    csv.meta("axes", nums(e.semiaxes())).meta("grid", g);
    for (i, &phi) in phis.iter().enumerate() {
        for (j, &r) in rs.iter().enumerate() {
            let v = values[i][j];
            csv.row(vec![num(phi), num(r), if v.is_nan() { String::new() } else { num(v) }]);
        }
    }
    let sink = args.common.sink();
    sink.emit("svg", &plot.render(), true)?;
    sink.emit("csv", &csv.render(), false)?;
    Ok(())
}
