use clap::Args;
use confocal::geometry::{billiard_orbit, generic_state};
use confocal::periodic::{
    cayley_scan, even_set, invert_frequency, kappa_sigma, parity_holds, refine_periodic, strictly_decreasing,
    winding_from_state, WindingNumbers,
};
use confocal::{CausticParam, Sigma};
use serde_json::json;

use crate::output::{document, num, nums, Csv};
use crate::{ellipsoid, numbers, sigma_of, Common, Failure, Numbers};

#[derive(Args)]
pub struct CayleyArgs {
    #[arg(long, value_parser = numbers)]
    axes: Numbers,
    #[arg(long, value_parser = numbers)]
    lambda: Numbers,
    /// Largest trial period.
    #[arg(long, default_value_t = 8)]
    mmax: usize,
    #[command(flatten)]
    common: Common,
}

pub fn cayley(args: &CayleyArgs) -> Result<(), Failure> {
    let e = ellipsoid(&args.axes)?;
    let lambda = CausticParam::new(&e, &args.lambda.0)?;
    let reports = cayley_scan(&e, &lambda, args.mmax)?;
    let mut csv = Csv::new(&["m", "rows", "cols", "residual", "ratio"]);
    csv.meta("axes", nums(e.semiaxes()))
        .meta("lambda", nums(&lambda.lambda))
        .meta("sigma", &lambda.sigma);
    for r in &reports {
        csv.row(vec![
            r.m.to_string(),
            r.rows.to_string(),
            r.cols.to_string(),
            num(r.residual),
            num(r.ratio),
        ]);
    }
    let sink = args.common.sink();
    sink.emit("csv", &csv.render(), true)?;
    sink.emit(
        "json",
        &document(
            "cayley",
            json!({ "axes": e.semiaxes(), "lambda": lambda, "reports": reports }),
        ),
        false,
    )?;
    Ok(())
}

#[derive(Args)]
pub struct PeriodicArgs {
    #[arg(long, value_parser = numbers)]
    axes: Numbers,
    #[arg(long, value_parser = sigma_of)]
    sigma: Sigma,
    /// Rational frequency such as 3/8,1/4.
    #[arg(long, value_parser = numbers)]
    omega: Numbers,
    /// Period to close at; the smallest admissible one by default.
    #[arg(long)]
    period: Option<usize>,
    #[command(flatten)]
    common: Common,
}

/// Winding numbers `m_j = 2 m_0 omega_j`, when they are all integers.
fn windings(omega: &[f64], m0: usize, sigma: &Sigma) -> Option<WindingNumbers> {
    let mut m = vec![m0];
    for w in omega {
        let x = 2.0 * m0 as f64 * w;
        if (x - x.round()).abs() > 1e-9 * x.max(1.0) || x.round() < 1.0 {
            return None;
        }
        m.push(x.round() as usize);
    }
    Some(WindingNumbers {
        m,
        sigma: sigma.clone(),
    })
}

fn default_period(omega: &[f64], sigma: &Sigma) -> Option<usize> {
    (1..=100_000).find(|&m0| windings(omega, m0, sigma).is_some_and(|w| parity_holds(&w) && strictly_decreasing(&w)))
}

pub fn periodic(args: &PeriodicArgs) -> Result<(), Failure> {
    let e = ellipsoid(&args.axes)?;
    let omega = &args.omega.0;
    let m0 = match args.period {
        Some(m) => m,
        None => default_period(omega, &args.sigma).ok_or_else(|| {
            Failure::Usage(format!(
                "no period up to 100000 makes 2 m omega integral with the parity of {}",
                args.sigma
            ))
        })?,
    };
    if let Some(w) = windings(omega, m0, &args.sigma) {
        if !parity_holds(&w) {
            return Err(Failure::Usage(format!(
                "winding numbers {:?} break the parity rules of {} (even: {:?})",
                w.m,
                args.sigma,
                even_set(&args.sigma)
            )));
        }
    }
    let inv = invert_frequency(&e, &args.sigma, omega)?;
    let start = generic_state(&e, &inv.param.lambda)?;
    let refined = refine_periodic(&e, &start, m0)?;
    let winding = winding_from_state(&e, &refined.state, m0, &args.sigma)?;
    let orbit = billiard_orbit(&e, &refined.state, m0)?;

    let body = json!({
        "axes": e.semiaxes(),
        "sigma": args.sigma.to_string(),
        "omega": omega,
        "period": m0,
        "kappa": kappa_sigma(&args.sigma),
        "lambda": inv.param.lambda,
        "inversion_residual": inv.residual,
        "closure_residual": refined.residual,
        "symmetry": refined.g,
        "winding": winding.m,
        "start": { "q": refined.state.q, "p": refined.state.p },
    });
    let d = e.dim();
    let mut header: Vec<String> = vec!["step".into()];
    header.extend((1..=d).map(|i| format!("q{i}")));
    header.extend((1..=d).map(|i| format!("p{i}")));
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    csv.meta("axes", nums(e.semiaxes()))
        .meta("sigma", &args.sigma)
        .meta("period", m0);
    for (k, x) in orbit.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(x.q.iter().chain(&x.p).map(|v| num(*v)));
        csv.row(row);
    }
    let sink = args.common.sink();
    sink.emit("json", &document("periodic", body), true)?;
    sink.emit("csv", &csv.render(), false)?;
    Ok(())
}

#[derive(Args)]
pub struct BoundsArgs {
    /// Number of caustics, one less than the dimension.
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    common: Common,
}

pub fn lower_bounds(args: &BoundsArgs) -> Result<(), Failure> {
    if args.n == 0 || args.n > 16 {
        return Err(Failure::Usage(format!("--n must be between 1 and 16, got {}", args.n)));
    }
    let mut csv = Csv::new(&["sigma", "bits", "kappa"]);
    csv.meta("n", args.n);
    let mut table = Vec::new();
    for s in Sigma::all(args.n) {
        let k = kappa_sigma(&s);
        let bits: Vec<String> = s.0.iter().map(u8::to_string).collect();
        csv.row(vec![s.to_string(), bits.join(" "), k.to_string()]);
        table.push(json!({ "sigma": s.to_string(), "bits": s.0, "kappa": k }));
    }
    let sink = args.common.sink();
    sink.emit("csv", &csv.render(), true)?;
    sink.emit(
        "json",
        &document("lower-bounds", json!({ "n": args.n, "bounds": table })),
        false,
    )?;
    Ok(())
}
