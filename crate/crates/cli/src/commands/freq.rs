use clap::Args;
use confocal::frequency::{extended_frequency, frequency_unguarded, normalized_jacobian};
use confocal::{CausticParam, EdgePoint, EdgeTag, QuadratureConfig, Sigma};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{document, num, nums, Csv};
use crate::svg::Plot;
use crate::{ellipsoid, numbers, sigma_of, Common, Failure, Numbers};

#[derive(Args)]
pub struct FreqArgs {
    #[arg(long, value_parser = numbers)]
    axes: Numbers,
    /// Caustic parameters, interior or on an edge of the caustic space.
    #[arg(long, value_parser = numbers)]
    lambda: Numbers,
    /// Relative tolerance of the quadrature.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

pub fn freq(args: &FreqArgs) -> Result<(), Failure> {
    let e = ellipsoid(&args.axes)?;
    let cfg = QuadratureConfig {
        rel_tol: args.tol,
        ..QuadratureConfig::default()
    };
    let point = EdgePoint::new(&e, &args.lambda.0)?;
    let f = if point.tag == EdgeTag::Interior {
        frequency_unguarded(&e, &point.lambda, &cfg)?
    } else {
        extended_frequency(&e, &point)?
    };
    let sigma = CausticParam::new(&e, &point.lambda).ok().map(|p| p.sigma.to_string());
    let body = json!({
        "axes": e.semiaxes(),
        "lambda": point.lambda,
        "edge": format!("{:?}", point.tag),
        "sigma": sigma,
        "omega": f.omega,
        "source": f.source,
        "residual": f.residual,
        "tol": args.tol,
    });
    args.common.sink().emit("json", &document("freq", body), true)?;
    Ok(())
}

#[derive(Args)]
pub struct GridArgs {
    /// Three squared semiaxes.
    #[arg(long, value_parser = numbers)]
    axes: Numbers,
    /// Caustic type: eh1, h1h1, eh2 or h1h2.
    #[arg(long, value_parser = sigma_of)]
    sigma: Sigma,
    /// Cells along each caustic parameter.
    #[arg(long, default_value_t = 48)]
    res: usize,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

struct Cell {
    lambda: [f64; 2],
    omega: Option<Vec<f64>>,
    j_star: Option<f64>,
}

pub fn grid(args: &GridArgs) -> Result<(), Failure> {
    let e = ellipsoid(&args.axes)?;
    if e.n() != 2 || args.sigma.n() != 2 {
        return Err(Failure::Usage(
            "freq-grid works on three semiaxes and a two-bit type".into(),
        ));
    }
    let cfg = QuadratureConfig {
        rel_tol: args.tol,
        ..QuadratureConfig::default()
    };
    let s1 = e.slot(1, args.sigma.0[0]);
    let s2 = e.slot(2, args.sigma.0[1]);
    let res = args.res.max(2);
    let mid = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * (k as f64 + 0.5) / res as f64;
    let lambdas: Vec<[f64; 2]> = (0..res)
        .flat_map(|i| (0..res).map(move |j| (i, j)))
        .map(|(i, j)| [mid(s1, i), mid(s2, j)])
        .filter(|l| l[0] < l[1])
        .collect();
    let cells: Vec<Cell> = lambdas
        .into_par_iter()
        .map(|l| {
            let omega = frequency_unguarded(&e, &l, &cfg).ok().map(|f| f.omega);
            let j_star = CausticParam::new(&e, &l)
                .ok()
                .and_then(|p| normalized_jacobian(&e, &p).ok());
            Cell {
                lambda: l,
                omega,
                j_star,
            }
        })
        .collect();

    let mut csv = Csv::new(&["lambda1", "lambda2", "omega1", "omega2", "j_star"]);
    csv.meta("axes", nums(e.semiaxes()))
        .meta("sigma", &args.sigma)
        .meta("res", res)
        .meta("tol", num(args.tol));
    let blank = String::new;
    let title = format!("(1 - exp(-|J|))^(1/4) on {}", args.sigma);
    let mut plot = Plot::new(&title, s1, s2, "lambda_1", "lambda_2");
    let (h1, h2) = ((s1.1 - s1.0) / res as f64, (s2.1 - s2.0) / res as f64);
    for c in &cells {
        let (w1, w2) = c.omega.as_ref().map_or((blank(), blank()), |w| (num(w[0]), num(w[1])));
        csv.row(vec![
            num(c.lambda[0]),
            num(c.lambda[1]),
            w1,
            w2,
            c.j_star.map_or_else(blank, num),
        ]);
        if let Some(j) = c.j_star {
            let lo = [c.lambda[0] - h1 / 2.0, c.lambda[1] - h2 / 2.0];
            plot.cell(lo, [lo[0] + h1, lo[1] + h2], j);
        }
    }
    let sink = args.common.sink();
    sink.emit("csv", &csv.render(), true)?;
    sink.emit("svg", &plot.render(), false)?;
    Ok(())
}
