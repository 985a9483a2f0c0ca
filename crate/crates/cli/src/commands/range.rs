use clap::Args;
use confocal::bifurcation::{anchors, minimal_frequency, range_boundary, trace_g, CurvePoint};
use confocal::{Error, Sigma};
use serde_json::json;

use crate::output::{document, num, nums, Csv};
use crate::svg::{Plot, PALETTE};
use crate::{ellipsoid, numbers, sigma_of, three_axes, Common, Failure, Numbers};

#[derive(Args)]
pub struct RangeArgs {
    /// Three squared semiaxes.
    #[arg(long, value_parser = numbers)]
    axes: Numbers,
    /// One caustic type; all four when omitted.
    #[arg(long, value_parser = sigma_of)]
    sigma: Option<Sigma>,
    #[command(flatten)]
    common: Common,
}

pub fn range(args: &RangeArgs) -> Result<(), Failure> {
    let e = ellipsoid(&args.axes)?;
    let (a, b, c) = three_axes(&e)?;
    let types = match &args.sigma {
        Some(s) => vec![s.clone()],
        None => vec![Sigma::eh1(), Sigma::h1h1(), Sigma::eh2(), Sigma::h1h2()],
    };
    let an = anchors(a, b, c)?;
    let mut csv = Csv::new(&["sigma", "vertex", "omega1", "omega2"]);
    csv.meta("axes", nums(e.semiaxes()));
    let mut plot = Plot::new(
        &format!("Frequency ranges, (a, b, c) = ({a}, {b}, {c})"),
        (0.0, 0.5),
        (0.0, 0.5),
        "omega_1",
        "omega_2",
    );
    let mut areas = serde_json::Map::new();
    let mut legend = Vec::new();
    for (k, sigma) in types.iter().enumerate() {
        let rb = range_boundary(a, b, c, sigma)?;
        for (v, p) in rb.polyline.iter().enumerate() {
            csv.row(vec![sigma.to_string(), v.to_string(), num(p[0]), num(p[1])]);
        }
        plot.polygon(&rb.polyline, PALETTE[k]);
        areas.insert(sigma.to_string(), json!(rb.area()));
        legend.push((sigma.to_string(), PALETTE[k]));
    }
    plot.segment([0.0, 0.0], [0.5, 0.5], PALETTE[5], 0.6);
    for (name, p) in [
        ("O", an.o),
        ("A", an.a),
        ("B1", an.b1),
        ("B2", an.b2),
        ("C1", an.c1),
        ("C2", an.c2),
        ("D", an.d),
    ] {
        plot.dot(p, PALETTE[5], Some(name));
    }
    plot.legend(&legend.iter().map(|(s, c)| (s.as_str(), *c)).collect::<Vec<_>>());
    let sink = args.common.sink();
    sink.emit("csv", &csv.render(), true)?;
    sink.emit("svg", &plot.render(), false)?;
    sink.emit(
        "json",
        &document("range", json!({ "axes": e.semiaxes(), "anchors": an, "areas": areas })),
        false,
    )?;
    Ok(())
}

#[derive(Clone)]
pub struct Grid(Vec<f64>);

fn grid(s: &str) -> Result<Grid, String> {
    crate::parse::grid(s).map(Grid)
}

#[derive(Args)]
pub struct BifurcateArgs {
    /// Caustic type (or taken from --minimal).
    #[arg(long, value_parser = sigma_of, required_unless_present = "minimal")]
    sigma: Option<Sigma>,
    /// Target frequency, e.g. 3/8,1/4.
    #[arg(long, value_parser = numbers, required_unless_present = "minimal")]
    omega: Option<Numbers>,
    /// Use the minimal periodic frequency of region j = 1..4 instead.
    #[arg(long, conflicts_with_all = ["sigma", "omega"])]
    minimal: Option<usize>,
    /// Grid of b values as start:end:count.
    #[arg(long, value_parser = grid, default_value = "0.02:0.98:25")]
    b: Grid,
    #[command(flatten)]
    common: Common,
}

pub fn bifurcate(args: &BifurcateArgs) -> Result<(), Failure> {
    let (sigma, omega) = match (args.minimal, &args.sigma, &args.omega) {
        (Some(j), _, _) => {
            let (s, w) = minimal_frequency(j)?;
            (s, w.to_vec())
        }
        (None, Some(s), Some(w)) => (s.clone(), w.0.clone()),
        _ => return Err(Failure::Usage("give --sigma and --omega, or --minimal".into())),
    };
    let curve = trace_g(&sigma, &omega, &args.b.0);
    let mut csv = Csv::new(&["b", "c", "full", "status"]);
    csv.meta("sigma", &sigma).meta("omega", nums(&omega)).meta("a", 1);
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for (b, r) in args.b.0.iter().zip(&curve) {
        match r {
            Ok(CurvePoint { b, c, full }) => {
                csv.row(vec![num(*b), num(*c), full.to_string(), "ok".into()]);
                pts.push([*b, *c]);
            }
            Err(Error::EmptySlice) => csv.row(vec![num(*b), String::new(), String::new(), "empty".into()]),
            Err(e) => csv.row(vec![num(*b), String::new(), String::new(), format!("error: {e}")]),
        }
    }
    let shown: Vec<String> = omega.iter().map(|w| format!("{w:.5}")).collect();
    let title = format!("g(b) for {sigma}, omega = ({})", shown.join(", "));
    let mut plot = Plot::new(&title, (0.0, 1.0), (0.0, 1.0), "b", "c");
    plot.segment([0.0, 0.0], [1.0, 1.0], PALETTE[5], 0.8);
    plot.polyline(&pts, PALETTE[0], 1.6);
    for p in &pts {
        plot.dot(*p, PALETTE[0], None);
    }
    let sink = args.common.sink();
    sink.emit("csv", &csv.render(), true)?;
    sink.emit("svg", &plot.render(), false)?;
    Ok(())
}
