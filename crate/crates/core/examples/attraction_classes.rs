//! Attraction classes of constructed CDFs under the median loss, with the
//! normalizing sequence each class prescribes.

use uminimizer::asymptotics::{classify, find_m, normalizing_sequence, AnalysisSettings};
use uminimizer::population::{builtin, piecewise_cdf, smirnov_cdf, Interp, InterpSpec, SmirnovClamp};
use uminimizer::problem::loss_catalog;
use uminimizer::{Distribution, PopulationProblem};

/// `F − 1/2 = −al·|t|^pl` left of 0 and `ar·t^pr` right of it, on `[−1, 1]`.
fn two_sided(al: f64, pl: f64, ar: f64, pr: f64) -> Distribution {
    piecewise_cdf(
        &[[-2.0, 0.0], [-1.0, 0.5 - al], [0.0, 0.5], [1.0, 0.5 + ar], [2.0, 1.0]],
        InterpSpec::Each(vec![Interp::Linear, Interp::Rpower(pl), Interp::Power(pr), Interp::Linear]),
    )
    .unwrap()
}

fn main() {
    let loss = loss_catalog("check", &[0.5]).unwrap();
    let s = AnalysisSettings::default();
    let plateau = piecewise_cdf(&[[-3.0, 0.0], [-1.0, 0.5], [2.0, 0.5], [4.0, 1.0]], InterpSpec::One(Interp::Linear)).unwrap();
    let cases: Vec<(&str, Distribution, Option<f64>)> = vec![
        ("normal", builtin("normal", &[0.0, 1.0]).unwrap(), None),
        ("t^3 right, -sqrt|t| left", two_sided(0.4, 0.5, 0.4, 3.0), None),
        ("sqrt t right, -|t|^3 left", two_sided(0.4, 3.0, 0.4, 0.5), None),
        ("t^2 both sides, weights 0.2/0.4", two_sided(0.2, 2.0, 0.4, 2.0), None),
        ("log-square", smirnov_cdf(0.05, SmirnovClamp::Linear).unwrap(), None),
        ("median set [-1, 2], m = 0", plateau, Some(0.0)),
    ];
    println!("{:<34} {:<13} {:>7} {:>7}   a_n at n = 1e2, 1e4, 1e6", "F", "class", "alpha", "c");
    for (name, r, m) in cases {
        let prob = PopulationProblem::univariate(r);
        let m = m.unwrap_or_else(|| find_m(&prob, &loss).unwrap().0);
        let class = classify(&prob, &loss, m, &s).unwrap().class;
        let a: Vec<String> = [1e2, 1e4, 1e6]
            .iter()
            .map(|&n| format!("{:.3e}", normalizing_sequence(&prob, &loss, m, &class, n).unwrap()))
            .collect();
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
        let c = match (class.c1, class.c2) {
            (Some(c1), Some(c2)) => format!("{c1}/{c2}"),
            _ => fmt(class.c),
        };
        println!("{name:<34} {:<13} {:>7} {c:>7}   {}", format!("{:?}", class.tag), fmt(class.alpha), a.join(", "));
    }
}
