//! A three-step score psi: its jump at zero, the split of delta_n into the
//! jump and continuous parts, and the three regimes of sqrt(n) a_n.

use uminimizer::asymptotics::{delta_n_split, find_m};
use uminimizer::population::builtin;
use uminimizer::problem::{jump_decompose, loss_catalog};
use uminimizer::PopulationProblem;

fn main() {
    // psi = -1 below 0, 0.5 on [0, 0.7), 2 from 0.7 on
    let loss = loss_catalog("three_step", &[-1.0, 0.5, 2.0, 0.7]).unwrap();
    let jd = jump_decompose(&loss);
    println!("kappa+ = {}, kappa- = {}, kappa = {}", jd.kappa_plus, jd.kappa_minus, jd.kappa);

    let r = builtin("normal", &[0.0, 1.0]).unwrap();
    let prob = PopulationProblem::univariate(r.clone());
    let (m, _) = find_m(&prob, &loss).unwrap();
    let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // V = -1 + 1.5 F(t) + 1.5 F(t - 0.7); the continuous part is 1.5 F(t - 0.7).
    let slope = jd.kappa * f(m) + 1.5 * f(m - 0.7);
    println!("m = {m:.6}, V'(m) = {slope:.6}\n");

    let x = 1.0;
    for (regime, rule) in [
        ("sqrt(n) a_n -> 0", (|n: f64| n.powf(-0.75)) as fn(f64) -> f64),
        ("sqrt(n) a_n -> 1", |n: f64| n.powf(-0.5)),
        ("sqrt(n) a_n -> inf", |n: f64| n.powf(-0.25)),
    ] {
        println!("{regime}");
        for n in [1e2, 1e4, 1e6, 1e8] {
            let (jump, cont) = delta_n_split(&prob, &loss, m, rule(n), n, x).unwrap();
            println!("  n = {n:.0e}: delta_n(1) = {:>10.5} = jump {jump:>10.5} + continuous {cont:>10.5}", jump + cont);
        }
    }
    println!("\nlimit for sqrt(n) a_n -> 1: delta(1) = V'(m) = {slope:.5}");
}
