//! Location estimation with psi = Phi - 1/2: the analysed limit law against
//! a simulated one.

use uminimizer::config::ProblemConfig;
use uminimizer::montecarlo::{run, SimConfig};

fn main() {
    let problem: ProblemConfig =
        serde_json::from_str(r#"{"loss": {"id": "sigmoid_normal"}, "distribution": {"family": "normal", "params": [1.5, 1]}}"#)
            .unwrap();
    let mut cfg = SimConfig::new(problem, 200, 3000);
    cfg.seed = 42;
    let res = run(&cfg).unwrap();
    let report = res.report.as_ref().unwrap();
    println!("m = {:.6}, zeta = {:.6}, V'(m) = {:.6}", report.m, report.zeta.value, report.dplus_v.unwrap());
    println!("limit variance {:.6} (pi/3 = {:.6})", report.limit_variance.unwrap(), std::f64::consts::FRAC_PI_3);
    println!("KS distance of {} replications at n = {}: {:.4}", res.reps, res.n, res.ks);
    let q = [0.05, 0.25, 0.5, 0.75, 0.95];
    let emp: Vec<String> = q.iter().map(|&u| format!("{:.3}", res.ecdf.sorted[(u * res.ecdf.sorted.len() as f64) as usize])).collect();
    let lim: Vec<String> = q.iter().map(|&u| format!("{:.3}", res.law.quantile(u))).collect();
    println!("quantiles {q:?}\n  simulated {}\n  limit     {}", emp.join(" "), lim.join(" "));
}
