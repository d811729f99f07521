//! Seeded Monte Carlo check of the median's limit law, N(0, pi/2), and of
//! the agreement between the three selection policies.

use uminimizer::config::ProblemConfig;
use uminimizer::montecarlo::{run, SimConfig};

fn main() {
    let problem: ProblemConfig =
        serde_json::from_str(r#"{"loss": {"id": "check", "params": [0.5]}, "distribution": {"family": "normal", "params": [0, 1]}}"#)
            .unwrap();
    for n in [50, 400] {
        let mut cfg = SimConfig::new(problem.clone(), n, 4000);
        cfg.all_policies = true;
        let res = run(&cfg).unwrap();
        let law = res.law;
        println!(
            "n = {n:>3}: a_n = {:.4}, KS = {:.4}, CvM = {:.5}, policy agreement = {:.4}, limit variance = {:.4}",
            res.a_n,
            res.ks,
            res.cvm,
            res.policy_agreement.unwrap(),
            law.normal_variance().unwrap()
        );
        for p in res.per_policy.unwrap() {
            println!("    {:?}: KS {:.4}", p.policy, p.ks);
        }
    }
}
