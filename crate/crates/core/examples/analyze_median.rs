//! Population analysis of three location problems: m, zeta, the one-sided
//! slopes of V, the attraction class and the limit variance.

use uminimizer::asymptotics::{analyze, AnalysisSettings};
use uminimizer::population::{builtin, RawModel};
use uminimizer::problem::{kernel_catalog, loss_catalog};
use uminimizer::PopulationProblem;

fn main() {
    let normal = builtin("normal", &[0.0, 1.0]).unwrap();
    let problems = [
        ("median, N(0,1)", PopulationProblem::univariate(normal.clone()), loss_catalog("check", &[0.5]).unwrap()),
        (
            "Hodges-Lehmann, N(0,1)",
            PopulationProblem::from_raw(RawModel::Iid(normal.clone()), kernel_catalog("walsh", &[], None).unwrap()).unwrap(),
            loss_catalog("check", &[0.5]).unwrap(),
        ),
        (
            "sigmoid, N(1,1)",
            PopulationProblem::univariate(builtin("normal", &[1.0, 1.0]).unwrap()),
            loss_catalog("sigmoid_normal", &[]).unwrap(),
        ),
    ];
    let s = AnalysisSettings::default();
    for (name, prob, loss) in problems {
        let r = analyze(&prob, &loss, None, &s).unwrap();
        println!("{name}");
        println!("  m = {:.6} (unique: {})", r.m, r.m_unique);
        println!("  zeta = {:.6} via {:?}, sigma^2 = l^2 zeta = {:.6}", r.zeta.value, r.zeta.method, r.sigma2);
        println!("  V'(m-) = {:.6}, V'(m+) = {:.6}", r.dminus_v.unwrap(), r.dplus_v.unwrap());
        println!("  class {:?}, a_n rule {}", r.attraction.tag, r.a_n_rule.as_deref().unwrap_or("-"));
        println!("  limit variance of sqrt(n)(m_n - m): {:.6}\n", r.limit_variance.unwrap());
    }
}
