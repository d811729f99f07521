//! Library results against independent computations written here.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use common::{check, random_data, random_kernel, random_loss, rng};
use rand::Rng;
use uminimizer::asymptotics::{analyze, find_m, one_sided_derivatives, population_v, zeta, AnalysisSettings};
use uminimizer::estimator::{argmin_interval, kernel_sample, u_value, Policy};
use uminimizer::population::{builtin, smirnov_cdf, CustomDist, SmirnovClamp};
use uminimizer::problem::{kernel_catalog, loss_catalog, LOSS_IDS};
use uminimizer::{ClassTag, Data, Distribution, PopulationProblem, RawModel};

fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn walsh_zeta_matches_direct_integral() {
    // E[ψ(−(x+X₂)/2)] = Φ(−x) − 1/2, so ζ = ∫ (Φ(−x) − 1/2)² φ(x) dx.
    let direct = simpson(|x| (phi(-x) - 0.5).powi(2) * density(x), -12.0, 12.0, 20_000);
    assert!((direct - 1.0 / 12.0).abs() < 1e-12);
    let prob = PopulationProblem::from_raw(
        RawModel::Iid(builtin("normal", &[0.0, 1.0]).unwrap()),
        kernel_catalog("walsh", &[], None).unwrap(),
    )
    .unwrap();
    let z = zeta(&prob, &check(0.5), 0.0, &AnalysisSettings::default()).unwrap();
    assert!((z.value - direct).abs() < 1e-9);
}

#[test]
fn sigmoid_location_problem() {
    let mu = 1.3;
    let prob = PopulationProblem::univariate(builtin("normal", &[mu, 1.0]).unwrap());
    let loss = loss_catalog("sigmoid_normal", &[]).unwrap();
    let (m, _) = find_m(&prob, &loss).unwrap();
    assert!((m - mu).abs() < 1e-12);
    let slope = simpson(|x| density(mu - x) * density(x - mu), mu - 12.0, mu + 12.0, 20_000);
    let zeta_direct = simpson(|x| (phi(m - x) - 0.5).powi(2) * density(x - mu), mu - 12.0, mu + 12.0, 20_000);
    let r = analyze(&prob, &loss, None, &AnalysisSettings::default()).unwrap();
    assert_eq!(r.attraction.tag, ClassTag::SmoothNormal);
    assert!((r.dplus_v.unwrap() - slope).abs() < 1e-8);
    assert!((r.zeta.value - zeta_direct).abs() < 1e-9);
    assert!((r.limit_variance.unwrap() - PI / 3.0).abs() < 1e-6);
}

#[test]
fn median_variance_and_bickel_lehmann_center() {
    let prob = PopulationProblem::univariate(builtin("normal", &[0.0, 1.0]).unwrap());
    let r = analyze(&prob, &check(0.5), None, &AnalysisSettings::default()).unwrap();
    assert!((r.limit_variance.unwrap() - PI / 2.0).abs() < 1e-7);
    // |X₁ − X₂| for normal data is √2 |Z|, with median √2 Φ⁻¹(3/4). Its law
    // has no catalog entry, so R is supplied as a custom CDF.
    let cdf = |x: f64| if x <= 0.0 { 0.0 } else { 2.0 * phi(x / SQRT_2) - 1.0 };
    let r = Distribution::Custom(CustomDist { name: "abs_diff".into(), cdf: Arc::new(cdf), pdf: None, support: (0.0, f64::INFINITY) });
    let (m, unique) = find_m(&PopulationProblem::univariate(r), &check(0.5)).unwrap();
    assert!((m - SQRT_2 * 0.674_489_750_196_081_7).abs() < 1e-12);
    assert!(unique);
}

#[test]
fn log_square_v_and_derivative() {
    let prob = PopulationProblem::univariate(smirnov_cdf(0.05, SmirnovClamp::Linear).unwrap());
    for t in [1e-2, 1e-4, -3e-3] {
        let v = population_v(&prob, &check(0.5), t).unwrap();
        let want = t.signum() * t.abs() * t.abs().ln().powi(2);
        assert!((v - want).abs() < 1e-15, "{t}");
    }
    let d = one_sided_derivatives(&prob, &check(0.5), 0.0, &AnalysisSettings::default()).unwrap();
    assert!(d.dplus.is_infinite() && d.dminus.is_infinite());
}

/// The minimum of `U_n` over all kernel values and midpoints between them is
/// attained inside the reported interval.
#[test]
fn argmin_against_brute_force_scan() {
    let mut r = rng(7);
    for i in 0..300 {
        let l = 1 + i % 2;
        let n = r.random_range(l..=12);
        let data: Data = random_data(&mut r, n);
        let kernel = random_kernel(&mut r, l);
        let loss = random_loss(&mut r, LOSS_IDS[i % LOSS_IDS.len()]);
        let ks = kernel_sample(&data, &kernel).unwrap();
        let iv = argmin_interval(&ks, &loss, Policy::Midpoint).unwrap();
        let v = ks.values();
        let mut cands: Vec<f64> = v.to_vec();
        cands.extend(v.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        let (lo, hi) = (v[0], v[v.len() - 1]);
        cands.extend((0..=1000).map(|j| lo - 1.0 + (hi - lo + 2.0) * j as f64 / 1000.0));
        for c in cands {
            let du = u_value(&ks, &loss, c, iv.selected);
            assert!(du >= -1e-9, "{} on {:?}: U({c}) − U(selected) = {du}", loss.id(), v);
        }
    }
}

#[test]
fn quantile_interval_examples() {
    let ks = |v: &[f64]| kernel_sample(&Data::univariate(v.to_vec()), &kernel_catalog("identity", &[], None).unwrap()).unwrap();
    let iv = argmin_interval(&ks(&[1.0, 2.0, 3.0]), &check(0.5), Policy::Midpoint).unwrap();
    assert_eq!((iv.smallest, iv.largest), (2.0, 2.0));
    let iv = argmin_interval(&ks(&[4.0, 1.0, 3.0, 2.0]), &check(0.5), Policy::Midpoint).unwrap();
    assert_eq!((iv.smallest, iv.largest, iv.selected), (2.0, 3.0, 2.5));
    let walsh = kernel_sample(&Data::univariate(vec![0.0, 2.0, 4.0]), &kernel_catalog("walsh", &[], None).unwrap()).unwrap();
    assert_eq!(walsh.values(), &[1.0, 2.0, 3.0]);
    assert_eq!(argmin_interval(&walsh, &check(0.5), Policy::Midpoint).unwrap().selected, 2.0);
}
