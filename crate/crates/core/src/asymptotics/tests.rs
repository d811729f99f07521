use super::*;
use crate::numeric::FRAC_1_SQRT_2PI;
use crate::population::{builtin, piecewise_cdf, smirnov_cdf, Interp, InterpSpec, SmirnovClamp};
use crate::problem::{kernel_catalog, loss_catalog};

fn check(a: f64) -> ConvexLoss {
    loss_catalog("check", &[a]).unwrap()
}

fn uni(r: Distribution) -> PopulationProblem {
    PopulationProblem::univariate(r)
}

fn s() -> AnalysisSettings {
    AnalysisSettings::default()
}

/// `F − 1/2 = −al·|t|^pl` on `[−1, 0]` and `ar·t^pr` on `[0, 1]`, linear tails.
fn two_sided(al: f64, pl: f64, ar: f64, pr: f64) -> Distribution {
    piecewise_cdf(
        &[[-2.0, 0.0], [-1.0, 0.5 - al], [0.0, 0.5], [1.0, 0.5 + ar], [2.0, 1.0]],
        InterpSpec::Each(vec![Interp::Linear, Interp::Rpower(pl), Interp::Power(pr), Interp::Linear]),
    )
    .unwrap()
}

fn plateau() -> Distribution {
    piecewise_cdf(&[[-3.0, 0.0], [-1.0, 0.5], [2.0, 0.5], [4.0, 1.0]], InterpSpec::One(Interp::Linear)).unwrap()
}

#[test]
fn v_examples() {
    let p = uni(builtin("uniform", &[0.0, 1.0]).unwrap());
    assert_eq!(population_v(&p, &check(0.3), 0.3).unwrap(), 0.0);
    let p = uni(builtin("normal", &[5.0, 1.0]).unwrap());
    assert_eq!(population_v(&p, &loss_catalog("square", &[]).unwrap(), 7.0).unwrap(), 4.0);
    let p = uni(smirnov_cdf(0.1, SmirnovClamp::Linear).unwrap());
    let v = population_v(&p, &check(0.5), 0.01).unwrap();
    assert!((v - 0.01 * 0.01f64.ln().powi(2)).abs() < 1e-16);
}

#[test]
fn quadrature_matches_closed_forms() {
    // sigmoid_normal against a normal law has a closed form; against a
    // Cauchy law it goes through quadrature. Compare the quadrature path on
    // the normal law with the closed form.
    let loss = loss_catalog("sigmoid_normal", &[]).unwrap();
    let r = builtin("normal", &[0.3, 1.5]).unwrap();
    let p = uni(r.clone());
    for t in [-2.0, -0.1, 0.3, 1.7] {
        let closed = population_v(&p, &loss, t).unwrap();
        let quad = expect_against(&r, |x| loss.psi_plus(t - x), &[t], &QuadOptions::default(), "t").unwrap();
        assert!((closed - quad).abs() < 1e-10, "t={t}: {closed} vs {quad}");
    }
    // three_step: V(t) = a + (b − a)F(t) + (g − b)F(t − r)
    let ts = loss_catalog("three_step", &[-1.0, 0.5, 2.0, 0.7]).unwrap();
    let r = builtin("exponential", &[1.3]).unwrap();
    let p = uni(r.clone());
    for t in [0.1, 0.5, 1.0, 3.0] {
        let want = -1.0 + 1.5 * r.cdf(t) + 1.5 * r.cdf(t - 0.7);
        assert!((population_v(&p, &ts, t).unwrap() - want).abs() < 1e-15);
    }
}

#[test]
fn m_examples() {
    let (m, u) = find_m(&uni(builtin("normal", &[0.0, 1.0]).unwrap()), &check(0.5)).unwrap();
    assert_eq!(m, 0.0);
    assert!(u);
    let (m, u) = find_m(&uni(builtin("exponential", &[1.0]).unwrap()), &check(0.5)).unwrap();
    assert!((m - std::f64::consts::LN_2).abs() < 1e-15);
    assert!(u);
    let (m, _) = find_m(&uni(builtin("normal", &[2.5, 1.0]).unwrap()), &loss_catalog("square", &[]).unwrap()).unwrap();
    assert_eq!(m, 2.5);
    let (m, u) = find_m(&uni(plateau()), &check(0.5)).unwrap();
    assert_eq!(m, -1.0);
    assert!(!u);
    let bad = find_m(&uni(builtin("normal", &[0.0, 1.0]).unwrap()), &loss_catalog("sigmoid_normal", &[]).unwrap());
    assert!(bad.is_ok());
}

#[test]
fn zeta_examples() {
    for (r, a) in [(builtin("normal", &[0.0, 1.0]).unwrap(), 0.3), (builtin("cauchy", &[1.0, 2.0]).unwrap(), 0.5)] {
        let p = uni(r);
        let (m, _) = find_m(&p, &check(a)).unwrap();
        let z = zeta(&p, &check(a), m, &s()).unwrap();
        assert!((z.value - a * (1.0 - a)).abs() < 1e-15);
    }
    let p = uni(builtin("uniform", &[0.0, 3.0]).unwrap());
    let sq = loss_catalog("square", &[]).unwrap();
    let z = zeta(&p, &sq, 1.5, &s()).unwrap();
    assert!((z.value - 4.0 * 0.75).abs() < 1e-14);
    let p = uni(builtin("cauchy", &[0.0, 1.0]).unwrap());
    assert!(matches!(zeta(&p, &sq, 0.0, &s()), Err(AnalysisError::Integrability { .. })));
}

#[test]
fn zeta_walsh_routes_agree() {
    let raw = RawModel::Iid(builtin("normal", &[0.0, 1.0]).unwrap());
    let walsh = kernel_catalog("walsh", &[], None).unwrap();
    let p = PopulationProblem::from_raw(raw.clone(), walsh.clone()).unwrap();
    let z = zeta(&p, &check(0.5), 0.0, &s()).unwrap();
    assert_eq!(z.method, ZetaMethod::Quadrature);
    assert!((z.value - 1.0 / 12.0).abs() < 1e-9, "{}", z.value);
    let mc = zeta_nested(&raw, &walsh, &check(0.5), 0.0, 1_000_000, 11).unwrap();
    let se = mc.std_error.unwrap();
    assert!(se > 0.0 && se < 3e-3, "{} ± {se}", mc.value);
    assert!((mc.value - 1.0 / 12.0).abs() < 4.0 * se, "{} ± {se}", mc.value);
}

#[test]
fn nested_zeta_is_deterministic() {
    let raw = RawModel::Iid(builtin("exponential", &[1.0]).unwrap());
    let k = kernel_catalog("abs_diff", &[], None).unwrap();
    let a = zeta_nested(&raw, &k, &check(0.5), 0.8, 10_000, 5).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| zeta_nested(&raw, &k, &check(0.5), 0.8, 10_000, 5).unwrap());
    assert_eq!(a, b);
}

#[test]
fn derivative_examples() {
    let p = uni(builtin("normal", &[0.0, 1.0]).unwrap());
    let d = one_sided_derivatives(&p, &check(0.5), 0.0, &s()).unwrap();
    assert!((d.dminus - FRAC_1_SQRT_2PI).abs() < 1e-9 && (d.dplus - FRAC_1_SQRT_2PI).abs() < 1e-9);
    let p = uni(smirnov_cdf(0.05, SmirnovClamp::Linear).unwrap());
    let d = one_sided_derivatives(&p, &check(0.5), 0.0, &s()).unwrap();
    assert_eq!((d.dminus, d.dplus), (f64::INFINITY, f64::INFINITY));
    let p = uni(builtin("cauchy", &[0.0, 1.0]).unwrap());
    let sq = loss_catalog("square", &[]).unwrap();
    let p2 = uni(builtin("exponential", &[2.0]).unwrap());
    let d = one_sided_derivatives(&p2, &sq, 0.5, &s()).unwrap();
    assert!((d.dminus - 2.0).abs() < 1e-9 && (d.dplus - 2.0).abs() < 1e-9);
    assert!(one_sided_derivatives(&p, &sq, 0.0, &s()).is_err());
    let p = uni(two_sided(0.4, 2.0, 0.4, 1.0));
    let d = one_sided_derivatives(&p, &check(0.5), 0.0, &s()).unwrap();
    assert_eq!(d.dminus, 0.0);
    assert!((d.dplus - 0.4).abs() < 1e-12);
}

#[test]
fn delta_n_examples() {
    let p = uni(builtin("normal", &[0.0, 1.0]).unwrap());
    let sq = loss_catalog("square", &[]).unwrap();
    for n in [10.0, 400.0, 1e6] {
        assert_eq!(delta_n(&p, &sq, 0.0, 1.0 / f64::sqrt(n), n, 0.0).unwrap(), 0.0);
        assert!((delta_n(&p, &sq, 0.0, 1.0 / f64::sqrt(n), n, 1.0).unwrap() - 2.0).abs() < 1e-12);
    }
    // Log-square CDF: δ_n(x) = x·(ln(a_n x)/ln √n)², tending to x only
    // logarithmically.
    let p = uni(smirnov_cdf(0.05, SmirnovClamp::Linear).unwrap());
    let a = |n: f64| n.sqrt().recip() * n.sqrt().ln().powi(-2);
    let mut prev = f64::INFINITY;
    for n in [1e6, 1e20, 1e60, 1e200] {
        let d = delta_n(&p, &check(0.5), 0.0, a(n), n, 1.0).unwrap();
        let exact = ((a(n)).ln() / n.sqrt().ln()).powi(2);
        assert!((d - exact).abs() < 1e-9 * exact, "n={n}: {d} vs {exact}");
        assert!(d < prev && d > 1.0);
        prev = d;
    }
    assert!((prev - 1.0) < 0.1);
}

#[test]
fn delta_n_sign_and_monotone() {
    let cases: Vec<(Distribution, ConvexLoss)> = vec![
        (builtin("normal", &[0.0, 1.0]).unwrap(), check(0.5)),
        (builtin("exponential", &[1.0]).unwrap(), check(0.3)),
        (builtin("cauchy", &[0.0, 1.0]).unwrap(), loss_catalog("sigmoid_cauchy", &[]).unwrap()),
        (builtin("normal", &[1.0, 2.0]).unwrap(), loss_catalog("lp", &[1.5]).unwrap()),
        (two_sided(0.4, 0.5, 0.4, 3.0), check(0.5)),
    ];
    for (r, loss) in cases {
        let p = uni(r);
        let (m, _) = find_m(&p, &loss).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in -40..=40 {
            let x = i as f64 / 10.0;
            let d = delta_n(&p, &loss, m, 0.01, 1e4, x).unwrap();
            assert!(d >= prev - 1e-9, "{} at {x}", loss.id());
            if x < 0.0 {
                assert!(d <= 1e-9);
            }
            if x > 0.0 {
                assert!(d >= -1e-9);
            }
            prev = d;
        }
    }
}

#[test]
fn jump_split_adds_up() {
    let loss = loss_catalog("three_step", &[-1.0, 0.5, 2.0, 0.5]).unwrap();
    let p = uni(builtin("normal", &[0.0, 1.0]).unwrap());
    let (m, _) = find_m(&p, &loss).unwrap();
    let (j, c) = delta_n_split(&p, &loss, m, 0.05, 400.0, 0.7).unwrap();
    let total = delta_n(&p, &loss, m, 0.05, 400.0, 0.7).unwrap();
    assert!((j + c - total).abs() < 1e-12);
    let want = 1.5 * 20.0 * (p.r.cdf(m + 0.035) - p.r.cdf(m));
    assert!((j - want).abs() < 1e-12);
}

#[test]
fn second_moments_agree_for_continuous_laws() {
    let losses = ["check", "abs", "square", "lp", "sigmoid_normal", "sigmoid_cauchy", "three_step"];
    for id in losses {
        let params: &[f64] = match id {
            "check" => &[0.3],
            "lp" => &[1.5],
            "three_step" => &[-1.0, 0.5, 2.0, 0.7],
            _ => &[],
        };
        let loss = loss_catalog(id, params).unwrap();
        let p = uni(builtin("normal", &[0.2, 1.1]).unwrap());
        let (m, _) = find_m(&p, &loss).unwrap();
        let (a, b) = second_moments(&p, &loss, m).unwrap();
        assert!((a - b).abs() < 1e-8, "{id}: {a} vs {b}");
    }
}

#[test]
fn classify_examples() {
    let c = classify(&uni(builtin("normal", &[0.0, 1.0]).unwrap()), &check(0.5), 0.0, &s()).unwrap().class;
    assert_eq!(c.tag, ClassTag::SmoothNormal);
    assert_eq!((c.alpha, c.c, c.d), (Some(1.0), Some(1.0), Some(1.0)));

    let c = classify(&uni(two_sided(0.4, 0.5, 0.4, 3.0)), &check(0.5), 0.0, &s()).unwrap().class;
    assert_eq!(c.tag, ClassTag::Class1);
    assert!((c.alpha.unwrap() - 3.0).abs() < 1e-6);

    let c = classify(&uni(two_sided(0.4, 3.0, 0.4, 0.5)), &check(0.5), 0.0, &s()).unwrap().class;
    assert_eq!(c.tag, ClassTag::Class2);
    assert!((c.alpha.unwrap() - 3.0).abs() < 1e-6);

    let c = classify(&uni(two_sided(0.2, 2.0, 0.4, 2.0)), &check(0.5), 0.0, &s()).unwrap().class;
    assert_eq!(c.tag, ClassTag::Class3);
    assert!((c.alpha.unwrap() - 2.0).abs() < 1e-6);
    assert!((c.c.unwrap() - 0.5).abs() < 1e-9 && c.d == Some(1.0));

    let c = classify(&uni(plateau()), &check(0.5), 0.0, &s()).unwrap().class;
    assert_eq!(c.tag, ClassTag::Class4);
    assert_eq!((c.c1, c.c2), (Some(1.0), Some(2.0)));

    let c = classify(&uni(smirnov_cdf(0.05, SmirnovClamp::Linear).unwrap()), &check(0.5), 0.0, &s()).unwrap().class;
    assert_eq!(c.tag, ClassTag::Class3);
    assert!((c.alpha.unwrap() - 1.0).abs() < 0.02, "{:?}", c.alpha);
    assert!((c.c.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn normalizing_sequences() {
    // V(t) = sign(t)|t|^β near 0 after scaling: a_n = (0.4^{-1} n^{-1/2})^{1/β}
    for beta in [0.5, 2.0] {
        let p = uni(two_sided(0.4, beta, 0.4, beta));
        let class = classify(&p, &check(0.5), 0.0, &s()).unwrap().class;
        assert_eq!(class.tag, ClassTag::Class3);
        let mut prev = f64::INFINITY;
        for k in 4..12 {
            let n = 10f64.powi(k);
            let a = normalizing_sequence(&p, &check(0.5), 0.0, &class, n).unwrap();
            let want = (n.sqrt().recip() / 0.4).powf(1.0 / beta);
            assert!((a / want - 1.0).abs() < 1e-12, "beta={beta} n={n}: {a} vs {want}");
            assert!(a < prev);
            prev = a;
        }
    }
    let p = uni(builtin("normal", &[0.0, 1.0]).unwrap());
    let class = classify(&p, &check(0.5), 0.0, &s()).unwrap().class;
    assert_eq!(normalizing_sequence(&p, &check(0.5), 0.0, &class, 400.0).unwrap(), 0.05);
    // Class 4 on a literal plateau: a_n* = (3 + o(1))/3 decreasing to 1
    let p = uni(plateau());
    let class = classify(&p, &check(0.5), 0.0, &s()).unwrap().class;
    let mut prev = f64::INFINITY;
    for k in 2..10 {
        let a = normalizing_sequence(&p, &check(0.5), 0.0, &class, 10f64.powi(k)).unwrap();
        assert!(a > 1.0 && a < prev);
        prev = a;
    }
    assert!(prev - 1.0 < 1e-3);
}

#[test]
fn smirnov_normalization_approaches_explicit_rule() {
    let p = uni(smirnov_cdf(0.05, SmirnovClamp::Linear).unwrap());
    let class = classify(&p, &check(0.5), 0.0, &s()).unwrap().class;
    let explicit = |n: f64| n.sqrt().recip() * n.sqrt().ln().powi(-2);
    let mut prev = 0.0;
    for n in [1e4, 1e8, 1e16, 1e32, 1e64] {
        let a = normalizing_sequence(&p, &check(0.5), 0.0, &class, n).unwrap();
        // V(a) = 1/√n exactly at the float level
        assert!((population_v(&p, &check(0.5), a).unwrap() * n.sqrt() - 1.0).abs() < 1e-9);
        let ratio = a / explicit(n);
        assert!(ratio > prev && ratio < 1.0, "n={n}: ratio {ratio}");
        prev = ratio;
    }
}

#[test]
fn emitted_laws_satisfy_functional_equation() {
    let grid: Vec<f64> = (0..100).map(|i| -5.0 + 10.0 * i as f64 / 99.0).collect();
    let cases = vec![
        builtin("normal", &[0.0, 1.0]).unwrap(),
        two_sided(0.4, 0.5, 0.4, 3.0),
        two_sided(0.4, 3.0, 0.4, 0.5),
        two_sided(0.2, 2.0, 0.4, 2.0),
        plateau(),
    ];
    for r in cases {
        let p = uni(r);
        let class = classify(&p, &check(0.5), 0.0, &s()).unwrap().class;
        let law = limit_law(&class, 0.5).unwrap();
        for k in 2..=4 {
            let res = functional_equation_residual(&law, k, law.alpha_k(k), &grid);
            assert!(res < 1e-9, "{:?} k={k}: {res}", class.tag);
        }
    }
}

#[test]
fn analyze_report_roundtrip() {
    let p = uni(builtin("normal", &[0.0, 1.0]).unwrap());
    let r = analyze(&p, &check(0.5), None, &s()).unwrap();
    assert_eq!(r.attraction.tag, ClassTag::SmoothNormal);
    assert!((r.limit_variance.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
    assert_eq!(r.sigma2, r.zeta.value);
    assert_eq!(r.a_n.len(), 3);
    let json = serde_json::to_string(&r).unwrap();
    let back: AsymptoticReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
    assert_eq!(r.v_trace().len(), 2 * r.diagnostics.t.len());

    let p = uni(smirnov_cdf(0.05, SmirnovClamp::Linear).unwrap());
    let r = analyze(&p, &check(0.5), None, &s()).unwrap();
    assert_eq!(r.attraction.tag, ClassTag::Class3);
    assert_eq!(r.a_n_rule.as_deref(), Some("V^-1(1/sqrt(n)) - m"));
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"dplus_v\":\"inf\""));
    let back: AsymptoticReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);

    let walsh = PopulationProblem::from_raw(
        RawModel::Iid(builtin("normal", &[0.0, 1.0]).unwrap()),
        kernel_catalog("walsh", &[], None).unwrap(),
    )
    .unwrap();
    let r = analyze(&walsh, &check(0.5), None, &s()).unwrap();
    assert!((r.sigma2 - 4.0 / 12.0).abs() < 1e-9);
    assert!((r.limit_variance.unwrap() - std::f64::consts::FRAC_PI_3).abs() < 1e-7);
}

#[test]
fn degenerate_and_missing_inputs() {
    let p = PopulationProblem { r: builtin("normal", &[0.0, 1.0]).unwrap(), l: 2, raw: None };
    assert!(matches!(analyze(&p, &check(0.5), None, &s()), Err(AnalysisError::MissingRaw(_))));
}
