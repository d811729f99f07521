//! Shared constructions for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uminimizer::population::{builtin, piecewise_cdf, smirnov_cdf, CustomDist, Interp, InterpSpec, SmirnovClamp};
use uminimizer::problem::{kernel_catalog, loss_catalog};
use uminimizer::{ClassTag, ConvexLoss, Data, Distribution, Kernel, PopulationProblem, RawModel};

pub fn check(a: f64) -> ConvexLoss {
    loss_catalog("check", &[a]).unwrap()
}

/// `F − 1/2 = −al·|t|^pl` on `[−1, 0]` and `ar·t^pr` on `[0, 1]`, shifted by
/// `shift`, with linear tails.
pub fn two_sided(al: f64, pl: f64, ar: f64, pr: f64, shift: f64) -> Distribution {
    let k = |x: f64, f: f64| [x + shift, f];
    piecewise_cdf(
        &[k(-2.0, 0.0), k(-1.0, 0.5 - al), k(0.0, 0.5), k(1.0, 0.5 + ar), k(2.0, 1.0)],
        InterpSpec::Each(vec![Interp::Linear, Interp::Rpower(pl), Interp::Power(pr), Interp::Linear]),
    )
    .unwrap()
}

/// Median set `[-1, 2]`.
pub fn plateau() -> Distribution {
    piecewise_cdf(&[[-3.0, 0.0], [-1.0, 0.5], [2.0, 0.5], [4.0, 1.0]], InterpSpec::One(Interp::Linear)).unwrap()
}

/// Symmetric CDF `1/2 + sign(t) g(|t|)/2` for `|t| ≤ 1`, linear beyond up to `±2`.
pub fn symmetric_custom(name: &str, g: fn(f64) -> f64) -> Distribution {
    let g1 = g(1.0);
    let cdf = move |t: f64| {
        let a = t.abs();
        let h = if a <= 1.0 { 0.5 * g(a) } else { (0.5 * g1 + (0.5 - 0.5 * g1) * (a - 1.0)).min(0.5) };
        if t < 0.0 {
            0.5 - h
        } else {
            0.5 + h
        }
    };
    Distribution::Custom(CustomDist { name: name.into(), cdf: Arc::new(cdf), pdf: None, support: (-2.0, 2.0) })
}

pub struct Expect {
    pub tag: ClassTag,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

impl Expect {
    fn tag(tag: ClassTag) -> Self {
        Expect { tag, alpha: None, c: None, c1: None, c2: None }
    }
    fn power(tag: ClassTag, alpha: f64) -> Self {
        Expect { alpha: Some(alpha), ..Self::tag(tag) }
    }
}

pub struct Case {
    pub name: &'static str,
    pub prob: PopulationProblem,
    pub loss: ConvexLoss,
    pub m: Option<f64>,
    pub expect: Expect,
}

fn uni(r: Distribution) -> PopulationProblem {
    PopulationProblem::univariate(r)
}

/// Constructions with a known attraction class.
pub fn known_cases() -> Vec<Case> {
    let walsh = PopulationProblem::from_raw(
        RawModel::Iid(builtin("normal", &[0.0, 1.0]).unwrap()),
        kernel_catalog("walsh", &[], None).unwrap(),
    )
    .unwrap();
    vec![
        Case {
            name: "median of N(0,1)",
            prob: uni(builtin("normal", &[0.0, 1.0]).unwrap()),
            loss: check(0.5),
            m: None,
            expect: Expect::tag(ClassTag::SmoothNormal),
        },
        Case {
            name: "0.3-quantile of Exp(1)",
            prob: uni(builtin("exponential", &[1.0]).unwrap()),
            loss: check(0.3),
            m: None,
            expect: Expect::tag(ClassTag::SmoothNormal),
        },
        Case {
            name: "Hodges-Lehmann, normal data",
            prob: walsh,
            loss: check(0.5),
            m: None,
            expect: Expect::tag(ClassTag::SmoothNormal),
        },
        Case {
            name: "t^3 right, -sqrt|t| left, shifted to 2.5",
            prob: uni(two_sided(0.4, 0.5, 0.4, 3.0, 2.5)),
            loss: check(0.5),
            m: None,
            expect: Expect::power(ClassTag::Class1, 3.0),
        },
        Case {
            name: "t^2 right, -|t| left",
            prob: uni(two_sided(0.4, 1.0, 0.3, 2.0, 0.0)),
            loss: check(0.5),
            m: None,
            expect: Expect::power(ClassTag::Class1, 2.0),
        },
        Case {
            name: "mirrored: sqrt t right, -|t|^3 left",
            prob: uni(two_sided(0.4, 3.0, 0.4, 0.5, 0.0)),
            loss: check(0.5),
            m: None,
            expect: Expect::power(ClassTag::Class2, 3.0),
        },
        Case {
            name: "mirrored: t right, -t^2 left",
            prob: uni(two_sided(0.4, 2.0, 0.3, 1.0, -1.0)),
            loss: check(0.5),
            m: None,
            expect: Expect::power(ClassTag::Class2, 2.0),
        },
        Case {
            name: "two-sided t^2 with weights 0.4/0.2",
            prob: uni(two_sided(0.2, 2.0, 0.4, 2.0, 0.0)),
            loss: check(0.5),
            m: None,
            expect: Expect { c: Some(0.5), ..Expect::power(ClassTag::Class3, 2.0) },
        },
        Case {
            name: "two-sided sqrt",
            prob: uni(two_sided(0.3, 0.5, 0.3, 0.5, 0.0)),
            loss: check(0.5),
            m: None,
            expect: Expect { c: Some(1.0), ..Expect::power(ClassTag::Class3, 0.5) },
        },
        Case {
            name: "log-square CDF",
            prob: uni(smirnov_cdf(0.05, SmirnovClamp::Linear).unwrap()),
            loss: check(0.5),
            m: None,
            expect: Expect { c: Some(1.0), ..Expect::power(ClassTag::Class3, 1.0) },
        },
        Case {
            name: "plateau [-1,2], m = 0 supplied",
            prob: uni(plateau()),
            loss: check(0.5),
            m: Some(0.0),
            expect: Expect { c1: Some(1.0), c2: Some(2.0), ..Expect::tag(ClassTag::Class4) },
        },
        Case {
            name: "plateau [-1,2], leftmost root",
            prob: uni(plateau()),
            loss: check(0.5),
            m: None,
            expect: Expect { c1: Some(0.0), c2: Some(3.0), ..Expect::tag(ClassTag::Class4) },
        },
    ]
}

/// Constructions outside the reach of the detectors; they must come back
/// `Unclassified`.
pub fn borderline_cases() -> Vec<Case> {
    let case = |name, r| Case { name, prob: uni(r), loss: check(0.5), m: Some(0.0), expect: Expect::tag(ClassTag::Unclassified) };
    vec![
        case("exp(-1/|t|)", symmetric_custom("rapid", |a| if a == 0.0 { 0.0 } else { (-1.0 / a).exp() })),
        case("t(2 + sin ln t)/3", symmetric_custom("oscillating", |a| if a == 0.0 { 0.0 } else { a * (2.0 + a.ln().sin()) / 3.0 })),
        case("1/(1 - ln t)", symmetric_custom("slow", |a| if a == 0.0 { 0.0 } else { 1.0 / (1.0 - a.ln()) })),
    ]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random catalog loss.
pub fn random_loss(rng: &mut impl Rng, id: &str) -> ConvexLoss {
    let params: Vec<f64> = match id {
        "check" => vec![rng.random_range(0.05..0.95)],
        "lp" => vec![rng.random_range(1.2..3.0)],
        "three_step" => {
            let b = rng.random_range(0.1..1.0);
            vec![-rng.random_range(0.1..2.0), b, b + rng.random_range(0.1..2.0), rng.random_range(0.1..1.5)]
        }
        _ => vec![],
    };
    loss_catalog(id, &params).unwrap()
}

/// A random kernel of degree `l` for univariate data.
pub fn random_kernel(rng: &mut impl Rng, l: usize) -> Kernel {
    if l == 1 {
        return kernel_catalog("identity", &[], None).unwrap();
    }
    match rng.random_range(0..4) {
        0 => kernel_catalog("walsh", &[], None).unwrap(),
        1 => kernel_catalog("abs_diff", &[], None).unwrap(),
        2 => kernel_catalog("mws", &[rng.random_range(0.0..1.0)], None).unwrap(),
        _ => kernel_catalog("mean", &[], Some(2)).unwrap(),
    }
}

/// Normal, uniform or integer-valued (tied) data of size `n`.
pub fn random_data(rng: &mut impl Rng, n: usize) -> Data {
    let kind = rng.random_range(0..3);
    let v = (0..n)
        .map(|_| match kind {
            0 => {
                let (u, w): (f64, f64) = (rng.random(), rng.random());
                (-2.0 * (1.0 - u).ln()).sqrt() * (std::f64::consts::TAU * w).cos()
            }
            1 => rng.random_range(-3.0..5.0),
            _ => rng.random_range(0..6) as f64,
        })
        .collect();
    Data::univariate(v)
}
