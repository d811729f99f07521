//! Seeded replication harness.
//!
//! Each replication draws a dataset from the raw model with its own stream
//! `stream(seed, index)`, computes the minimizer interval and records
//! `(m̃_n − m)/a_n` for every policy. Results are collected in replication
//! order, so they do not depend on the worker count.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{analyze, find_m_with, normalizing_sequence, AnalysisError, AnalysisSettings, AsymptoticReport, LimitLaw};
use crate::config::{ConfigError, ProblemConfig, DEFAULT_SEED, SCHEMA_VERSION};
use crate::estimator::{argmin_interval, binomial, kernel_sample_with_cap, EstimatorError, Policy, DEFAULT_CAP};
use crate::rng::{stream, sub_seed};

/// Residuals beyond this magnitude are tallied as `±∞`.
pub const CLIP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ANSource {
    /// `a_n` from the class of the analysed problem.
    #[default]
    Report,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LawSource {
    #[default]
    Report,
    /// `N(0, variance)`.
    Normal(f64),
    Explicit(LimitLaw),
}

fn schema_one() -> u32 {
    SCHEMA_VERSION
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "schema_one")]
    pub schema: u32,
    #[serde(flatten)]
    pub problem: ProblemConfig,
    pub n: usize,
    pub reps: usize,
    #[serde(default)]
    pub policy: Policy,
    #[serde(default)]
    pub a_n: ANSource,
    #[serde(default)]
    pub law: LawSource,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; all available cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Keep the residual laws of all three policies.
    #[serde(default)]
    pub all_policies: bool,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default)]
    pub analysis: AnalysisSettings,
}

impl SimConfig {
    pub fn new(problem: ProblemConfig, n: usize, reps: usize) -> Self {
        SimConfig {
            schema: SCHEMA_VERSION,
            problem,
            n,
            reps,
            policy: Policy::default(),
            a_n: ANSource::Report,
            law: LawSource::Report,
            seed: DEFAULT_SEED,
            workers: None,
            all_policies: false,
            cap: DEFAULT_CAP,
            analysis: AnalysisSettings::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ConfigError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("replication {index} (sub-seed {sub_seed:#018x}) failed: {source}")]
    Replication { index: usize, sub_seed: u64, source: EstimatorError },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Empirical law of the residuals, with overflow tallies at `±∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    pub sorted: Vec<f64>,
    pub count_minus_inf: usize,
    pub count_plus_inf: usize,
}

impl EmpiricalCdf {
    pub fn new(residuals: impl IntoIterator<Item = f64>) -> Self {
        let (mut sorted, mut lo, mut hi) = (Vec::new(), 0, 0);
        for r in residuals {
            if r < -CLIP {
                lo += 1;
            } else if r > CLIP {
                hi += 1;
            } else {
                sorted.push(r);
            }
        }
        sorted.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted, count_minus_inf: lo, count_plus_inf: hi }
    }

    pub fn len(&self) -> usize {
        self.sorted.len() + self.count_minus_inf + self.count_plus_inf
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fraction of residuals `≤ x`.
    pub fn value(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&r| r <= x);
        (self.count_minus_inf + k) as f64 / self.len() as f64
    }

    pub fn value_left(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&r| r < x);
        (self.count_minus_inf + k) as f64 / self.len() as f64
    }
}

/// `sup_x |F_N(x) − H(x)|` on the extended line, evaluated at both sides of
/// every jump of `F_N`.
pub fn ks_distance(e: &EmpiricalCdf, law: &LimitLaw) -> f64 {
    let big_n = e.len() as f64;
    let (pm, pp) = law.mass_at_infinity();
    let mut d = (e.count_minus_inf as f64 / big_n - pm).abs();
    let mut i = 0;
    let s = &e.sorted;
    while i < s.len() {
        let x = s[i];
        let mut j = i;
        while j < s.len() && s[j] == x {
            j += 1;
        }
        let before = (e.count_minus_inf + i) as f64 / big_n;
        let after = (e.count_minus_inf + j) as f64 / big_n;
        d = d.max((before - law.cdf_left(x)).abs()).max((after - law.cdf(x)).abs());
        i = j;
    }
    let top = (e.count_minus_inf + s.len()) as f64 / big_n;
    d.max((top - (1.0 - pp)).abs())
}

/// Cramér–von Mises `ω² = ∫ (F_N − H)² dH`, through the usual order
/// statistic sum; tallies at `±∞` enter with `H = 0` and `H = 1`.
pub fn cvm_distance(e: &EmpiricalCdf, law: &LimitLaw) -> f64 {
    let big_n = e.len() as f64;
    let hs = std::iter::repeat_n(0.0, e.count_minus_inf)
        .chain(e.sorted.iter().map(|&x| law.cdf(x)))
        .chain(std::iter::repeat_n(1.0, e.count_plus_inf));
    let t: f64 = hs.enumerate().map(|(i, h)| (h - (2 * i + 1) as f64 / (2.0 * big_n)).powi(2)).sum();
    (t + 1.0 / (12.0 * big_n)) / big_n
}

/// Two-sample KS distance on the extended line.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let mut d = (a.value(f64::NEG_INFINITY) - b.value(f64::NEG_INFINITY)).abs();
    for &x in a.sorted.iter().chain(&b.sorted) {
        d = d.max((a.value(x) - b.value(x)).abs());
    }
    d
}

/// Largest pairwise two-sample KS distance.
pub fn policy_agreement(ecdfs: &[EmpiricalCdf]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..ecdfs.len() {
        for j in i + 1..ecdfs.len() {
            d = d.max(ks_two_sample(&ecdfs[i], &ecdfs[j]));
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyResult {
    pub policy: Policy,
    pub ks: f64,
    pub ecdf: EmpiricalCdf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub workers: usize,
    pub policy: Policy,
    pub m: f64,
    pub a_n: f64,
    pub law: LimitLaw,
    pub ks: f64,
    pub cvm: f64,
    pub ecdf: EmpiricalCdf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_policy: Option<Vec<PolicyResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_agreement: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<AsymptoticReport>,
    pub runtime_secs: f64,
}

impl SimResult {
    /// CSV with columns `residual, ecdf, H` at every residual.
    pub fn write_csv(&self, path: &Path) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["residual", "ecdf", "H"])?;
        let e = &self.ecdf;
        let rows = std::iter::repeat_n(f64::NEG_INFINITY, e.count_minus_inf)
            .chain(e.sorted.iter().copied())
            .chain(std::iter::repeat_n(f64::INFINITY, e.count_plus_inf));
        for r in rows {
            w.write_record([r.to_string(), e.value(r).to_string(), self.law.cdf(r).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run the replications described by `cfg`.
pub fn run(cfg: &SimConfig) -> Result<SimResult, SimError> {
    let start = Instant::now();
    if cfg.reps == 0 {
        return Err(SimError::Config("reps must be at least 1".into()));
    }
    let loss = cfg.problem.loss()?;
    let kernel = cfg.problem.kernel()?;
    let raw = cfg
        .problem
        .raw_model()?
        .ok_or_else(|| SimError::Config("simulation needs a raw observation model".into()))?;
    let l = kernel.degree();
    if cfg.n < l {
        return Err(SimError::Config(format!("n = {} is below the kernel degree {l}", cfg.n)));
    }
    match binomial(cfg.n, l) {
        Some(c) if c <= cfg.cap => {}
        c => {
            return Err(SimError::Config(format!(
                "C({}, {l}) = {} exceeds the enumeration cap {}",
                cfg.n,
                c.map_or("overflow".to_string(), |c| c.to_string()),
                cfg.cap
            )))
        }
    }
    if !loss.is_coercive() {
        return Err(SimError::Config(format!("loss `{}` is not coercive", loss.id())));
    }

    let needs_report = cfg.a_n == ANSource::Report || cfg.law == LawSource::Report;
    let prob = cfg.problem.population();
    let report = if needs_report { Some(analyze(&prob?, &loss, cfg.problem.m, &cfg.analysis)?) } else { None };
    let m = match (&report, cfg.problem.m) {
        (Some(r), _) => r.m,
        (None, Some(m)) => m,
        (None, None) => find_m_with(&cfg.problem.population()?, &loss, &cfg.analysis)?.0,
    };
    let a_n = match (cfg.a_n, &report) {
        (ANSource::Explicit(a), _) => a,
        (ANSource::Report, Some(r)) => {
            normalizing_sequence(&cfg.problem.population()?, &loss, m, &r.attraction, cfg.n as f64)?
        }
        (ANSource::Report, None) => unreachable!("report computed above"),
    };
    if !(a_n > 0.0 && a_n.is_finite()) {
        return Err(SimError::Config(format!("a_n = {a_n} must be positive and finite")));
    }
    let law = match (cfg.law, &report) {
        (LawSource::Normal(v), _) => LimitLaw::normal(v),
        (LawSource::Explicit(law), _) => law,
        (LawSource::Report, Some(r)) => r.law.ok_or_else(|| {
            SimError::Config(format!("no limit law for class {:?}", r.attraction.tag))
        })?,
        (LawSource::Report, None) => unreachable!("report computed above"),
    };

    let workers = cfg.workers.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| SimError::Pool(e.to_string()))?;
    let one = |i: usize| -> Result<[f64; 3], SimError> {
        let fail = |source| SimError::Replication { index: i, sub_seed: sub_seed(cfg.seed, i as u64), source };
        let mut rng = stream(cfg.seed, i as u64);
        let data = raw.sample(&mut rng, cfg.n);
        let ks = kernel_sample_with_cap(&data, &kernel, cfg.cap).map_err(fail)?;
        let iv = argmin_interval(&ks, &loss, cfg.policy).map_err(fail)?;
        Ok(Policy::ALL.map(|p| (p.select(&iv) - m) / a_n))
    };
    let rows: Vec<[f64; 3]> = pool.install(|| (0..cfg.reps).into_par_iter().map(one).collect::<Result<_, _>>())?;

    let idx = |p: Policy| Policy::ALL.iter().position(|q| *q == p).expect("listed");
    let ecdf_of = |p: Policy| EmpiricalCdf::new(rows.iter().map(|r| r[idx(p)]));
    let ecdf = ecdf_of(cfg.policy);
    let (per_policy, agreement) = if cfg.all_policies {
        let all: Vec<EmpiricalCdf> = Policy::ALL.iter().map(|&p| ecdf_of(p)).collect();
        let agreement = policy_agreement(&all);
        let per = Policy::ALL
            .iter()
            .zip(all)
            .map(|(&policy, ecdf)| PolicyResult { policy, ks: ks_distance(&ecdf, &law), ecdf })
            .collect();
        (Some(per), Some(agreement))
    } else {
        (None, None)
    };
    Ok(SimResult {
        n: cfg.n,
        reps: cfg.reps,
        seed: cfg.seed,
        workers,
        policy: cfg.policy,
        m,
        a_n,
        ks: ks_distance(&ecdf, &law),
        cvm: cvm_distance(&ecdf, &law),
        law,
        ecdf,
        per_policy,
        policy_agreement: agreement,
        report,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}
