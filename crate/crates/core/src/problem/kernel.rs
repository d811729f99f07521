use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{bad, ProblemError};

pub const KERNEL_IDS: &[&str] = &["identity", "mean", "walsh", "mws", "abs_diff", "theil_sen"];

pub type KernelFn = Arc<dyn Fn(&[&[f64]]) -> f64 + Send + Sync>;

/// User kernel; must be symmetric in its arguments.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub degree: usize,
    pub dim: Option<usize>,
    pub f: KernelFn,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel").field("name", &self.name).field("degree", &self.degree).finish()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Mean { degree: usize, walsh: bool },
    Mws(f64),
    AbsDiff,
    TheilSen,
    Custom(CustomKernel),
}

/// Symmetric kernel of degree `l`.
#[derive(Debug, Clone)]
pub struct Kernel {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub id: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

impl KernelSpec {
    pub fn new(id: &str, params: &[f64]) -> Self {
        KernelSpec { id: id.into(), params: params.to_vec(), degree: None }
    }
}

/// Catalog kernel. `mean` takes its degree from `degree` (default 2).
pub fn kernel_catalog(id: &str, params: &[f64], degree: Option<usize>) -> Result<Kernel, ProblemError> {
    let fixed = |l: usize| -> Result<(), ProblemError> {
        match degree {
            Some(d) if d != l => Err(bad(id, format!("degree is fixed at {l}, got {d}"))),
            _ => Ok(()),
        }
    };
    let no_params = || -> Result<(), ProblemError> {
        if params.is_empty() {
            Ok(())
        } else {
            Err(bad(id, "takes no parameters"))
        }
    };
    let kind = match id {
        "identity" => {
            fixed(1)?;
            no_params()?;
            Kind::Identity
        }
        "walsh" => {
            fixed(2)?;
            no_params()?;
            Kind::Mean { degree: 2, walsh: true }
        }
        "mean" => {
            no_params()?;
            let l = degree.unwrap_or(2);
            if l == 0 {
                return Err(bad(id, "degree must be positive"));
            }
            Kind::Mean { degree: l, walsh: false }
        }
        "mws" => {
            fixed(2)?;
            if params.len() != 1 || !(0.0..=1.0).contains(&params[0]) {
                return Err(bad(id, "expects one weight beta in [0,1]"));
            }
            Kind::Mws(params[0])
        }
        "abs_diff" => {
            fixed(2)?;
            no_params()?;
            Kind::AbsDiff
        }
        "theil_sen" => {
            fixed(2)?;
            no_params()?;
            Kind::TheilSen
        }
        other => return Err(ProblemError::UnknownKernel(other.to_string())),
    };
    Ok(Kernel { kind })
}

impl Kernel {
    pub fn custom(k: CustomKernel) -> Self {
        Kernel { kind: Kind::Custom(k) }
    }

    pub fn from_spec(spec: &KernelSpec) -> Result<Self, ProblemError> {
        kernel_catalog(&spec.id, &spec.params, spec.degree)
    }

    pub fn spec(&self) -> KernelSpec {
        let degree = matches!(self.kind, Kind::Mean { walsh: false, .. }).then(|| self.degree());
        KernelSpec { id: self.id().to_string(), params: self.params(), degree }
    }

    pub fn id(&self) -> &str {
        match &self.kind {
            Kind::Identity => "identity",
            Kind::Mean { walsh: true, .. } => "walsh",
            Kind::Mean { .. } => "mean",
            Kind::Mws(_) => "mws",
            Kind::AbsDiff => "abs_diff",
            Kind::TheilSen => "theil_sen",
            Kind::Custom(c) => &c.name,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Mws(b) => vec![*b],
            _ => vec![],
        }
    }

    pub fn degree(&self) -> usize {
        match &self.kind {
            Kind::Identity => 1,
            Kind::Mean { degree, .. } => *degree,
            Kind::Mws(_) | Kind::AbsDiff | Kind::TheilSen => 2,
            Kind::Custom(c) => c.degree,
        }
    }

    /// Required observation dimension, if fixed.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            Kind::TheilSen => Some(2),
            Kind::Custom(c) => c.dim,
            _ => Some(1),
        }
    }

    /// Is this the arithmetic-mean kernel of its degree.
    pub fn is_mean(&self) -> bool {
        matches!(self.kind, Kind::Identity | Kind::Mean { .. })
    }

    pub fn eval(&self, args: &[&[f64]]) -> Result<f64, ProblemError> {
        let l = self.degree();
        if args.len() != l || self.dim().is_some_and(|d| args.iter().any(|a| a.len() != d)) {
            return Err(ProblemError::Dimension {
                id: self.id().to_string(),
                expected: l,
                dim: self.dim().unwrap_or(0),
                got: format!("{:?}", args.iter().map(|a| a.len()).collect::<Vec<_>>()),
            });
        }
        Ok(match &self.kind {
            Kind::Identity => args[0][0],
            Kind::Mean { degree: 2, .. } => (args[0][0] + args[1][0]) / 2.0,
            Kind::Mean { degree, .. } => {
                // Sum in sorted order so the value is exactly symmetric.
                let mut v: Vec<f64> = args.iter().map(|a| a[0]).collect();
                v.sort_by(f64::total_cmp);
                v.iter().sum::<f64>() / *degree as f64
            }
            Kind::Mws(b) => {
                let (lo, hi) = min_max(args[0][0], args[1][0]);
                b * lo + (1.0 - b) * hi
            }
            Kind::AbsDiff => (args[0][0] - args[1][0]).abs(),
            Kind::TheilSen => {
                let (y1, z1, y2, z2) = (args[0][0], args[0][1], args[1][0], args[1][1]);
                if y1 == y2 {
                    return Err(ProblemError::TiedRegressor(y1));
                }
                (z1 - z2) / (y1 - y2)
            }
            Kind::Custom(c) => (c.f)(args),
        })
    }
}

fn min_max(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
