use super::ConvexLoss;

/// `ψ = ψ_c + κ₊·1[t ≥ 0] + κ₋·1[t < 0]` with `ψ_c` continuous at zero.
#[derive(Debug, Clone)]
pub struct JumpDecomposition {
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub kappa: f64,
    loss: ConvexLoss,
}

pub fn jump_decompose(loss: &ConvexLoss) -> JumpDecomposition {
    let kappa_plus = loss.psi_plus(0.0);
    let kappa_minus = loss.psi_minus(0.0);
    let (kappa_plus, kappa_minus) = if kappa_plus == kappa_minus { (0.0, 0.0) } else { (kappa_plus, kappa_minus) };
    JumpDecomposition { kappa_plus, kappa_minus, kappa: kappa_plus - kappa_minus, loss: loss.clone() }
}

impl JumpDecomposition {
    pub fn psi_c(&self, t: f64) -> f64 {
        let shift = if t >= 0.0 { self.kappa_plus } else { self.kappa_minus };
        self.loss.psi_plus(t) - shift
    }

    pub fn reconstruct(&self, t: f64) -> f64 {
        self.psi_c(t) + if t >= 0.0 { self.kappa_plus } else { self.kappa_minus }
    }
}
