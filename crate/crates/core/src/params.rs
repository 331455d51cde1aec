use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which growth process a run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Every existing vertex connects to the newcomer with equal probability
    /// `min(zeta/t, 1)`.
    Classical,
    /// Preferential attachment: vertex of degree d connects with probability
    /// `min(mu*d/(2e), 1)`.
    Ba,
    /// With probability `alpha` a preferential-attachment step, otherwise a
    /// classical step.
    Mixed,
    /// With probability `alpha` the newcomer copies the full neighbor set of a
    /// uniformly chosen vertex, otherwise a classical step with rate `mu`.
    HardCopy,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Classical => "classical",
            ModelKind::Ba => "ba",
            ModelKind::Mixed => "mixed",
            ModelKind::HardCopy => "hardcopy",
        }
    }
}

/// Process parameters shared by all models.
///
/// `alpha` is the mixing probability, `mu` the preferential-attachment edge
/// rate, `zeta` the classical edge rate and `nu` the small exponent used by
/// the degree-bound checks. The derived mean step edge count
/// `xi = alpha*mu + (1-alpha)*zeta` is always recomputed from its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub mu: f64,
    pub zeta: f64,
    pub nu: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, mu: f64, zeta: f64, nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be in [0,1], got {alpha}"
            )));
        }
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        if !(zeta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "zeta must be > 0, got {zeta}"
            )));
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "nu must be in (0,1), got {nu}"
            )));
        }
        Ok(Self {
            alpha,
            mu,
            zeta,
            nu,
        })
    }

    /// Pure preferential attachment with edge rate `mu`.
    pub fn ba(mu: f64) -> Result<Self> {
        Self::new(1.0, mu, mu, 0.1)
    }

    /// Pure classical growth with edge rate `zeta`.
    pub fn classical(zeta: f64) -> Result<Self> {
        Self::new(0.0, zeta, zeta, 0.1)
    }

    pub fn mixed(alpha: f64, mu: f64, zeta: f64) -> Result<Self> {
        Self::new(alpha, mu, zeta, 0.1)
    }

    /// Mean number of edges added per step once `t > zeta`.
    pub fn xi(&self) -> f64 {
        self.alpha * self.mu + (1.0 - self.alpha) * self.zeta
    }

    /// The power-law results are proved for `mu <= 2` and conjectured beyond;
    /// larger `mu` is allowed but flagged.
    pub fn outside_proved_regime(&self) -> bool {
        self.mu > 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_is_recomputed_from_inputs() {
        let p = ModelParams::mixed(0.25, 2.0, 1.0).unwrap();
        assert_eq!(p.xi(), 0.25 * 2.0 + 0.75 * 1.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(1.5, 1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(0.5, 0.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(0.5, 1.0, -1.0, 0.1).is_err());
        assert!(ModelParams::new(0.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn warns_outside_proved_regime() {
        assert!(ModelParams::ba(2.5).unwrap().outside_proved_regime());
        assert!(!ModelParams::ba(2.0).unwrap().outside_proved_regime());
    }
}
