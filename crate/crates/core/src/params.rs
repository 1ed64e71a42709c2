//! Model parameters: dimension, diffusion exponent and total mass.

use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Parameters of the aggregation-diffusion model.
///
/// `d = 2` is the linear-diffusion chemotaxis case (`m = 1`); `d >= 3`
/// uses porous-medium diffusion with exponent `m > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: u32,
    pub diffusion_exponent: f64,
    pub mass: f64,
}

impl ModelParams {
    pub fn new(dim: u32, diffusion_exponent: f64, mass: f64) -> Result<Self> {
        let p = ModelParams { dim, diffusion_exponent, mass };
        p.validate()?;
        Ok(p)
    }

    /// The 2d chemotaxis model with linear diffusion.
    pub fn two_d(mass: f64) -> Result<Self> {
        Self::new(2, 1.0, mass)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(CoreError::InvalidParams("dimension must be >= 2".into()));
        }
        if self.dim == 2 && self.diffusion_exponent != 1.0 {
            return Err(CoreError::InvalidParams("d = 2 requires m = 1".into()));
        }
        if self.dim >= 3 && self.diffusion_exponent <= 1.0 {
            return Err(CoreError::InvalidParams("d >= 3 requires m > 1".into()));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(CoreError::InvalidParams("mass must be positive and finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inconsistent_dimension_exponent_pairs() {
        assert!(ModelParams::new(2, 1.0, 1.0).is_ok());
        assert!(ModelParams::new(2, 1.5, 1.0).is_err());
        assert!(ModelParams::new(3, 1.0, 1.0).is_err());
        assert!(ModelParams::new(3, 4.0 / 3.0, 1.0).is_ok());
        assert!(ModelParams::new(2, 1.0, -1.0).is_err());
        assert!(ModelParams::new(2, 1.0, f64::INFINITY).is_err());
    }
}
