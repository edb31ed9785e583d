//! Unit system: ℏ and the particle mass, with the derived wave parameter k = 1/ℏ.
//!
//! Everything downstream is written in these two constants; the default
//! (natural) system sets both to 1.

use thiserror::Error;

/// Physical constants shared by a scenario: ℏ > 0 and particle mass m > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    hbar: f64,
    mass: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("hbar must be positive and finite, got {0}")]
    BadHbar(f64),
    #[error("mass must be positive and finite, got {0}")]
    BadMass(f64),
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64) -> Result<Self, UnitError> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(UnitError::BadHbar(hbar));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(UnitError::BadMass(mass));
        }
        Ok(Self { hbar, mass })
    }

    /// Natural units: ℏ = m = 1.
    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Wave parameter k = 1/ℏ relating phase to action, ψ = A·exp(i k S).
    pub fn wave_k(&self) -> f64 {
        1.0 / self.hbar
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}
