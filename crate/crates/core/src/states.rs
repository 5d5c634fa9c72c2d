//! Initial states: Bell-like pure states and the Werner-like mixture, with
//! the cavity in vacuum.

use std::f64::consts::TAU;

use nalgebra::{Matrix4, Vector4};

use crate::dynamics::FullState;
use crate::entanglement::{qubit_index, qubit_pairs};
use crate::error::{Error, Result};
use crate::operators::CompositeSpace;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateFamily {
    /// `α|10⟩ + e^{iθ}√(1-α²)|01⟩` (one excitation).
    Phi,
    /// `α|00⟩ + e^{iθ}√(1-α²)|11⟩` (zero and two excitations).
    Psi,
    /// `r|Ψ⟩⟨Ψ| + (1-r) 𝕀/4`.
    WernerPsi,
}

impl StateFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            StateFamily::Phi => "phi",
            StateFamily::Psi => "psi",
            StateFamily::WernerPsi => "werner",
        }
    }
}

impl std::str::FromStr for StateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi" => Ok(StateFamily::Phi),
            "psi" => Ok(StateFamily::Psi),
            "werner" | "werner_psi" => Ok(StateFamily::WernerPsi),
            other => Err(Error::InvalidParameter(format!("unknown state family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialStateSpec {
    pub family: StateFamily,
    /// `α²` in `[0, 1]`; `α` itself is taken real and non-negative.
    pub alpha2: f64,
    /// Relative phase in `[0, 2π)`.
    pub theta: f64,
    /// Weight of the pure part, used by [`StateFamily::WernerPsi`] only.
    pub r: f64,
}

impl InitialStateSpec {
    pub fn phi(alpha2: f64, theta: f64) -> Self {
        Self { family: StateFamily::Phi, alpha2, theta, r: 1.0 }
    }

    pub fn psi(alpha2: f64, theta: f64) -> Self {
        Self { family: StateFamily::Psi, alpha2, theta, r: 1.0 }
    }

    pub fn werner(alpha2: f64, theta: f64, r: f64) -> Self {
        Self { family: StateFamily::WernerPsi, alpha2, theta, r }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha2) {
            return Err(Error::InvalidParameter(format!("alpha2 = {} outside [0, 1]", self.alpha2)));
        }
        if !(0.0..TAU).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!("theta = {} outside [0, 2π)", self.theta)));
        }
        if self.family == StateFamily::WernerPsi && !(0.0..=1.0).contains(&self.r) {
            return Err(Error::InvalidParameter(format!("r = {} outside [0, 1]", self.r)));
        }
        Ok(())
    }

    /// Two-qubit density matrix in the reduced basis.
    pub fn qubit_matrix(&self) -> Result<Matrix4<C64>> {
        self.validate()?;
        let alpha = C64::new(self.alpha2.sqrt(), 0.0);
        let beta = C64::from_polar((1.0 - self.alpha2).sqrt(), self.theta);
        let mut psi = Vector4::zeros();
        match self.family {
            StateFamily::Phi => {
                psi[qubit_index(1, 0)] = alpha;
                psi[qubit_index(0, 1)] = beta;
            }
            StateFamily::Psi | StateFamily::WernerPsi => {
                psi[qubit_index(0, 0)] = alpha;
                psi[qubit_index(1, 1)] = beta;
            }
        }
        let pure = psi * psi.adjoint();
        Ok(match self.family {
            StateFamily::WernerPsi => {
                pure * C64::new(self.r, 0.0) + Matrix4::identity() * C64::new((1.0 - self.r) / 4.0, 0.0)
            }
            _ => pure,
        })
    }
}

/// `ρ_q ⊗ |0⟩⟨0|` for the requested qubit state, at time zero.
pub fn make_initial(spec: &InitialStateSpec, space: &CompositeSpace) -> Result<FullState> {
    let q = spec.qubit_matrix()?;
    Ok(embed_vacuum(&q, space))
}

/// Tensors a two-qubit matrix with the cavity vacuum.
pub fn embed_vacuum(q: &Matrix4<C64>, space: &CompositeSpace) -> FullState {
    let mut rho = space.zeros();
    for (ia, ib, ja, jb) in qubit_pairs() {
        rho[(space.index(ia, ib, 0), space.index(ja, jb, 0))] =
            q[(qubit_index(ia, ib), qubit_index(ja, jb))];
    }
    FullState::new(rho, 0.0)
}
