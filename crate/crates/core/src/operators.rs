//! Truncated qubit ⊗ qubit ⊗ Fock space and the operators acting on it.
//!
//! Flat basis ordering is A-major and part of the external contract (raw
//! state files depend on it):
//!
//! ```text
//! index = i_A * (2 * n_fock) + i_B * n_fock + n_photon
//! ```
//!
//! with `i = 0` ground and `i = 1` excited. For the default cutoff
//! `n_fock = 3` the space has dimension 12.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Dense complex matrix over a [`CompositeSpace`].
pub type OperatorMatrix = DMatrix<C64>;

/// Tolerance used when checking that Hamiltonians are Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Physical rates of the model, all in units of `gamma0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Qubit–cavity coupling.
    pub omega: f64,
    /// Cavity (pseudomode) decay rate.
    pub gamma_cavity: f64,
    /// Spontaneous emission rate of qubit A.
    pub gamma_a: f64,
    /// Spontaneous emission rate of qubit B.
    pub gamma_b: f64,
    /// Reference decay rate, sets the time unit.
    pub gamma0: f64,
    /// Number of Fock states kept (photon numbers `0..n_fock`).
    pub n_fock: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::reference(0.0)
    }
}

impl SystemParams {
    pub const REFERENCE_OMEGA: f64 = 0.2;
    pub const DEFAULT_FOCK: usize = 3;

    /// Strong-coupling configuration `omega = 0.2`, `gamma_cavity = sqrt(0.05)`
    /// with equal spontaneous emission `gamma_s` on both qubits.
    pub fn reference(gamma_s: f64) -> Self {
        Self::symmetric(Self::REFERENCE_OMEGA, 0.05f64.sqrt(), gamma_s)
    }

    pub fn symmetric(omega: f64, gamma_cavity: f64, gamma_s: f64) -> Self {
        Self {
            omega,
            gamma_cavity,
            gamma_a: gamma_s,
            gamma_b: gamma_s,
            gamma0: 1.0,
            n_fock: Self::DEFAULT_FOCK,
        }
    }

    pub fn with_fock(mut self, n_fock: usize) -> Self {
        self.n_fock = n_fock;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega = {}", self.omega)));
        }
        for (name, v) in [
            ("gamma_cavity", self.gamma_cavity),
            ("gamma_a", self.gamma_a),
            ("gamma_b", self.gamma_b),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be >= 0")));
            }
        }
        if !(self.gamma0.is_finite() && self.gamma0 > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma0 = {} must be > 0", self.gamma0)));
        }
        if self.n_fock == 0 {
            return Err(Error::InvalidParameter("n_fock must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Raise,
    Lower,
}

/// Index bookkeeping for qubit A ⊗ qubit B ⊗ truncated Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompositeSpace {
    n_fock: usize,
}

/// Builds the product space for a given photon cutoff.
pub fn build_space(n_fock: usize) -> Result<CompositeSpace> {
    if n_fock == 0 {
        return Err(Error::InvalidParameter("n_fock must be >= 1".into()));
    }
    Ok(CompositeSpace { n_fock })
}

impl CompositeSpace {
    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn dim(&self) -> usize {
        4 * self.n_fock
    }

    /// Flat index of `|i_a, i_b, n⟩`. Panics if any label is out of range.
    pub fn index(&self, i_a: usize, i_b: usize, n_photon: usize) -> usize {
        assert!(i_a < 2 && i_b < 2 && n_photon < self.n_fock, "label out of range");
        i_a * 2 * self.n_fock + i_b * self.n_fock + n_photon
    }

    /// Inverse of [`CompositeSpace::index`].
    pub fn labels(&self, index: usize) -> (usize, usize, usize) {
        assert!(index < self.dim(), "index out of range");
        let i_a = index / (2 * self.n_fock);
        let rest = index % (2 * self.n_fock);
        (i_a, rest / self.n_fock, rest % self.n_fock)
    }

    /// Total excitation number of a basis state.
    pub fn excitations(&self, index: usize) -> usize {
        let (a, b, n) = self.labels(index);
        a + b + n
    }

    pub fn zeros(&self) -> OperatorMatrix {
        OperatorMatrix::zeros(self.dim(), self.dim())
    }

    pub fn identity(&self) -> OperatorMatrix {
        OperatorMatrix::identity(self.dim(), self.dim())
    }
}

/// Cavity annihilation operator `1 ⊗ 1 ⊗ a`, truncated at the cutoff.
pub fn annihilation(space: &CompositeSpace) -> OperatorMatrix {
    let mut op = space.zeros();
    for i_a in 0..2 {
        for i_b in 0..2 {
            for n in 1..space.n_fock() {
                let row = space.index(i_a, i_b, n - 1);
                let col = space.index(i_a, i_b, n);
                op[(row, col)] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
    }
    op
}

pub fn creation(space: &CompositeSpace) -> OperatorMatrix {
    annihilation(space).adjoint()
}

/// Qubit ladder operator: `σ₋ = |0⟩⟨1|` on the selected qubit, `σ₊` its adjoint.
pub fn sigma(space: &CompositeSpace, which: Qubit, direction: Ladder) -> OperatorMatrix {
    let mut lower = space.zeros();
    for other in 0..2 {
        for n in 0..space.n_fock() {
            let (row, col) = match which {
                Qubit::A => (space.index(0, other, n), space.index(1, other, n)),
                Qubit::B => (space.index(other, 0, n), space.index(other, 1, n)),
            };
            lower[(row, col)] = C64::new(1.0, 0.0);
        }
    }
    match direction {
        Ladder::Lower => lower,
        Ladder::Raise => lower.adjoint(),
    }
}

/// Total excitation number `σ₊ᴬσ₋ᴬ + σ₊ᴮσ₋ᴮ + a†a` (diagonal).
pub fn excitation_number(space: &CompositeSpace) -> OperatorMatrix {
    let mut op = space.zeros();
    for i in 0..space.dim() {
        op[(i, i)] = C64::new(space.excitations(i) as f64, 0.0);
    }
    op
}

/// Resonant Tavis–Cummings coupling `Ω[(σ₊ᴬ + σ₊ᴮ)a + (σ₋ᴬ + σ₋ᴮ)a†]`.
pub fn build_hamiltonian(space: &CompositeSpace, params: &SystemParams) -> OperatorMatrix {
    let a = annihilation(space);
    let raise = sigma(space, Qubit::A, Ladder::Raise) + sigma(space, Qubit::B, Ladder::Raise);
    let absorb = &raise * &a;
    let emit = absorb.adjoint();
    (absorb + emit) * C64::new(params.omega, 0.0)
}

/// Largest elementwise deviation `|M - M†|`.
pub fn hermiticity_error(m: &OperatorMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
