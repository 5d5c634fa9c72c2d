//! Two-qubit reduced state and its concurrence.
//!
//! The reduced basis is `{|00⟩, |10⟩, |01⟩, |11⟩}` (first digit qubit A), so
//! the reduced index is `i_A + 2 * i_B`. Against this ordering the X-state
//! elements read
//!
//! ```text
//!        |00⟩ |10⟩ |01⟩ |11⟩
//! |00⟩ [  d    0    0    w* ]
//! |10⟩ [  0    c    z*   0  ]
//! |01⟩ [  0    z    b    0  ]
//! |11⟩ [  w    0    0    a  ]
//! ```
//!
//! i.e. `a = ⟨11|ρ|11⟩`, `b = ⟨01|ρ|01⟩`, `c = ⟨10|ρ|10⟩`, `d = ⟨00|ρ|00⟩`,
//! `w = ⟨11|ρ|00⟩`, `z = ⟨01|ρ|10⟩`. The concurrence formulas only involve
//! `|w|`, `|z|`, `bc` and `ad`, so the labelling direction does not matter.

use nalgebra::{Matrix4, SymmetricEigen, SVD};

use crate::dynamics::{FullState, HERMITIAN_STATE_TOL, POSITIVITY_FLOOR, TRACE_TOL};
use crate::error::{Error, Result};
use crate::operators::{CompositeSpace, OperatorMatrix};
use crate::C64;

/// Largest off-pattern magnitude for a state to count as X form.
pub const X_TOLERANCE: f64 = 1e-9;

/// Symmetry tolerance on the spin-flip overlap matrix of the general path.
pub const SPIN_FLIP_TOL: f64 = 1e-10;

/// Reduced index of the qubit pair.
pub fn qubit_index(i_a: usize, i_b: usize) -> usize {
    i_a + 2 * i_b
}

/// 4×4 density matrix of the two qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    rho: Matrix4<C64>,
}

/// The six independent X-state parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XElements {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub w: C64,
    pub z: C64,
}

impl ReducedState {
    /// Wraps a matrix after checking the density-matrix invariants.
    pub fn new(rho: Matrix4<C64>) -> Result<Self> {
        let state = Self { rho };
        state.validate()?;
        Ok(state)
    }

    pub fn from_matrix_unchecked(rho: Matrix4<C64>) -> Self {
        Self { rho }
    }

    /// Builds the X state with the given elements (no validation).
    pub fn from_x_elements(x: XElements) -> Self {
        let mut rho = Matrix4::zeros();
        rho[(0, 0)] = C64::new(x.d, 0.0);
        rho[(1, 1)] = C64::new(x.c, 0.0);
        rho[(2, 2)] = C64::new(x.b, 0.0);
        rho[(3, 3)] = C64::new(x.a, 0.0);
        rho[(3, 0)] = x.w;
        rho[(0, 3)] = x.w.conj();
        rho[(2, 1)] = x.z;
        rho[(1, 2)] = x.z.conj();
        Self { rho }
    }

    pub fn rho(&self) -> &Matrix4<C64> {
        &self.rho
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("reduced state contains non-finite entries".into()));
        }
        let herm = (self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > HERMITIAN_STATE_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let lo = self.eigen().eigenvalues.min();
        if lo < POSITIVITY_FLOOR {
            return Err(Error::NotPositive(lo));
        }
        Ok(())
    }

    fn eigen(&self) -> SymmetricEigen<C64, nalgebra::U4> {
        SymmetricEigen::new((self.rho + self.rho.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Largest magnitude among the eight entries outside the X pattern.
    pub fn x_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j && i + j != 3 {
                    worst = worst.max(self.rho[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn is_x_form(&self) -> bool {
        self.x_deviation() <= X_TOLERANCE
    }

    pub fn x_elements(&self) -> XElements {
        XElements {
            a: self.rho[(3, 3)].re,
            b: self.rho[(2, 2)].re,
            c: self.rho[(1, 1)].re,
            d: self.rho[(0, 0)].re,
            w: self.rho[(3, 0)],
            z: self.rho[(2, 1)],
        }
    }
}

/// Sums out the photon number of a full-space matrix without validation.
pub(crate) fn reduce_cavity(rho: &OperatorMatrix, space: &CompositeSpace) -> ReducedState {
    let mut out = Matrix4::zeros();
    for (ia, ib, ja, jb) in qubit_pairs() {
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..space.n_fock() {
            acc += rho[(space.index(ia, ib, n), space.index(ja, jb, n))];
        }
        out[(qubit_index(ia, ib), qubit_index(ja, jb))] = acc;
    }
    ReducedState { rho: out }
}

/// All `(i_A, i_B, j_A, j_B)` label quadruples.
pub(crate) fn qubit_pairs() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|k| (k & 1, (k >> 1) & 1, (k >> 2) & 1, (k >> 3) & 1))
}

/// Traces out the cavity mode.
pub fn partial_trace_cavity(state: &FullState, space: &CompositeSpace) -> Result<ReducedState> {
    state.check_space(space)?;
    Ok(reduce_cavity(&state.rho, space))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConcurrencePath {
    General,
    XState,
}

impl ConcurrencePath {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConcurrencePath::General => "general",
            ConcurrencePath::XState => "x_state",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceReport {
    /// Concurrence in `[0, 1]`.
    pub c: f64,
    /// `2|w| - 2√(bc)` (X-state path only).
    pub c1: Option<f64>,
    /// `2|z| - 2√(ad)` (X-state path only).
    pub c2: Option<f64>,
    /// Square roots of the eigenvalues of `R = ρ Ỹ ρ* Ỹ`, decreasing (general path only).
    pub lambda: Option<[f64; 4]>,
    pub path: ConcurrencePath,
}

/// `σ_y ⊗ σ_y` in the reduced basis (real, symmetric, orthogonal).
pub fn spin_flip() -> Matrix4<C64> {
    let mut y = Matrix4::zeros();
    y[(0, 3)] = C64::new(-1.0, 0.0);
    y[(3, 0)] = C64::new(-1.0, 0.0);
    y[(1, 2)] = C64::new(1.0, 0.0);
    y[(2, 1)] = C64::new(1.0, 0.0);
    y
}

/// Wootters concurrence for an arbitrary two-qubit state.
///
/// With `ρ = V V†`, `V = U diag(√p)` from the eigendecomposition, the square
/// roots of the eigenvalues of `R` are the singular values of the complex
/// symmetric matrix `τ = Vᵀ (σ_y ⊗ σ_y) V`. Working with `τ` avoids taking
/// square roots of eigenvalues that are rounding noise around zero.
pub fn concurrence_general(reduced: &ReducedState) -> Result<ConcurrenceReport> {
    reduced.validate()?;
    let eig = reduced.eigen();
    let mut v = eig.eigenvectors;
    for (k, &p) in eig.eigenvalues.iter().enumerate() {
        v.column_mut(k).scale_mut(p.max(0.0).sqrt());
    }
    let tau = v.transpose() * spin_flip() * v;
    let asym = (tau - tau.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > SPIN_FLIP_TOL {
        return Err(Error::SpinFlipAsymmetry(asym));
    }
    let svd = SVD::new(tau, false, false);
    let mut lambda = [0.0; 4];
    for (slot, s) in lambda.iter_mut().zip(svd.singular_values.iter()) {
        *slot = *s;
    }
    lambda.sort_by(|x, y| y.total_cmp(x));
    let raw = lambda[0] - lambda[1] - lambda[2] - lambda[3];
    Ok(ConcurrenceReport {
        c: raw.clamp(0.0, 1.0),
        c1: None,
        c2: None,
        lambda: Some(lambda),
        path: ConcurrencePath::General,
    })
}

/// Closed-form concurrence of an X state, `max{0, C₁, C₂}`.
pub fn concurrence_x_state(reduced: &ReducedState) -> Result<ConcurrenceReport> {
    let dev = reduced.x_deviation();
    if dev > X_TOLERANCE {
        return Err(Error::NotXForm(dev));
    }
    let x = reduced.x_elements();
    let (c1, c2) = x_branches(&x);
    Ok(ConcurrenceReport {
        c: c1.max(c2).clamp(0.0, 1.0),
        c1: Some(c1),
        c2: Some(c2),
        lambda: None,
        path: ConcurrencePath::XState,
    })
}

fn x_branches(x: &XElements) -> (f64, f64) {
    let c1 = 2.0 * x.w.norm() - 2.0 * (x.b.max(0.0) * x.c.max(0.0)).sqrt();
    let c2 = 2.0 * x.z.norm() - 2.0 * (x.a.max(0.0) * x.d.max(0.0)).sqrt();
    (c1, c2)
}

/// X-state formula when the state has X form, the general algorithm otherwise.
pub fn concurrence(reduced: &ReducedState) -> Result<ConcurrenceReport> {
    if reduced.is_x_form() {
        concurrence_x_state(reduced)
    } else {
        concurrence_general(reduced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::build_space;
    use nalgebra::{DVector, Vector4};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn projector(v: Vector4<C64>) -> ReducedState {
        let v = v / c(v.norm());
        ReducedState::new(v * v.adjoint()).unwrap()
    }

    fn mixed() -> ReducedState {
        ReducedState::new(Matrix4::identity() * c(0.25)).unwrap()
    }

    #[test]
    fn bell_state_is_maximally_entangled() {
        // (|01⟩ + |10⟩)/√2
        let bell = projector(Vector4::new(c(0.0), c(1.0), c(1.0), c(0.0)));
        let rep = concurrence_general(&bell).unwrap();
        assert!((rep.c - 1.0).abs() < 1e-12, "{}", rep.c);
        assert!((concurrence_x_state(&bell).unwrap().c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_separable() {
        assert_eq!(concurrence_general(&mixed()).unwrap().c, 0.0);
        assert_eq!(concurrence_x_state(&mixed()).unwrap().c, 0.0);
    }

    #[test]
    fn werner_dual_path() {
        let bell = projector(Vector4::new(c(1.0), c(0.0), c(0.0), c(1.0)));
        let rho = bell.rho() * c(0.6) + mixed().rho() * c(0.4);
        let st = ReducedState::new(rho).unwrap();
        let g = concurrence_general(&st).unwrap().c;
        let x = concurrence_x_state(&st).unwrap().c;
        assert!((g - x).abs() <= 1e-10);
        assert!((x - 0.4).abs() < 1e-14);
    }

    #[test]
    fn x_state_examples() {
        let bell = ReducedState::from_x_elements(XElements {
            a: 0.5,
            b: 0.0,
            c: 0.0,
            d: 0.5,
            w: c(0.5),
            z: c(0.0),
        });
        let rep = concurrence_x_state(&bell).unwrap();
        assert_eq!(rep.c, 1.0);
        assert_eq!(rep.c1, Some(1.0));
        let diag = ReducedState::from_x_elements(XElements {
            a: 0.1,
            b: 0.2,
            c: 0.3,
            d: 0.4,
            w: c(0.0),
            z: c(0.0),
        });
        assert_eq!(concurrence_x_state(&diag).unwrap().c, 0.0);
    }

    #[test]
    fn x_path_rejects_non_x() {
        let plus = projector(Vector4::new(c(1.0), c(1.0), c(0.0), c(0.0)));
        assert!(matches!(concurrence_x_state(&plus), Err(Error::NotXForm(_))));
        assert_eq!(concurrence(&plus).unwrap().path, ConcurrencePath::General);
    }

    #[test]
    fn general_path_rejects_invalid() {
        let mut m = Matrix4::identity() * c(0.25);
        m[(0, 1)] = c(0.1);
        assert!(matches!(
            concurrence_general(&ReducedState::from_matrix_unchecked(m)),
            Err(Error::NotHermitian(_))
        ));
        let m = Matrix4::identity() * c(0.3);
        assert!(matches!(
            concurrence_general(&ReducedState::from_matrix_unchecked(m)),
            Err(Error::InvalidTrace(_))
        ));
    }

    #[test]
    fn lambdas_square_to_spectrum_of_r() {
        // power sums of the eigenvalues of R equal traces of powers of R
        let v1 = Vector4::new(C64::new(0.3, 0.2), c(0.5), C64::new(-0.1, 0.4), c(0.2));
        let v2 = Vector4::new(c(0.1), C64::new(0.0, -0.7), c(0.3), C64::new(0.2, 0.1));
        let p1 = projector(v1);
        let p2 = projector(v2);
        let st = ReducedState::new(p1.rho() * c(0.7) + p2.rho() * c(0.3)).unwrap();
        let rep = concurrence_general(&st).unwrap();
        let lam = rep.lambda.unwrap();
        let y = spin_flip();
        let r = st.rho() * y * st.rho().map(|z| z.conj()) * y;
        let mut rk = Matrix4::<C64>::identity();
        for k in 1..=4i32 {
            rk *= r;
            let expected = rk.trace();
            let got: f64 = lam.iter().map(|l| l.powi(2 * k)).sum();
            assert!(expected.im.abs() < 1e-12);
            assert!((expected.re - got).abs() < 1e-12, "k={k}: {} vs {got}", expected.re);
        }
    }

    #[test]
    fn partial_trace_examples() {
        let s = build_space(3).unwrap();
        // product ρ_q ⊗ |0⟩⟨0|
        let q = projector(Vector4::new(c(0.2), C64::new(0.1, 0.3), c(0.5), c(-0.4)));
        let mut full = s.zeros();
        for (ia, ib, ja, jb) in qubit_pairs() {
            full[(s.index(ia, ib, 0), s.index(ja, jb, 0))] =
                q.rho()[(qubit_index(ia, ib), qubit_index(ja, jb))];
        }
        let red = partial_trace_cavity(&FullState::new(full, 0.0), &s).unwrap();
        assert!((red.rho() - q.rho()).norm() < 1e-15);

        let mixed12 = FullState::new(s.identity() / c(12.0), 0.0);
        let red = partial_trace_cavity(&mixed12, &s).unwrap();
        assert!((red.rho() - mixed().rho()).norm() < 1e-15);

        // (|100⟩ + |001⟩)/√2
        let mut psi = DVector::<C64>::zeros(12);
        psi[s.index(1, 0, 0)] = c(1.0 / 2f64.sqrt());
        psi[s.index(0, 0, 1)] = c(1.0 / 2f64.sqrt());
        let red = partial_trace_cavity(&FullState::new(&psi * psi.adjoint(), 0.0), &s).unwrap();
        let i00 = qubit_index(0, 0);
        let i10 = qubit_index(1, 0);
        assert!((red.rho()[(i10, i10)].re - 0.5).abs() < 1e-15);
        assert!((red.rho()[(i00, i00)].re - 0.5).abs() < 1e-15);
        assert_eq!(red.rho()[(i00, i10)], c(0.0));
        assert_eq!(i10, 1);

        let wrong = FullState::new(OperatorMatrix::identity(8, 8) / c(8.0), 0.0);
        assert!(partial_trace_cavity(&wrong, &s).is_err());
    }
}
