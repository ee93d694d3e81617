//! Hamiltonian and Lindblad generator in dense form.
//!
//! These are the reference implementations; the time stepping in
//! [`super::kernel`] uses a sparse formulation of the same generator and is
//! tested against [`lindblad_rhs`].

use nalgebra::DMatrix;

use crate::fock::{OperatorMatrix, TwoModeOperators};
use crate::num::{ci, cr, Real, C};
use crate::params::SystemParams;
use crate::quantum::DensityMatrix;

/// `H = J(a1†a2 + a2†a1) + Σ_i [Δ n_i + U_i/2 a_i†² a_i² + d (a_i† + a_i)]`
/// with `d = s(t) F` the instantaneous drive.
pub fn build_hamiltonian<T: Real>(params: &SystemParams<T>, drive_value: T) -> OperatorMatrix<T> {
    let ops = TwoModeOperators::new(params.cutoff);
    hamiltonian_with(&ops, params, drive_value)
}

pub(crate) fn hamiltonian_with<T: Real>(
    ops: &TwoModeOperators<T>,
    params: &SystemParams<T>,
    drive_value: T,
) -> OperatorMatrix<T> {
    let a1 = ops.a1.as_matrix();
    let a2 = ops.a2.as_matrix();
    let a1d = a1.adjoint();
    let a2d = a2.adjoint();
    let n1 = ops.n1.as_matrix();
    let n2 = ops.n2.as_matrix();
    let half = T::of(0.5);

    let hop = &a1d * a2 + &a2d * a1;
    let kerr1 = &a1d * &a1d * a1 * a1;
    let kerr2 = &a2d * &a2d * a2 * a2;
    let drive = &a1d + a1 + &a2d + a2;

    let h: DMatrix<C<T>> = hop * cr(params.j_coupling)
        + (n1 + n2) * cr(params.delta)
        + kerr1 * cr(half * params.u1)
        + kerr2 * cr(half * params.u2)
        + drive * cr(drive_value);
    OperatorMatrix::from_matrix(h).expect("two-mode space has dim >= 4")
}

/// `dρ/dt = -i[H, ρ] + Σ_i 2γ (a_i ρ a_i† - ½{n_i, ρ})`.
pub fn lindblad_rhs<T: Real>(
    rho: &DensityMatrix<T>,
    params: &SystemParams<T>,
    drive_value: T,
) -> DMatrix<C<T>> {
    let ops = TwoModeOperators::new(params.cutoff);
    lindblad_rhs_with(&ops, rho, params, drive_value)
}

pub(crate) fn lindblad_rhs_with<T: Real>(
    ops: &TwoModeOperators<T>,
    rho: &DensityMatrix<T>,
    params: &SystemParams<T>,
    drive_value: T,
) -> DMatrix<C<T>> {
    let h = hamiltonian_with(ops, params, drive_value);
    let r = rho.as_matrix();
    let h = h.as_matrix();
    let mut out = (h * r - r * h) * ci(-T::one());
    let two_gamma = cr(T::of(2.0) * params.gamma);
    let half = cr(T::of(0.5));
    for (a, n) in [(&ops.a1, &ops.n1), (&ops.a2, &ops.n2)] {
        let a = a.as_matrix();
        let n = n.as_matrix();
        let jump = a * r * a.adjoint();
        let anti = n * r + r * n;
        out += (jump - anti * half) * two_gamma;
    }
    out
}
