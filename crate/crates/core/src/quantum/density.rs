//! Density matrices, von Neumann entropy and quantum mutual information.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{partial_trace, OperatorMatrix};
use crate::num::{Real, C};

/// Hermiticity tolerance (max element deviation) for a valid state.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Trace tolerance for a valid state.
pub const TRACE_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted as numerically nonnegative.
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Eigenvalues below this contribute nothing to the entropy.
const ENTROPY_FLOOR: f64 = 1e-14;

/// Hermitian, trace-one complex matrix on a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real>(DMatrix<C<T>>);

impl<T: Real> DensityMatrix<T> {
    /// Wraps a matrix without checking the state invariants.
    pub fn from_matrix_unchecked(m: DMatrix<C<T>>) -> Self {
        Self(m)
    }

    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn try_new(m: DMatrix<C<T>>) -> Result<Self> {
        let rho = Self(m);
        rho.validate()?;
        Ok(rho)
    }

    /// Projector onto a (normalized) pure state.
    pub fn pure(psi: &DVector<C<T>>) -> Self {
        Self(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C<T>> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C<T>> {
        self.0
    }

    pub fn trace(&self) -> C<T> {
        self.0.trace()
    }

    /// `Tr(op rho)`.
    pub fn expect(&self, op: &OperatorMatrix<T>) -> C<T> {
        let m = op.as_matrix();
        let d = self.dim();
        let mut acc = C::new(T::zero(), T::zero());
        for i in 0..d {
            for k in 0..d {
                acc += m[(i, k)] * self.0[(k, i)];
            }
        }
        acc
    }

    /// Largest `|rho - rho^†|` element.
    pub fn hermiticity_defect(&self) -> T {
        let d = self.dim();
        let mut worst = T::zero();
        for i in 0..d {
            for j in i..d {
                worst = worst.max(crate::num::abs(self.0[(i, j)] - self.0[(j, i)].conj()));
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let herm = (&self.0 + self.0.adjoint()) * C::new(T::of(0.5), T::zero());
        let mut ev: Vec<T> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues().first().copied().unwrap_or_else(T::zero)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > T::of(HERMITICITY_TOL) {
            return Err(Error::param(
                "rho",
                format!("not Hermitian (defect {:e})", h.as_f64()),
            ));
        }
        let tr = self.trace();
        if (tr.re - T::one()).abs() > T::of(TRACE_TOL) || tr.im.abs() > T::of(TRACE_TOL) {
            return Err(Error::param(
                "rho",
                format!("trace {} + {}i differs from 1", tr.re.as_f64(), tr.im.as_f64()),
            ));
        }
        let min = self.min_eigenvalue();
        if min < -T::of(POSITIVITY_TOL) {
            return Err(Error::NegativeEigenvalue(min.as_f64()));
        }
        Ok(())
    }
}

/// `S(rho) = -Tr(rho ln rho)` in nats.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let mut s = T::zero();
    for lambda in rho.eigenvalues() {
        if lambda < -T::of(POSITIVITY_TOL) {
            return Err(Error::NegativeEigenvalue(lambda.as_f64()));
        }
        if lambda > T::of(ENTROPY_FLOOR) {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s)
}

/// `I(1:2) = S(rho_1) + S(rho_2) - S(rho_12)` in nats.
pub fn quantum_mutual_information<T: Real>(rho12: &DensityMatrix<T>) -> Result<T> {
    let s12 = von_neumann_entropy(rho12)?;
    let s1 = von_neumann_entropy(&partial_trace(rho12, 1)?)?;
    let s2 = von_neumann_entropy(&partial_trace(rho12, 2)?)?;
    Ok(s1 + s2 - s12)
}

/// Element-wise mean of a set of states.
pub fn time_averaged_state<T: Real>(snapshots: &[DensityMatrix<T>]) -> Result<DensityMatrix<T>> {
    let mut avg = RunningAverage::new();
    for s in snapshots {
        avg.push(s)?;
    }
    avg.finish()
}

/// Streaming element-wise mean, so long runs need not keep every snapshot.
#[derive(Debug, Clone, Default)]
pub struct RunningAverage<T: Real> {
    sum: Option<DMatrix<C<T>>>,
    count: usize,
}

impl<T: Real> RunningAverage<T> {
    pub fn new() -> Self {
        Self {
            sum: None,
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn push(&mut self, rho: &DensityMatrix<T>) -> Result<()> {
        match &mut self.sum {
            None => self.sum = Some(rho.0.clone()),
            Some(sum) => {
                if sum.nrows() != rho.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: sum.nrows(),
                        found: rho.dim(),
                    });
                }
                *sum += &rho.0;
            }
        }
        self.count += 1;
        Ok(())
    }

    /// Accumulates a state held as a row-major buffer.
    pub(crate) fn push_row_major(&mut self, dim: usize, buf: &[C<T>]) {
        let sum = self.sum.get_or_insert_with(|| DMatrix::zeros(dim, dim));
        for r in 0..dim {
            for c in 0..dim {
                sum[(r, c)] += buf[r * dim + c];
            }
        }
        self.count += 1;
    }

    pub fn finish(self) -> Result<DensityMatrix<T>> {
        let sum = self.sum.ok_or(Error::Empty("snapshot set"))?;
        let n = T::of(self.count as f64);
        Ok(DensityMatrix(sum / C::new(n, T::zero())))
    }
}
