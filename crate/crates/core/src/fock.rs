//! Truncated Fock-space operators and states.
//!
//! Two-mode basis ordering: mode 1 is the slow (outer) tensor index, so the
//! basis state `|n1, n2>` sits at index `n1 * (n_max + 1) + n2`. Both
//! [`embed_mode`] and [`partial_trace`] rely on this ordering.

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::num::{cr, Real, C};
use crate::quantum::DensityMatrix;

/// Maximum photon number kept per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockCutoff {
    n_max: usize,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidCutoff(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(self) -> usize {
        self.n_max
    }

    /// Single-mode basis dimension, `n_max + 1`.
    pub fn mode_dim(self) -> usize {
        self.n_max + 1
    }

    /// Two-mode basis dimension, `(n_max + 1)^2`.
    pub fn dim(self) -> usize {
        self.mode_dim() * self.mode_dim()
    }

    /// Two-mode basis index of `|n1, n2>`.
    pub fn index(self, n1: usize, n2: usize) -> usize {
        n1 * self.mode_dim() + n2
    }
}

impl Default for FockCutoff {
    fn default() -> Self {
        Self { n_max: 10 }
    }
}

/// Dense square complex operator on a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real>(DMatrix<C<T>>);

impl<T: Real> OperatorMatrix<T> {
    pub fn from_matrix(m: DMatrix<C<T>>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() < 2 {
            return Err(Error::param("dim", "operator dimension must be >= 2"));
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
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

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Operator product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    /// Largest absolute element, used for operator-norm-free comparisons.
    pub fn max_abs(&self) -> T {
        self.0.iter().fold(T::zero(), |m, z| m.max(crate::num::abs(*z)))
    }
}

impl<T: Real> Deref for OperatorMatrix<T> {
    type Target = DMatrix<C<T>>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

/// Single-mode annihilation operator with `<n-1|a|n> = sqrt(n)`.
pub fn build_annihilation<T: Real>(cutoff: FockCutoff) -> OperatorMatrix<T> {
    let d = cutoff.mode_dim();
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = cr(T::of(n as f64).sqrt());
    }
    OperatorMatrix(m)
}

/// Embeds a single-mode operator into the two-mode space:
/// `op ⊗ I` for mode 1, `I ⊗ op` for mode 2.
pub fn embed_mode<T: Real>(
    op: &OperatorMatrix<T>,
    mode: usize,
    cutoff: FockCutoff,
) -> Result<OperatorMatrix<T>> {
    let d = cutoff.mode_dim();
    if op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: op.dim(),
        });
    }
    let eye = DMatrix::<C<T>>::identity(d, d);
    let m = match mode {
        1 => op.0.kronecker(&eye),
        2 => eye.kronecker(&op.0),
        _ => return Err(Error::param("mode", format!("{mode} not in {{1, 2}}"))),
    };
    Ok(OperatorMatrix(m))
}

/// Projector onto the two-mode vacuum `|0,0>`.
pub fn vacuum_density<T: Real>(cutoff: FockCutoff) -> DensityMatrix<T> {
    let d = cutoff.dim();
    let mut m = DMatrix::zeros(d, d);
    m[(0, 0)] = cr(T::one());
    DensityMatrix::from_matrix_unchecked(m)
}

/// Reduced state of the kept mode (1 or 2).
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: usize) -> Result<DensityMatrix<T>> {
    let dim = rho.dim();
    let m = (dim as f64).sqrt().round() as usize;
    if m * m != dim || m < 2 {
        return Err(Error::param(
            "rho",
            format!("dimension {dim} is not a square of a per-mode dimension"),
        ));
    }
    let full = rho.as_matrix();
    let mut out = DMatrix::<C<T>>::zeros(m, m);
    match keep {
        1 => {
            for i in 0..m {
                for j in 0..m {
                    let mut acc = C::new(T::zero(), T::zero());
                    for k in 0..m {
                        acc += full[(i * m + k, j * m + k)];
                    }
                    out[(i, j)] = acc;
                }
            }
        }
        2 => {
            for k in 0..m {
                for l in 0..m {
                    let mut acc = C::new(T::zero(), T::zero());
                    for i in 0..m {
                        acc += full[(i * m + k, i * m + l)];
                    }
                    out[(k, l)] = acc;
                }
            }
        }
        _ => return Err(Error::param("keep", format!("{keep} not in {{1, 2}}"))),
    }
    Ok(DensityMatrix::from_matrix_unchecked(out))
}

/// The two-mode ladder and number operators for a given cutoff.
#[derive(Debug, Clone)]
pub struct TwoModeOperators<T: Real> {
    pub cutoff: FockCutoff,
    pub a1: OperatorMatrix<T>,
    pub a2: OperatorMatrix<T>,
    pub n1: OperatorMatrix<T>,
    pub n2: OperatorMatrix<T>,
}

impl<T: Real> TwoModeOperators<T> {
    pub fn new(cutoff: FockCutoff) -> Self {
        let a = build_annihilation::<T>(cutoff);
        // Dimensions agree by construction.
        let a1 = embed_mode(&a, 1, cutoff).expect("mode dimension");
        let a2 = embed_mode(&a, 2, cutoff).expect("mode dimension");
        let n1 = a1.adjoint().mul(&a1);
        let n2 = a2.adjoint().mul(&a2);
        Self {
            cutoff,
            a1,
            a2,
            n1,
            n2,
        }
    }
}
