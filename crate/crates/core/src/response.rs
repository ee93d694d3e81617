//! Linear response around the undriven steady state: effective potential,
//! its Hessian at the origin, and the poles of the retarded Green's function.

use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Relative determinant residual above which a numeric pole is rejected.
pub const POLE_RESIDUAL_TOL: f64 = 1e-8;

/// Poles whose `|Re|` differ by less than this count as a labeling tie.
pub const LABEL_TIE_TOL: f64 = 1e-9;

/// `V = Σ_j (Δ|α_j|² + U_j|α_j|⁴/4) + J(α1 α2* + α2 α1*)`.
pub fn effective_potential(alpha1: Complex64, alpha2: Complex64, params: &SystemParams<f64>) -> f64 {
    let n1 = alpha1.norm_sqr();
    let n2 = alpha2.norm_sqr();
    let hop = alpha1 * alpha2.conj();
    params.delta * (n1 + n2)
        + 0.25 * (params.u1 * n1 * n1 + params.u2 * n2 * n2)
        + 2.0 * params.j_coupling * hop.re
}

/// Hessian of [`effective_potential`] at the origin in the
/// `(Re α1, Im α1, Re α2, Im α2)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianSpectrum {
    pub matrix: Matrix4<f64>,
    /// Ascending.
    pub eigenvalues: [f64; 4],
}

impl HessianSpectrum {
    /// Smallest eigenvalue modulus; zero marks a flat direction.
    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()))
    }
}

pub fn hessian_at_origin(params: &SystemParams<f64>) -> HessianSpectrum {
    let d = 2.0 * params.delta;
    let j = 2.0 * params.j_coupling;
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        d, 0.0, j, 0.0,
        0.0, d, 0.0, j,
        j, 0.0, d, 0.0,
        0.0, j, 0.0, d,
    );
    let eig = SymmetricEigen::new(matrix).eigenvalues;
    let mut eigenvalues = [eig[0], eig[1], eig[2], eig[3]];
    eigenvalues.sort_by(f64::total_cmp);
    HessianSpectrum { matrix, eigenvalues }
}

/// Retarded poles split into the slow and fast branches by `|Re ω|`.
/// Each pair is ordered by ascending real part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleSet {
    pub slow: [Complex64; 2],
    pub fast: [Complex64; 2],
    /// The branches could not be told apart (`|Re ω_s| = |Re ω_f|`, e.g. `J = 0`).
    pub tie: bool,
}

impl PoleSet {
    fn from_unlabeled(mut poles: [Complex64; 4]) -> Self {
        poles.sort_by(|a, b| a.re.abs().total_cmp(&b.re.abs()).then(a.re.total_cmp(&b.re)));
        let scale = poles.iter().fold(1.0f64, |m, p| m.max(p.re.abs()));
        let tie = (poles[2].re.abs() - poles[1].re.abs()) <= LABEL_TIE_TOL * scale;
        // On a tie keep one member of each sign in both branches.
        let (mut slow, mut fast) = if tie {
            ([poles[0], poles[3]], [poles[1], poles[2]])
        } else {
            ([poles[0], poles[1]], [poles[2], poles[3]])
        };
        slow.sort_by(|a, b| a.re.total_cmp(&b.re));
        fast.sort_by(|a, b| a.re.total_cmp(&b.re));
        PoleSet { slow, fast, tie }
    }

    pub fn all(&self) -> [Complex64; 4] {
        [self.slow[0], self.slow[1], self.fast[0], self.fast[1]]
    }

    /// Largest distance between matching poles of two sets.
    pub fn max_distance(&self, other: &PoleSet) -> f64 {
        self.all()
            .iter()
            .zip(other.all().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn check_regime(params: &SystemParams<f64>) -> Result<()> {
    params.validate()?;
    if !(params.delta < 0.0) {
        return Err(Error::param("delta", "pole analysis needs delta < 0"));
    }
    if params.j_coupling < 0.0 {
        return Err(Error::param("j_coupling", "pole analysis needs J >= 0"));
    }
    Ok(())
}

/// `ω_s = ±|J − |Δ|| − iγ`, `ω_f = ±|J + |Δ|| − iγ`.
pub fn retarded_poles_analytic(params: &SystemParams<f64>) -> Result<PoleSet> {
    check_regime(params)?;
    let d = params.delta.abs();
    let j = params.j_coupling;
    let g = params.gamma;
    let s = (j - d).abs();
    let f = j + d;
    Ok(PoleSet::from_unlabeled([
        Complex64::new(-s, -g),
        Complex64::new(s, -g),
        Complex64::new(-f, -g),
        Complex64::new(f, -g),
    ]))
}

/// Inverse retarded Green's function at mean-field amplitudes `(α1, α2)` in
/// the basis `(δα1(ω), δα1*(−ω), δα2(ω), δα2*(−ω))`.
pub fn inverse_retarded(
    omega: Complex64,
    params: &SystemParams<f64>,
    alpha1: Complex64,
    alpha2: Complex64,
) -> Matrix4<Complex64> {
    let i = Complex64::i();
    let g = params.gamma;
    let j = Complex64::from(-params.j_coupling);
    let z = Complex64::from(0.0);
    let g1 = params.delta + params.u1 * alpha1.norm_sqr();
    let g2 = params.delta + params.u2 * alpha2.norm_sqr();
    let m1 = -0.5 * params.u1 * alpha1 * alpha1;
    let m2 = -0.5 * params.u2 * alpha2 * alpha2;
    #[rustfmt::skip]
    let m = Matrix4::new(
        omega - g1 + i * g, m1, j, z,
        m1.conj(), -omega - g1 - i * g, z, j,
        j, z, omega - g2 + i * g, m2,
        z, j, m2.conj(), -omega - g2 - i * g,
    );
    m
}

/// Real generator of the linearized flow `d(δx1, δy1, δx2, δy2)/dt` whose
/// eigenvalues `λ` give the retarded poles `ω = iλ`.
pub fn linear_generator(params: &SystemParams<f64>, alpha1: Complex64, alpha2: Complex64) -> Matrix4<f64> {
    let i = Complex64::i();
    let g1 = params.delta + params.u1 * alpha1.norm_sqr();
    let g2 = params.delta + params.u2 * alpha2.norm_sqr();
    let p1 = 0.5 * params.u1 * alpha1 * alpha1;
    let p2 = 0.5 * params.u2 * alpha2 * alpha2;
    let flow = |d1: Complex64, d2: Complex64| {
        let r1 = -i * ((g1 - i * params.gamma) * d1 + p1 * d1.conj() + params.j_coupling * d2);
        let r2 = -i * ((g2 - i * params.gamma) * d2 + p2 * d2.conj() + params.j_coupling * d1);
        Vector4::new(r1.re, r1.im, r2.re, r2.im)
    };
    let mut a = Matrix4::zeros();
    for k in 0..4 {
        let mut e = [0.0; 4];
        e[k] = 1.0;
        let col = flow(Complex64::new(e[0], e[1]), Complex64::new(e[2], e[3]));
        a.set_column(k, &col);
    }
    a
}

/// Poles around an arbitrary mean-field point, including the anomalous
/// `U_j α_j² / 2` couplings. Each root is checked against the determinant.
pub fn retarded_poles_at(params: &SystemParams<f64>, alpha1: Complex64, alpha2: Complex64) -> Result<PoleSet> {
    params.validate()?;
    let a = linear_generator(params, alpha1, alpha2);
    let lambdas = a.complex_eigenvalues();
    let poles: [Complex64; 4] = std::array::from_fn(|k| Complex64::i() * lambdas[k]);
    let scale = 1.0 + a.abs().max() + poles.iter().fold(0.0f64, |m, w| m.max(w.norm()));
    for w in poles {
        let det = inverse_retarded(w, params, alpha1, alpha2).determinant();
        let rel = det.norm() / scale.powi(4);
        if !(rel <= POLE_RESIDUAL_TOL) {
            return Err(Error::PoleResidual(rel));
        }
    }
    Ok(PoleSet::from_unlabeled(poles))
}

/// Poles at the vacuum, from the eigenvalues of the linear generator.
pub fn retarded_poles_numeric(params: &SystemParams<f64>) -> Result<PoleSet> {
    check_regime(params)?;
    let zero = Complex64::new(0.0, 0.0);
    retarded_poles_at(params, zero, zero)
}

/// One row of a pole trajectory in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleScanRow {
    pub j: f64,
    pub poles: PoleSet,
}

/// Numeric vacuum poles over a list of couplings, other parameters fixed.
pub fn pole_scan(params: &SystemParams<f64>, couplings: &[f64]) -> Result<Vec<PoleScanRow>> {
    couplings
        .par_iter()
        .map(|&j| {
            let poles = retarded_poles_numeric(&params.with_j(j))?;
            Ok(PoleScanRow { j, poles })
        })
        .collect()
}

/// Columns `J, re_slow, im_slow, re_fast, im_fast`, reporting the
/// non-negative-frequency member of each branch.
pub fn pole_scan_csv(rows: &[PoleScanRow]) -> String {
    let mut out = String::from("J,re_slow,im_slow,re_fast,im_fast\n");
    for r in rows {
        let s = r.poles.slow[1];
        let f = r.poles.fast[1];
        out.push_str(&format!("{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n", r.j, s.re, s.im, f.re, f.im));
    }
    out
}

pub fn write_pole_scan_csv(rows: &[PoleScanRow], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(pole_scan_csv(rows).as_bytes()).map_err(|e| Error::io(path, e))
}

/// Least-squares fit of `c_s e^{−γt} cos(Re ω_s t) + c_f e^{−γt} cos(Re ω_f t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationFit {
    pub c_slow: f64,
    pub c_fast: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn fit_relaxation(times: &[f64], values: &[f64], poles: &PoleSet, gamma: f64) -> Result<RelaxationFit> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch { left: times.len(), right: values.len() });
    }
    if times.len() < 2 {
        return Err(Error::Empty("relaxation series needs at least two points"));
    }
    let ws = poles.slow[1].re.abs();
    let wf = poles.fast[1].re.abs();
    let basis = DMatrix::from_fn(times.len(), 2, |r, k| {
        let t = times[r];
        let w = if k == 0 { ws } else { wf };
        (-gamma * t).exp() * (w * t).cos()
    });
    let y = DVector::from_column_slice(values);
    let coef = basis
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|m| Error::param("relaxation fit", m))?;
    let resid = &basis * &coef - &y;
    Ok(RelaxationFit {
        c_slow: coef[0],
        c_fast: coef[1],
        residual: (resid.norm_squared() / times.len() as f64).sqrt(),
    })
}
