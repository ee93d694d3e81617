//! Mean-field and second-order cumulant equations of motion.

use crate::drive::DriveSignal;
use crate::error::{Error, Result};
use crate::num::{c, ci, cr, Real, C};
use crate::params::SystemParams;
use crate::quantum::ReadoutSample;

/// Photon numbers with an imaginary part beyond this flag a broken integration.
pub const IM_NUMBER_TOL: f64 = 1e-8;

/// Coherent amplitudes `(<a1>, <a2>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState<T: Real> {
    pub alpha1: C<T>,
    pub alpha2: C<T>,
}

/// First and second moments kept by the Gaussian closure. The remaining
/// second moments are conjugates: `<a2† a1> = conj(a1dag_a2)` and
/// `<a1† a2†> = conj(a1a2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantState<T: Real> {
    pub a1: C<T>,
    pub a2: C<T>,
    pub n1: C<T>,
    pub n2: C<T>,
    pub a1sq: C<T>,
    pub a2sq: C<T>,
    pub a1dag_a2: C<T>,
    pub a1a2: C<T>,
}

impl<T: Real> MeanFieldState<T> {
    pub fn zero() -> Self {
        Self::new(C::new(T::zero(), T::zero()), C::new(T::zero(), T::zero()))
    }

    pub fn new(alpha1: C<T>, alpha2: C<T>) -> Self {
        Self { alpha1, alpha2 }
    }

    fn to_array(self) -> [C<T>; 2] {
        [self.alpha1, self.alpha2]
    }

    fn from_array(a: [C<T>; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl<T: Real> CumulantState<T> {
    pub fn zero() -> Self {
        Self::from_array([C::new(T::zero(), T::zero()); 8])
    }

    /// Factorized moments of the product coherent state `|alpha1, alpha2>`.
    pub fn coherent(alpha1: C<T>, alpha2: C<T>) -> Self {
        Self {
            a1: alpha1,
            a2: alpha2,
            n1: cr(alpha1.norm_sqr()),
            n2: cr(alpha2.norm_sqr()),
            a1sq: alpha1 * alpha1,
            a2sq: alpha2 * alpha2,
            a1dag_a2: alpha1.conj() * alpha2,
            a1a2: alpha1 * alpha2,
        }
    }

    fn to_array(self) -> [C<T>; 8] {
        [self.a1, self.a2, self.n1, self.n2, self.a1sq, self.a2sq, self.a1dag_a2, self.a1a2]
    }

    fn from_array(a: [C<T>; 8]) -> Self {
        Self {
            a1: a[0],
            a2: a[1],
            n1: a[2],
            n2: a[3],
            a1sq: a[4],
            a2sq: a[5],
            a1dag_a2: a[6],
            a1a2: a[7],
        }
    }
}

/// `dα_j/dt = -(γ + iΔ) α_j - i J α_j' - i U_j α_j |α_j|² - i F(t)`.
pub fn meanfield_rhs<T: Real>(
    state: &MeanFieldState<T>,
    params: &SystemParams<T>,
    drive_value: T,
) -> MeanFieldState<T> {
    let damp = c(params.gamma, params.delta);
    let f = ci(drive_value);
    let one = |a: C<T>, other: C<T>, u: T| -damp * a - ci(params.j_coupling) * other - ci(u * a.norm_sqr()) * a - f;
    MeanFieldState::new(
        one(state.alpha1, state.alpha2, params.u1),
        one(state.alpha2, state.alpha1, params.u2),
    )
}

/// Second-order cumulant closure: third and fourth cumulants set to zero.
pub fn cumulant_rhs<T: Real>(
    state: &CumulantState<T>,
    params: &SystemParams<T>,
    drive_value: T,
) -> CumulantState<T> {
    let CumulantState { a1, a2, n1, n2, a1sq, a2sq, a1dag_a2: x, a1a2: p } = *state;
    let two = T::of(2.0);
    let damp = c(params.gamma, params.delta);
    let (j, f) = (params.j_coupling, drive_value);
    let (u1, u2) = (params.u1, params.u2);
    let im = |v: T| ci(v);
    let (a1c, a2c) = (a1.conj(), a2.conj());
    let x_c = x.conj();

    // <a†aa> closed at second order.
    let kerr_first = |a: C<T>, n: C<T>, sq: C<T>| a.conj() * sq + a * n * two - a.conj() * a * a * two;
    let da1 = -damp * a1 - im(u1) * kerr_first(a1, n1, a1sq) - im(j) * a2 - im(f);
    let da2 = -damp * a2 - im(u2) * kerr_first(a2, n2, a2sq) - im(j) * a1 - im(f);

    let hop = im(j) * (x - x_c);
    let dn1 = -n1 * (two * params.gamma) - hop + im(f) * (a1 - a1c);
    let dn2 = -n2 * (two * params.gamma) + hop + im(f) * (a2 - a2c);

    let six = T::of(6.0);
    let four = T::of(4.0);
    let kerr_sq = |a: C<T>, n: C<T>, sq: C<T>| sq + n * sq * six - a.conj() * a * a * a * four;
    let da1sq = -damp * a1sq * two - im(two * j) * p - im(two * f) * a1 - im(u1) * kerr_sq(a1, n1, a1sq);
    let da2sq = -damp * a2sq * two - im(two * j) * p - im(two * f) * a2 - im(u2) * kerr_sq(a2, n2, a2sq);

    let dx = -x * (two * params.gamma) - im(j) * (n1 - n2) + im(f) * (a2 - a1c)
        + im(u1) * (n1 * x * two + a1sq.conj() * p - a1c * a1c * a1 * a2 * two)
        - im(u2) * (n2 * x * two + a2sq * p.conj() - a1c * a2c * a2 * a2 * two);

    let dp = -damp * p * two - im(j) * (a1sq + a2sq) - im(f) * (a1 + a2)
        - im(u1) * (n1 * p * two + x * a1sq - a1c * a1 * a1 * a2 * two)
        - im(u2) * (n2 * p * two + x_c * a2sq - a2c * a1 * a2 * a2 * two);

    CumulantState::from_array([da1, da2, dn1, dn2, da1sq, da2sq, dx, dp])
}

/// Which closure to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsKind {
    MeanField,
    Cumulant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SemiclassicalState<T: Real> {
    MeanField(MeanFieldState<T>),
    Cumulant(CumulantState<T>),
}

impl<T: Real> SemiclassicalState<T> {
    pub fn zero(kind: RhsKind) -> Self {
        match kind {
            RhsKind::MeanField => Self::MeanField(MeanFieldState::zero()),
            RhsKind::Cumulant => Self::Cumulant(CumulantState::zero()),
        }
    }

    pub fn kind(&self) -> RhsKind {
        match self {
            Self::MeanField(_) => RhsKind::MeanField,
            Self::Cumulant(_) => RhsKind::Cumulant,
        }
    }

    /// `(<a1>, <a2>)`.
    pub fn amplitudes(&self) -> (C<T>, C<T>) {
        match self {
            Self::MeanField(s) => (s.alpha1, s.alpha2),
            Self::Cumulant(s) => (s.a1, s.a2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub washout: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { dt: crate::quantum::evolve::DEFAULT_DT, washout: crate::quantum::evolve::DEFAULT_WASHOUT }
    }
}

#[derive(Debug, Clone)]
pub struct SemiclassicalRun<T: Real> {
    pub samples: Vec<ReadoutSample>,
    pub final_state: SemiclassicalState<T>,
}

fn rk4<T: Real, const N: usize>(y: &mut [C<T>; N], h: T, f: impl Fn(&[C<T>; N]) -> [C<T>; N]) {
    let half = h * T::of(0.5);
    let shift = |y: &[C<T>; N], k: &[C<T>; N], s: T| -> [C<T>; N] { std::array::from_fn(|i| y[i] + k[i] * s) };
    let k1 = f(y);
    let k2 = f(&shift(y, &k1, half));
    let k3 = f(&shift(y, &k2, half));
    let k4 = f(&shift(y, &k3, h));
    let sixth = h / T::of(6.0);
    let two = T::of(2.0);
    for i in 0..N {
        y[i] += (k1[i] + (k2[i] + k3[i]) * two + k4[i]) * sixth;
    }
}

/// Fixed-step RK4 with the same interval, washout and readout contract as
/// [`crate::quantum::evolve`].
pub fn integrate<T: Real>(
    state0: SemiclassicalState<T>,
    params: &SystemParams<T>,
    signal: &DriveSignal,
    opts: &IntegrateOptions,
    t_end: f64,
) -> Result<SemiclassicalRun<T>> {
    params.validate()?;
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::param("dt", format!("must be positive, got {}", opts.dt)));
    }
    let tau = signal.update_interval();
    if t_end > signal.t_end() * (1.0 + 1e-12) {
        return Err(Error::TimeOutOfRange { t: t_end, t_end: signal.t_end() });
    }
    let n_intervals = ((t_end / tau - 1e-9).ceil().max(0.0) as usize).min(signal.len());
    let n_steps = ((tau / opts.dt).round() as usize).max(1);
    let h = T::of(tau / n_steps as f64);

    let mut state = state0;
    let mut samples = Vec::new();
    for k in 0..n_intervals {
        let s = signal.values()[k];
        let drive = T::of(s) * params.f_strength;
        for i in 0..n_steps {
            let step = k * n_steps + i + 1;
            let time = step as f64 * tau / n_steps as f64;
            match &mut state {
                SemiclassicalState::MeanField(m) => {
                    let mut y = m.to_array();
                    rk4(&mut y, h, |y| meanfield_rhs(&MeanFieldState::from_array(*y), params, drive).to_array());
                    if !finite(&y) {
                        return Err(Error::Divergence { step, time });
                    }
                    *m = MeanFieldState::from_array(y);
                }
                SemiclassicalState::Cumulant(cs) => {
                    let mut y = cs.to_array();
                    rk4(&mut y, h, |y| cumulant_rhs(&CumulantState::from_array(*y), params, drive).to_array());
                    if !finite(&y) {
                        return Err(Error::Divergence { step, time });
                    }
                    let im_n = y[2].im.abs().max(y[3].im.abs()).as_f64();
                    if im_n > IM_NUMBER_TOL {
                        return Err(Error::InvariantBreach {
                            step,
                            time,
                            detail: format!("photon number has imaginary part {im_n:e}"),
                        });
                    }
                    *cs = CumulantState::from_array(y);
                }
            }
        }
        let time = (k + 1) as f64 * tau;
        if time >= opts.washout - 1e-9 * tau {
            let (a1, a2) = state.amplitudes();
            samples.push(ReadoutSample {
                time,
                x1: a1.re.as_f64(),
                x2: a2.re.as_f64(),
                y1: a1.im.as_f64(),
                y2: a2.im.as_f64(),
                input: s,
            });
        }
    }
    Ok(SemiclassicalRun { samples, final_state: state })
}

fn finite<T: Real, const N: usize>(y: &[C<T>; N]) -> bool {
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Regime;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn linear(delta: f64, gamma: f64, j: f64, f: f64) -> SystemParams<f64> {
        let mut p = SystemParams::zero();
        p.delta = delta;
        p.gamma = gamma;
        p.j_coupling = j;
        p.f_strength = f;
        p
    }

    fn no_washout() -> IntegrateOptions {
        IntegrateOptions { washout: 0.0, ..Default::default() }
    }

    #[test]
    fn origin_is_undriven_fixed_point() {
        let p = SystemParams::<f64>::preset(Regime::MeanField);
        let d = meanfield_rhs(&MeanFieldState::zero(), &p, 0.0);
        assert_eq!(d, MeanFieldState::zero());
        let d = cumulant_rhs(&CumulantState::zero(), &p, 0.0);
        assert_eq!(d, CumulantState::zero());
    }

    #[test]
    fn linear_fixed_point() {
        let p = linear(-2.0, 0.5, 0.0, 2.0);
        let star = C::new(0.0, -2.0) / C::new(0.5, -2.0);
        let d = meanfield_rhs(&MeanFieldState::new(star, star), &p, 2.0);
        assert!(d.alpha1.norm() < 1e-14 && d.alpha2.norm() < 1e-14);

        let s = DriveSignal::constant(1.0, 1.0, 40.0).unwrap();
        let run = integrate(SemiclassicalState::zero(RhsKind::MeanField), &p, &s, &no_washout(), 40.0).unwrap();
        let (a1, _) = run.final_state.amplitudes();
        assert_relative_eq!(a1.re, star.re, epsilon = 1e-8);
        assert_relative_eq!(a1.im, star.im, epsilon = 1e-8);
    }

    #[test]
    fn cumulant_first_moments_match_meanfield_when_linear() {
        let p = linear(-2.0, 0.5, 1.3, 0.7);
        let s = DriveSignal::telegraph(1.0, 0.5, 10.0, 3).unwrap();
        let mf = integrate(SemiclassicalState::zero(RhsKind::MeanField), &p, &s, &no_washout(), 10.0).unwrap();
        let cu = integrate(SemiclassicalState::zero(RhsKind::Cumulant), &p, &s, &no_washout(), 10.0).unwrap();
        for (a, b) in mf.samples.iter().zip(&cu.samples) {
            for (u, v) in a.outputs().iter().zip(b.outputs()) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_state_zero_drive_stays_zero() {
        let mut p = SystemParams::<f64>::preset(Regime::Cumulant);
        p.f_strength = 0.0;
        let s = DriveSignal::telegraph(1.0, 1.0, 20.0, 1).unwrap();
        for kind in [RhsKind::MeanField, RhsKind::Cumulant] {
            let run = integrate(SemiclassicalState::zero(kind), &p, &s, &no_washout(), 20.0).unwrap();
            assert!(run.samples.iter().all(|r| r.outputs().iter().all(|v| *v == 0.0)));
        }
    }

    #[test]
    fn meanfield_orbit_bounded_across_couplings() {
        let s = DriveSignal::telegraph(1.0, 1.0, 200.0, 7).unwrap();
        for j in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            let p = SystemParams::<f64>::preset(Regime::MeanField).with_j(j);
            let run = integrate(SemiclassicalState::zero(RhsKind::MeanField), &p, &s, &no_washout(), 200.0).unwrap();
            let max = run.samples.iter().flat_map(|r| r.outputs()).fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max < 50.0, "J = {j}: |alpha| reached {max}");
        }
    }

    #[test]
    fn divergence_is_reported() {
        let mut p = linear(0.0, 0.0, 0.0, 1.0);
        p.u1 = 1e6;
        p.u2 = 1e6;
        let s = DriveSignal::constant(1.0, 1.0, 5.0).unwrap();
        let opts = IntegrateOptions { dt: 0.5, washout: 0.0 };
        let r = integrate(SemiclassicalState::zero(RhsKind::MeanField), &p, &s, &opts, 5.0);
        assert!(matches!(r, Err(Error::Divergence { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn coherent_relations_preserved_without_drive_or_kerr(
            re1 in -1.5f64..1.5, im1 in -1.5f64..1.5, re2 in -1.5f64..1.5, im2 in -1.5f64..1.5,
            j in 0.0f64..3.0,
        ) {
            let p = linear(-2.0, 0.5, j, 0.0);
            let s0 = CumulantState::coherent(C::new(re1, im1), C::new(re2, im2));
            let s = DriveSignal::constant(0.0, 1.0, 5.0).unwrap();
            // Fine step so RK4 truncation stays well below the tolerance.
            let opts = IntegrateOptions { dt: 1e-3, washout: 0.0 };
            let run = integrate(SemiclassicalState::Cumulant(s0), &p, &s, &opts, 5.0).unwrap();
            let SemiclassicalState::Cumulant(end) = run.final_state else { unreachable!() };
            let want = CumulantState::coherent(end.a1, end.a2);
            for (a, b) in end.to_array().iter().zip(want.to_array().iter()) {
                prop_assert!((a - b).norm() < 1e-8);
            }
        }

        #[test]
        fn cumulant_reduces_to_meanfield_on_coherent_states(
            re1 in -1.0f64..1.0, im1 in -1.0f64..1.0, re2 in -1.0f64..1.0, im2 in -1.0f64..1.0,
            drive in -1.0f64..1.0,
        ) {
            // With factorized moments the closed Kerr term equals U |α|² α.
            let p = SystemParams::<f64>::preset(Regime::Cumulant);
            let (a1, a2) = (C::new(re1, im1), C::new(re2, im2));
            let cu = cumulant_rhs(&CumulantState::coherent(a1, a2), &p, drive);
            let mf = meanfield_rhs(&MeanFieldState::new(a1, a2), &p, drive);
            prop_assert!((cu.a1 - mf.alpha1).norm() < 1e-12);
            prop_assert!((cu.a2 - mf.alpha2).norm() < 1e-12);
        }
    }
}
