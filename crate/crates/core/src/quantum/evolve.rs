//! Time evolution of the master equation under a piecewise-constant drive.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::drive::DriveSignal;
use crate::error::{Error, Result};
use crate::num::{Real, C};
use crate::params::SystemParams;
use crate::quantum::kernel::{
    from_hermitian_coords, interval_propagator, to_hermitian_coords, LiouvilleKernel, Rk4Workspace,
};
use crate::quantum::{DensityMatrix, RunningAverage};

/// Default integration step.
pub const DEFAULT_DT: f64 = 0.01;
/// Default transient discarded before statistics are collected.
pub const DEFAULT_WASHOUT: f64 = 20.0;
/// Trace drift or negativity beyond this aborts a run.
pub const ABORT_TOL: f64 = 1e-6;
/// Largest Liouville dimension `dim^2` for which interval propagators are built.
pub const PROPAGATOR_MAX_LIOUVILLE: usize = 1296;
/// Propagators are only worth building for drives with few distinct values.
const PROPAGATOR_MAX_VALUES: usize = 4;

/// One readout at a signal-update boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSample {
    pub time: f64,
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
    /// Drive value of the interval that just ended.
    pub input: f64,
}

impl ReadoutSample {
    /// `(X1, X2, Y1, Y2)`.
    pub fn outputs(&self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotPolicy {
    #[default]
    None,
    /// Keep every post-washout boundary state.
    Store,
    /// Keep only their running mean.
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stepping {
    /// Propagators when the drive has few values and the space is small.
    #[default]
    Auto,
    Direct,
    Propagator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    pub washout: f64,
    pub snapshots: SnapshotPolicy,
    /// Eigenvalue check cadence in boundaries; 0 checks only the final state.
    pub positivity_every: usize,
    /// Abort when the edge population exceeds this.
    pub leakage_limit: Option<f64>,
    pub stepping: Stepping,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            washout: DEFAULT_WASHOUT,
            snapshots: SnapshotPolicy::None,
            positivity_every: 200,
            leakage_limit: None,
            stepping: Stepping::Auto,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub samples: Vec<ReadoutSample>,
    pub snapshots: Vec<DensityMatrix<T>>,
    pub averaged: Option<DensityMatrix<T>>,
    pub final_state: DensityMatrix<T>,
    /// Largest population seen on the cutoff edge.
    pub max_leakage: f64,
    pub max_trace_drift: f64,
}

/// Integrates from `rho0` up to `t_end` with classic RK4, holding the drive
/// `s(t) F` fixed within each update interval.
///
/// `opts.dt` is the largest step used; it is refined when the Kerr spectrum at
/// the chosen cutoff would put RK4 outside its stability region.
pub fn evolve<T: Real>(
    rho0: &DensityMatrix<T>,
    params: &SystemParams<T>,
    signal: &DriveSignal,
    opts: &EvolveOptions,
    t_end: f64,
) -> Result<Trajectory<T>> {
    params.validate()?;
    let dim = params.cutoff.dim();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho0.dim() });
    }
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::param("dt", format!("must be positive, got {}", opts.dt)));
    }
    let tau = signal.update_interval();
    if t_end > signal.t_end() * (1.0 + 1e-12) {
        return Err(Error::TimeOutOfRange { t: t_end, t_end: signal.t_end() });
    }
    let n_intervals = ((t_end / tau - 1e-9).ceil().max(0.0) as usize).min(signal.len());
    let kernel = LiouvilleKernel::new(params);
    let max_s = signal.values()[..n_intervals].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = kernel.spectral_bound(T::of(max_s) * params.f_strength).as_f64();
    let n_steps = steps_per_interval(tau, opts.dt, bound);
    let h = T::of(tau / n_steps as f64);
    let use_props = match opts.stepping {
        Stepping::Direct => false,
        Stepping::Propagator => true,
        Stepping::Auto => {
            dim * dim <= PROPAGATOR_MAX_LIOUVILLE
                && n_steps > 1
                && distinct_count(&signal.values()[..n_intervals], PROPAGATOR_MAX_VALUES + 1)
                    <= PROPAGATOR_MAX_VALUES
        }
    };

    let mut rho: Vec<C<T>> = (0..dim * dim).map(|i| rho0.as_matrix()[(i / dim, i % dim)]).collect();
    let mut ws = Rk4Workspace::new(dim);
    let mut props: HashMap<u64, DMatrix<T>> = HashMap::new();
    let mut coords = DVector::<T>::zeros(dim * dim);

    let mut traj = Trajectory {
        samples: Vec::new(),
        snapshots: Vec::new(),
        averaged: None,
        final_state: rho0.clone(),
        max_leakage: 0.0,
        max_trace_drift: 0.0,
    };
    let mut avg = RunningAverage::new();
    let mut recorded = 0usize;

    for k in 0..n_intervals {
        let s = signal.values()[k];
        let drive = T::of(s) * params.f_strength;
        if use_props {
            let p = props
                .entry(s.to_bits())
                .or_insert_with(|| interval_propagator(&kernel, drive, h, n_steps));
            to_hermitian_coords(dim, &rho, coords.as_mut_slice());
            let moved = &*p * &coords;
            from_hermitian_coords(dim, moved.as_slice(), &mut rho);
        } else {
            for _ in 0..n_steps {
                ws.step(&kernel, &mut rho, drive, h);
            }
        }

        let time = (k + 1) as f64 * tau;
        let step = (k + 1) * n_steps;
        let trace: f64 = (0..dim).map(|i| rho[i * dim + i].re.as_f64()).sum();
        let drift = (trace - 1.0).abs();
        if !drift.is_finite() {
            return Err(Error::Divergence { step, time });
        }
        traj.max_trace_drift = traj.max_trace_drift.max(drift);
        if drift > ABORT_TOL {
            return Err(Error::InvariantBreach { step, time, detail: format!("trace drift {drift:e}") });
        }
        let leak = kernel.edge_population(&rho).as_f64();
        traj.max_leakage = traj.max_leakage.max(leak);
        if let Some(limit) = opts.leakage_limit {
            if leak > limit {
                return Err(Error::InvariantBreach {
                    step,
                    time,
                    detail: format!("cutoff-edge population {leak:e} exceeds {limit:e}"),
                });
            }
        }
        if opts.positivity_every > 0 && (k + 1) % opts.positivity_every == 0 {
            check_positivity(dim, &rho, step, time)?;
        }

        if time >= opts.washout - 1e-9 * tau {
            let a1 = kernel.expect_annihilation(&rho, 1);
            let a2 = kernel.expect_annihilation(&rho, 2);
            traj.samples.push(ReadoutSample {
                time,
                x1: a1.re.as_f64(),
                x2: a2.re.as_f64(),
                y1: a1.im.as_f64(),
                y2: a2.im.as_f64(),
                input: s,
            });
            recorded += 1;
            match opts.snapshots {
                SnapshotPolicy::None => {}
                SnapshotPolicy::Store => traj.snapshots.push(to_density(dim, &rho)),
                SnapshotPolicy::Average => avg.push_row_major(dim, &rho),
            }
        }
    }

    check_positivity(dim, &rho, n_intervals * n_steps, n_intervals as f64 * tau)?;
    if opts.snapshots == SnapshotPolicy::Average && recorded > 0 {
        traj.averaged = Some(avg.finish()?);
    }
    traj.final_state = to_density(dim, &rho);
    Ok(traj)
}

/// RK4 is stable on the imaginary axis up to `|h λ| = 2√2`.
const RK4_STABLE_SPAN: f64 = 2.5;

/// Steps per update interval: at least `tau / dt`, refined so that
/// `h * bound` stays inside the RK4 stability region.
pub fn steps_per_interval(tau: f64, dt: f64, bound: f64) -> usize {
    let nominal = (tau / dt).round().max(1.0);
    let stable = (tau * bound / RK4_STABLE_SPAN).ceil();
    nominal.max(stable) as usize
}

fn distinct_count(values: &[f64], stop_at: usize) -> usize {
    let mut seen: Vec<u64> = Vec::new();
    for v in values {
        let b = v.to_bits();
        if !seen.contains(&b) {
            seen.push(b);
            if seen.len() >= stop_at {
                break;
            }
        }
    }
    seen.len()
}

fn to_density<T: Real>(dim: usize, rho: &[C<T>]) -> DensityMatrix<T> {
    DensityMatrix::from_matrix_unchecked(DMatrix::from_row_slice(dim, dim, rho))
}

fn check_positivity<T: Real>(dim: usize, rho: &[C<T>], step: usize, time: f64) -> Result<()> {
    let lam = to_density(dim, rho).min_eigenvalue().as_f64();
    if lam < -ABORT_TOL {
        return Err(Error::InvariantBreach { step, time, detail: format!("eigenvalue {lam:e}") });
    }
    Ok(())
}
