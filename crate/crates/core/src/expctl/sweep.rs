//! Sweep orchestration: signals, simulation, discretization and aggregation.

use rayon::prelude::*;

use super::config::{AnalysisKind, ExperimentConfig, SignalKind, SweepParameter};
use crate::drive::{realization_seed, DriveSignal};
use crate::error::{Error, Result};
use crate::fock::vacuum_density;
use crate::info::{broja_pid, co_information, discretize, joint_histogram, BinStrategy, PIDResult};
use crate::memory::{mc_curve, McOptions, MemoryCurve};
use crate::quantum::{evolve, quantum_mutual_information, EvolveOptions, SnapshotPolicy};
use crate::simulator::{run_readouts, Simulator};

/// Information measures of one joint table, bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoMetrics {
    pub mi_joint: f64,
    pub mi_1: f64,
    pub mi_2: f64,
    pub redundancy: f64,
    pub synergy: f64,
    pub unique1: f64,
    pub unique2: f64,
    pub syn_norm: f64,
    pub rdn_norm: f64,
    pub coi: f64,
    /// Time-averaged quantum mutual information; NaN when not computed.
    pub qmi: f64,
}

impl InfoMetrics {
    pub const NAMES: [&'static str; 11] =
        ["mi_joint", "mi_x1", "mi_x2", "rdn", "syn", "unq_x1", "unq_x2", "syn_norm", "rdn_norm", "coi", "qmi"];

    pub fn from_pid(r: &PIDResult, coi: f64, qmi: f64) -> Self {
        Self {
            mi_joint: r.mi_joint,
            mi_1: r.mi_1,
            mi_2: r.mi_2,
            redundancy: r.redundancy,
            synergy: r.synergy,
            unique1: r.unique1,
            unique2: r.unique2,
            syn_norm: r.syn_norm,
            rdn_norm: r.rdn_norm,
            coi,
            qmi,
        }
    }

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.mi_joint,
            self.mi_1,
            self.mi_2,
            self.redundancy,
            self.synergy,
            self.unique1,
            self.unique2,
            self.syn_norm,
            self.rdn_norm,
            self.coi,
            self.qmi,
        ]
    }

    pub fn from_array(a: [f64; 11]) -> Self {
        Self {
            mi_joint: a[0],
            mi_1: a[1],
            mi_2: a[2],
            redundancy: a[3],
            synergy: a[4],
            unique1: a[5],
            unique2: a[6],
            syn_norm: a[7],
            rdn_norm: a[8],
            coi: a[9],
            qmi: a[10],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PidSummary {
    pub per_realization: Vec<InfoMetrics>,
    pub mean: InfoMetrics,
    /// Standard error of the mean; zero for a single realization.
    pub stderr: InfoMetrics,
    /// PID of the histogram pooled over all realizations with shared bin edges.
    pub pooled: InfoMetrics,
    pub max_leakage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pid(PidSummary),
    Memory(MemoryCurve),
    /// The point was skipped; the message says why.
    Failed(String),
}

/// Result of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub parameter: SweepParameter,
    pub value: f64,
    pub analysis: AnalysisKind,
    pub max_delay: usize,
    pub config_hash: String,
    pub master_seed: u64,
    /// Signal seed of each realization.
    pub seeds: Vec<u64>,
    pub outcome: Outcome,
}

impl SweepRecord {
    pub fn pid(&self) -> Option<&PidSummary> {
        match &self.outcome {
            Outcome::Pid(s) => Some(s),
            _ => None,
        }
    }

    pub fn memory(&self) -> Option<&MemoryCurve> {
        match &self.outcome {
            Outcome::Memory(m) => Some(m),
            _ => None,
        }
    }
}

/// Mean and standard error of each column.
pub fn mean_stderr<const N: usize>(rows: &[[f64; N]]) -> ([f64; N], [f64; N]) {
    let n = rows.len() as f64;
    let mut mean = [0.0; N];
    let mut se = [0.0; N];
    for k in 0..N {
        mean[k] = rows.iter().map(|r| r[k]).sum::<f64>() / n;
        if rows.len() > 1 {
            let var = rows.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / (n - 1.0);
            se[k] = (var / n).sqrt();
        }
    }
    (mean, se)
}

/// Post-washout series of one realization.
struct Series {
    input: Vec<f64>,
    x1: Vec<f64>,
    x2: Vec<f64>,
    qmi: f64,
    leakage: Option<f64>,
}

fn make_signal(cfg: &ExperimentConfig, seed: u64) -> Result<DriveSignal> {
    let tau = cfg.signal.update_interval;
    match cfg.signal.kind {
        SignalKind::Telegraph => DriveSignal::telegraph(cfg.signal.switch_rate, tau, cfg.t_end(), seed),
        SignalKind::Uniform => DriveSignal::uniform_iid(tau, cfg.t_end(), seed),
    }
}

fn simulate(cfg: &ExperimentConfig, value: f64, seed: u64) -> Result<Series> {
    let params = cfg.params_at(value);
    let signal = make_signal(cfg, seed)?;
    let (samples, qmi, leakage) = if cfg.simulator == Simulator::Quantum && cfg.analysis.qmi {
        let opts = EvolveOptions {
            dt: cfg.sampling.dt,
            washout: cfg.sampling.washout,
            snapshots: SnapshotPolicy::Average,
            ..EvolveOptions::default()
        };
        let traj = evolve(&vacuum_density(params.cutoff), &params, &signal, &opts, cfg.t_end())?;
        let avg = traj.averaged.as_ref().ok_or(Error::Empty("post-washout states"))?;
        (traj.samples, quantum_mutual_information(avg)?, Some(traj.max_leakage))
    } else {
        let run = run_readouts(cfg.simulator, &params, &signal, cfg.sampling.dt, cfg.sampling.washout, cfg.t_end())?;
        (run.samples, f64::NAN, run.max_leakage)
    };
    if samples.is_empty() {
        return Err(Error::Empty("post-washout readouts"));
    }
    Ok(Series {
        input: samples.iter().map(|s| s.input).collect(),
        x1: samples.iter().map(|s| s.x1).collect(),
        x2: samples.iter().map(|s| s.x2).collect(),
        qmi,
        leakage,
    })
}

/// Bins `(s, X1, X2)` and decomposes `I(s:(X1,X2))`.
pub fn analyze_series(
    input: &[f64],
    x1: &[f64],
    x2: &[f64],
    input_bins: usize,
    output_bins: usize,
    tol: f64,
) -> Result<(PIDResult, f64)> {
    let s = discretize(input, &BinStrategy::EqualWidth(input_bins))?;
    let a = discretize(x1, &BinStrategy::EqualWidth(output_bins))?;
    let b = discretize(x2, &BinStrategy::EqualWidth(output_bins))?;
    let joint = joint_histogram(&s.symbols, &a.symbols, &b.symbols)?;
    Ok((broja_pid(&joint, tol)?, co_information(&joint)))
}

fn pid_point(cfg: &ExperimentConfig, value: f64, seeds: &[u64]) -> Result<PidSummary> {
    let an = &cfg.analysis;
    let runs: Vec<(Series, InfoMetrics)> = seeds
        .par_iter()
        .map(|&seed| {
            let series = simulate(cfg, value, seed)?;
            let (pid, coi) =
                analyze_series(&series.input, &series.x1, &series.x2, an.input_bins, an.output_bins, an.pid_tol)?;
            let m = InfoMetrics::from_pid(&pid, coi, series.qmi);
            Ok((series, m))
        })
        .collect::<Result<_>>()?;

    let rows: Vec<[f64; 11]> = runs.iter().map(|(_, m)| m.to_array()).collect();
    let (mean, se) = mean_stderr(&rows);
    let concat = |f: fn(&Series) -> &Vec<f64>| runs.iter().flat_map(|(s, _)| f(s).iter().copied()).collect::<Vec<_>>();
    let (input, x1, x2) = (concat(|s| &s.input), concat(|s| &s.x1), concat(|s| &s.x2));
    let (pid, coi) = analyze_series(&input, &x1, &x2, an.input_bins, an.output_bins, an.pid_tol)?;
    let max_leakage = runs.iter().filter_map(|(s, _)| s.leakage).reduce(f64::max);
    Ok(PidSummary {
        per_realization: runs.into_iter().map(|(_, m)| m).collect(),
        mean: InfoMetrics::from_array(mean),
        stderr: InfoMetrics::from_array(se),
        pooled: InfoMetrics::from_pid(&pid, coi, f64::NAN),
        max_leakage,
    })
}

fn memory_point(cfg: &ExperimentConfig, value: f64) -> Result<MemoryCurve> {
    let opts = McOptions {
        dt: cfg.signal.update_interval,
        washout: cfg.sampling.washout,
        duration: cfg.sampling.intervals as f64 * cfg.signal.update_interval,
        train_fraction: cfg.analysis.train_fraction,
        lambda: cfg.analysis.lambda,
    };
    mc_curve(
        &cfg.params_at(value),
        cfg.simulator,
        cfg.analysis.max_delay,
        cfg.sampling.realizations,
        cfg.sampling.seed,
        &opts,
    )
}

/// Signal seeds shared by every sweep point.
pub fn seeds_for(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.sampling.realizations as u64).map(|k| realization_seed(cfg.sampling.seed, k)).collect()
}

/// Runs every sweep point; records come back in sweep order.
///
/// Each realization index uses the same signal at every sweep point. A point
/// whose simulation or analysis fails is recorded as [`Outcome::Failed`].
pub fn run_sweep(cfg: &ExperimentConfig) -> Vec<SweepRecord> {
    let hash = cfg.hash();
    let seeds = seeds_for(cfg);
    cfg.sweep
        .values
        .par_iter()
        .map(|&value| {
            let outcome = match cfg.analysis.kind {
                AnalysisKind::Pid => pid_point(cfg, value, &seeds).map(Outcome::Pid),
                AnalysisKind::Memory => memory_point(cfg, value).map(Outcome::Memory),
            }
            .unwrap_or_else(|e| {
                log::warn!("{} = {value}: point skipped: {e}", cfg.sweep.parameter);
                Outcome::Failed(e.to_string())
            });
            SweepRecord {
                parameter: cfg.sweep.parameter,
                value,
                analysis: cfg.analysis.kind,
                max_delay: cfg.analysis.max_delay,
                config_hash: hash.clone(),
                master_seed: cfg.sampling.seed,
                seeds: seeds.clone(),
                outcome,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expctl::config::parse_config;
    use crate::expctl::output::csv_string;

    fn small(extra: &str) -> ExperimentConfig {
        parse_config(&format!(
            "regime = \"quantum\"\n[params]\nn_max = 3\n[sampling]\nintervals = 200\nrealizations = 2\nseed = 5\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn mean_and_standard_error() {
        let (m, se) = mean_stderr(&[[1.0, 0.0], [3.0, 0.0]]);
        assert_eq!(m, [2.0, 0.0]);
        assert!((se[0] - 1.0).abs() < 1e-15);
        let (_, se) = mean_stderr(&[[5.0]]);
        assert_eq!(se, [0.0]);
    }

    #[test]
    fn single_point_is_reproducible() {
        let cfg = small("[sweep]\nparameter = \"j\"\nvalues = [2.0]\n");
        let a = run_sweep(&cfg);
        let b = run_sweep(&cfg);
        assert_eq!(a.len(), 1);
        assert_eq!(csv_string(&a).unwrap(), csv_string(&b).unwrap());
        let s = a[0].pid().expect("pid outcome");
        assert_eq!(s.per_realization.len(), 2);
        assert_eq!(a[0].seeds, seeds_for(&cfg));
        assert!(s.mean.qmi.is_finite() && s.mean.qmi >= 0.0);
        let m = s.mean;
        assert!((m.mi_joint - (m.redundancy + m.synergy + m.unique1 + m.unique2)).abs() < 1e-5);
    }

    #[test]
    fn failed_points_are_recorded_and_skipped() {
        // The integrator rejects a non-finite step.
        let mut cfg = small("[sweep]\nparameter = \"j\"\nvalues = [1.0, 2.0]\n");
        cfg.sampling.intervals = 50;
        cfg.sampling.dt = f64::NAN;
        let recs = run_sweep(&cfg);
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| matches!(r.outcome, Outcome::Failed(_))));
    }

    #[test]
    fn semiclassical_points_have_no_qmi() {
        let cfg = parse_config(
            "regime = \"meanfield\"\n[sweep]\nparameter = \"j\"\nvalues = [1.0, 2.0]\n[sampling]\nintervals = 300\nrealizations = 2\n",
        )
        .unwrap();
        let recs = run_sweep(&cfg);
        for r in &recs {
            let s = r.pid().unwrap();
            assert!(s.mean.qmi.is_nan());
            assert!(s.max_leakage.is_none());
            assert!(s.pooled.mi_joint > 0.0);
        }
    }
}
