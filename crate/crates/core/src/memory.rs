//! Short-term memory task: linear readout of past inputs from the
//! amplitudes `(X1, X2, Y1, Y2)` and the delay-resolved capacity `MC(n)`.

use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::drive::{realization_seed, DriveSignal};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::quantum::ReadoutSample;
use crate::simulator::{run_readouts, Simulator};

/// Time step of the memory task; also the input update interval.
pub const TASK_DT: f64 = 0.01;
/// Transient discarded before training rows are collected.
pub const TASK_WASHOUT: f64 = 10.0;
/// Post-washout duration of each realization.
pub const TASK_DURATION: f64 = 30.0;
pub const TRAIN_FRACTION: f64 = 0.7;
/// Variances below this make the capacity zero.
pub const VARIANCE_FLOOR: f64 = 1e-14;
/// Delays with mean capacity above this enter the exponential fit.
pub const FIT_FLOOR: f64 = 1e-3;

/// Readout design matrix. The last column is the constant 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Inserts an extra feature column before the bias.
    pub fn with_feature(&self, column: &[f64]) -> Result<Self> {
        if column.len() != self.rows() {
            return Err(Error::LengthMismatch { left: column.len(), right: self.rows() });
        }
        let at = self.cols() - 1;
        let mut data = self.data.clone().insert_column(at, 0.0);
        data.set_column(at, &DVector::from_column_slice(column));
        Ok(Self { data })
    }

    /// Rows `range` as a new matrix.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self { data: self.data.rows(range.start, range.len()).into_owned() }
    }
}

/// Rows `(X1, X2, Y1, Y2, 1)` and the input of the interval ending at each row.
pub fn build_features(samples: &[ReadoutSample]) -> Result<(FeatureMatrix, Vec<f64>)> {
    if samples.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    let data = DMatrix::from_fn(samples.len(), 5, |r, c| {
        let s = &samples[r];
        [s.x1, s.x2, s.y1, s.y2, 1.0][c]
    });
    Ok((FeatureMatrix { data }, samples.iter().map(|s| s.input).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutFit {
    pub weights: DVector<f64>,
    /// Every non-bias column was constant; only the bias was fitted.
    pub degenerate: bool,
}

impl ReadoutFit {
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<f64>> {
        if features.cols() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), found: features.cols() });
        }
        Ok((features.as_matrix() * &self.weights).iter().copied().collect())
    }
}

/// Minimizes `|y − Fw|² + λ|w|²`. At `λ = 0` a truncated SVD of the
/// column-scaled design gives the minimum-norm solution.
pub fn fit_readout(features: &FeatureMatrix, targets: &[f64], lambda: f64) -> Result<ReadoutFit> {
    let f = features.as_matrix();
    let (rows, cols) = f.shape();
    if targets.len() != rows {
        return Err(Error::LengthMismatch { left: targets.len(), right: rows });
    }
    if rows <= cols {
        return Err(Error::param("features", format!("need more rows than columns, got {rows}x{cols}")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param("lambda", format!("must be >= 0, got {lambda}")));
    }
    let y = DVector::from_column_slice(targets);

    let constant = (0..cols - 1).all(|c| {
        let col = f.column(c);
        col.iter().all(|&v| v == col[0])
    });
    if constant && lambda == 0.0 {
        let mut weights = DVector::zeros(cols);
        weights[cols - 1] = y.mean();
        return Ok(ReadoutFit { weights, degenerate: true });
    }

    let weights = if lambda > 0.0 {
        let mut normal = f.transpose() * f;
        for k in 0..cols {
            normal[(k, k)] += lambda;
        }
        let rhs = f.transpose() * &y;
        normal
            .cholesky()
            .map(|ch| ch.solve(&rhs))
            .ok_or_else(|| Error::param("lambda", "regularized normal matrix is not positive definite"))?
    } else {
        let scale: Vec<f64> = (0..cols)
            .map(|c| {
                let n = f.column(c).norm();
                if n > 0.0 { n } else { 1.0 }
            })
            .collect();
        let scaled = DMatrix::from_fn(rows, cols, |r, c| f[(r, c)] / scale[c]);
        let svd = scaled.svd(true, true);
        let smax = svd.singular_values.max();
        let eps = smax * f64::EPSILON * rows as f64;
        let z = svd.solve(&y, eps).map_err(|m| Error::param("features", m))?;
        DVector::from_fn(cols, |c, _| z[c] / scale[c])
    };
    Ok(ReadoutFit { weights, degenerate: constant })
}

/// Squared Pearson correlation; zero when either variance is below the floor.
pub fn memory_capacity(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: targets.len() });
    }
    let n = predictions.len();
    if n < 2 {
        return Err(Error::Empty("capacity needs at least two points"));
    }
    let mp = predictions.iter().sum::<f64>() / n as f64;
    let mt = targets.iter().sum::<f64>() / n as f64;
    let (mut cov, mut vp, mut vt) = (0.0, 0.0, 0.0);
    for (p, t) in predictions.iter().zip(targets) {
        cov += (p - mp) * (t - mt);
        vp += (p - mp) * (p - mp);
        vt += (t - mt) * (t - mt);
    }
    let nf = n as f64;
    if vp / nf < VARIANCE_FLOOR || vt / nf < VARIANCE_FLOOR {
        return Ok(0.0);
    }
    Ok((cov * cov / (vp * vt)).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct McOptions {
    pub dt: f64,
    pub washout: f64,
    pub duration: f64,
    pub train_fraction: f64,
    pub lambda: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            dt: TASK_DT,
            washout: TASK_WASHOUT,
            duration: TASK_DURATION,
            train_fraction: TRAIN_FRACTION,
            lambda: 0.0,
        }
    }
}

/// Capacity per delay for one set of readouts.
///
/// Row `k` is the readout at the end of input interval `k`, so the target
/// `s(t − nΔt)` for delay `n ≥ 1` is the input recorded `n − 1` rows earlier.
/// Rows lacking a target are dropped, then the first `train_fraction` of the
/// remaining rows train the readout and the rest score it.
pub fn capacity_by_delay(samples: &[ReadoutSample], delays: &[usize], opts: &McOptions) -> Result<Vec<f64>> {
    let (features, inputs) = build_features(samples)?;
    delays
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::param("delay", "delays start at 1"));
            }
            let lag = n - 1;
            if features.rows() <= lag {
                return Err(Error::Empty("trajectory shorter than the delay"));
            }
            let rows = features.slice(lag..features.rows());
            let targets = &inputs[..inputs.len() - lag];
            score_split(&rows, targets, opts.train_fraction, opts.lambda)
        })
        .collect()
}

/// Trains on the leading `train_fraction` of rows and returns the capacity on the rest.
pub fn score_split(features: &FeatureMatrix, targets: &[f64], train_fraction: f64, lambda: f64) -> Result<f64> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::param("train_fraction", format!("must lie in (0, 1), got {train_fraction}")));
    }
    let n = features.rows();
    let split = (n as f64 * train_fraction).round() as usize;
    if split < 2 || n - split < 2 {
        return Err(Error::Empty("train or test split"));
    }
    let fit = fit_readout(&features.slice(0..split), &targets[..split], lambda)?;
    let pred = fit.predict(&features.slice(split..n))?;
    memory_capacity(&pred, &targets[split..])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryCurve {
    pub delays: Vec<usize>,
    /// Mean over realizations.
    pub mc: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Decay exponent of `MC(n) ~ exp(−Γ n)`; `None` with fewer than two usable delays.
    pub gamma_fit: Option<f64>,
    pub intercept: Option<f64>,
    pub realizations: usize,
}

impl MemoryCurve {
    pub fn total(&self) -> f64 {
        self.mc.iter().sum()
    }

    pub fn to_csv_string(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.12e}"));
        let mut out = format!(
            "# gamma_fit={},intercept={},realizations={}\nn,mc_mean,mc_stderr\n",
            fmt(self.gamma_fit),
            fmt(self.intercept),
            self.realizations
        );
        for ((n, m), s) in self.delays.iter().zip(&self.mc).zip(&self.stderr) {
            out.push_str(&format!("{n},{m:.12e},{s:.12e}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv_string().as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Least-squares line through `(n, ln MC(n))` over delays with `MC > FIT_FLOOR`.
/// Returns `(Γ, intercept)`.
pub fn fit_decay(delays: &[usize], mc: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = delays
        .iter()
        .zip(mc)
        .filter(|(_, &m)| m > FIT_FLOOR)
        .map(|(&n, &m)| (n as f64, m.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((-slope, my - slope * mx))
}

/// Memory curve for delays `1..=max_delay`, averaged over `realizations`
/// independent uniform inputs. Realization `k` draws from stream `k` of `seed`.
pub fn mc_curve(
    params: &SystemParams<f64>,
    simulator: Simulator,
    max_delay: usize,
    realizations: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<MemoryCurve> {
    if max_delay == 0 {
        return Err(Error::param("max_delay", "must be >= 1"));
    }
    if realizations == 0 {
        return Err(Error::param("realizations", "must be >= 1"));
    }
    let delays: Vec<usize> = (1..=max_delay).collect();
    let t_end = opts.washout + opts.duration;
    let per_run: Vec<Vec<f64>> = (0..realizations)
        .into_par_iter()
        .map(|k| {
            let signal = DriveSignal::uniform_iid(opts.dt, t_end, realization_seed(seed, k as u64))?;
            let run = run_readouts(simulator, params, &signal, opts.dt, opts.washout, t_end)?;
            capacity_by_delay(&run.samples, &delays, opts)
        })
        .collect::<Result<_>>()?;

    let r = realizations as f64;
    let mc: Vec<f64> = (0..delays.len()).map(|d| per_run.iter().map(|v| v[d]).sum::<f64>() / r).collect();
    let stderr = (0..delays.len())
        .map(|d| {
            if realizations < 2 {
                return 0.0;
            }
            let var = per_run.iter().map(|v| (v[d] - mc[d]).powi(2)).sum::<f64>() / (r - 1.0);
            (var / r).sqrt()
        })
        .collect();
    let fit = fit_decay(&delays, &mc);
    Ok(MemoryCurve {
        delays,
        mc,
        stderr,
        gamma_fit: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        realizations,
    })
}
