//! Binning, empirical joint distributions and Shannon information.

use std::path::Path;

use crate::error::{Error, Result};

/// Probabilities must sum to one within this.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum BinStrategy {
    /// `n` equal bins spanning the series' `[min, max]`.
    EqualWidth(usize),
    /// Monotone edges `e_0 < ... < e_k` defining `k` bins; values outside
    /// `[e_0, e_k]` go to the nearest end bin.
    ExplicitEdges(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub symbols: Vec<usize>,
    pub n_symbols: usize,
    /// Set when the series was constant under [`BinStrategy::EqualWidth`].
    pub degenerate: bool,
}

/// Equal-width edges over `[min, max]` of `series`; `None` if constant.
pub fn equal_width_edges(series: &[f64], n_bins: usize) -> Result<Option<Vec<f64>>> {
    if n_bins < 2 {
        return Err(Error::param("n_bins", format!("need at least 2 bins, got {n_bins}")));
    }
    if series.is_empty() {
        return Err(Error::Empty("series"));
    }
    let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param("series", "contains non-finite values"));
    }
    if hi <= lo {
        return Ok(None);
    }
    let w = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..=n_bins).map(|k| lo + w * k as f64).collect();
    edges[n_bins] = hi;
    Ok(Some(edges))
}

pub fn discretize(series: &[f64], strategy: &BinStrategy) -> Result<Discretized> {
    match strategy {
        BinStrategy::EqualWidth(n) => match equal_width_edges(series, *n)? {
            Some(edges) => bin_with_edges(series, &edges),
            None => {
                log::warn!("constant series binned into a single symbol");
                Ok(Discretized { symbols: vec![0; series.len()], n_symbols: *n, degenerate: true })
            }
        },
        BinStrategy::ExplicitEdges(edges) => {
            if series.is_empty() {
                return Err(Error::Empty("series"));
            }
            bin_with_edges(series, edges)
        }
    }
}

fn bin_with_edges(series: &[f64], edges: &[f64]) -> Result<Discretized> {
    if edges.len() < 3 {
        return Err(Error::param("edges", "need at least 2 bins"));
    }
    if edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("edges", "must be strictly increasing"));
    }
    let k = edges.len() - 1;
    let inner = &edges[1..k];
    let symbols = series
        .iter()
        .map(|&v| {
            if v.is_nan() {
                return Err(Error::param("series", "contains NaN"));
            }
            // Number of interior edges <= v; the top edge itself lands in the top bin.
            Ok(inner.partition_point(|&e| e <= v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Discretized { symbols, n_symbols: k, degenerate: false })
}

/// Probability table over `(s, x1, x2)`, stored with `x2` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    dims: (usize, usize, usize),
    probs: Vec<f64>,
    samples: Option<usize>,
}

/// Which output variable an MI refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    X1,
    X2,
    Joint,
}

impl DiscreteJoint {
    pub fn new(dims: (usize, usize, usize), probs: Vec<f64>) -> Result<Self> {
        let n = dims.0 * dims.1 * dims.2;
        if n == 0 {
            return Err(Error::Empty("alphabet"));
        }
        if probs.len() != n {
            return Err(Error::LengthMismatch { left: n, right: probs.len() });
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::param("probs", format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::param("probs", format!("sum to {total}, not 1")));
        }
        Ok(Self { dims, probs, samples: None })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(dims: (usize, usize, usize), weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::param("weights", "must have a positive finite sum"));
        }
        Self::new(dims, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Sample count when built from data.
    pub fn samples(&self) -> Option<usize> {
        self.samples
    }

    #[inline]
    pub fn index(&self, s: usize, x1: usize, x2: usize) -> usize {
        (s * self.dims.1 + x1) * self.dims.2 + x2
    }

    pub fn get(&self, s: usize, x1: usize, x2: usize) -> f64 {
        self.probs[self.index(s, x1, x2)]
    }

    /// Same distribution with the two outputs exchanged.
    pub fn swap_outputs(&self) -> Self {
        let (ns, n1, n2) = self.dims;
        let mut probs = vec![0.0; self.probs.len()];
        for s in 0..ns {
            for a in 0..n1 {
                for b in 0..n2 {
                    probs[(s * n2 + b) * n1 + a] = self.get(s, a, b);
                }
            }
        }
        Self { dims: (ns, n2, n1), probs, samples: self.samples }
    }

    pub fn marginal_s(&self) -> Vec<f64> {
        let (ns, n1, n2) = self.dims;
        (0..ns).map(|s| self.probs[s * n1 * n2..(s + 1) * n1 * n2].iter().sum()).collect()
    }

    /// `P(s, x1)` as an `ns x n1` row-major table.
    pub fn marginal_s_x1(&self) -> Vec<f64> {
        let (ns, n1, n2) = self.dims;
        let mut out = vec![0.0; ns * n1];
        for s in 0..ns {
            for a in 0..n1 {
                out[s * n1 + a] = (0..n2).map(|b| self.get(s, a, b)).sum();
            }
        }
        out
    }

    /// `P(s, x2)` as an `ns x n2` row-major table.
    pub fn marginal_s_x2(&self) -> Vec<f64> {
        let (ns, n1, n2) = self.dims;
        let mut out = vec![0.0; ns * n2];
        for s in 0..ns {
            for a in 0..n1 {
                for b in 0..n2 {
                    out[s * n2 + b] += self.get(s, a, b);
                }
            }
        }
        out
    }

    /// Reads `s,x1,x2,prob` rows; absent cells are zero.
    pub fn from_csv_str(text: &str, origin: &str) -> Result<Self> {
        let csv_err = |line: usize, message: String| Error::Csv { path: origin.to_string(), line, message };
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(|ch: char| ch.is_ascii_alphabetic()) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(csv_err(i + 1, format!("expected 4 fields, found {}", fields.len())));
            }
            let sym = |k: usize| fields[k].parse::<usize>().map_err(|e| csv_err(i + 1, e.to_string()));
            let p = fields[3].parse::<f64>().map_err(|e| csv_err(i + 1, e.to_string()))?;
            rows.push((sym(0)?, sym(1)?, sym(2)?, p));
        }
        if rows.is_empty() {
            return Err(csv_err(0, "no rows".into()));
        }
        let dims = rows.iter().fold((0, 0, 0), |d, r| (d.0.max(r.0 + 1), d.1.max(r.1 + 1), d.2.max(r.2 + 1)));
        let mut probs = vec![0.0; dims.0 * dims.1 * dims.2];
        for (s, a, b, p) in rows {
            probs[(s * dims.1 + a) * dims.2 + b] += p;
        }
        let total: f64 = probs.iter().sum();
        // Decimal round-off in files is tolerated, then normalized away.
        if (total - 1.0).abs() > 1e-9 {
            return Err(csv_err(0, format!("probabilities sum to {total}")));
        }
        Self::from_weights(dims, probs)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    /// Nonzero cells as `s,x1,x2,prob` rows with round-trip precision.
    pub fn to_csv_string(&self) -> String {
        let (ns, n1, n2) = self.dims;
        let mut out = String::from("s,x1,x2,prob\n");
        for s in 0..ns {
            for a in 0..n1 {
                for b in 0..n2 {
                    let p = self.get(s, a, b);
                    if p > 0.0 {
                        out.push_str(&format!("{s},{a},{b},{p:e}\n"));
                    }
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Normalized count table of aligned symbol streams.
pub fn joint_histogram(s: &[usize], x1: &[usize], x2: &[usize]) -> Result<DiscreteJoint> {
    let size = |v: &[usize]| v.iter().max().map_or(0, |m| m + 1);
    joint_histogram_with_dims(s, x1, x2, (size(s), size(x1), size(x2)))
}

pub fn joint_histogram_with_dims(
    s: &[usize],
    x1: &[usize],
    x2: &[usize],
    dims: (usize, usize, usize),
) -> Result<DiscreteJoint> {
    if s.len() != x1.len() {
        return Err(Error::LengthMismatch { left: s.len(), right: x1.len() });
    }
    if s.len() != x2.len() {
        return Err(Error::LengthMismatch { left: s.len(), right: x2.len() });
    }
    if s.is_empty() {
        return Err(Error::Empty("symbol streams"));
    }
    let mut counts = vec![0u64; dims.0 * dims.1 * dims.2];
    for ((&a, &b), &c) in s.iter().zip(x1).zip(x2) {
        if a >= dims.0 || b >= dims.1 || c >= dims.2 {
            return Err(Error::param("symbols", format!("({a},{b},{c}) outside alphabet {dims:?}")));
        }
        counts[(a * dims.1 + b) * dims.2 + c] += 1;
    }
    let mut joint = DiscreteJoint::from_weights(dims, counts.into_iter().map(|k| k as f64).collect())?;
    joint.samples = Some(s.len());
    Ok(joint)
}

fn xlogx_ratio(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        p * (p / q).log2()
    } else {
        0.0
    }
}

/// Shannon mutual information in bits between `s` and the chosen output.
pub fn mutual_information(p: &DiscreteJoint, target: Target) -> f64 {
    let (ns, n1, n2) = p.dims;
    let ps = p.marginal_s();
    match target {
        Target::X1 => {
            let psx = p.marginal_s_x1();
            let px: Vec<f64> = (0..n1).map(|a| (0..ns).map(|s| psx[s * n1 + a]).sum()).collect();
            (0..ns)
                .flat_map(|s| (0..n1).map(move |a| (s, a)))
                .map(|(s, a)| xlogx_ratio(psx[s * n1 + a], ps[s] * px[a]))
                .sum()
        }
        Target::X2 => mutual_information(&p.swap_outputs(), Target::X1),
        Target::Joint => {
            let mut pr = vec![0.0; n1 * n2];
            for s in 0..ns {
                for r in 0..n1 * n2 {
                    pr[r] += p.probs[s * n1 * n2 + r];
                }
            }
            let mut acc = 0.0;
            for s in 0..ns {
                for r in 0..n1 * n2 {
                    acc += xlogx_ratio(p.probs[s * n1 * n2 + r], ps[s] * pr[r]);
                }
            }
            acc
        }
    }
}

/// `I(s:x1) + I(s:x2) - I(s:(x1,x2))`, in bits; negative when synergistic.
pub fn co_information(p: &DiscreteJoint) -> f64 {
    mutual_information(p, Target::X1) + mutual_information(p, Target::X2) - mutual_information(p, Target::Joint)
}
