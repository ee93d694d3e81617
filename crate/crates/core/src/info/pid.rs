//! BROJA partial information decomposition.
//!
//! The decomposition needs `min I_Q(s:(x1,x2))` over distributions `Q` that
//! share the `(s, x1)` and `(s, x2)` marginals of `P`. For each `s` the
//! feasible conditionals form a transportation polytope; the objective is
//! convex, and its minimum often sits on the polytope boundary. A primal
//! log-barrier Newton method handles the boundary optima without the slow
//! tail of alternating projections.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::info::discrete::{mutual_information, DiscreteJoint, Target};

/// Default objective tolerance in bits.
pub const DEFAULT_TOL: f64 = 1e-9;
/// PID atoms within this of zero are clipped to zero.
pub const ATOM_CLIP: f64 = 1e-9;
/// Below this joint MI the normalized atoms are reported as zero.
pub const ZERO_MI: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PIDResult {
    pub mi_joint: f64,
    pub mi_1: f64,
    pub mi_2: f64,
    pub redundancy: f64,
    pub synergy: f64,
    pub unique1: f64,
    pub unique2: f64,
    pub syn_norm: f64,
    pub rdn_norm: f64,
}

impl PIDResult {
    /// Atoms from the three MIs of `P` and the constrained minimum, all in bits.
    pub fn from_min(mi_joint: f64, mi_1: f64, mi_2: f64, min_joint: f64) -> Self {
        let clip = |x: f64| if x < 0.0 && x > -ATOM_CLIP { 0.0 } else { x };
        let redundancy = clip(mi_1 + mi_2 - min_joint);
        let synergy = clip(mi_joint - min_joint);
        let unique1 = clip(min_joint - mi_2);
        let unique2 = clip(min_joint - mi_1);
        let (syn_norm, rdn_norm) = if mi_joint > ZERO_MI {
            (synergy / mi_joint, redundancy / mi_joint)
        } else {
            (0.0, 0.0)
        };
        Self { mi_joint, mi_1, mi_2, redundancy, synergy, unique1, unique2, syn_norm, rdn_norm }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOptions {
    /// Duality-gap target on the objective, bits.
    pub tol: f64,
    /// Total Newton iteration budget across all barrier stages.
    pub max_iterations: usize,
}

impl Default for PidOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iterations: 4000 }
    }
}

#[derive(Debug, Clone)]
pub struct BrojaSolution {
    pub result: PIDResult,
    /// The minimizing distribution.
    pub optimum: DiscreteJoint,
    /// `min I_Q(s:(x1,x2))`, bits.
    pub min_mi: f64,
    /// Certified bound on `min_mi` minus the true minimum, in bits.
    pub gap: f64,
    pub iterations: usize,
}

pub fn broja_pid(p: &DiscreteJoint, tol: f64) -> Result<PIDResult> {
    Ok(broja_optimize(p, &PidOptions { tol, ..Default::default() })?.result)
}

struct Cell {
    flat: usize,
    s: usize,
    group: usize,
    row_con: usize,
    col_con: Option<usize>,
    /// Index into [`Problem::col_targets`], including the dropped equation.
    col_full: usize,
}

struct Problem {
    cells: Vec<Cell>,
    groups: Vec<Vec<usize>>,
    n_cons: usize,
    /// Right-hand sides of the marginal equations.
    b: Vec<f64>,
    col_targets: Vec<f64>,
    p_s: Vec<f64>,
}

impl Problem {
    fn build(p: &DiscreteJoint) -> (Self, Vec<f64>) {
        let (ns, n1, n2) = p.dims();
        let psy = p.marginal_s_x1();
        let psz = p.marginal_s_x2();
        let p_s = p.marginal_s();
        let mut cells = Vec::new();
        let mut q0 = Vec::new();
        let mut group_of = vec![usize::MAX; n1 * n2];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut n_cons = 0;
        let mut b = Vec::new();
        let mut col_targets = Vec::new();
        for s in 0..ns {
            if p_s[s] <= 0.0 {
                continue;
            }
            let ys: Vec<usize> = (0..n1).filter(|&y| psy[s * n1 + y] > 0.0).collect();
            let zs: Vec<usize> = (0..n2).filter(|&z| psz[s * n2 + z] > 0.0).collect();
            let row_base = n_cons;
            n_cons += ys.len();
            b.extend(ys.iter().map(|&y| psy[s * n1 + y]));
            // One marginal equation per slice is implied by the others.
            let col_base = n_cons;
            n_cons += zs.len() - 1;
            b.extend(zs[..zs.len() - 1].iter().map(|&z| psz[s * n2 + z]));
            let col_full_base = col_targets.len();
            col_targets.extend(zs.iter().map(|&z| psz[s * n2 + z]));
            for (iy, &y) in ys.iter().enumerate() {
                for (iz, &z) in zs.iter().enumerate() {
                    let yz = y * n2 + z;
                    if group_of[yz] == usize::MAX {
                        group_of[yz] = groups.len();
                        groups.push(Vec::new());
                    }
                    groups[group_of[yz]].push(cells.len());
                    cells.push(Cell {
                        flat: p.index(s, y, z),
                        s,
                        group: group_of[yz],
                        row_con: row_base + iy,
                        col_con: (iz + 1 < zs.len()).then_some(col_base + iz),
                        col_full: col_full_base + iz,
                    });
                    q0.push(psy[s * n1 + y] * psz[s * n2 + z] / p_s[s]);
                }
            }
        }
        (Self { cells, groups, n_cons, b, col_targets, p_s }, q0)
    }

    /// `b - A q`.
    fn residual(&self, q: &[f64]) -> Vec<f64> {
        let mut r = self.b.clone();
        for (c, &v) in self.cells.iter().zip(q) {
            r[c.row_con] -= v;
            if let Some(cc) = c.col_con {
                r[cc] -= v;
            }
        }
        r
    }

    /// Proportional-fitting sweeps that restore both marginals to round-off.
    fn polish(&self, q: &mut [f64]) {
        let n_rows = self.cells.iter().map(|c| c.row_con + 1).max().unwrap_or(0);
        let row_targets: Vec<f64> = {
            let mut t = vec![0.0; n_rows];
            for c in &self.cells {
                t[c.row_con] = self.b[c.row_con];
            }
            t
        };
        for _ in 0..3 {
            let mut rows = vec![0.0; n_rows];
            for (c, &v) in self.cells.iter().zip(q.iter()) {
                rows[c.row_con] += v;
            }
            for (c, v) in self.cells.iter().zip(q.iter_mut()) {
                *v *= row_targets[c.row_con] / rows[c.row_con];
            }
            let mut cols = vec![0.0; self.col_targets.len()];
            for (c, &v) in self.cells.iter().zip(q.iter()) {
                cols[c.col_full] += v;
            }
            for (c, v) in self.cells.iter().zip(q.iter_mut()) {
                *v *= self.col_targets[c.col_full] / cols[c.col_full];
            }
        }
    }

    /// Subtracts per-row and per-column means within every slice.
    fn centre_rows_and_cols(&self, v: &mut [f64]) {
        let n_rows = self.cells.iter().map(|c| c.row_con + 1).max().unwrap_or(0);
        let n_cols = self.col_targets.len();
        for _ in 0..4 {
            let mut sum = vec![0.0; n_rows];
            let mut cnt = vec![0.0; n_rows];
            for (c, &x) in self.cells.iter().zip(v.iter()) {
                sum[c.row_con] += x;
                cnt[c.row_con] += 1.0;
            }
            for (c, x) in self.cells.iter().zip(v.iter_mut()) {
                *x -= sum[c.row_con] / cnt[c.row_con];
            }
            let mut sum = vec![0.0; n_cols];
            let mut cnt = vec![0.0; n_cols];
            for (c, &x) in self.cells.iter().zip(v.iter()) {
                sum[c.col_full] += x;
                cnt[c.col_full] += 1.0;
            }
            for (c, x) in self.cells.iter().zip(v.iter_mut()) {
                *x -= sum[c.col_full] / cnt[c.col_full];
            }
        }
    }

    fn group_sums(&self, q: &[f64]) -> Vec<f64> {
        self.groups.iter().map(|g| g.iter().map(|&c| q[c]).sum()).collect()
    }

    /// `I_Q(s:(x1,x2))` in nats.
    fn mi(&self, q: &[f64]) -> f64 {
        let qg = self.group_sums(q);
        self.cells
            .iter()
            .zip(q)
            .filter(|(_, &v)| v > 0.0)
            .map(|(c, &v)| v * (v / (self.p_s[c.s] * qg[c.group])).ln())
            .sum()
    }

    /// Barrier objective `t I_Q - Σ ln q`, up to a constant.
    fn phi(&self, q: &[f64], t: f64) -> f64 {
        if q.iter().any(|&v| v <= 0.0) {
            return f64::INFINITY;
        }
        t * self.mi(q) - q.iter().map(|v| v.ln()).sum::<f64>()
    }
}

/// Solves the BROJA program and assembles the decomposition.
pub fn broja_optimize(p: &DiscreteJoint, opts: &PidOptions) -> Result<BrojaSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {}", opts.tol)));
    }
    let mi_joint = mutual_information(p, Target::Joint);
    let mi_1 = mutual_information(p, Target::X1);
    let mi_2 = mutual_information(p, Target::X2);

    let (prob, mut q) = Problem::build(p);
    let n = q.len();
    let tol_nats = opts.tol * LN_2;
    let mut iterations = 0;
    let mut t = 1.0;
    let mut gap = 0.0;

    // Slices whose polytope is a single point leave nothing to optimize.
    if prob.n_cons < n {
        let mut centred: Option<Vec<f64>> = None;
        loop {
            let budget = opts.max_iterations.saturating_sub(iterations);
            let (used, converged) = newton_centre(&prob, &mut q, t, budget)?;
            iterations += used;
            if !converged {
                // Round-off has stalled centring at this barrier weight; the
                // previous centre is kept with its certified gap.
                match centred {
                    Some(prev) => {
                        q = prev;
                        break;
                    }
                    None => return Err(Error::NonConvergence { iterations, residual: f64::NAN }),
                }
            }
            gap = n as f64 / t;
            if gap < tol_nats {
                break;
            }
            centred = Some(q.clone());
            t *= 10.0;
        }
    }

    let mut min_mi = prob.mi(&q) / LN_2;
    // P itself is feasible, so the minimum never exceeds I_P.
    min_mi = min_mi.min(mi_joint);
    let mut probs = vec![0.0; p.probs().len()];
    for (c, &v) in prob.cells.iter().zip(&q) {
        probs[c.flat] = v;
    }
    let optimum = DiscreteJoint::from_weights(p.dims(), probs)?;
    Ok(BrojaSolution {
        result: PIDResult::from_min(mi_joint, mi_1, mi_2, min_mi),
        optimum,
        min_mi,
        gap: gap / LN_2,
        iterations,
    })
}

/// Equality-constrained Newton on the barrier objective at fixed `t`.
/// Returns the iterations used and whether the centre was reached; `false`
/// means the budget ran out or round-off stopped measurable progress.
fn newton_centre(prob: &Problem, q: &mut [f64], t: f64, budget: usize) -> Result<(usize, bool)> {
    let n = q.len();
    let m = prob.n_cons;
    let mut grad = vec![0.0; n];
    let mut dinv = vec![0.0; n];
    let mut beta = vec![0.0; prob.groups.len()];
    let mut short_steps = 0;

    for it in 0..budget {
        let qg = prob.group_sums(q);
        for (k, c) in prob.cells.iter().enumerate() {
            grad[k] = t * (q[k] / qg[c.group]).ln() - 1.0 / q[k];
            dinv[k] = 1.0 / (t / q[k] + 1.0 / (q[k] * q[k]));
        }
        // Components of the gradient in the row space of A leave the step
        // unchanged but swamp it in round-off once t is large.
        prob.centre_rows_and_cols(&mut grad);
        // Each (x1, x2) block is diagonal minus a rank one term (t / Q) 1 1^T.
        for (g, members) in prob.groups.iter().enumerate() {
            // 1 - (t/Q) Σ dinv, written without cancellation.
            let denom: f64 = members.iter().map(|&k| q[k] / qg[g] / (t * q[k] + 1.0)).sum();
            beta[g] = t / qg[g] / denom;
        }
        let hinv = |v: &[f64], out: &mut [f64]| {
            for (g, members) in prob.groups.iter().enumerate() {
                let w: f64 = members.iter().map(|&k| dinv[k] * v[k]).sum();
                for &k in members {
                    out[k] = dinv[k] * v[k] + beta[g] * dinv[k] * w;
                }
            }
        };

        let mut schur = DMatrix::<f64>::zeros(m, m);
        for (g, members) in prob.groups.iter().enumerate() {
            for &k in members {
                for &l in members {
                    let mut h = beta[g] * dinv[k] * dinv[l];
                    if k == l {
                        h += dinv[k];
                    }
                    let (ck, cl) = (&prob.cells[k], &prob.cells[l]);
                    for ci in [Some(ck.row_con), ck.col_con].into_iter().flatten() {
                        for cj in [Some(cl.row_con), cl.col_con].into_iter().flatten() {
                            schur[(ci, cj)] += h;
                        }
                    }
                }
            }
        }
        let mut hg = vec![0.0; n];
        hinv(&grad, &mut hg);
        // Newton from a slightly infeasible point also restores A q = b.
        let resid = prob.residual(q);
        let mut rhs = -DVector::from_vec(resid);
        for (k, c) in prob.cells.iter().enumerate() {
            rhs[c.row_con] -= hg[k];
            if let Some(cc) = c.col_con {
                rhs[cc] -= hg[k];
            }
        }
        let Some(nu) = solve_spd(schur, rhs) else {
            return Ok((it, false));
        };
        let mut shifted = grad.clone();
        for (k, c) in prob.cells.iter().enumerate() {
            shifted[k] += nu[c.row_con] + c.col_con.map_or(0.0, |cc| nu[cc]);
        }
        let mut step = vec![0.0; n];
        hinv(&shifted, &mut step);
        step.iter_mut().for_each(|v| *v = -*v);

        let slope: f64 = grad.iter().zip(&step).map(|(g, d)| g * d).sum();
        let decrement = -slope;
        if !decrement.is_finite() {
            return Ok((it, false));
        }
        let phi0 = prob.phi(q, t);
        // Below round-off of the barrier value no further progress is measurable.
        if decrement * 0.5 <= 1e-10_f64.max(1e-13 * phi0.abs()) {
            return Ok((it, true));
        }
        if step.iter().any(|d| !d.is_finite()) {
            return Ok((it, false));
        }
        let mut s = 1.0;
        while q.iter().zip(&step).any(|(v, d)| v + s * d <= 0.0) {
            s *= 0.5;
        }
        let mut trial = vec![0.0; n];
        // Self-concordance: inside the quadratic region a full step always descends.
        let quadratic = decrement < 0.2 && s == 1.0;
        loop {
            for k in 0..n {
                trial[k] = q[k] + s * step[k];
            }
            if quadratic || prob.phi(&trial, t) <= phi0 + 0.25 * s * slope || s < 1e-12 {
                break;
            }
            s *= 0.5;
        }
        if s < 1e-12 {
            return Ok((it + 1, true));
        }
        short_steps = if s < 1e-3 { short_steps + 1 } else { 0 };
        if short_steps >= 8 {
            return Ok((it + 1, false));
        }
        q.copy_from_slice(&trial);
        prob.polish(q);
    }
    Ok((budget, false))
}

/// Solves a symmetric positive definite system after Jacobi scaling, with an
/// LU fallback when round-off defeats the Cholesky factorization.
fn solve_spd(mut a: DMatrix<f64>, mut rhs: DVector<f64>) -> Option<DVector<f64>> {
    let n = a.nrows();
    let scale: Vec<f64> = (0..n).map(|i| 1.0 / a[(i, i)].abs().sqrt().max(f64::MIN_POSITIVE)).collect();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= scale[i] * scale[j];
        }
        rhs[i] *= scale[i];
    }
    let y = match a.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => a.lu().solve(&rhs)?,
    };
    Some(DVector::from_iterator(n, y.iter().zip(&scale).map(|(v, s)| v * s)))
}

/// Named textbook gates, shipped as CSV data.
pub fn gate(name: &str) -> Result<DiscreteJoint> {
    let text = match name.to_ascii_lowercase().as_str() {
        "and" => include_str!("../../data/gates/and.csv"),
        "xor" => include_str!("../../data/gates/xor.csv"),
        "copy" => include_str!("../../data/gates/copy.csv"),
        "unique" => include_str!("../../data/gates/unique.csv"),
        _ => return Err(Error::param("gate", format!("unknown gate `{name}`"))),
    };
    DiscreteJoint::from_csv_str(text, name)
}

pub const GATES: [&str; 4] = ["and", "xor", "copy", "unique"];

/// Reference `(Rdn, Syn, Unq1, Unq2)` of a gate and the tolerance it is held to.
pub fn gate_reference(name: &str) -> Result<([f64; 4], f64)> {
    match name.to_ascii_lowercase().as_str() {
        "and" => Ok(([0.311, 0.5, 0.0, 0.0], 1e-3)),
        "xor" => Ok(([0.0, 1.0, 0.0, 0.0], 1e-6)),
        "copy" => Ok(([1.0, 0.0, 0.0, 0.0], 1e-6)),
        "unique" => Ok(([0.0, 0.0, 1.0, 0.0], 1e-6)),
        _ => Err(Error::param("gate", format!("unknown gate `{name}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateCheck {
    pub name: &'static str,
    pub expected: [f64; 4],
    pub got: PIDResult,
    pub tol: f64,
}

impl GateCheck {
    pub fn atoms(&self) -> [f64; 4] {
        [self.got.redundancy, self.got.synergy, self.got.unique1, self.got.unique2]
    }

    pub fn max_error(&self) -> f64 {
        self.atoms().iter().zip(self.expected).map(|(a, e)| (a - e).abs()).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_error() <= self.tol
    }
}

/// Decomposes every reference gate.
pub fn validate_gates() -> Result<Vec<GateCheck>> {
    GATES
        .iter()
        .map(|&name| {
            let (expected, tol) = gate_reference(name)?;
            let got = broja_pid(&gate(name)?, DEFAULT_TOL)?;
            Ok(GateCheck { name, expected, got, tol })
        })
        .collect()
}
