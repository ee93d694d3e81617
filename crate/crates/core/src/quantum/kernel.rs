//! Sparse Lindblad generator on row-major buffers, RK4 stepping, and exact
//! interval propagators for drives that take few distinct values.
//!
//! With `H_eff = H - iγ(n1 + n2)` and `K = -i H_eff ρ`, the generator of a
//! Hermitian `ρ` is `K + K† + 2γ Σ_i a_i ρ a_i†`. Every row of `a_i` has at
//! most one nonzero, so the jump term is a gather.

use nalgebra::{DMatrix, DVector};

use crate::fock::FockCutoff;
use crate::num::{c, Real, C};
use crate::params::SystemParams;

type Row<T> = Vec<(usize, C<T>)>;

/// `(source index, weight)` for one row of a ladder operator.
type Ladder<T> = Vec<Option<(usize, T)>>;

#[derive(Debug, Clone)]
pub struct LiouvilleKernel<T: Real> {
    cutoff: FockCutoff,
    dim: usize,
    /// Rows of `-i H_eff` at zero drive.
    static_rows: Vec<Row<T>>,
    /// Rows of `-i (a1 + a1† + a2 + a2†)`.
    drive_rows: Vec<Row<T>>,
    ladders: [Ladder<T>; 2],
    two_gamma: T,
}

impl<T: Real> LiouvilleKernel<T> {
    pub fn new(params: &SystemParams<T>) -> Self {
        let cutoff = params.cutoff;
        let m = cutoff.mode_dim();
        let n_max = cutoff.n_max();
        let dim = cutoff.dim();
        let half = T::of(0.5);
        let occ = |r: usize| (r / m, r % m);

        let mut ladders: [Ladder<T>; 2] = [vec![None; dim], vec![None; dim]];
        for r in 0..dim {
            let (n1, n2) = occ(r);
            if n1 < n_max {
                ladders[0][r] = Some((r + m, T::of(((n1 + 1) as f64).sqrt())));
            }
            if n2 < n_max {
                ladders[1][r] = Some((r + 1, T::of(((n2 + 1) as f64).sqrt())));
            }
        }

        let minus_i = |x: T| c(T::zero(), -x);
        let mut static_rows = Vec::with_capacity(dim);
        let mut drive_rows = Vec::with_capacity(dim);
        for r in 0..dim {
            let (n1, n2) = occ(r);
            let (f1, f2) = (T::of(n1 as f64), T::of(n2 as f64));
            let diag_h = params.delta * (f1 + f2)
                + half * params.u1 * f1 * (f1 - T::one())
                + half * params.u2 * f2 * (f2 - T::one());
            // -i (h - iγ n) = -γ n - i h
            let mut row = vec![(r, c(-params.gamma * (f1 + f2), -diag_h))];
            // a1† a2 maps |n1, n2> to |n1+1, n2-1>: element (r, r - m + 1) with r = (n1, n2).
            if n1 >= 1 && n2 < n_max {
                let w = T::of(((n1 * (n2 + 1)) as f64).sqrt());
                row.push((r - m + 1, minus_i(params.j_coupling * w)));
            }
            if n2 >= 1 && n1 < n_max {
                let w = T::of(((n2 * (n1 + 1)) as f64).sqrt());
                row.push((r + m - 1, minus_i(params.j_coupling * w)));
            }
            if params.j_coupling == T::zero() {
                row.truncate(1);
            }
            static_rows.push(row);

            let mut drow = Vec::with_capacity(4);
            // a_i: row r couples to r + stride; a_i†: row r couples to r - stride.
            if n1 < n_max {
                drow.push((r + m, minus_i(T::of(((n1 + 1) as f64).sqrt()))));
            }
            if n1 >= 1 {
                drow.push((r - m, minus_i(T::of((n1 as f64).sqrt()))));
            }
            if n2 < n_max {
                drow.push((r + 1, minus_i(T::of(((n2 + 1) as f64).sqrt()))));
            }
            if n2 >= 1 {
                drow.push((r - 1, minus_i(T::of((n2 as f64).sqrt()))));
            }
            drive_rows.push(drow);
        }

        Self {
            cutoff,
            dim,
            static_rows,
            drive_rows,
            ladders,
            two_gamma: T::of(2.0) * params.gamma,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    /// Upper bound on the spectral radius of the generator at drive amplitude
    /// up to `max_drive`, from Gershgorin discs of `H` plus the decay rates.
    pub fn spectral_bound(&self, max_drive: T) -> T {
        let mut lo = T::max_value().unwrap_or(T::of(f64::MAX));
        let mut hi = -lo;
        let mut decay = T::zero();
        for (srow, drow) in self.static_rows.iter().zip(&self.drive_rows) {
            // static_rows hold -i H_eff, so H_rr = -Im and the decay sits in Re.
            let (_, diag) = srow[0];
            let centre = -diag.im;
            decay = decay.max(-diag.re);
            let mut radius = T::zero();
            for &(_, z) in &srow[1..] {
                radius += crate::num::abs(z);
            }
            for &(_, z) in drow {
                radius += crate::num::abs(z) * max_drive.abs();
            }
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        (hi - lo) + T::of(4.0) * decay
    }

    /// Writes `dρ/dt` for Hermitian `rho` into `out`; `scratch` holds `K`.
    pub fn rhs_into(&self, rho: &[C<T>], drive: T, out: &mut [C<T>], scratch: &mut [C<T>]) {
        let d = self.dim;
        debug_assert_eq!(rho.len(), d * d);
        let zero = C::new(T::zero(), T::zero());
        for r in 0..d {
            let k_row = &mut scratch[r * d..(r + 1) * d];
            k_row.fill(zero);
            for &(col, coef) in &self.static_rows[r] {
                axpy(k_row, coef, &rho[col * d..(col + 1) * d]);
            }
            if drive != T::zero() {
                for &(col, coef) in &self.drive_rows[r] {
                    axpy(k_row, coef * drive, &rho[col * d..(col + 1) * d]);
                }
            }
        }
        for r in 0..d {
            for col in 0..d {
                out[r * d + col] = scratch[r * d + col] + scratch[col * d + r].conj();
            }
        }
        for ladder in &self.ladders {
            for r in 0..d {
                let Some((kr, wr)) = ladder[r] else { continue };
                let src = &rho[kr * d..(kr + 1) * d];
                let dst = &mut out[r * d..(r + 1) * d];
                let wr = wr * self.two_gamma;
                for col in 0..d {
                    if let Some((kc, wc)) = ladder[col] {
                        dst[col] += src[kc] * (wr * wc);
                    }
                }
            }
        }
    }

    /// `Tr(a_mode ρ)` for `mode` in `{1, 2}`.
    pub fn expect_annihilation(&self, rho: &[C<T>], mode: usize) -> C<T> {
        let d = self.dim;
        let mut acc = C::new(T::zero(), T::zero());
        for (r, entry) in self.ladders[mode - 1].iter().enumerate() {
            if let Some((k, w)) = entry {
                acc += rho[k * d + r] * *w;
            }
        }
        acc
    }

    /// Total population on basis states with either mode at `n_max`.
    pub fn edge_population(&self, rho: &[C<T>]) -> T {
        let m = self.cutoff.mode_dim();
        let top = self.cutoff.n_max();
        let mut acc = T::zero();
        for r in 0..self.dim {
            if r / m == top || r % m == top {
                acc += rho[r * self.dim + r].re;
            }
        }
        acc
    }
}

#[inline(always)]
fn axpy<T: Real>(y: &mut [C<T>], a: C<T>, x: &[C<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

/// Scratch buffers for classic RK4 on a flat density matrix.
#[derive(Debug, Clone)]
pub struct Rk4Workspace<T: Real> {
    k: [Vec<C<T>>; 4],
    stage: Vec<C<T>>,
    scratch: Vec<C<T>>,
}

impl<T: Real> Rk4Workspace<T> {
    pub fn new(dim: usize) -> Self {
        let z = vec![C::new(T::zero(), T::zero()); dim * dim];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            stage: z.clone(),
            scratch: z,
        }
    }

    /// One RK4 step of size `h` at constant drive, in place.
    pub fn step(&mut self, kernel: &LiouvilleKernel<T>, rho: &mut [C<T>], drive: T, h: T) {
        let half = h * T::of(0.5);
        let [k1, k2, k3, k4] = &mut self.k;
        kernel.rhs_into(rho, drive, k1, &mut self.scratch);
        for ((s, r), k) in self.stage.iter_mut().zip(rho.iter()).zip(k1.iter()) {
            *s = *r + *k * half;
        }
        kernel.rhs_into(&self.stage, drive, k2, &mut self.scratch);
        for ((s, r), k) in self.stage.iter_mut().zip(rho.iter()).zip(k2.iter()) {
            *s = *r + *k * half;
        }
        kernel.rhs_into(&self.stage, drive, k3, &mut self.scratch);
        for ((s, r), k) in self.stage.iter_mut().zip(rho.iter()).zip(k3.iter()) {
            *s = *r + *k * h;
        }
        kernel.rhs_into(&self.stage, drive, k4, &mut self.scratch);
        let sixth = h / T::of(6.0);
        let two = T::of(2.0);
        for (i, r) in rho.iter_mut().enumerate() {
            *r += (k1[i] + (k2[i] + k3[i]) * two + k4[i]) * sixth;
        }
    }
}

/// Real coordinates of a Hermitian matrix, laid out like the matrix itself:
/// slot `(r, c)` holds `Re ρ[r,c]` for `r <= c` and `Im ρ[c,r]` for `r > c`.
pub fn to_hermitian_coords<T: Real>(dim: usize, rho: &[C<T>], out: &mut [T]) {
    for r in 0..dim {
        for col in 0..dim {
            out[r * dim + col] = if r <= col { rho[r * dim + col].re } else { rho[col * dim + r].im };
        }
    }
}

pub fn from_hermitian_coords<T: Real>(dim: usize, coords: &[T], out: &mut [C<T>]) {
    for r in 0..dim {
        out[r * dim + r] = c(coords[r * dim + r], T::zero());
        for col in r + 1..dim {
            let z = c(coords[r * dim + col], coords[col * dim + r]);
            out[r * dim + col] = z;
            out[col * dim + r] = z.conj();
        }
    }
}

/// Real matrix of `n_steps` RK4 steps at fixed drive, acting on Hermitian
/// coordinates.
pub fn interval_propagator<T: Real>(
    kernel: &LiouvilleKernel<T>,
    drive: T,
    h: T,
    n_steps: usize,
) -> DMatrix<T> {
    let d = kernel.dim();
    let p = d * d;
    let mut ws = Rk4Workspace::new(d);
    let mut buf = vec![C::new(T::zero(), T::zero()); p];
    let mut coords = DVector::<T>::zeros(p);
    let mut step = DMatrix::<T>::zeros(p, p);
    for j in 0..p {
        coords.fill(T::zero());
        coords[j] = T::one();
        from_hermitian_coords(d, coords.as_slice(), &mut buf);
        ws.step(kernel, &mut buf, drive, h);
        to_hermitian_coords(d, &buf, coords.as_mut_slice());
        step.set_column(j, &coords);
    }
    matrix_power(step, n_steps.max(1))
}

fn matrix_power<T: Real>(mut base: DMatrix<T>, mut n: usize) -> DMatrix<T> {
    let mut acc: Option<DMatrix<T>> = None;
    loop {
        if n & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => &a * &base,
            });
        }
        n >>= 1;
        if n == 0 {
            break;
        }
        base = &base * &base;
    }
    acc.expect("n >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::TwoModeOperators;
    use crate::params::Regime;
    use crate::quantum::lindblad::lindblad_rhs_with;
    use crate::quantum::DensityMatrix;
    use proptest::prelude::*;

    fn random_state(dim: usize, seed: &[f64]) -> DMatrix<C<f64>> {
        let mut k = 0;
        let mut next = || {
            k += 1;
            seed[k % seed.len()] * (1.0 + (k as f64 * 0.37).sin())
        };
        let m = DMatrix::from_fn(dim, dim, |_, _| C::new(next(), next()));
        let h = &m * m.adjoint();
        let tr = h.trace();
        h / tr
    }

    fn flat(m: &DMatrix<C<f64>>) -> Vec<C<f64>> {
        let d = m.nrows();
        (0..d * d).map(|i| m[(i / d, i % d)]).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn sparse_matches_dense(seed in proptest::collection::vec(-1.0f64..1.0, 8), drive in -1.0f64..1.0, n_max in 1usize..4) {
            let mut p = SystemParams::<f64>::preset(Regime::Quantum);
            p.cutoff = FockCutoff::new(n_max).unwrap();
            p.u1 = 0.7;
            let d = p.cutoff.dim();
            let rho = random_state(d, &seed);
            let ops = TwoModeOperators::new(p.cutoff);
            let dense = lindblad_rhs_with(&ops, &DensityMatrix::from_matrix_unchecked(rho.clone()), &p, drive * p.f_strength);
            let kernel = LiouvilleKernel::new(&p);
            let mut out = vec![C::new(0.0, 0.0); d * d];
            let mut scratch = out.clone();
            kernel.rhs_into(&flat(&rho), drive * p.f_strength, &mut out, &mut scratch);
            for (a, b) in out.iter().zip(flat(&dense).iter()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn coords_round_trip(seed in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let rho = flat(&random_state(9, &seed));
            let mut coords = vec![0.0; 81];
            let mut back = vec![C::new(0.0, 0.0); 81];
            to_hermitian_coords(9, &rho, &mut coords);
            from_hermitian_coords(9, &coords, &mut back);
            for (a, b) in rho.iter().zip(back.iter()) {
                prop_assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn readout_matches_operator_expectation() {
        let p = SystemParams::<f64>::preset(Regime::Quantum).with_cutoff(FockCutoff::new(3).unwrap());
        let d = p.cutoff.dim();
        let rho = random_state(d, &[0.3, -0.2, 0.9, 0.1]);
        let ops = TwoModeOperators::new(p.cutoff);
        let dm = DensityMatrix::from_matrix_unchecked(rho.clone());
        let kernel = LiouvilleKernel::new(&p);
        let f = flat(&rho);
        assert!((kernel.expect_annihilation(&f, 1) - dm.expect(&ops.a1)).norm() < 1e-14);
        assert!((kernel.expect_annihilation(&f, 2) - dm.expect(&ops.a2)).norm() < 1e-14);
    }

    #[test]
    fn propagator_matches_stepping() {
        let p = SystemParams::<f64>::preset(Regime::Quantum).with_cutoff(FockCutoff::new(2).unwrap());
        let d = p.cutoff.dim();
        let kernel = LiouvilleKernel::new(&p);
        let prop = interval_propagator(&kernel, 0.2, 0.01, 37);

        let rho0 = flat(&random_state(d, &[0.5, 0.1, -0.4]));
        let mut stepped = rho0.clone();
        let mut ws = Rk4Workspace::new(d);
        for _ in 0..37 {
            ws.step(&kernel, &mut stepped, 0.2, 0.01);
        }
        let mut coords = DVector::zeros(d * d);
        to_hermitian_coords(d, &rho0, coords.as_mut_slice());
        let moved = &prop * &coords;
        let mut out = vec![C::new(0.0, 0.0); d * d];
        from_hermitian_coords(d, moved.as_slice(), &mut out);
        for (a, b) in out.iter().zip(stepped.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
