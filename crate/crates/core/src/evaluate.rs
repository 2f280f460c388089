//! Turning coefficient data into function values and plot data, plus the
//! independent Galerkin time-stepping oracle and blow-up diagnostics.
//!
//! The RK4 integrator here is deliberately plain (fixed step, dense state):
//! it exists to cross-validate the explicit formulas, and step-halving
//! convergence of the oracle itself is one of the tests. Numerical blow-up in
//! the oracle is reported as divergence, never as a certified statement.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{ModeSequence, SpaceTimeSequence};
use crate::error::{Error, Result};
use crate::lattice::MultiIndex;
use crate::solver::CoefficientTrajectory;

/// Rectangular space-time sampling grid (d = 1 canonical layout).
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.nt < 2 || self.nx < 2 {
            return Err(Error::GridTooSmall {
                need: 2,
                got: self.nt.min(self.nx),
            });
        }
        if !(self.t_max > self.t_min) || !(self.x_max > self.x_min) {
            return Err(Error::Invalid("degenerate grid range".into()));
        }
        Ok(())
    }
}

/// One output row of `emit_grid`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub t: f64,
    pub x: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

/// u(t, x) = sum c_{n,j} e^{i omega^2 j t} e^{i omega n x}.
pub fn eval_solution(c: &SpaceTimeSequence<Complex64>, t: f64, x: &[f64]) -> Result<Complex64> {
    if x.len() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            got: x.len(),
        });
    }
    let omega = c.omega().clone();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut err: Option<Error> = None;
    c.for_each(|n, j, v| {
        if err.is_some() {
            return;
        }
        let phase = match (omega.weighted_dot(j), omega.spatial_dot(n, x)) {
            (Ok(wt), Ok(wx)) => wt * t + wx,
            _ => {
                err = Some(Error::DimensionMismatch {
                    expected: omega.dim(),
                    got: n.dim(),
                });
                return;
            }
        };
        acc += v * Complex64::from_polar(1.0, phase);
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// Per-mode evaluation a_n(t) = sum_j c_{n,j} e^{i omega^2 j t} (d = 1).
pub fn eval_mode(c: &SpaceTimeSequence<Complex64>, n: u64, t: f64) -> Complex64 {
    let omega_sq = c.omega().norm_sq();
    let mut acc = Complex64::new(0.0, 0.0);
    if let Some(shell) = c.shell_dense(n) {
        for (off, v) in shell.iter().enumerate() {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let j = (n + off as u64) as f64;
            acc += v * Complex64::from_polar(1.0, omega_sq * j * t);
        }
    }
    acc
}

/// Row-major samples (t outer, x inner) of (t, x, Re u, Im u, |u|), d = 1.
pub fn emit_grid(c: &SpaceTimeSequence<Complex64>, grid: &GridSpec) -> Result<Vec<GridRow>> {
    if c.dim() != 1 {
        return Err(Error::Invalid("grid output is defined for d = 1".into()));
    }
    grid.validate()?;
    let mut rows = Vec::with_capacity(grid.nt * grid.nx);
    for it in 0..grid.nt {
        let t = grid.t_min + (grid.t_max - grid.t_min) * it as f64 / (grid.nt - 1) as f64;
        for ix in 0..grid.nx {
            let x = grid.x_min + (grid.x_max - grid.x_min) * ix as f64 / (grid.nx - 1) as f64;
            let u = eval_solution(c, t, &[x])?;
            rows.push(GridRow {
                t,
                x,
                re: u.re,
                im: u.im,
                abs: u.norm(),
            });
        }
    }
    Ok(rows)
}

/// Right-hand side of the Galerkin system on modes 0..=N (dense, d = 1):
/// da_n/dt = i omega^2 n^2 a_n - i (a^p)_n.
pub(crate) fn galerkin_rhs_dense(a: &[Complex64], omega_sq: f64, p: u32) -> Vec<Complex64> {
    let n_len = a.len();
    let zero = Complex64::new(0.0, 0.0);
    // (a^p) truncated to the retained modes
    let mut pow: Vec<Complex64> = a.to_vec();
    for _ in 2..=p {
        let mut next = vec![zero; n_len];
        for (i, &ci) in pow.iter().enumerate() {
            if ci == zero {
                continue;
            }
            for (j, &bj) in a.iter().enumerate().take(n_len - i) {
                next[i + j] += ci * bj;
            }
        }
        pow = next;
    }
    (0..n_len)
        .map(|n| {
            let lin = Complex64::i() * omega_sq * (n * n) as f64 * a[n];
            lin - Complex64::i() * pow[n]
        })
        .collect()
}

/// Public wrapper over mode sequences: i omega^2 n^2 a_n - i (a^p)_n,
/// truncated to modes <= N.
pub fn galerkin_rhs(
    a: &ModeSequence<Complex64>,
    omega_sq: f64,
    p: u32,
    n_trunc: u64,
) -> Result<ModeSequence<Complex64>> {
    if a.dim() != 1 {
        return Err(Error::Invalid("galerkin_rhs is defined for d = 1".into()));
    }
    if p < 2 {
        return Err(Error::InvalidPower(p));
    }
    let mut dense = vec![Complex64::new(0.0, 0.0); (n_trunc + 1) as usize];
    for (n, v) in a.iter() {
        let k = n.entries()[0] as u64;
        if k <= n_trunc {
            dense[k as usize] = *v;
        }
    }
    let rhs = galerkin_rhs_dense(&dense, omega_sq, p);
    let mut out = ModeSequence::new(1, a.weight_exponent());
    for (k, v) in rhs.into_iter().enumerate() {
        out.insert(MultiIndex::scalar(k as u64), v)?;
    }
    Ok(out)
}

/// Classical fixed-step RK4 on the truncated Galerkin system. The step is
/// adjusted so the grid lands exactly on t_end; every step is recorded.
pub fn integrate_galerkin(
    phi: &ModeSequence<Complex64>,
    omega_sq: f64,
    p: u32,
    n_trunc: u64,
    t_end: f64,
    dt: f64,
) -> Result<CoefficientTrajectory> {
    if phi.dim() != 1 {
        return Err(Error::Invalid("integrator is defined for d = 1".into()));
    }
    if p < 2 {
        return Err(Error::InvalidPower(p));
    }
    if !(dt > 0.0) || !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::Invalid("need t_end > 0 and dt > 0".into()));
    }
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;

    let dim = (n_trunc + 1) as usize;
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    for (n, v) in phi.iter() {
        let k = n.entries()[0] as u64;
        if k <= n_trunc {
            state[k as usize] = *v;
        }
    }

    let mut samples: Vec<Vec<Complex64>> = vec![Vec::with_capacity(steps + 1); dim];
    let mut times = Vec::with_capacity(steps + 1);
    let record = |samples: &mut Vec<Vec<Complex64>>, state: &[Complex64]| {
        for (row, &v) in samples.iter_mut().zip(state) {
            row.push(v);
        }
    };
    record(&mut samples, &state);
    times.push(0.0);

    let axpy = |y: &[Complex64], k: &[Complex64], c: f64| -> Vec<Complex64> {
        y.iter().zip(k).map(|(a, b)| a + b * c).collect()
    };
    for step in 1..=steps {
        let k1 = galerkin_rhs_dense(&state, omega_sq, p);
        let k2 = galerkin_rhs_dense(&axpy(&state, &k1, h / 2.0), omega_sq, p);
        let k3 = galerkin_rhs_dense(&axpy(&state, &k2, h / 2.0), omega_sq, p);
        let k4 = galerkin_rhs_dense(&axpy(&state, &k3, h), omega_sq, p);
        for i in 0..dim {
            state[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        let t = step as f64 * h;
        if state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Divergence {
                last_finite_t: (step - 1) as f64 * h,
            });
        }
        record(&mut samples, &state);
        times.push(t);
    }

    let mut values = BTreeMap::new();
    for (n, row) in samples.into_iter().enumerate() {
        values.insert(n as u64, row);
    }
    Ok(CoefficientTrajectory { times, values })
}

/// The singular conserved quantity of the zero-mode flow:
/// V(z) = 1/z^(p-1) + 1/conj(z)^(p-1) = 2 Re z^-(p-1).
pub fn conserved_v(z: Complex64, p: u32) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidPower(p));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Invalid("V(z) is singular at z = 0".into()));
    }
    Ok(2.0 * z.powi(-((p - 1) as i32)).re)
}

/// Partial Parseval sum sum_{1 <= n <= M} |a_n(t)|^2 for the monochromatic
/// solution with amplitude A (p = 2 scaling A^n / omega^(2(n-1)) applied to
/// the unit coefficients). Growth in M diagnoses L^2 blow-up.
pub fn partial_l2(
    ctilde: &SpaceTimeSequence<Complex64>,
    amplitude: Complex64,
    omega: f64,
    m_shells: u64,
    t: f64,
) -> Result<f64> {
    if ctilde.dim() != 1 {
        return Err(Error::Invalid("partial_l2 is defined for d = 1".into()));
    }
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency);
    }
    let omega_sq = omega * omega;
    let mut total = 0.0;
    let mut scale = Complex64::new(1.0, 0.0); // A^n / omega^(2(n-1))
    for n in 1..=m_shells {
        scale = if n == 1 {
            amplitude
        } else {
            scale * amplitude / omega_sq
        };
        let mut a_n = Complex64::new(0.0, 0.0);
        if let Some(shell) = ctilde.shell_dense(n) {
            for (off, v) in shell.iter().enumerate() {
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                let j = (n + off as u64) as f64;
                a_n += v * Complex64::from_polar(1.0, omega_sq * j * t);
            }
        }
        total += (scale * a_n).norm_sqr();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FrequencyVector;
    use crate::solver::{solve_spacetime, zero_mode_solution, ProblemConfig};
    use std::f64::consts::PI;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single_entry() -> SpaceTimeSequence<Complex64> {
        let mut st =
            SpaceTimeSequence::new(1, 0.0, FrequencyVector::scalar(1.0).unwrap()).unwrap();
        st.insert(MultiIndex::scalar(1), MultiIndex::scalar(1), c64(1.0, 0.0))
            .unwrap();
        st
    }

    fn unit_cfg(n: u64) -> (ProblemConfig<Complex64>, SpaceTimeSequence<Complex64>) {
        let mut phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        phi.insert(MultiIndex::scalar(1), c64(1.0, 0.0)).unwrap();
        let cfg = ProblemConfig::new(2, FrequencyVector::scalar(1.0).unwrap(), phi).unwrap();
        let c = solve_spacetime(&cfg, n).unwrap();
        (cfg, c)
    }

    #[test]
    fn eval_single_entry() {
        let st = single_entry();
        assert_eq!(eval_solution(&st, 0.0, &[0.0]).unwrap(), c64(1.0, 0.0));
        let v = eval_solution(&st, 2.0 * PI, &[0.0]).unwrap();
        assert!((v - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn initial_data_recovery() {
        // sum_j c_{n,j} = phi_n: evaluating at t = 0 recovers e^{ix}
        let (_, c) = unit_cfg(40);
        for &x in &[0.0, 0.7, 2.5, -1.0] {
            let u = eval_solution(&c, 0.0, &[x]).unwrap();
            let expect = Complex64::from_polar(1.0, x);
            assert!((u - expect).norm() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn grid_layout_is_t_outer() {
        let st = single_entry();
        let rows = emit_grid(
            &st,
            &GridSpec {
                t_min: 0.0,
                t_max: 1.0,
                nt: 2,
                x_min: 0.0,
                x_max: 1.0,
                nx: 2,
            },
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].t, rows[0].x), (0.0, 0.0));
        assert_eq!((rows[1].t, rows[1].x), (0.0, 1.0));
        assert_eq!((rows[2].t, rows[2].x), (1.0, 0.0));
        assert_eq!((rows[3].t, rows[3].x), (1.0, 1.0));
        for r in &rows {
            assert!((r.abs - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_hand_expansion() {
        let mut a: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        a.insert(MultiIndex::scalar(1), c64(1.0, 0.0)).unwrap();
        let rhs = galerkin_rhs(&a, 1.0, 2, 4).unwrap();
        assert_eq!(rhs.get(&MultiIndex::scalar(1)), Some(&c64(0.0, 1.0)));
        assert_eq!(rhs.get(&MultiIndex::scalar(2)), Some(&c64(0.0, -1.0)));
        assert_eq!(rhs.support_len(), 2);

        let empty: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        assert!(galerkin_rhs(&empty, 1.0, 2, 4).unwrap().is_empty());

        // zero mode: da_0/dt = -i a_0^p
        let mut z: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        z.insert(MultiIndex::zeros(1), c64(0.0, 2.0)).unwrap();
        let rhs = galerkin_rhs(&z, 1.0, 2, 2).unwrap();
        let expect = -Complex64::i() * c64(0.0, 2.0).powi(2);
        assert_eq!(rhs.get(&MultiIndex::zeros(1)), Some(&expect));
    }

    #[test]
    fn rk4_zero_mode_matches_closed_form() {
        let mut phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        phi.insert(MultiIndex::zeros(1), c64(1.0, 0.0)).unwrap();
        let traj = integrate_galerkin(&phi, 1.0, 2, 4, 2.0, 1e-3).unwrap();
        let last = traj.times.len() - 1;
        let expect = zero_mode_solution(c64(1.0, 0.0), 2, traj.times[last]).unwrap();
        assert!((traj.sample(0, last) - expect).norm() < 1e-8);
    }

    #[test]
    fn rk4_empty_data_is_zero() {
        let phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        let traj = integrate_galerkin(&phi, 1.0, 2, 4, 1.0, 0.01).unwrap();
        for k in 0..traj.times.len() {
            for n in 0..=4 {
                assert_eq!(traj.sample(n, k), c64(0.0, 0.0));
            }
        }
    }

    #[test]
    fn rk4_step_halving_converges() {
        let mut phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        phi.insert(MultiIndex::scalar(1), c64(0.4, 0.1)).unwrap();
        phi.insert(MultiIndex::scalar(2), c64(0.2, 0.0)).unwrap();
        let coarse = integrate_galerkin(&phi, 1.0, 2, 10, 1.0, 0.02).unwrap();
        let fine = integrate_galerkin(&phi, 1.0, 2, 10, 1.0, 0.01).unwrap();
        let finer = integrate_galerkin(&phi, 1.0, 2, 10, 1.0, 0.005).unwrap();
        let endpoint = |t: &CoefficientTrajectory| {
            let k = t.times.len() - 1;
            (0..=10)
                .map(|n| t.sample(n, k))
                .collect::<Vec<_>>()
        };
        let d1: f64 = endpoint(&coarse)
            .iter()
            .zip(endpoint(&fine))
            .map(|(a, b)| (a - b).norm())
            .sum();
        let d2: f64 = endpoint(&fine)
            .iter()
            .zip(endpoint(&finer))
            .map(|(a, b)| (a - b).norm())
            .sum();
        // fourth order: halving the step cuts the error by ~16
        assert!(d2 < d1 / 8.0, "d1 = {d1}, d2 = {d2}");
    }

    #[test]
    fn conserved_v_values() {
        assert_eq!(conserved_v(c64(1.0, 0.0), 2).unwrap(), 2.0);
        assert_eq!(conserved_v(c64(0.0, 1.0), 2).unwrap(), 0.0);
        assert!(conserved_v(c64(0.0, 0.0), 2).is_err());
        // V is constant along the zero-mode flow
        for k in 0..=10 {
            let t = k as f64;
            let z = zero_mode_solution(c64(1.0, 0.0), 2, t).unwrap();
            assert!((conserved_v(z, 2).unwrap() - 2.0).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn partial_l2_at_time_zero() {
        let (_, c) = unit_cfg(20);
        for m in [1, 5, 20] {
            let v = partial_l2(&c, c64(3.0, 0.0), 1.0, m, 0.0).unwrap();
            assert!((v - 9.0).abs() < 1e-9, "M = {m}: {v}");
        }
    }
}
