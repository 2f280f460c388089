//! Solution Fourier coefficients: the exact space-time recursion, the
//! zero-mode closed form, and the general quadrature solver.
//!
//! For initial data supported on strictly positive modes the coefficients
//! c_{n,j} of a_n(t) = sum_j c_{n,j} e^{i omega^2 j t} satisfy
//!
//! ```text
//! c_{n,j}   = (c^p)_{n,j} / (omega^2 (n^2 - j))          n <= j, j != n^2
//! c_{n,n^2} = phi_n - sum_{j != n^2} (c^p)_{n,j} / (omega^2 (n^2 - j))
//! ```
//!
//! and (c^p)_{n,.} only involves shells m <= n - (p-1), so the recursion
//! resolves shell by shell in increasing order. Truncation at order N loses
//! nothing: shells up to N are exact.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::{conv_shells_into, shell_len, ModeSequence, SpaceTimeSequence};
use crate::error::{Error, Result};
use crate::lattice::{FrequencyVector, MultiIndex};
use crate::scalar::{Scalar, ScalarKind, WeightRing};

/// Problem instance: i u_t = Lap u + u^p on the torus with frequency vector
/// omega and initial Fourier data phi.
#[derive(Debug, Clone)]
pub struct ProblemConfig<S: Scalar> {
    pub p: u32,
    pub omega: FrequencyVector,
    pub phi: ModeSequence<S>,
    omega_sq: Vec<S::Real>,
}

impl<S: Scalar> ProblemConfig<S> {
    pub fn new(p: u32, omega: FrequencyVector, phi: ModeSequence<S>) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidPower(p));
        }
        if omega.dim() != phi.dim() {
            return Err(Error::DimensionMismatch {
                expected: omega.dim(),
                got: phi.dim(),
            });
        }
        let omega_sq = omega
            .components()
            .iter()
            .map(|&w| {
                let w = S::Real::from_f64(w);
                w.mul(&w)
            })
            .collect();
        Ok(Self {
            p,
            omega,
            phi,
            omega_sq,
        })
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    /// omega^2 (n^2 - j) in the scalar's own real ring.
    fn denominator(&self, n: &MultiIndex, j: &MultiIndex) -> S::Real {
        let mut acc = S::Real::zero();
        for i in 0..self.dim() {
            let ni = n.entries()[i] as u64;
            let ji = j.entries()[i] as u64;
            acc = acc.add(&self.omega_sq[i].scale_u64(ni * ni - ji));
        }
        acc
    }
}

/// Trajectories of the mode functions a_n(t) on a uniform time grid (d = 1).
#[derive(Debug, Clone)]
pub struct CoefficientTrajectory {
    pub times: Vec<f64>,
    pub values: BTreeMap<u64, Vec<Complex64>>,
}

impl CoefficientTrajectory {
    pub fn sample(&self, n: u64, k: usize) -> Complex64 {
        self.values
            .get(&n)
            .map(|v| v[k])
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }
}

/// Closed-form zero mode phi0 / (1 + i (p-1) phi0^(p-1) t)^(1/(p-1)), with the
/// root branch continued from 1 at t = 0 along the path.
pub fn zero_mode_solution(phi0: Complex64, p: u32, t: f64) -> Result<Complex64> {
    if p < 2 {
        return Err(Error::InvalidPower(p));
    }
    if phi0.re == 0.0 && phi0.im == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let v = Complex64::i() * (p - 1) as f64 * phi0.powi((p - 1) as i32);
    let alpha = -1.0 / (p - 1) as f64;
    let w = continued_power(v, t, alpha)?;
    Ok(phi0 * w)
}

/// (1 + v t)^alpha with the branch continued along s in [0, t]. The path is a
/// straight line from 1, so it can only hit zero when v is real; that is the
/// zero-mode blow-up time.
fn continued_power(v: Complex64, t: f64, alpha: f64) -> Result<Complex64> {
    if v.im == 0.0 && v.re != 0.0 {
        let t_blowup = -1.0 / v.re;
        let past = (t_blowup > 0.0 && t >= t_blowup) || (t_blowup < 0.0 && t <= t_blowup);
        if past {
            return Err(Error::Singularity { t, t_blowup });
        }
    }
    const STEPS: usize = 64;
    let mut theta = 0.0_f64;
    let mut prev = Complex64::new(1.0, 0.0);
    for k in 1..=STEPS {
        let s = t * (k as f64 / STEPS as f64);
        let w = Complex64::new(1.0 + v.re * s, v.im * s);
        let r = w.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Singularity { t, t_blowup: s });
        }
        theta += (w / prev).arg();
        prev = w;
    }
    let rho = prev.norm();
    Ok(Complex64::from_polar(rho.powf(alpha), alpha * theta))
}

/// Exact space-time coefficients for strictly positive-mode data, all shells
/// with |n| <= N * d (d = 1: n <= N).
pub fn solve_spacetime<S: Scalar>(
    cfg: &ProblemConfig<S>,
    n_max: u64,
) -> Result<SpaceTimeSequence<S>> {
    if n_max < 1 {
        return Err(Error::Invalid("truncation order must be >= 1".into()));
    }
    if let Some((n, _)) = cfg
        .phi
        .iter()
        .find(|(n, _)| n.entries().iter().any(|&e| e < 1))
    {
        return Err(Error::SupportViolation(n.entries().to_vec()));
    }
    if cfg.dim() == 1 {
        solve_dense1(cfg, n_max)
    } else {
        solve_sparse(cfg, n_max)
    }
}

fn solve_dense1<S: Scalar>(cfg: &ProblemConfig<S>, n_max: u64) -> Result<SpaceTimeSequence<S>> {
    let p = cfg.p;
    let omega_sq = &cfg.omega_sq[0];

    let mut phi_dense: Vec<S> = vec![S::zero(); (n_max + 1) as usize];
    for (n, v) in cfg.phi.iter() {
        let k = n.entries()[0] as u64;
        if k <= n_max {
            phi_dense[k as usize] = v.clone();
        }
    }

    let mut shells: Vec<Vec<S>> = Vec::with_capacity(n_max as usize);
    // intermediate powers c^q, q = 2..p-1, resolved shell by shell
    let mid_count = (p as usize).saturating_sub(2);
    let mut mid: Vec<Vec<Vec<S>>> = vec![Vec::new(); mid_count];

    for n in 1..=n_max {
        for qi in 0..mid_count {
            let q = qi as u32 + 2;
            let shell = {
                let prev: &[Vec<S>] = if q == 2 { &shells } else { &mid[qi - 1] };
                power_step_shell(prev, &shells, q, n)
            };
            mid[qi].push(shell);
        }
        // c^p shell n
        let cp: Vec<S> = if p == 2 {
            square_shell(&shells, n)
        } else {
            power_step_shell(&mid[mid_count - 1], &shells, p, n)
        };

        let width = shell_len(n) - 1; // top offset, j = n^2
        let mut row = vec![S::zero(); width + 1];
        let mut tail = S::zero();
        for (off, v) in cp.iter().enumerate().take(width) {
            if v.is_zero() {
                continue;
            }
            let j = n + off as u64;
            let denom = omega_sq.scale_u64(n * n - j);
            let cv = v.div_real(&denom);
            tail = tail.add(&cv);
            row[off] = cv;
        }
        row[width] = phi_dense[n as usize].sub(&tail);
        if S::KIND == ScalarKind::Interval && row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow("space-time recursion"));
        }
        if row.iter().all(|v| v.is_zero()) {
            shells.push(Vec::new());
        } else {
            shells.push(row);
        }
    }

    Ok(SpaceTimeSequence::from_dense_shells(
        cfg.phi.weight_exponent(),
        cfg.omega.clone(),
        shells,
    ))
}

/// Shell n of c^2 using the symmetric split 2 * sum_{n1 < n/2} + middle term.
/// Each (n1, n2) pair is convolved into its own buffer and the buffers are
/// folded in ascending n1 order, so the result does not depend on the thread
/// count.
fn square_shell<S: Scalar>(shells: &[Vec<S>], n: u64) -> Vec<S> {
    let len = shell_len(n);
    let mut acc = vec![S::zero(); len];
    if n < 2 {
        return acc;
    }
    let half = (n - 1) / 2;
    let pairs: Vec<u64> = (1..=half)
        .filter(|&n1| nonempty(shells, n1) && nonempty(shells, n - n1))
        .collect();
    let partials: Vec<Vec<S>> = if pairs.len() >= 4 && rayon::current_num_threads() > 1 {
        pairs
            .par_iter()
            .map(|&n1| conv_pair(shells, n1, n - n1, len))
            .collect()
    } else {
        pairs
            .iter()
            .map(|&n1| conv_pair(shells, n1, n - n1, len))
            .collect()
    };
    for part in partials {
        for (a, b) in acc.iter_mut().zip(&part) {
            if !b.is_zero() {
                *a = a.add(b);
            }
        }
    }
    let two = S::one().add(&S::one());
    for a in acc.iter_mut() {
        if !a.is_zero() {
            *a = a.mul(&two);
        }
    }
    if n % 2 == 0 && nonempty(shells, n / 2) {
        let mid = conv_pair(shells, n / 2, n / 2, len);
        for (a, b) in acc.iter_mut().zip(&mid) {
            if !b.is_zero() {
                *a = a.add(b);
            }
        }
    }
    acc
}

fn nonempty<S>(shells: &[Vec<S>], n: u64) -> bool {
    shells
        .get((n - 1) as usize)
        .map(|s| !s.is_empty())
        .unwrap_or(false)
}

fn conv_pair<S: Scalar>(shells: &[Vec<S>], n1: u64, n2: u64, len: usize) -> Vec<S> {
    let mut buf = vec![S::zero(); len];
    conv_shells_into(
        &shells[(n1 - 1) as usize],
        &shells[(n2 - 1) as usize],
        &mut buf,
    );
    buf
}

/// Shell n of c^q = c^(q-1) * c, folding pairs in ascending n1 order.
fn power_step_shell<S: Scalar>(prev: &[Vec<S>], base: &[Vec<S>], q: u32, n: u64) -> Vec<S> {
    let len = shell_len(n);
    let mut acc = vec![S::zero(); len];
    let lo = (q as u64 - 1).max(1);
    if n <= lo {
        return acc;
    }
    for n1 in lo..=(n - 1) {
        let n2 = n - n1;
        if !nonempty(prev, n1) || !nonempty(base, n2) {
            continue;
        }
        conv_shells_into(&prev[(n1 - 1) as usize], &base[(n2 - 1) as usize], &mut acc);
    }
    acc
}

type Row<S> = BTreeMap<MultiIndex, S>;

fn solve_sparse<S: Scalar>(cfg: &ProblemConfig<S>, n_max: u64) -> Result<SpaceTimeSequence<S>> {
    let d = cfg.dim();
    let p = cfg.p;
    let order_cap = (n_max * d as u64) as i64;

    let mut rows: BTreeMap<MultiIndex, Row<S>> = BTreeMap::new();
    let mid_count = (p as usize).saturating_sub(2);
    let mut mid: Vec<BTreeMap<MultiIndex, Row<S>>> = vec![BTreeMap::new(); mid_count];

    for m in (d as i64)..=order_cap {
        for n in indices_of_order(m, d) {
            for qi in 0..mid_count {
                let q = qi as u32 + 2;
                let row = {
                    let prev = if q == 2 { &rows } else { &mid[qi - 1] };
                    sparse_power_row(prev, &rows, &n)?
                };
                if !row.is_empty() {
                    mid[qi].insert(n.clone(), row);
                }
            }
            let cp_row = if p == 2 {
                sparse_power_row(&rows, &rows, &n)?
            } else {
                sparse_power_row(&mid[mid_count - 1], &rows, &n)?
            };

            let nsq = n.elementwise_square();
            let mut out: Row<S> = BTreeMap::new();
            let mut tail = S::zero();
            for (j, v) in cp_row.iter() {
                if v.is_zero() {
                    continue;
                }
                debug_assert!(*j != nsq, "c^p cannot reach j = n^2");
                let denom = cfg.denominator(&n, j);
                let cv = v.div_real(&denom);
                tail = tail.add(&cv);
                out.insert(j.clone(), cv);
            }
            let phi_n = cfg
                .phi
                .get(&n)
                .cloned()
                .unwrap_or_else(S::zero);
            let top = phi_n.sub(&tail);
            if !top.is_zero() {
                out.insert(nsq, top);
            }
            out.retain(|_, v| !v.is_zero());
            if S::KIND == ScalarKind::Interval && out.values().any(|v| !v.is_finite()) {
                return Err(Error::Overflow("space-time recursion"));
            }
            if !out.is_empty() {
                rows.insert(n, out);
            }
        }
    }

    let mut seq = SpaceTimeSequence::new(d, cfg.phi.weight_exponent(), cfg.omega.clone())?;
    for (n, row) in rows {
        for (j, v) in row {
            seq.insert(n.clone(), j, v)?;
        }
    }
    Ok(seq)
}

/// Row n of prev * base for sparse storage, ascending (n1, j1, j2).
fn sparse_power_row<S: Scalar>(
    prev: &BTreeMap<MultiIndex, Row<S>>,
    base: &BTreeMap<MultiIndex, Row<S>>,
    n: &MultiIndex,
) -> Result<Row<S>> {
    let mut acc: Row<S> = BTreeMap::new();
    for (n1, row1) in prev.iter() {
        if !n1.le(n)? || n1 == n {
            continue;
        }
        let n2 = match n.sub(n1) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if n2.entries().iter().any(|&e| e < 1) {
            continue;
        }
        let Some(row2) = base.get(&n2) else {
            continue;
        };
        for (j1, v1) in row1.iter() {
            for (j2, v2) in row2.iter() {
                let j = j1.add(j2)?;
                let t = v1.mul(v2);
                let cur = acc.remove(&j).unwrap_or_else(S::zero);
                acc.insert(j, cur.add(&t));
            }
        }
    }
    acc.retain(|_, v| !v.is_zero());
    Ok(acc)
}

/// All n in N^d with n >= 1 componentwise and |n| = m, lexicographic order.
fn indices_of_order(m: i64, d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    fn rec(out: &mut Vec<MultiIndex>, cur: &mut Vec<i64>, pos: usize, rest: i64, d: usize) {
        if pos == d - 1 {
            if rest >= 1 {
                cur[pos] = rest;
                out.push(MultiIndex::new(cur.clone()).unwrap());
            }
            return;
        }
        for v in 1..=(rest - (d - pos - 1) as i64) {
            cur[pos] = v;
            rec(out, cur, pos + 1, rest - v, d);
        }
    }
    if m >= d as i64 {
        rec(&mut out, &mut cur, 0, m, d);
    }
    out
}

/// Mode trajectories by quadrature for general data (phi_0 may be nonzero),
/// d = 1. The integrating factor exp(int P_n) is evaluated in closed form and
/// the Q_n integral is accumulated with a cumulative composite Simpson rule
/// on the uniform grid.
pub fn solve_quadrature(
    cfg: &ProblemConfig<Complex64>,
    n_max: u64,
    t_end: f64,
    steps: usize,
) -> Result<CoefficientTrajectory> {
    if cfg.dim() != 1 {
        return Err(Error::Invalid(
            "quadrature solver is implemented for d = 1".into(),
        ));
    }
    if steps < 2 {
        return Err(Error::GridTooSmall {
            need: 3,
            got: steps + 1,
        });
    }
    if !t_end.is_finite() || t_end == 0.0 {
        return Err(Error::Invalid("t_end must be finite and nonzero".into()));
    }
    let p = cfg.p;
    let m = steps;
    let h = t_end / m as f64;
    let times: Vec<f64> = (0..=m).map(|k| k as f64 * h).collect();
    let omega_sq = cfg.omega.norm_sq();

    let zero = Complex64::new(0.0, 0.0);
    let phi0 = cfg
        .phi
        .get(&MultiIndex::zeros(1))
        .copied()
        .unwrap_or(zero);

    // w(t) = 1 + v t drives both a_0 and the shell-independent part of the
    // integrating factors; theta is the continued argument along the grid.
    let v = if phi0 == zero {
        zero
    } else {
        Complex64::i() * (p - 1) as f64 * phi0.powi((p - 1) as i32)
    };
    if v.im == 0.0 && v.re != 0.0 {
        let t_blowup = -1.0 / v.re;
        let crossed = (t_blowup > 0.0 && t_end >= t_blowup) || (t_blowup < 0.0 && t_end <= t_blowup);
        if crossed {
            return Err(Error::Singularity {
                t: t_end,
                t_blowup,
            });
        }
    }
    let mut rho = vec![0.0; m + 1];
    let mut theta = vec![0.0; m + 1];
    rho[0] = 1.0;
    let mut prev = Complex64::new(1.0, 0.0);
    for k in 1..=m {
        let w = Complex64::new(1.0 + v.re * times[k], v.im * times[k]);
        let r = w.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Singularity {
                t: times[k],
                t_blowup: times[k],
            });
        }
        theta[k] = theta[k - 1] + (w / prev).arg();
        rho[k] = r;
        prev = w;
    }

    let pm1 = (p - 1) as f64;
    let expo = p as f64 / pm1;
    let exw: Vec<Complex64> = (0..=m)
        .map(|k| Complex64::from_polar(rho[k].powf(-expo), -theta[k] * expo))
        .collect();
    let exw_inv: Vec<Complex64> = (0..=m)
        .map(|k| Complex64::from_polar(rho[k].powf(expo), theta[k] * expo))
        .collect();

    let mut traj: Vec<Vec<Complex64>> = Vec::with_capacity((n_max + 1) as usize);
    traj.push(
        (0..=m)
            .map(|k| phi0 * Complex64::from_polar(rho[k].powf(-1.0 / pm1), -theta[k] / pm1))
            .collect(),
    );

    let mut scratch_q: Vec<Complex64> = vec![zero; m + 1];
    for n in 1..=n_max {
        let phi_n = cfg
            .phi
            .get(&MultiIndex::scalar(n))
            .copied()
            .unwrap_or(zero);
        // Q_n(t) = -i sum over compositions of n with every part <= n-1
        for k in 0..=m {
            scratch_q[k] = -Complex64::i() * truncated_power_coeff(&traj, p, n as usize, k);
        }
        let phase = omega_sq * (n * n) as f64;
        let g: Vec<Complex64> = (0..=m)
            .map(|k| {
                let e_inv = Complex64::from_polar(1.0, -phase * times[k]) * exw_inv[k];
                e_inv * scratch_q[k]
            })
            .collect();
        let integral = simpson_cumulative(&g, h);
        let row: Vec<Complex64> = (0..=m)
            .map(|k| {
                let e = Complex64::from_polar(1.0, phase * times[k]) * exw[k];
                e * (phi_n + integral[k])
            })
            .collect();
        traj.push(row);
    }

    let mut values = BTreeMap::new();
    for (n, row) in traj.into_iter().enumerate() {
        values.insert(n as u64, row);
    }
    Ok(CoefficientTrajectory { times, values })
}

/// Coefficient n of (a_0 + a_1 x + ... + a_{n-1} x^{n-1})^p at grid index k.
fn truncated_power_coeff(traj: &[Vec<Complex64>], p: u32, n: usize, k: usize) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    if p == 2 {
        // parts {m, n-m}, both <= n-1  =>  m in 1..=n-1
        let mut acc = zero;
        for m in 1..n {
            acc += traj[m][k] * traj[n - m][k];
        }
        return acc;
    }
    let base: Vec<Complex64> = (0..=n)
        .map(|i| if i < n { traj[i][k] } else { zero })
        .collect();
    let mut cur = base.clone();
    for _ in 2..=p {
        let mut next = vec![zero; n + 1];
        for (i, &ci) in cur.iter().enumerate() {
            if ci == zero {
                continue;
            }
            for (j, &bj) in base.iter().enumerate().take(n + 1 - i) {
                next[i + j] += ci * bj;
            }
        }
        cur = next;
    }
    cur[n]
}

/// Cumulative integral of uniformly sampled data: composite Simpson on even
/// prefixes, closed 3-point rules on the odd ones. O(h^4) at every node.
pub(crate) fn simpson_cumulative(g: &[Complex64], h: f64) -> Vec<Complex64> {
    let m = g.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    if m < 2 {
        return out;
    }
    if m == 2 {
        out[1] = (g[0] + g[1]) * (h / 2.0);
        return out;
    }
    out[1] = (g[0] * 5.0 + g[1] * 8.0 - g[2]) * (h / 12.0);
    for k in 2..m {
        if k % 2 == 0 {
            out[k] = out[k - 2] + (g[k - 2] + g[k - 1] * 4.0 + g[k]) * (h / 3.0);
        } else {
            out[k] = out[k - 1] + (-g[k - 2] + g[k - 1] * 8.0 + g[k] * 5.0) * (h / 12.0);
        }
    }
    out
}

/// c(A, omega) via the geometric rescaling of c(1, 1):
/// c(A, omega)_{n,j} = A^n / omega^(2(n-1)/(p-1)) * c~_{n,j}.
pub fn monochromatic_coeffs<S: Scalar>(
    amplitude: S,
    omega: f64,
    p: u32,
    n_max: u64,
) -> Result<SpaceTimeSequence<S>> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency);
    }
    let mut phi = ModeSequence::new(1, 0.0);
    phi.insert(MultiIndex::scalar(1), S::one())?;
    let unit_cfg = ProblemConfig::new(p, FrequencyVector::scalar(1.0)?, phi)?;
    let ctilde = solve_spacetime(&unit_cfg, n_max)?;

    let omega_real = S::Real::from_f64(omega);
    let mut out = SpaceTimeSequence::new(1, 0.0, FrequencyVector::scalar(omega)?)?;
    let mut a_pow = S::one();
    let mut cached_n = 0u64;
    let mut shell_results: Vec<(MultiIndex, MultiIndex, S)> = Vec::new();
    for (n, j, v) in ctilde.entries() {
        let nn = n.entries()[0] as u64;
        while cached_n < nn {
            a_pow = a_pow.mul(&amplitude);
            cached_n += 1;
        }
        let w_pow = omega_real.pow_ratio(2 * (nn as i64 - 1), (p - 1) as i64)?;
        let scaled = v.mul(&a_pow).div_real(&w_pow);
        shell_results.push((n, j, scaled));
    }
    for (n, j, v) in shell_results {
        out.insert(n, j, v)?;
    }
    Ok(out)
}
