//! Fixed-point machinery: the operators K, L, iota, the map
//! T(c) = iota phi + (I - L) K c^p, and the head/tail projections.
//!
//! K divides by omega^2 (n^2 - j) on the band p <= n,
//! n <= j <= n^2 - (p-1)(2n - p) where any product c^p is supported, so its
//! operator norm is 1 / (||omega||^2 p (p-1)). L concentrates each row's
//! partial sums at j = n^2. Fixed points of T satisfy the coefficient
//! recursion, shell by shell.

use crate::algebra::SpaceTimeSequence;
use crate::error::{Error, Result};
use crate::lattice::{FrequencyVector, MultiIndex};
use crate::scalar::{Scalar, WeightRing};

/// Shared operator parameters: nonlinearity power, frequency weights, and the
/// truncation order used by the projections.
#[derive(Debug, Clone)]
pub struct OperatorContext<S: Scalar> {
    pub p: u32,
    pub omega: FrequencyVector,
    pub trunc: u64,
    omega_sq: Vec<S::Real>,
}

impl<S: Scalar> OperatorContext<S> {
    pub fn new(p: u32, omega: FrequencyVector, trunc: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidPower(p));
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
            trunc,
            omega_sq,
        })
    }

    fn denominator(&self, n: &MultiIndex, j: &MultiIndex) -> S::Real {
        let mut acc = S::Real::zero();
        for i in 0..self.omega.dim() {
            let ni = n.entries()[i] as u64;
            let ji = j.entries()[i] as u64;
            acc = acc.add(&self.omega_sq[i].scale_u64(ni * ni - ji));
        }
        acc
    }
}

/// True when the entry lies in the band p <= n and
/// j <= n^2 - (p-1)(2n - p), componentwise.
fn in_k_band(p: u32, n: &MultiIndex, j: &MultiIndex) -> bool {
    let p = p as i64;
    n.entries().iter().zip(j.entries()).all(|(&nk, &jk)| {
        nk >= p && jk <= nk * nk - (p - 1) * (2 * nk - p)
    })
}

/// (K c)_{n,j} = c_{n,j} / (omega^2 (n^2 - j)) on the product band, zero
/// elsewhere. Band exclusion keeps every retained denominator positive.
pub fn apply_k<S: Scalar>(
    ctx: &OperatorContext<S>,
    c: &SpaceTimeSequence<S>,
) -> Result<SpaceTimeSequence<S>> {
    let mut out = SpaceTimeSequence::new(c.dim(), c.weight_exponent(), c.omega().clone())?;
    for (n, j, v) in c.entries() {
        if !in_k_band(ctx.p, &n, &j) {
            continue;
        }
        let denom = ctx.denominator(&n, &j);
        out.insert(n, j, v.div_real(&denom))?;
    }
    Ok(out)
}

/// (L c)_{n, n^2} = sum over the band entries below the top: all k with
/// n <= k <= n^2 and k != n^2. For n = 1 (componentwise) the sum is empty,
/// so (L c)_{1,1} = 0 and I - L acts as the identity there, matching the
/// recursion where c_{1,1} = phi_1 unmodified.
pub fn apply_l<S: Scalar>(c: &SpaceTimeSequence<S>) -> Result<SpaceTimeSequence<S>> {
    let mut out = SpaceTimeSequence::new(c.dim(), c.weight_exponent(), c.omega().clone())?;
    let mut current: Option<(MultiIndex, S)> = None;
    let flush =
        |out: &mut SpaceTimeSequence<S>, cur: &mut Option<(MultiIndex, S)>| -> Result<()> {
            if let Some((n, acc)) = cur.take() {
                let nsq = n.elementwise_square();
                out.insert(n, nsq, acc)?;
            }
            Ok(())
        };
    for (n, j, v) in c.entries() {
        if j == n.elementwise_square() {
            continue; // top entries do not feed the row sums
        }
        let same_row = current.as_ref().map(|(cn, _)| *cn == n).unwrap_or(false);
        if same_row {
            if let Some((_, acc)) = current.as_mut() {
                *acc = acc.add(&v);
            }
        } else {
            flush(&mut out, &mut current)?;
            current = Some((n, v));
        }
    }
    flush(&mut out, &mut current)?;
    Ok(out)
}

/// (iota phi)_{n, n^2} = phi_n; defined for phi supported on n >= 1.
pub fn embed_iota<S: Scalar>(
    phi: &crate::algebra::ModeSequence<S>,
    omega: &FrequencyVector,
) -> Result<SpaceTimeSequence<S>> {
    let mut out = SpaceTimeSequence::new(phi.dim(), phi.weight_exponent(), omega.clone())?;
    for (n, v) in phi.iter() {
        if n.entries().iter().any(|&e| e < 1) {
            return Err(Error::SupportViolation(n.entries().to_vec()));
        }
        let nsq = n.elementwise_square();
        out.insert(n.clone(), nsq, v.clone())?;
    }
    Ok(out)
}

/// T(c) = iota phi + (I - L) K c^p.
pub fn apply_t<S: Scalar>(
    ctx: &OperatorContext<S>,
    phi: &crate::algebra::ModeSequence<S>,
    c: &SpaceTimeSequence<S>,
) -> Result<SpaceTimeSequence<S>> {
    let iota = embed_iota(phi, c.omega())?;
    if c.is_empty() {
        return Ok(iota);
    }
    let cp = c.power(ctx.p)?;
    let kcp = apply_k(ctx, &cp)?;
    let lkcp = apply_l(&kcp)?;
    iota.add(&kcp.sub(&lkcp)?)
}

/// Which side of the splitting X = X_N + X_inf a projection keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Head,
    Tail,
}

/// pi_N / pi_inf: head keeps shells with every component <= N, tail the rest.
pub fn project<S: Scalar>(
    c: &SpaceTimeSequence<S>,
    trunc: u64,
    part: Part,
) -> Result<SpaceTimeSequence<S>> {
    let mut out = SpaceTimeSequence::new(c.dim(), c.weight_exponent(), c.omega().clone())?;
    for (n, j, v) in c.entries() {
        let in_head = n.entries().iter().all(|&e| e <= trunc as i64);
        if (part == Part::Head) == in_head {
            out.insert(n, j, v)?;
        }
    }
    Ok(out)
}

/// || pi_N (T(c) - c) ||: how far c is from satisfying the recursion on the
/// resolved shells.
pub fn residual<S: Scalar>(
    ctx: &OperatorContext<S>,
    phi: &crate::algebra::ModeSequence<S>,
    c: &SpaceTimeSequence<S>,
) -> Result<f64> {
    let t = apply_t(ctx, phi, c)?;
    let diff = t.sub(c)?;
    Ok(project(&diff, ctx.trunc, Part::Head)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ModeSequence;
    use crate::solver::{solve_spacetime, ProblemConfig};
    use num_complex::Complex64;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mi(n: u64) -> MultiIndex {
        MultiIndex::scalar(n)
    }

    fn omega1() -> FrequencyVector {
        FrequencyVector::scalar(1.0).unwrap()
    }

    fn ctx(p: u32, trunc: u64) -> OperatorContext<Complex64> {
        OperatorContext::new(p, omega1(), trunc).unwrap()
    }

    fn st(entries: &[(u64, u64, f64)]) -> SpaceTimeSequence<Complex64> {
        let mut out = SpaceTimeSequence::new(1, 0.0, omega1()).unwrap();
        for &(n, j, v) in entries {
            out.insert(mi(n), mi(j), c64(v, 0.0)).unwrap();
        }
        out
    }

    #[test]
    fn k_divides_on_band() {
        let out = apply_k(&ctx(2, 8), &st(&[(2, 2, 1.0)])).unwrap();
        assert_eq!(out.get(&mi(2), &mi(2)), Some(&c64(0.5, 0.0)));
    }

    #[test]
    fn k_drops_top_and_low_shells() {
        // (n, n^2) is outside the band
        let out = apply_k(&ctx(2, 8), &st(&[(2, 4, 1.0)])).unwrap();
        assert!(out.is_empty());
        // n < p is outside the band
        let out = apply_k(&ctx(2, 8), &st(&[(1, 1, 1.0)])).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn l_concentrates_row_sums() {
        let out = apply_l(&st(&[(2, 2, 3.0), (2, 4, 5.0)])).unwrap();
        assert_eq!(out.get(&mi(2), &mi(4)), Some(&c64(3.0, 0.0)));
        assert_eq!(out.support_len(), 1);
    }

    #[test]
    fn l_empty_sum_at_shell_one() {
        // n = 1 has n^2 = n, the sum over k != n^2 is empty
        let out = apply_l(&st(&[(1, 1, 7.0)])).unwrap();
        assert!(out.is_empty());
        let out = apply_l(&st(&[])).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn iota_places_at_top() {
        let mut phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        phi.insert(mi(1), c64(2.0, 0.0)).unwrap();
        phi.insert(mi(2), c64(1.0, 0.0)).unwrap();
        let out = embed_iota(&phi, &omega1()).unwrap();
        assert_eq!(out.get(&mi(1), &mi(1)), Some(&c64(2.0, 0.0)));
        assert_eq!(out.get(&mi(2), &mi(4)), Some(&c64(1.0, 0.0)));

        let empty: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        assert!(embed_iota(&empty, &omega1()).unwrap().is_empty());

        let mut bad: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        bad.insert(MultiIndex::zeros(1), c64(1.0, 0.0)).unwrap();
        assert!(embed_iota(&bad, &omega1()).is_err());
    }

    #[test]
    fn t_hand_evaluation() {
        // phi = {1:1}, c = {(1,1):1}: c^2 = {(2,2):1}, K c^2 = {(2,2):1/2},
        // L K c^2 = {(2,4):1/2}, so T(c) = {(1,1):1, (2,2):1/2, (2,4):-1/2}.
        let mut phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        phi.insert(mi(1), c64(1.0, 0.0)).unwrap();
        let t = apply_t(&ctx(2, 8), &phi, &st(&[(1, 1, 1.0)])).unwrap();
        assert_eq!(t.get(&mi(1), &mi(1)), Some(&c64(1.0, 0.0)));
        assert_eq!(t.get(&mi(2), &mi(2)), Some(&c64(0.5, 0.0)));
        assert_eq!(t.get(&mi(2), &mi(4)), Some(&c64(-0.5, 0.0)));
        assert_eq!(t.support_len(), 3);
    }

    #[test]
    fn t_of_empty_is_iota() {
        let mut phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        phi.insert(mi(1), c64(1.0, 0.0)).unwrap();
        let empty = st(&[]);
        let t = apply_t(&ctx(2, 8), &phi, &empty).unwrap();
        assert_eq!(t, embed_iota(&phi, &omega1()).unwrap());
        let r = residual(&ctx(2, 8), &phi, &empty).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn solver_output_is_fixed_point() {
        let mut phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        phi.insert(mi(1), c64(1.0, 0.0)).unwrap();
        let cfg = ProblemConfig::new(2, omega1(), phi.clone()).unwrap();
        let n = 10;
        let c = solve_spacetime(&cfg, n).unwrap();
        let r = residual(&ctx(2, n), &phi, &c).unwrap();
        assert!(r < 1e-13, "residual {r}");
    }

    #[test]
    fn perturbed_top_shell_moves_residual_by_epsilon() {
        let mut phi: ModeSequence<Complex64> = ModeSequence::new(1, 0.0);
        phi.insert(mi(1), c64(1.0, 0.0)).unwrap();
        let cfg = ProblemConfig::new(2, omega1(), phi.clone()).unwrap();
        let n = 8;
        let mut c = solve_spacetime(&cfg, n).unwrap();
        let eps = 1e-3;
        let old = c.get(&mi(n), &mi(n)).copied().unwrap();
        c.insert(mi(n), mi(n), old + c64(eps, 0.0)).unwrap();
        // a top-shell perturbation leaves pi_N T(c) unchanged, so the
        // residual is exactly the perturbation size
        let r = residual(&ctx(2, n), &phi, &c).unwrap();
        assert!((r - eps).abs() < 1e-12, "residual {r}");
    }

    #[test]
    fn projections_partition() {
        let c = st(&[(1, 1, 1.0), (2, 3, 2.0), (5, 20, -1.0)]);
        let head = project(&c, 2, Part::Head).unwrap();
        let tail = project(&c, 2, Part::Tail).unwrap();
        assert_eq!(head.add(&tail).unwrap(), c);
        assert_eq!(head.support_len(), 2);
        assert_eq!(tail.support_len(), 1);
        assert!(project(&head, 5, Part::Tail).unwrap().is_empty());
    }
}
