//! Radii-polynomial certification of periodic orbits for monochromatic data
//! (p = 2, d = 1).
//!
//! Pipeline: a rigorous interval enclosure of the truncation
//! chat = pi_N c(A, omega) via the exact recursion, the tail bounds
//!
//! ```text
//! Y0 = (1/omega^2) sum_{N+1 <= n <= 2N} (b*b)_n / (n-1),   b_n = sum_j |chat_{n,j}|
//! Z1 = (4/omega^2) sum_{n <= N} sum_j |chat_{n,j}| / (n^2 + 2n(N+1) - j)
//! Z2 = 2 / (omega^2 (N+1)^2)
//! ```
//!
//! and the check P(r) = Z2 r^2 - (1 - Z1) r + Y0 < 0, all in outward-rounded
//! interval arithmetic. A certified verdict proves the tail map
//! T_inf(u) = pi_inf T(chat + u) has a unique fixed point in the r-ball, so
//! the full coefficient sequence has finite norm and the solution is a
//! 2 pi / omega^2 periodic orbit.
//!
//! Z2 is the constant 2/(omega^2 (N+1)^2): the derivative-Lipschitz estimate
//! in the tail is sup ||DT_inf(c) - DT_inf(0)|| <= Z2 r on the r-ball, which
//! is the quantity the quadratic P(r) needs.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::SpaceTimeSequence;
use crate::error::{Error, Result};
use crate::interval::{ComplexInterval, Interval};
use crate::lattice::{FrequencyVector, MultiIndex};
use crate::scalar::{RealIntervalScalar, RigorousScalar, Scalar};
use crate::solver::{solve_spacetime, ProblemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Inconclusive,
}

/// Inputs of a certification run.
#[derive(Debug, Clone)]
pub struct CertifyParams {
    pub amplitude: Complex64,
    pub omega: f64,
    pub n_trunc: u64,
    /// Ball radius; when absent the midpoint of the quadratic's root range
    /// is tried.
    pub radius: Option<f64>,
}

/// Certificate record: all inputs, the interval bounds, and the verdict.
/// Re-checking a stored certificate only needs `radii_check` on the stored
/// bounds; the convolution does not have to be repeated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadiiReport {
    pub amplitude: [f64; 2],
    pub omega: f64,
    pub p: u32,
    pub n_trunc: u64,
    pub y0: Interval,
    pub z1: Interval,
    pub z2: Interval,
    pub radius: f64,
    pub p_at_r: Interval,
    pub verdict: Verdict,
    pub timing_seconds: f64,
    pub chat_digest: String,
}

/// Interval enclosure of pi_N c(A, omega) by running the exact recursion in
/// interval arithmetic; every true coefficient lies in its enclosure.
pub fn enclose_truncation(
    amplitude: Complex64,
    omega: f64,
    n_trunc: u64,
) -> Result<SpaceTimeSequence<ComplexInterval>> {
    if amplitude.im == 0.0 {
        // real amplitudes keep the whole recursion real
        let chat = enclose_truncation_scalar::<RealIntervalScalar>(
            RealIntervalScalar(Interval::point(amplitude.re)),
            omega,
            n_trunc,
        )?;
        let mut out = SpaceTimeSequence::new(1, 0.0, FrequencyVector::scalar(omega)?)?;
        for (n, j, v) in chat.entries() {
            out.insert(n, j, v.as_complex_interval())?;
        }
        Ok(out)
    } else {
        enclose_truncation_scalar::<ComplexInterval>(
            ComplexInterval::point(amplitude.re, amplitude.im),
            omega,
            n_trunc,
        )
    }
}

fn enclose_truncation_scalar<S: RigorousScalar>(
    amplitude: S,
    omega: f64,
    n_trunc: u64,
) -> Result<SpaceTimeSequence<S>> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::NonPositiveFrequency);
    }
    let mut phi = crate::algebra::ModeSequence::new(1, 0.0);
    phi.insert(MultiIndex::scalar(1), amplitude)?;
    let cfg = ProblemConfig::new(2, FrequencyVector::scalar(omega)?, phi)?;
    solve_spacetime(&cfg, n_trunc)
}

fn omega_sq_interval(omega: f64) -> Interval {
    let w = Interval::point(omega);
    w.mul(w)
}

/// Y0 bound: (1/omega^2) sum_{N+1 <= n <= 2N} (b*b)_n / (n - 1) with
/// b_n = sum_j |chat_{n,j}|, everything enclosed in interval arithmetic.
pub fn compute_y0<S: RigorousScalar>(
    chat: &SpaceTimeSequence<S>,
    omega: f64,
    n_trunc: u64,
) -> Result<Interval> {
    check_truncated(chat, n_trunc)?;
    let n = n_trunc;
    let b = row_abs_enclosures(chat, n);
    let mut total = Interval::ZERO;
    for m in (n + 1)..=(2 * n) {
        let mut conv = Interval::ZERO;
        let lo = m - n;
        for k in lo..=n {
            if m - k < 1 {
                continue;
            }
            conv = conv.add(b[k as usize].mul(b[(m - k) as usize]));
        }
        total = total.add(conv.div(Interval::point((m - 1) as f64))?);
    }
    let y0 = total.div(omega_sq_interval(omega))?;
    if !y0.is_finite() {
        return Err(Error::Overflow("Y0 bound"));
    }
    Ok(y0)
}

/// Z1 bound: (4/omega^2) sum_{n <= N} sum_j |chat_{n,j}| / (n^2 + 2n(N+1) - j).
pub fn compute_z1<S: RigorousScalar>(
    chat: &SpaceTimeSequence<S>,
    omega: f64,
    n_trunc: u64,
) -> Result<Interval> {
    check_truncated(chat, n_trunc)?;
    let mut total = Interval::ZERO;
    let np1 = n_trunc + 1;
    chat.for_each(|n, j, v| {
        let nn = n.entries()[0] as u64;
        let jj = j.entries()[0] as u64;
        let denom = (nn * nn + 2 * nn * np1 - jj) as f64;
        total = total.add(v.abs_enclosure().div_unchecked(Interval::point(denom)));
    });
    let z1 = total
        .mul(Interval::point(4.0))
        .div(omega_sq_interval(omega))?;
    if !z1.is_finite() {
        return Err(Error::Overflow("Z1 bound"));
    }
    Ok(z1)
}

/// Z2 constant: 2 / (omega^2 (N+1)^2).
pub fn compute_z2(omega: f64, n_trunc: u64) -> Result<Interval> {
    let np1 = n_trunc + 1;
    let denom = omega_sq_interval(omega).scale_u64(np1 * np1);
    Interval::point(2.0).div(denom)
}

fn check_truncated<S: Scalar>(chat: &SpaceTimeSequence<S>, n_trunc: u64) -> Result<()> {
    if chat.max_order() > n_trunc as i64 {
        return Err(Error::Invalid(format!(
            "enclosure has shells beyond the truncation order {n_trunc}"
        )));
    }
    Ok(())
}

/// b_n = sum_j |chat_{n,j}| as interval enclosures, index 0 unused.
fn row_abs_enclosures<S: RigorousScalar>(
    chat: &SpaceTimeSequence<S>,
    n_trunc: u64,
) -> Vec<Interval> {
    let mut b = vec![Interval::ZERO; (n_trunc + 1) as usize];
    chat.for_each(|n, _, v| {
        let nn = n.entries()[0] as usize;
        b[nn] = b[nn].add(v.abs_enclosure());
    });
    b
}

/// Evaluate P(r) = Z2 r^2 - (1 - Z1) r + Y0 rigorously; certified iff the
/// whole enclosure is negative (which forces Z1 < 1).
pub fn radii_check(y0: Interval, z1: Interval, z2: Interval, r: f64) -> (Verdict, Interval) {
    let r_iv = Interval::point(r);
    let one_minus_z1 = Interval::ONE.sub(z1);
    let p = z2
        .mul(r_iv)
        .mul(r_iv)
        .sub(one_minus_z1.mul(r_iv))
        .add(y0);
    let ok = r > 0.0 && r.is_finite() && p.is_finite() && p.hi() < 0.0 && z1.hi() < 1.0;
    (
        if ok {
            Verdict::Certified
        } else {
            Verdict::Inconclusive
        },
        p,
    )
}

/// Midpoint of the root range [(1-Z1) - sqrt(D)] / (2 Z2) ..
/// [(1-Z1) + sqrt(D)] / (2 Z2), the natural radius to try when none is given.
fn auto_radius(y0: Interval, z1: Interval, z2: Interval) -> f64 {
    let one_minus_z1 = Interval::ONE.sub(z1);
    let two_z2 = z2.mul(Interval::point(2.0));
    let fallback = {
        let num = one_minus_z1.midpoint().max(0.0);
        let den = two_z2.midpoint();
        if den > 0.0 && num > 0.0 {
            num / den
        } else {
            1.0
        }
    };
    let disc = one_minus_z1
        .mul(one_minus_z1)
        .sub(Interval::point(4.0).mul(z2).mul(y0));
    if !(disc.hi() > 0.0) || !disc.is_finite() {
        return fallback;
    }
    let disc_nonneg = match Interval::new(disc.lo().max(0.0), disc.hi()) {
        Ok(iv) => iv,
        Err(_) => return fallback,
    };
    let root = match disc_nonneg.sqrt_enclosure() {
        Ok(iv) => iv,
        Err(_) => return fallback,
    };
    let lo = one_minus_z1.sub(root).div_unchecked(two_z2);
    let hi = one_minus_z1.add(root).div_unchecked(two_z2);
    if !lo.is_finite() || !hi.is_finite() {
        return fallback;
    }
    let mid = (lo.midpoint() + hi.midpoint()) / 2.0;
    if mid > 0.0 && mid.is_finite() {
        mid
    } else {
        fallback
    }
}

/// Full certification run. A certified verdict proves a unique fixed point
/// c_inf of the tail map in the r-ball around the enclosure, hence
/// ||c(A, omega)|| < infinity and a 2 pi / omega^2 periodic solution.
pub fn prove_periodic(params: &CertifyParams) -> Result<RadiiReport> {
    if params.n_trunc < 1 {
        return Err(Error::Invalid("truncation order must be >= 1".into()));
    }
    if !(params.omega > 0.0) || !params.omega.is_finite() {
        return Err(Error::NonPositiveFrequency);
    }
    let start = Instant::now();
    let (y0, z1, z2, digest) = if params.amplitude.im == 0.0 {
        let chat = enclose_truncation_scalar::<RealIntervalScalar>(
            RealIntervalScalar(Interval::point(params.amplitude.re)),
            params.omega,
            params.n_trunc,
        )?;
        bounds_and_digest(&chat, params.omega, params.n_trunc)?
    } else {
        let chat = enclose_truncation_scalar::<ComplexInterval>(
            ComplexInterval::point(params.amplitude.re, params.amplitude.im),
            params.omega,
            params.n_trunc,
        )?;
        bounds_and_digest(&chat, params.omega, params.n_trunc)?
    };

    let radius = params.radius.unwrap_or_else(|| auto_radius(y0, z1, z2));
    let (verdict, p_at_r) = radii_check(y0, z1, z2, radius);
    Ok(RadiiReport {
        amplitude: [params.amplitude.re, params.amplitude.im],
        omega: params.omega,
        p: 2,
        n_trunc: params.n_trunc,
        y0,
        z1,
        z2,
        radius,
        p_at_r,
        verdict,
        timing_seconds: start.elapsed().as_secs_f64(),
        chat_digest: digest,
    })
}

/// Re-evaluate a stored certificate from its bounds alone.
pub fn recheck(report: &RadiiReport) -> (Verdict, Interval) {
    radii_check(report.y0, report.z1, report.z2, report.radius)
}

fn bounds_and_digest<S: RigorousScalar>(
    chat: &SpaceTimeSequence<S>,
    omega: f64,
    n_trunc: u64,
) -> Result<(Interval, Interval, Interval, String)> {
    if !chat.all_finite() {
        return Err(Error::Overflow("truncation enclosure"));
    }
    let y0 = compute_y0(chat, omega, n_trunc)?;
    let z1 = compute_z1(chat, omega, n_trunc)?;
    let z2 = compute_z2(omega, n_trunc)?;
    Ok((y0, z1, z2, digest_enclosure(chat)))
}

/// FNV-1a over the canonical byte stream of the enclosure, so certificates
/// carry a reproducible fingerprint of the coefficients they rest on.
fn digest_enclosure<S: RigorousScalar>(chat: &SpaceTimeSequence<S>) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &byte in bytes {
            h ^= byte as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    chat.for_each(|n, j, v| {
        let z = v.as_complex_interval();
        eat(&(n.entries()[0] as u64).to_le_bytes());
        eat(&(j.entries()[0] as u64).to_le_bytes());
        for part in [z.re, z.im] {
            eat(&part.lo().to_le_bytes());
            eat(&part.hi().to_le_bytes());
        }
    });
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enclosure_contains_exact_fixture_values() {
        // c_{3,9} = 1/12 with a tight enclosure
        let chat = enclose_truncation(Complex64::new(1.0, 0.0), 1.0, 3).unwrap();
        let v = chat
            .get(&MultiIndex::scalar(3), &MultiIndex::scalar(9))
            .unwrap();
        assert!(v.re.contains(1.0 / 12.0));
        assert!(v.re.width() <= 1e-14);
        assert!(v.im.is_zero());
    }

    #[test]
    fn enclosure_rescaled_amplitude() {
        // A = 3: shell 2 entries are 9/2 and -9/2
        let chat = enclose_truncation(Complex64::new(3.0, 0.0), 1.0, 2).unwrap();
        let v = chat
            .get(&MultiIndex::scalar(2), &MultiIndex::scalar(2))
            .unwrap();
        assert!(v.re.contains(4.5));
        let v = chat
            .get(&MultiIndex::scalar(2), &MultiIndex::scalar(4))
            .unwrap();
        assert!(v.re.contains(-4.5));
    }

    #[test]
    fn enclosure_zero_amplitude_is_empty() {
        let chat = enclose_truncation(Complex64::new(0.0, 0.0), 1.0, 4).unwrap();
        assert!(chat.is_empty());
    }

    #[test]
    fn y0_single_shell() {
        let chat = enclose_truncation(Complex64::new(2.0, 0.0), 1.0, 1).unwrap();
        let y0 = compute_y0(&chat, 1.0, 1).unwrap();
        assert!(y0.contains(4.0)); // |A|^2 / omega^2
        assert!(y0.width() < 1e-12);

        let empty: SpaceTimeSequence<ComplexInterval> =
            SpaceTimeSequence::new(1, 0.0, FrequencyVector::scalar(1.0).unwrap()).unwrap();
        assert!(compute_y0(&empty, 1.0, 1).unwrap().is_zero());
    }

    #[test]
    fn z1_single_shell() {
        let chat = enclose_truncation(Complex64::new(2.0, 0.0), 1.0, 1).unwrap();
        let z1 = compute_z1(&chat, 1.0, 1).unwrap();
        // 4 |A| / (1 + 4 - 1) = |A|
        assert!(z1.contains(2.0));
        assert!(z1.width() < 1e-12);
    }

    #[test]
    fn z1_shrinks_with_larger_truncation() {
        let chat = enclose_truncation(Complex64::new(1.0, 0.0), 1.0, 6).unwrap();
        let z1_small = compute_z1(&chat, 1.0, 6).unwrap();
        let z1_large = compute_z1(&chat, 1.0, 30).unwrap();
        assert!(z1_large.hi() < z1_small.hi());
    }

    #[test]
    fn z2_values() {
        assert!(compute_z2(1.0, 1).unwrap().contains(0.5));
        assert!(compute_z2(1.0, 110).unwrap().contains(2.0 / 12321.0));
        assert!(compute_z2(2.0, 1).unwrap().contains(1.0 / 8.0));
    }

    #[test]
    fn radii_check_quadratic() {
        let (v, p) = radii_check(
            Interval::point(1.0 / 64.0),
            Interval::point(1.0 / 8.0),
            Interval::point(0.5),
            0.02,
        );
        assert_eq!(v, Verdict::Certified);
        assert!((p.midpoint() + 0.001675).abs() < 1e-6, "P = {p:?}");

        // Z1 >= 1 can never certify
        let (v, _) = radii_check(
            Interval::point(1.0),
            Interval::point(2.0),
            Interval::point(0.5),
            10.0,
        );
        assert_eq!(v, Verdict::Inconclusive);

        // r = 0 gives P(0) = Y0 >= 0
        let (v, p) = radii_check(
            Interval::point(0.25),
            Interval::point(0.5),
            Interval::point(0.5),
            0.0,
        );
        assert_eq!(v, Verdict::Inconclusive);
        assert!(p.contains(0.25));
    }

    #[test]
    fn smoke_certification_a2() {
        let report = prove_periodic(&CertifyParams {
            amplitude: Complex64::new(2.0, 0.0),
            omega: 1.0,
            n_trunc: 40,
            radius: None,
        })
        .unwrap();
        assert_eq!(report.verdict, Verdict::Certified, "report {report:?}");
        assert!(report.p_at_r.hi() < 0.0);
        assert!(report.z1.hi() < 1.0);
        let (again, _) = recheck(&report);
        assert_eq!(again, Verdict::Certified);
    }

    #[test]
    fn small_amplitude_certifies_at_tiny_truncation() {
        // A = 1/8, omega = 1, N = 1: Y0 = 1/64, Z1 = 1/8, Z2 = 1/2
        let report = prove_periodic(&CertifyParams {
            amplitude: Complex64::new(0.125, 0.0),
            omega: 1.0,
            n_trunc: 1,
            radius: Some(0.02),
        })
        .unwrap();
        assert_eq!(report.verdict, Verdict::Certified);
        assert!(report.y0.contains(1.0 / 64.0));
        assert!(report.z1.contains(1.0 / 8.0));
        assert!(report.z2.contains(0.5));
    }

    #[test]
    fn complex_amplitude_path_agrees_with_real_path() {
        // the modulus drives every bound; i*A and A certify identically
        let re = prove_periodic(&CertifyParams {
            amplitude: Complex64::new(1.5, 0.0),
            omega: 1.0,
            n_trunc: 12,
            radius: None,
        })
        .unwrap();
        let im = prove_periodic(&CertifyParams {
            amplitude: Complex64::new(0.0, 1.5),
            omega: 1.0,
            n_trunc: 12,
            radius: None,
        })
        .unwrap();
        assert_eq!(re.verdict, Verdict::Certified);
        assert_eq!(im.verdict, Verdict::Certified);
        assert!((re.y0.midpoint() - im.y0.midpoint()).abs() < 1e-10);
        assert!((re.z1.midpoint() - im.z1.midpoint()).abs() < 1e-10);
    }

    #[test]
    fn widening_inputs_never_certifies_more() {
        let y0 = Interval::point(0.01);
        let z1 = Interval::point(0.3);
        let z2 = Interval::point(0.05);
        let r = 0.1;
        let (tight, _) = radii_check(y0, z1, z2, r);
        assert_eq!(tight, Verdict::Certified);
        let widen = |iv: Interval, w: f64| Interval::new(iv.lo(), iv.hi() + w).unwrap();
        // widening upward by a lot flips to inconclusive, never the reverse
        let (wide, _) = radii_check(widen(y0, 10.0), z1, z2, r);
        assert_eq!(wide, Verdict::Inconclusive);
        let (wide, _) = radii_check(y0, widen(z1, 1.0), z2, r);
        assert_eq!(wide, Verdict::Inconclusive);
    }

    #[test]
    fn scaling_consistency_omega_two() {
        // c(A, omega) = omega^2 c(A/omega^2, 1) entrywise (p = 2), and for
        // omega = 2 every floating-point operation in the pipeline is a pure
        // exponent shift of its omega = 1 counterpart, so certification of
        // (A, 2) at radius r and of (A/4, 1) at radius r/4 succeed or fail
        // together, bit for bit.
        for (a, r, expect) in [
            (8.0, 400.0, Verdict::Certified),
            (24.0, 400.0, Verdict::Inconclusive),
            (24.0, 0.5, Verdict::Inconclusive),
        ] {
            let scaled = prove_periodic(&CertifyParams {
                amplitude: Complex64::new(a, 0.0),
                omega: 2.0,
                n_trunc: 25,
                radius: Some(r),
            })
            .unwrap();
            let unit = prove_periodic(&CertifyParams {
                amplitude: Complex64::new(a / 4.0, 0.0),
                omega: 1.0,
                n_trunc: 25,
                radius: Some(r / 4.0),
            })
            .unwrap();
            assert_eq!(scaled.verdict, expect, "A = {a}, r = {r}");
            assert_eq!(unit.verdict, expect, "A/4 = {}, r/4 = {}", a / 4.0, r / 4.0);
            // the bounds relate by exact powers of two
            assert_eq!(scaled.y0.hi(), 4.0 * unit.y0.hi());
            assert_eq!(scaled.z1.hi(), unit.z1.hi());
            assert_eq!(scaled.z2.hi(), unit.z2.hi() / 4.0);
        }
    }

    #[test]
    fn digest_is_stable() {
        let a = enclose_truncation(Complex64::new(1.0, 0.0), 1.0, 4).unwrap();
        let b = enclose_truncation(Complex64::new(1.0, 0.0), 1.0, 4).unwrap();
        assert_eq!(digest_enclosure(&a), digest_enclosure(&b));
        let c = enclose_truncation(Complex64::new(2.0, 0.0), 1.0, 4).unwrap();
        assert_ne!(digest_enclosure(&a), digest_enclosure(&c));
    }
}
