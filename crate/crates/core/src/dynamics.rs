//! Dynamical diagnostics for monochromatic data: the diagonal coefficient
//! recursion and its blow-up lower bound, classification against the proved
//! amplitude thresholds, the small-data (quasi)periodicity bound, and the
//! critical-amplitude regression.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{shell_len, SpaceTimeSequence};
use crate::error::{Error, Result};
use crate::fft::FftPlans;
use crate::lattice::FrequencyVector;

/// Verdict of `classify_monochromatic`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    CertifiedPeriodic,
    CertifiedBlowup,
    SufficientSmallData,
    Undetermined,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub regime: Regime,
    pub threshold_used: f64,
    /// Upper bound on the blow-up time, present exactly for certified blow-up.
    pub blowup_time_bound: Option<f64>,
}

/// Diagonal coefficients c~_{n,n} of c(1,1) for p = 2:
/// c~_{1,1} = 1, c~_{n,n} = sum_{k=1}^{n-1} c~_{k,k} c~_{n-k,n-k} / (n^2 - n).
///
/// Internally the values are normalized as c~_{n,n} = w_n / (n!)^2 with
/// integer w_n, which turns the whole recursion into integer arithmetic
/// (exactness of the division by n(n-1) is asserted); the returned rationals
/// are the exact values.
pub fn diagonal_sequence(n_max: u64) -> Vec<BigRational> {
    let ws = diagonal_numerators(n_max);
    let mut out = Vec::with_capacity(n_max as usize);
    let mut fact = BigInt::from(1u32);
    for n in 1..=n_max {
        fact *= BigInt::from(n);
        let denom = &fact * &fact;
        out.push(BigRational::new(ws[n as usize].clone(), denom));
    }
    out
}

/// w_n with c~_{n,n} = w_n / (n!)^2; index 0 unused.
fn diagonal_numerators(n_max: u64) -> Vec<BigInt> {
    let len = (n_max + 1) as usize;
    let mut w: Vec<BigInt> = vec![BigInt::zero(); len.max(2)];
    w[1] = BigInt::from(1u32);
    // Pascal row C(n, k), updated in place from row n-1 to row n.
    let mut binom: Vec<BigInt> = vec![BigInt::from(1u32); len.max(2)];
    for n in 2..=n_max {
        let nu = n as usize;
        // extend row: C(n, k) = C(n-1, k-1) + C(n-1, k), downward to reuse
        for k in (1..nu).rev() {
            let prev = binom[k - 1].clone();
            binom[k] += prev;
        }
        // sum_{k=1}^{n-1} C(n,k)^2 w_k w_{n-k}, symmetric halves
        let mut sum = BigInt::zero();
        let half = (n - 1) / 2;
        for k in 1..=half {
            let b = &binom[k as usize];
            sum += b * b * &w[k as usize] * &w[(n - k) as usize];
        }
        sum *= 2;
        if n % 2 == 0 {
            let k = (n / 2) as usize;
            let b = &binom[k];
            sum += b * b * &w[k] * &w[k];
        }
        let step = BigInt::from(n * n - n);
        let (q, r) = num_integer::Integer::div_rem(&sum, &step);
        assert!(
            r.is_zero(),
            "diagonal normalization failed at n = {n}: w_n is not integral"
        );
        w[nu] = q;
    }
    w
}

/// Outcome of the diagonal lower-bound check c~_{n,n} >= 6n / 6^n.
#[derive(Debug, Clone)]
pub struct DiagonalBound {
    pub holds: bool,
    /// Shells where the bound is attained with equality.
    pub equality_shells: Vec<u64>,
}

/// Exact comparison of every diagonal coefficient against 6n / 6^n.
pub fn diagonal_bound(n_max: u64) -> DiagonalBound {
    let ws = diagonal_numerators(n_max);
    let mut holds = true;
    let mut equality_shells = Vec::new();
    let mut fact = BigInt::from(1u32);
    let mut six_pow = BigInt::from(1u32);
    let six = BigInt::from(6u32);
    for n in 1..=n_max {
        fact *= BigInt::from(n);
        six_pow *= &six;
        // w_n / (n!)^2 >= 6n / 6^n  <=>  w_n * 6^n >= 6n * (n!)^2
        let lhs = &ws[n as usize] * &six_pow;
        let rhs = BigInt::from(6 * n) * &fact * &fact;
        match lhs.cmp(&rhs) {
            std::cmp::Ordering::Less => holds = false,
            std::cmp::Ordering::Equal => equality_shells.push(n),
            std::cmp::Ordering::Greater => {}
        }
    }
    DiagonalBound {
        holds,
        equality_shells,
    }
}

/// True iff c~_{n,n} >= 6n / 6^n for every 1 <= n <= N (exact arithmetic).
pub fn blowup_bound_check(n_max: u64) -> bool {
    diagonal_bound(n_max).holds
}

/// Small-data sufficient condition for (quasi)periodicity: data with ||phi||
/// below (p-1)/p * (||omega||^2 (p-1)/2)^(1/(p-1)) yields a (quasi)periodic
/// solution bounded a priori by r0 = (||omega||^2 (p-1)/2)^(1/(p-1)).
pub fn quasiperiodic_bound(p: u32, omega: &FrequencyVector) -> Result<(f64, f64)> {
    if p < 2 {
        return Err(Error::InvalidPower(p));
    }
    let base = omega.norm_sq() * (p - 1) as f64 / 2.0;
    let r0 = base.powf(1.0 / (p - 1) as f64);
    let threshold = (p - 1) as f64 / p as f64 * r0;
    Ok((threshold, r0))
}

/// Classify monochromatic data A e^{i omega x} (p = 2, d = 1) against the
/// proved thresholds: |A| >= 6 omega^2 blows up in L^2 before 2 pi / omega^2,
/// |A| <= 3 omega^2 is periodic by the certified proof, and |A| <= omega^2/4
/// additionally satisfies the small-data bound. The verdict for data between
/// the proved thresholds stays undetermined unless an escalation order is
/// supplied, in which case a fresh certification attempt at that truncation
/// decides periodicity. The same thresholds apply to the first mode of
/// general data when higher modes are added (the diagonal lower bound is
/// unchanged): blow-up persists for A e^{i omega x} + higher modes.
pub fn classify_monochromatic(
    amplitude: f64,
    omega: f64,
    escalate_n: Option<u64>,
) -> Result<ClassificationResult> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::NonPositiveFrequency);
    }
    let a = amplitude.abs();
    let w2 = omega * omega;
    if a >= 6.0 * w2 {
        return Ok(ClassificationResult {
            regime: Regime::CertifiedBlowup,
            threshold_used: 6.0 * w2,
            blowup_time_bound: Some(2.0 * std::f64::consts::PI / w2),
        });
    }
    if a <= w2 / 4.0 {
        return Ok(ClassificationResult {
            regime: Regime::SufficientSmallData,
            threshold_used: w2 / 4.0,
            blowup_time_bound: None,
        });
    }
    if a <= 3.0 * w2 {
        return Ok(ClassificationResult {
            regime: Regime::CertifiedPeriodic,
            threshold_used: 3.0 * w2,
            blowup_time_bound: None,
        });
    }
    if let Some(n) = escalate_n {
        let report = crate::certify::prove_periodic(&crate::certify::CertifyParams {
            amplitude: Complex64::new(a, 0.0),
            omega,
            n_trunc: n,
            radius: None,
        })?;
        if report.verdict == crate::certify::Verdict::Certified {
            return Ok(ClassificationResult {
                regime: Regime::CertifiedPeriodic,
                threshold_used: a / w2,
                blowup_time_bound: None,
            });
        }
    }
    Ok(ClassificationResult {
        regime: Regime::Undetermined,
        threshold_used: 3.0 * w2,
        blowup_time_bound: None,
    })
}

/// Entrywise geometric rescaling c(A, omega)_{n,j} = A^n / omega^(2(n-1)/(p-1)) c~_{n,j}
/// of unit-amplitude coefficients (double precision).
pub fn rescale(
    ctilde: &SpaceTimeSequence<Complex64>,
    amplitude: Complex64,
    omega: f64,
    p: u32,
) -> Result<SpaceTimeSequence<Complex64>> {
    if ctilde.dim() != 1 {
        return Err(Error::Invalid("rescale is defined for d = 1".into()));
    }
    if p < 2 {
        return Err(Error::InvalidPower(p));
    }
    if !(omega > 0.0) {
        return Err(Error::NonPositiveFrequency);
    }
    let mut out = SpaceTimeSequence::new(
        1,
        ctilde.weight_exponent(),
        FrequencyVector::scalar(omega)?,
    )?;
    let mut a_pow = Complex64::new(1.0, 0.0);
    let mut cached_n = 0u64;
    for (n, j, v) in ctilde.entries() {
        let nn = n.entries()[0] as u64;
        while cached_n < nn {
            a_pow *= amplitude;
            cached_n += 1;
        }
        let w_pow = omega.powf(2.0 * (nn as f64 - 1.0) / (p - 1) as f64);
        out.insert(n, j, v * a_pow / w_pow)?;
    }
    Ok(out)
}

/// Result of the critical-amplitude regression.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AstarEstimate {
    pub astar: f64,
    pub r_squared: f64,
    pub slope: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub used_fft: bool,
}

/// Least-squares fit of ln S_n against n, where S_n = sum_j |c(1,1)_{n,j}|,
/// mapped to A* = exp(-slope).
///
/// The coefficients are built at internal amplitude 4 (each row scaled by
/// 4^n, which the geometric scaling makes exact) so products stay inside the
/// double-precision range out to large shells; the slope correction ln 4 is
/// applied before exponentiating.
pub fn estimate_astar(
    n_min: u64,
    n_max: u64,
    shells: u64,
    use_fft: bool,
) -> Result<AstarEstimate> {
    if n_min < 2 || n_min >= n_max {
        return Err(Error::DegenerateRegression);
    }
    let n_shells = shells.max(n_max);
    let s4 = monochromatic_row_sums(n_shells, use_fft);
    let ln4 = 4.0_f64.ln();
    let mut xs = Vec::with_capacity((n_max - n_min + 1) as usize);
    let mut ys = Vec::with_capacity(xs.capacity());
    for n in n_min..=n_max {
        let s = s4[n as usize];
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::EmptyRowSum { n });
        }
        xs.push(n as f64);
        ys.push(s.ln() - n as f64 * ln4);
    }
    let (slope, _intercept, r_squared) = linear_fit(&xs, &ys);
    Ok(AstarEstimate {
        astar: (-slope).exp(),
        r_squared,
        slope,
        n_min,
        n_max,
        used_fft: use_fft,
    })
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let f = intercept + slope * x;
        ss_res += (y - f) * (y - f);
        ss_tot += (y - my) * (y - my);
    }
    (slope, intercept, 1.0 - ss_res / ss_tot)
}

/// Row sums S_n of the p = 2 monochromatic coefficients at amplitude 4,
/// omega = 1 (real recursion), shells 1..=n_max; index 0 unused.
///
/// The direct path is the elementary shell convolution; the FFT path caches
/// a Hermitian half spectrum per resolved shell and assembles each (c^2)
/// shell with one pointwise pass and one inverse transform.
pub fn monochromatic_row_sums(n_max: u64, use_fft: bool) -> Vec<f64> {
    let mut sums = vec![0.0; (n_max + 1) as usize];
    let mut shells: Vec<Vec<f64>> = Vec::with_capacity(n_max as usize);

    let plans = if use_fft && n_max >= 2 {
        let need = shell_len(n_max);
        Some(FftPlans::new(need.next_power_of_two().max(8)))
    } else {
        None
    };
    let mut spectra: Vec<Vec<Complex64>> = Vec::with_capacity(n_max as usize);

    for n in 1..=n_max {
        let row = if n == 1 {
            vec![4.0]
        } else {
            let sq = match &plans {
                Some(plans) => square_shell_fft(&spectra, n, plans),
                None => square_shell_real(&shells, n),
            };
            resolve_shell_real(&sq, n)
        };
        sums[n as usize] = row.iter().map(|v| v.abs()).sum();
        if let Some(plans) = &plans {
            spectra.push(plans.forward_half(&row));
        }
        shells.push(row);
    }
    sums
}

fn square_shell_real(shells: &[Vec<f64>], n: u64) -> Vec<f64> {
    let len = shell_len(n);
    let mut acc = vec![0.0; len];
    let half = (n - 1) / 2;
    for n1 in 1..=half {
        let a = &shells[(n1 - 1) as usize];
        let b = &shells[(n - n1 - 1) as usize];
        for (o1, &v1) in a.iter().enumerate() {
            if v1 == 0.0 {
                continue;
            }
            for (o2, &v2) in b.iter().enumerate() {
                acc[o1 + o2] += v1 * v2;
            }
        }
    }
    for v in acc.iter_mut() {
        *v *= 2.0;
    }
    if n % 2 == 0 {
        let a = &shells[(n / 2 - 1) as usize];
        for (o1, &v1) in a.iter().enumerate() {
            if v1 == 0.0 {
                continue;
            }
            for (o2, &v2) in a.iter().enumerate() {
                acc[o1 + o2] += v1 * v2;
            }
        }
    }
    acc
}

fn square_shell_fft(spectra: &[Vec<Complex64>], n: u64, plans: &FftPlans) -> Vec<f64> {
    let bins = plans.len / 2 + 1;
    let mut acc = vec![Complex64::new(0.0, 0.0); bins];
    let half = (n - 1) / 2;
    for n1 in 1..=half {
        let a = &spectra[(n1 - 1) as usize];
        let b = &spectra[(n - n1 - 1) as usize];
        for ((t, x), y) in acc.iter_mut().zip(a).zip(b) {
            *t += x * y;
        }
    }
    for t in acc.iter_mut() {
        *t *= 2.0;
    }
    if n % 2 == 0 {
        let a = &spectra[(n / 2 - 1) as usize];
        for (t, x) in acc.iter_mut().zip(a) {
            *t += x * x;
        }
    }
    let mut out = plans.inverse_half(&acc);
    out.truncate(shell_len(n));
    out
}

/// Shell n of c from its (c^2) shell: divide by n^2 - j off the top, close
/// the top entry with the negated tail sum (phi_n = 0 for n >= 2).
fn resolve_shell_real(cp: &[f64], n: u64) -> Vec<f64> {
    let width = shell_len(n) - 1;
    let mut row = vec![0.0; width + 1];
    let mut tail = 0.0;
    for (off, &v) in cp.iter().enumerate().take(width) {
        if v == 0.0 {
            continue;
        }
        let j = n + off as u64;
        let cv = v / (n * n - j) as f64;
        tail += cv;
        row[off] = cv;
    }
    row[width] = -tail;
    row
}
