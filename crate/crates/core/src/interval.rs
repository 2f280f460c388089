//! Outward-rounded interval arithmetic over f64 and rectangular complex
//! intervals.
//!
//! Rounding strategy: every endpoint is computed with ordinary
//! round-to-nearest arithmetic and then stepped one representable value
//! outward, unless the operation is provably exact (then the endpoint is kept
//! as is, so integer and dyadic arithmetic stays zero-width). This keeps the
//! arithmetic thread-safe and independent of the floating-point environment;
//! the cost is at most one ulp of pessimism per endpoint per operation.
//!
//! Endpoints are allowed to become non-finite (overflow propagates as +/-inf
//! or NaN); callers that produce certificates must reject non-finite
//! enclosures via [`Interval::is_finite`]. Nothing here turns an overflow
//! into a silent finite answer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of significant bits in the significand of `x` (trailing zeros
/// stripped). Returns 64 for non-finite inputs so exactness tests fail closed.
#[inline]
fn sig_bits(x: f64) -> u32 {
    if x == 0.0 {
        return 0;
    }
    let b = x.to_bits();
    let exp = ((b >> 52) & 0x7ff) as u32;
    if exp == 0x7ff {
        return 64;
    }
    let mant = b & ((1u64 << 52) - 1);
    let full = if exp == 0 { mant } else { mant | (1u64 << 52) };
    64 - full.leading_zeros() - full.trailing_zeros()
}

/// True when a + b rounded to nearest equals the exact sum.
#[inline]
fn add_is_exact(s: f64, a: f64, b: f64) -> bool {
    s.is_finite() && s - a == b && s - b == a
}

/// True when a * b rounded to nearest equals the exact product. Sufficient
/// condition: the significands jointly fit in 53 bits and no underflow can
/// truncate the result. A zero product is exact only when an operand is zero
/// (a nonzero product can underflow all the way to zero).
#[inline]
fn mul_is_exact(p: f64, a: f64, b: f64) -> bool {
    if p == 0.0 {
        return a == 0.0 || b == 0.0;
    }
    p.is_normal() && sig_bits(a) + sig_bits(b) <= 53
}

/// True when q = a / b rounded to nearest is the exact quotient.
#[inline]
fn div_is_exact(q: f64, a: f64, b: f64) -> bool {
    (q == 0.0 || q.is_normal()) && q.is_finite() && sig_bits(q) + sig_bits(b) <= 53 && q * b == a
}

#[inline]
fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if add_is_exact(s, a, b) {
        s
    } else {
        down(s)
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if add_is_exact(s, a, b) {
        s
    } else {
        up(s)
    }
}

#[inline]
fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if mul_is_exact(p, a, b) {
        p
    } else {
        down(p)
    }
}

#[inline]
fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if mul_is_exact(p, a, b) {
        p
    } else {
        up(p)
    }
}

#[inline]
fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if div_is_exact(q, a, b) {
        q
    } else {
        down(q)
    }
}

#[inline]
fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if div_is_exact(q, a, b) {
        q
    } else {
        up(q)
    }
}

/// Upper bound on sqrt(x) using one Newton step. For any u > 0 the AM-GM
/// inequality gives (u + x/u)/2 >= sqrt(x), so rounding every operation up
/// yields a rigorous upper bound regardless of the quality of the seed.
fn sqrt_up(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return f64::INFINITY;
    }
    let u = x.sqrt();
    let q = div_up(x, u);
    let s = add_up(u, q);
    // Division by two is an exponent shift, exact unless subnormal.
    let h = s / 2.0;
    if mul_is_exact(h, s, 0.5) {
        h
    } else {
        up(h)
    }
}

/// Lower bound on sqrt(x): x / sqrt_up(x) rounded down.
fn sqrt_down(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let u = sqrt_up(x);
    div_down(x, u).max(0.0)
}

/// Closed real interval [lo, hi] with outward-rounded arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl From<Interval> for [f64; 2] {
    fn from(v: Interval) -> Self {
        [v.lo, v.hi]
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::Invalid(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval [v, v].
    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub const ZERO: Self = Self::point(0.0);
    pub const ONE: Self = Self::point(1.0);

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        self.lo + (self.hi - self.lo) / 2.0
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn add(self, o: Self) -> Self {
        Self {
            lo: add_down(self.lo, o.lo),
            hi: add_up(self.hi, o.hi),
        }
    }

    pub fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> Self {
        // Four corner products; each lower candidate is rounded down and each
        // upper candidate up, so min/max over them is a valid enclosure.
        // Non-finite operands poison the result: 0 * inf corner products are
        // NaN, which f64 min/max would silently drop.
        if !(self.is_finite() && o.is_finite()) {
            return Self {
                lo: f64::NAN,
                hi: f64::NAN,
            };
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let lo = mul_down(a, c)
            .min(mul_down(a, d))
            .min(mul_down(b, c))
            .min(mul_down(b, d));
        let hi = mul_up(a, c)
            .max(mul_up(a, d))
            .max(mul_up(b, c))
            .max(mul_up(b, d));
        Self { lo, hi }
    }

    /// Division; errors when the divisor contains zero.
    pub fn div(self, o: Self) -> Result<Self> {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return Err(Error::IntervalDivisionByZero);
        }
        Ok(self.div_unchecked(o))
    }

    /// Division that poisons the result with NaN endpoints when the divisor
    /// contains zero; callers on hot paths check finiteness at stage
    /// boundaries instead of branching per entry.
    pub(crate) fn div_unchecked(self, o: Self) -> Self {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return Self {
                lo: f64::NAN,
                hi: f64::NAN,
            };
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let lo = div_down(a, c)
            .min(div_down(a, d))
            .min(div_down(b, c))
            .min(div_down(b, d));
        let hi = div_up(a, c)
            .max(div_up(a, d))
            .max(div_up(b, c))
            .max(div_up(b, d));
        Self { lo, hi }
    }

    /// Scale by a non-negative integer (exact when representable).
    pub fn scale_u64(self, k: u64) -> Self {
        self.mul(Self::point(k as f64))
    }

    /// Integer power of a non-negative interval.
    pub fn powi_nonneg(self, mut e: u32) -> Self {
        debug_assert!(self.lo >= 0.0);
        let mut base = self;
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }

    /// Enclosure of sqrt over a non-negative interval.
    pub fn sqrt_enclosure(self) -> Result<Self> {
        if self.lo < 0.0 {
            return Err(Error::Invalid(format!(
                "sqrt of interval with negative lower bound {}",
                self.lo
            )));
        }
        Ok(Self {
            lo: sqrt_down(self.lo),
            hi: sqrt_up(self.hi),
        })
    }

    /// max |x| over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// min |x| over the interval (0 when the interval straddles zero).
    pub fn mig(&self) -> f64 {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Enclosure of |x| over the interval.
    pub fn abs_enclosure(&self) -> Self {
        Self {
            lo: self.mig(),
            hi: self.mag(),
        }
    }
}

/// Rectangular complex interval: contains z iff re contains Re z and im
/// contains Im z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexInterval {
    pub const ZERO: Self = Self {
        re: Interval::ZERO,
        im: Interval::ZERO,
    };

    pub fn new(re: Interval, im: Interval) -> Self {
        Self { re, im }
    }

    pub fn point(re: f64, im: f64) -> Self {
        Self {
            re: Interval::point(re),
            im: Interval::point(im),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn contains(&self, re: f64, im: f64) -> bool {
        self.re.contains(re) && self.im.contains(im)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            re: self.re.sub(o.re),
            im: self.im.sub(o.im),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    /// Rectangle enclosure of the product set via the four real products.
    pub fn mul(&self, o: &Self) -> Self {
        Self {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn div_real(&self, w: Interval) -> Self {
        Self {
            re: self.re.div_unchecked(w),
            im: self.im.div_unchecked(w),
        }
    }

    /// Enclosure of |z| over the rectangle.
    pub fn abs_enclosure(&self) -> Interval {
        let rm = self.re.mag();
        let im = self.im.mag();
        let hi_sq = add_up(mul_up(rm, rm), mul_up(im, im));
        let rl = self.re.mig();
        let il = self.im.mig();
        let lo_sq = add_down(mul_down(rl, rl), mul_down(il, il)).max(0.0);
        Interval {
            lo: sqrt_down(lo_sq),
            hi: sqrt_up(hi_sq),
        }
    }

    /// Upper bound on sup |z| over the rectangle, rounded up.
    pub fn abs_upper(&self) -> f64 {
        self.abs_enclosure().hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_encloses() {
        let a = Interval::new(1.0, 2.0).unwrap();
        let b = Interval::new(3.0, 4.0).unwrap();
        let s = a.add(b);
        assert!(s.lo <= 4.0 && s.hi >= 6.0);
        // small integers: exact, zero extra width
        assert_eq!(s.lo, 4.0);
        assert_eq!(s.hi, 6.0);
    }

    #[test]
    fn mul_signs() {
        let a = Interval::new(-1.0, 1.0).unwrap();
        let p = a.mul(a);
        assert!(p.contains_interval(&Interval::new(-1.0, 1.0).unwrap()));
        assert_eq!(p.lo, -1.0);
        assert_eq!(p.hi, 1.0);
    }

    #[test]
    fn div_one_third_widens() {
        let q = Interval::ONE.div(Interval::point(3.0)).unwrap();
        assert!(q.contains(1.0 / 3.0));
        assert!(q.width() > 0.0);
        assert!(q.width() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn div_by_zero_interval_rejected() {
        let z = Interval::new(-1.0, 2.0).unwrap();
        assert!(Interval::ONE.div(z).is_err());
    }

    #[test]
    fn exact_dyadic_division_stays_zero_width() {
        let q = Interval::ONE.div(Interval::point(2.0)).unwrap();
        assert_eq!(q, Interval::point(0.5));
    }

    #[test]
    fn small_integer_transparency() {
        // products of small integers stay zero width
        let a = Interval::point(123456.0);
        let b = Interval::point(789.0);
        let p = a.mul(b);
        assert_eq!(p, Interval::point(123456.0 * 789.0));
    }

    #[test]
    fn sqrt_bounds() {
        for &x in &[2.0, 3.0, 25.0, 1e-12, 7.3e11] {
            let u = sqrt_up(x);
            let l = sqrt_down(x);
            assert!(l <= x.sqrt() && x.sqrt() <= u);
            assert!((u - l) / u < 1e-14);
        }
        // exact square roots of dyadics are recovered exactly
        assert_eq!(sqrt_up(25.0), 5.0);
        assert_eq!(sqrt_down(25.0), 5.0);
    }

    #[test]
    fn complex_mul_contains_i() {
        let a = ComplexInterval::point(1.0, 0.0);
        let b = ComplexInterval::point(0.0, 1.0);
        let p = a.mul(&b);
        assert!(p.contains(0.0, 1.0));
    }

    #[test]
    fn abs_upper_pythagorean() {
        let z = ComplexInterval::point(3.0, 4.0);
        let u = z.abs_upper();
        assert!(u >= 5.0);
        assert!(u <= 5.0 + 5.0 * f64::EPSILON);
        let box11 = ComplexInterval::new(
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::new(-1.0, 1.0).unwrap(),
        );
        assert!(box11.abs_upper() >= 2.0_f64.sqrt());
        assert_eq!(box11.abs_enclosure().lo, 0.0);
    }

    #[test]
    fn overflow_propagates_nonfinite() {
        let big = Interval::point(f64::MAX);
        let p = big.mul(big);
        assert!(!p.is_finite());
    }
}
