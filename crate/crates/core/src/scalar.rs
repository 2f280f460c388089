//! The pluggable scalar contract behind the sequence algebra.
//!
//! The same recursion has to run fast (double precision), exactly (rational
//! complex, for fixture tests) and rigorously (interval enclosures), so the
//! algebra is generic over one arithmetic trait. Real-valued weights (the
//! denominators omega^2 (n^2 - j) and the rescaling powers) get their own
//! small ring trait so each scalar can keep them exact in its own number
//! system.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{ComplexInterval, Interval};

/// Which concrete arithmetic a scalar uses; drives serialization and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    F64,
    Rational,
    Interval,
}

/// Real weights: the commutative ring that holds omega_i^2 and the exact
/// integer factors n_i^2 - j_i.
pub trait WeightRing: Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale_u64(&self, k: u64) -> Self;
    fn is_zero(&self) -> bool;
    /// Exact image of an f64 value (every finite f64 is a dyadic rational).
    fn from_f64(x: f64) -> Self;
    /// self^(num/den) for a positive weight. Exact scalars only support
    /// integer exponents; f64 falls back to powf.
    fn pow_ratio(&self, num: i64, den: i64) -> Result<Self>;
}

impl WeightRing for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_u64(&self, k: u64) -> Self {
        self * k as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn pow_ratio(&self, num: i64, den: i64) -> Result<Self> {
        Ok(self.powf(num as f64 / den as f64))
    }
}

impl WeightRing for BigRational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_u64(&self, k: u64) -> Self {
        self * BigRational::from_integer(BigInt::from(k))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite f64 converts exactly")
    }
    fn pow_ratio(&self, num: i64, den: i64) -> Result<Self> {
        if den == 0 || num % den != 0 {
            return Err(Error::FractionalPower { num, den });
        }
        let e = num / den;
        Ok(self.pow(e as i32))
    }
}

impl WeightRing for Interval {
    fn zero() -> Self {
        Interval::ZERO
    }
    fn one() -> Self {
        Interval::ONE
    }
    fn add(&self, other: &Self) -> Self {
        Interval::add(*self, *other)
    }
    fn mul(&self, other: &Self) -> Self {
        Interval::mul(*self, *other)
    }
    fn scale_u64(&self, k: u64) -> Self {
        Interval::scale_u64(*self, k)
    }
    fn is_zero(&self) -> bool {
        Interval::is_zero(self)
    }
    fn from_f64(x: f64) -> Self {
        Interval::point(x)
    }
    fn pow_ratio(&self, num: i64, den: i64) -> Result<Self> {
        if den == 0 || num % den != 0 {
            return Err(Error::FractionalPower { num, den });
        }
        let e = num / den;
        if e < 0 {
            return Err(Error::FractionalPower { num, den });
        }
        Ok(self.powi_nonneg(e as u32))
    }
}

/// Complex-valued scalar: the coefficient field of every sequence.
pub trait Scalar: Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    type Real: WeightRing;

    const KIND: ScalarKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div_real(&self, w: &Self::Real) -> Self;
    fn mul_real(&self, w: &Self::Real) -> Self;
    /// Upper bound on |self| as f64 (exact modulus for f64, outward-rounded
    /// for intervals, rounded up for rationals).
    fn abs_upper(&self) -> f64;
    /// Best f64 approximation, for diagnostics and serialization.
    fn approx(&self) -> Complex64;
    /// Exact image of a complex double.
    fn from_c64(z: Complex64) -> Self;
    /// True when every component is finite (always true for exact scalars).
    fn is_finite(&self) -> bool {
        true
    }
}

impl Scalar for Complex64 {
    type Real = f64;
    const KIND: ScalarKind = ScalarKind::F64;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_real(&self, w: &f64) -> Self {
        self / w
    }
    fn mul_real(&self, w: &f64) -> Self {
        self * w
    }
    fn abs_upper(&self) -> f64 {
        self.norm()
    }
    fn approx(&self) -> Complex64 {
        *self
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Exact rational complex numbers.
pub type RationalComplex = num_complex::Complex<BigRational>;

impl Scalar for RationalComplex {
    type Real = BigRational;
    const KIND: ScalarKind = ScalarKind::Rational;

    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn div_real(&self, w: &BigRational) -> Self {
        Self::new(&self.re / w, &self.im / w)
    }
    fn mul_real(&self, w: &BigRational) -> Self {
        Self::new(&self.re * w, &self.im * w)
    }
    fn abs_upper(&self) -> f64 {
        // |z|^2 exactly, then an f64 sqrt padded by a few ulps upward.
        let sq = &self.re * &self.re + &self.im * &self.im;
        let approx = sq.to_f64().unwrap_or(f64::INFINITY);
        let padded = approx * (1.0 + 4.0 * f64::EPSILON);
        (padded.sqrt() * (1.0 + 4.0 * f64::EPSILON)).max(0.0)
    }
    fn approx(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn from_c64(z: Complex64) -> Self {
        Self::new(WeightRing::from_f64(z.re), WeightRing::from_f64(z.im))
    }
}

impl Scalar for ComplexInterval {
    type Real = Interval;
    const KIND: ScalarKind = ScalarKind::Interval;

    fn zero() -> Self {
        ComplexInterval::ZERO
    }
    fn one() -> Self {
        ComplexInterval::point(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        ComplexInterval::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        ComplexInterval::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        ComplexInterval::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ComplexInterval::mul(self, o)
    }
    fn neg(&self) -> Self {
        ComplexInterval::neg(self)
    }
    fn div_real(&self, w: &Interval) -> Self {
        ComplexInterval::div_real(self, *w)
    }
    fn mul_real(&self, w: &Interval) -> Self {
        ComplexInterval::new(self.re.mul(*w), self.im.mul(*w))
    }
    fn abs_upper(&self) -> f64 {
        ComplexInterval::abs_upper(self)
    }
    fn approx(&self) -> Complex64 {
        Complex64::new(self.re.midpoint(), self.im.midpoint())
    }
    fn from_c64(z: Complex64) -> Self {
        ComplexInterval::point(z.re, z.im)
    }
    fn is_finite(&self) -> bool {
        ComplexInterval::is_finite(self)
    }
}

/// Real interval promoted to a complex scalar with zero imaginary part.
///
/// Monochromatic data with a real amplitude keeps every coefficient real, and
/// the certification convolution is the dominant cost of a proof; running it
/// on real intervals saves the three superfluous rectangle products per
/// multiply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealIntervalScalar(pub Interval);

impl Scalar for RealIntervalScalar {
    type Real = Interval;
    const KIND: ScalarKind = ScalarKind::Interval;

    fn zero() -> Self {
        Self(Interval::ZERO)
    }
    fn one() -> Self {
        Self(Interval::ONE)
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Self(self.0.add(o.0))
    }
    fn sub(&self, o: &Self) -> Self {
        Self(self.0.sub(o.0))
    }
    fn mul(&self, o: &Self) -> Self {
        Self(self.0.mul(o.0))
    }
    fn neg(&self) -> Self {
        Self(self.0.neg())
    }
    fn div_real(&self, w: &Interval) -> Self {
        Self(self.0.div_unchecked(*w))
    }
    fn mul_real(&self, w: &Interval) -> Self {
        Self(self.0.mul(*w))
    }
    fn abs_upper(&self) -> f64 {
        self.0.mag()
    }
    fn approx(&self) -> Complex64 {
        Complex64::new(self.0.midpoint(), 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        debug_assert_eq!(z.im, 0.0);
        Self(Interval::point(z.re))
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
}

/// Scalars that carry rigorous enclosures; the certification bounds are only
/// meaningful over these.
pub trait RigorousScalar: Scalar<Real = Interval> {
    /// Enclosure of |self|.
    fn abs_enclosure(&self) -> Interval;
    /// The rectangle as a complex interval (real scalars get im = [0, 0]).
    fn as_complex_interval(&self) -> ComplexInterval;
}

impl RigorousScalar for ComplexInterval {
    fn abs_enclosure(&self) -> Interval {
        ComplexInterval::abs_enclosure(self)
    }
    fn as_complex_interval(&self) -> ComplexInterval {
        *self
    }
}

impl RigorousScalar for RealIntervalScalar {
    fn abs_enclosure(&self) -> Interval {
        self.0.abs_enclosure()
    }
    fn as_complex_interval(&self) -> ComplexInterval {
        ComplexInterval::new(self.0, Interval::ZERO)
    }
}

/// Parse a decimal or fractional string ("0.25", "3", "-7/144") into an exact
/// rational.
pub fn rational_from_str(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Invalid(format!("bad rational {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Invalid("zero denominator".into()));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let n: BigInt = digits
            .parse()
            .map_err(|_| Error::Invalid(format!("bad decimal {s:?}")))?;
        let d = BigInt::from(10u32).pow(frac.len() as u32);
        return Ok(BigRational::new(n, d));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Invalid(format!("bad integer {s:?}")))?;
    Ok(BigRational::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roundtrip() {
        let z = RationalComplex::from_c64(Complex64::new(0.5, -0.25));
        let back = z.approx();
        assert_eq!(back, Complex64::new(0.5, -0.25));
    }

    #[test]
    fn rational_abs_upper_dominates() {
        let z = RationalComplex::new(
            BigRational::new(BigInt::from(3), BigInt::from(1)),
            BigRational::new(BigInt::from(4), BigInt::from(1)),
        );
        assert!(z.abs_upper() >= 5.0);
        assert!(z.abs_upper() < 5.0 + 1e-12);
    }

    #[test]
    fn weight_pow_ratio() {
        let w = BigRational::from_integer(BigInt::from(2));
        assert_eq!(
            w.pow_ratio(4, 2).unwrap(),
            BigRational::from_integer(BigInt::from(4))
        );
        assert!(w.pow_ratio(3, 2).is_err());
        assert_eq!(2.0_f64.pow_ratio(3, 2).unwrap(), 2.0_f64.powf(1.5));
        let iv = Interval::point(3.0);
        assert_eq!(iv.pow_ratio(2, 1).unwrap(), Interval::point(9.0));
    }

    #[test]
    fn parse_rational_strings() {
        assert_eq!(
            rational_from_str("-7/144").unwrap(),
            BigRational::new(BigInt::from(-7), BigInt::from(144))
        );
        assert_eq!(
            rational_from_str("0.25").unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(4))
        );
        assert_eq!(
            rational_from_str("3").unwrap(),
            BigRational::from_integer(BigInt::from(3))
        );
        assert!(rational_from_str("1/0").is_err());
    }
}
