//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`s with
//! roughly 106 bits of significand.
//!
//! Used where `f64` rounding alone is larger than the residual being
//! certified, e.g. normal forms whose coefficients grow geometrically.

use std::cmp::Ordering;
use std::f64::consts;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const fn dd(hi: f64, lo: f64) -> DoubleDouble {
    DoubleDouble { hi, lo }
}

const PI: DoubleDouble = dd(consts::PI, 1.2246467991473532e-16);
const TAU: DoubleDouble = dd(consts::TAU, 2.4492935982947064e-16);
const FRAC_PI_2: DoubleDouble = dd(consts::FRAC_PI_2, 6.123233995736766e-17);
const FRAC_PI_4: DoubleDouble = dd(consts::FRAC_PI_4, 3.061616997868383e-17);
const LN_2: DoubleDouble = dd(consts::LN_2, 2.3190468138462996e-17);
const LN_10: DoubleDouble = dd(consts::LN_10, -2.1707562233822494e-16);
const E: DoubleDouble = dd(consts::E, 1.4456468917292502e-16);
const SQRT_2: DoubleDouble = dd(consts::SQRT_2, -9.667293313452913e-17);

impl DoubleDouble {
    /// `2^-104`.
    pub const EPSILON: f64 = 4.930_380_657_631_324e-32;

    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        dd(hi, lo)
    }

    pub fn new(x: f64) -> Self {
        dd(x, 0.0)
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (h, l) = quick_two_sum(hi, lo);
        if h.is_finite() {
            dd(h, l)
        } else {
            dd(h, 0.0)
        }
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Self::renorm(p, e + self.lo * b)
    }

    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        dd(self.hi * s, self.lo * s)
    }

    fn sqr(self) -> Self {
        self * self
    }

    /// `e^x − 1` for `|x| ≲ 1e−3`, by Taylor series.
    fn expm1_small(x: Self) -> Self {
        let mut term = x;
        let mut sum = x;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = term * x / Self::new(n);
            sum += term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs().max(1e-300) {
                return sum;
            }
        }
    }

    /// `(sin r, cos r)` for `|r| ≤ π/4`.
    fn sin_cos_reduced(r: Self) -> (Self, Self) {
        let r2 = r.sqr();
        let mut term = r;
        let mut s = r;
        let mut n = 1.0;
        while term.hi.abs() > 1e-36 {
            term = -(term * r2) / Self::new((n + 1.0) * (n + 2.0));
            s += term;
            n += 2.0;
        }
        let mut term = Self::one();
        let mut c = Self::one();
        let mut n = 0.0;
        while term.hi.abs() > 1e-36 {
            term = -(term * r2) / Self::new((n + 1.0) * (n + 2.0));
            c += term;
            n += 2.0;
        }
        (s, c)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl From<DoubleDouble> for f64 {
    fn from(x: DoubleDouble) -> f64 {
        x.hi + x.lo
    }
}

impl PartialEq for DoubleDouble {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        dd(-self.hi, -self.lo)
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Self::renorm(s1, s2 + t2)
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        Self::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() || q1 == 0.0 {
            return Self::new(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self::renorm(q1, q2) + Self::new(q3)
    }
}

impl Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, b: Self) -> Self {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_op {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for DoubleDouble {
            fn $f(&mut self, b: Self) {
                *self = *self $op b;
            }
        }
    };
}
assign_op!(AddAssign, add_assign, +);
assign_op!(SubAssign, sub_assign, -);
assign_op!(MulAssign, mul_assign, *);
assign_op!(DivAssign, div_assign, /);
assign_op!(RemAssign, rem_assign, %);

impl Zero for DoubleDouble {
    fn zero() -> Self {
        Self::new(0.0)
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        Self::new(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Self::new)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        if t.hi.abs() >= 9.2e18 || !t.hi.is_finite() {
            return None;
        }
        Some(t.hi as i64 + t.lo as i64)
    }
    fn to_u64(&self) -> Option<u64> {
        let t = self.trunc();
        if t.hi < 0.0 || t.hi >= 1.8e19 || !t.hi.is_finite() {
            return None;
        }
        Some((t.hi as i128 + t.lo as i128) as u64)
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::renorm(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::renorm(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Some(Self::new(x))
    }
}

impl NumCast for DoubleDouble {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        n.to_f64().map(Self::new)
    }
}

impl FloatConst for DoubleDouble {
    fn E() -> Self {
        E
    }
    fn FRAC_1_PI() -> Self {
        Self::one() / PI
    }
    fn FRAC_1_SQRT_2() -> Self {
        Self::one() / SQRT_2
    }
    fn FRAC_2_PI() -> Self {
        Self::new(2.0) / PI
    }
    fn FRAC_2_SQRT_PI() -> Self {
        Self::new(2.0) / PI.sqrt()
    }
    fn FRAC_PI_2() -> Self {
        FRAC_PI_2
    }
    fn FRAC_PI_3() -> Self {
        PI / Self::new(3.0)
    }
    fn FRAC_PI_4() -> Self {
        FRAC_PI_4
    }
    fn FRAC_PI_6() -> Self {
        PI / Self::new(6.0)
    }
    fn FRAC_PI_8() -> Self {
        PI / Self::new(8.0)
    }
    fn LN_10() -> Self {
        LN_10
    }
    fn LN_2() -> Self {
        LN_2
    }
    fn LOG10_E() -> Self {
        Self::one() / LN_10
    }
    fn LOG2_E() -> Self {
        Self::one() / LN_2
    }
    fn PI() -> Self {
        PI
    }
    fn SQRT_2() -> Self {
        SQRT_2
    }
    fn TAU() -> Self {
        TAU
    }
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        Self::new(f64::NAN)
    }
    fn infinity() -> Self {
        Self::new(f64::INFINITY)
    }
    fn neg_infinity() -> Self {
        Self::new(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Self::new(-0.0)
    }
    fn min_value() -> Self {
        Self::new(f64::MIN)
    }
    fn min_positive_value() -> Self {
        Self::new(f64::MIN_POSITIVE)
    }
    fn epsilon() -> Self {
        Self::new(Self::EPSILON)
    }
    fn max_value() -> Self {
        Self::new(f64::MAX)
    }
    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> FpCategory {
        self.hi.classify()
    }
    fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            Self::renorm(hi, self.lo.floor())
        } else {
            Self::new(hi)
        }
    }
    fn ceil(self) -> Self {
        let hi = self.hi.ceil();
        if hi == self.hi {
            Self::renorm(hi, self.lo.ceil())
        } else {
            Self::new(hi)
        }
    }
    fn round(self) -> Self {
        let r = (self + Self::new(0.5)).floor();
        // Halfway cases round away from zero, as `f64::round` does.
        if self.hi < 0.0 && (r - self) == Self::new(0.5) {
            r - Self::one()
        } else {
            r
        }
    }
    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Self {
        Self::new(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }
    fn powf(self, y: Self) -> Self {
        if y.is_zero() {
            return Self::one();
        }
        if self.is_zero() {
            return if y.hi > 0.0 { Self::zero() } else { Self::infinity() };
        }
        if self.hi < 0.0 {
            if y.fract().is_zero() {
                let p = (-self).powf(y);
                let odd = (y * Self::new(0.5)).fract() != Self::zero();
                return if odd { -p } else { p };
            }
            return Self::nan();
        }
        (y * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::new(self.hi.sqrt());
        }
        let s = self.hi.sqrt();
        let s2 = Self::new(s).sqr();
        Self::new(s) + (self - s2) / Self::new(2.0 * s)
    }
    fn exp(self) -> Self {
        if self.hi > 709.7 {
            return Self::infinity();
        }
        if self.hi < -745.0 {
            return Self::zero();
        }
        let k = (self.hi / LN_2.hi).round();
        let r = (self - LN_2.mul_f64(k)).ldexp(-10);
        let mut p = Self::expm1_small(r);
        // e^{2x} − 1 = (e^x − 1)(e^x − 1 + 2).
        for _ in 0..10 {
            p = p * (p + Self::new(2.0));
        }
        (p + Self::one()).ldexp(k as i32)
    }
    fn exp2(self) -> Self {
        (self * LN_2).exp()
    }
    fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::new(self.hi.ln());
        }
        if self.hi.is_infinite() {
            return self;
        }
        let mut x = Self::new(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Self::one();
        }
        x
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        self.ln() / LN_2
    }
    fn log10(self) -> Self {
        self.ln() / LN_10
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        if self <= other {
            Self::zero()
        } else {
            self - other
        }
    }
    fn cbrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let mut y = Self::new(self.hi.cbrt());
        for _ in 0..2 {
            y = y - (y.powi(3) - self) / (Self::new(3.0) * y.sqr());
        }
        y
    }
    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let m = a.max(b);
        if m.is_zero() || m.is_infinite() {
            return m;
        }
        let (x, y) = (a / m, b / m);
        m * (x.sqr() + y.sqr()).sqrt()
    }
    fn sin(self) -> Self {
        self.sin_cos().0
    }
    fn cos(self) -> Self {
        self.sin_cos().1
    }
    fn tan(self) -> Self {
        let (s, c) = self.sin_cos();
        s / c
    }
    fn asin(self) -> Self {
        self.atan2((Self::one() - self.sqr()).sqrt())
    }
    fn acos(self) -> Self {
        (Self::one() - self.sqr()).sqrt().atan2(self)
    }
    fn atan(self) -> Self {
        self.atan2(Self::one())
    }
    fn atan2(self, x: Self) -> Self {
        let y = self;
        if x.is_zero() && y.is_zero() {
            return Self::new(y.hi.atan2(x.hi));
        }
        let r = y.hypot(x);
        let (xx, yy) = (x / r, y / r);
        let mut z = Self::new(y.hi.atan2(x.hi));
        for _ in 0..2 {
            let (s, c) = z.sin_cos();
            if xx.hi.abs() > yy.hi.abs() {
                z += (yy - s) / c;
            } else {
                z -= (xx - c) / s;
            }
        }
        z
    }
    fn sin_cos(self) -> (Self, Self) {
        if !self.is_finite() {
            return (Self::nan(), Self::nan());
        }
        let t = (self / TAU).round();
        let x = self - TAU * t;
        let j = (x / FRAC_PI_2).round();
        let r = x - FRAC_PI_2 * j;
        let (s, c) = Self::sin_cos_reduced(r);
        match j.hi as i64 {
            0 => (s, c),
            1 => (c, -s),
            -1 => (-c, s),
            _ => (-s, -c),
        }
    }
    fn exp_m1(self) -> Self {
        if self.hi.abs() < 1e-3 {
            Self::expm1_small(self)
        } else {
            self.exp() - Self::one()
        }
    }
    fn ln_1p(self) -> Self {
        let y = Self::one() + self;
        let mut x = Self::new(self.hi.ln_1p());
        // Newton on e^x − 1 = self, accurate for small arguments.
        for _ in 0..2 {
            x = x - (x.exp_m1() - self) / (x.exp());
        }
        if y.is_zero() {
            Self::neg_infinity()
        } else {
            x
        }
    }
    fn sinh(self) -> Self {
        let e = self.exp_m1();
        // (e^x − e^{−x})/2 = (em1 + em1/(em1 + 1))/2.
        (e + e / (e + Self::one())).ldexp(-1)
    }
    fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()).ldexp(-1)
    }
    fn tanh(self) -> Self {
        self.sinh() / self.cosh()
    }
    fn asinh(self) -> Self {
        let a = self.abs();
        let r = (a + (a.sqr() + Self::one()).sqrt()).ln();
        if self.hi < 0.0 {
            -r
        } else {
            r
        }
    }
    fn acosh(self) -> Self {
        (self + (self.sqr() - Self::one()).sqrt()).ln()
    }
    fn atanh(self) -> Self {
        ((Self::one() + self) / (Self::one() - self)).ln().ldexp(-1)
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&(self.hi + self.lo), f)
    }
}

impl fmt::LowerExp for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerExp::fmt(&(self.hi + self.lo), f)
    }
}

impl Scalar for DoubleDouble {}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: f64) -> DoubleDouble {
        DoubleDouble::new(x)
    }

    fn close(a: DoubleDouble, b: DoubleDouble, tol: f64) -> bool {
        (a - b).abs().hi <= tol * b.abs().hi.max(1.0)
    }

    #[test]
    fn arithmetic_keeps_low_word() {
        let third = d(1.0) / d(3.0);
        let back = third * d(3.0);
        assert!(close(back, d(1.0), 1e-31));
        assert!((third.lo()).abs() > 0.0);
        let tiny = d(1.0) + d(1e-20);
        assert_eq!((tiny - d(1.0)).hi(), 1e-20);
    }

    #[test]
    fn constants_match_series_definitions() {
        // π/4 = 4 atan(1/5) − atan(1/239)
        let pi4 = d(4.0) * (d(1.0) / d(5.0)).atan() - (d(1.0) / d(239.0)).atan();
        assert!(close(pi4, FRAC_PI_4, 1e-31));
        assert!(close(d(2.0).ln(), LN_2, 1e-31));
        assert!(close(d(1.0).exp(), E, 1e-31));
        assert!(close(d(2.0).sqrt(), SQRT_2, 1e-31));
    }

    #[test]
    fn exp_ln_roundtrip() {
        for &x in &[1e-8, 0.3, 1.7, -0.9, 2.5, 40.0, -30.0] {
            let t = d(x);
            assert!(close(t.exp().ln(), t, 1e-30), "x = {x}");
            if x > 0.0 {
                assert!(close(t.ln().exp(), t, 1e-30), "x = {x}");
            }
        }
    }

    #[test]
    fn trig_identities() {
        for &x in &[0.3, 1.7, -0.9, 2.5, 40.0, -7.1] {
            let t = d(x);
            let (s, c) = t.sin_cos();
            assert!(close(s.sqr() + c.sqr(), d(1.0), 1e-30));
            assert!((s.hi() - x.sin()).abs() < 1e-15);
            let back = s.atan2(c);
            let wrapped = t - TAU * (t / TAU).round();
            assert!(close(back, wrapped, 1e-30), "x = {x}");
        }
        assert!(close(d(0.5).acos(), PI / d(3.0), 1e-30));
    }

    #[test]
    fn rounding_functions() {
        assert_eq!(d(2.5).round().hi(), 3.0);
        assert_eq!(d(-2.5).round().hi(), -3.0);
        assert_eq!(d(-2.4).trunc().hi(), -2.0);
        let big = DoubleDouble::from_parts(1e20, 0.75);
        assert_eq!(big.floor().lo(), 0.0);
        assert_eq!(d(7.0) % d(3.0), d(1.0));
    }

    #[test]
    fn powers() {
        assert!(close(d(2.0).powf(d(0.5)), SQRT_2, 1e-30));
        assert!(close(d(3.0).powi(-2), d(1.0) / d(9.0), 1e-31));
        assert!(close(d(-2.0).powf(d(3.0)), d(-8.0), 1e-30));
        assert!(close(d(27.0).cbrt(), d(3.0), 1e-30));
    }
}
