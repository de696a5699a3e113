//! Working-precision scalars.
//!
//! The numeric core is generic over [`Real`] so the same code runs in plain
//! `f64` (fast sweeps) and in double-double (~32 significant digits) where
//! the cumulants come out of heavy cancellation.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_complex::Complex;
use num_traits::{Num, One, Zero};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

pub trait Real:
    Num + Neg<Output = Self> + Copy + PartialOrd + Debug + Send + Sync + 'static
{
    /// Unit roundoff of the representation.
    const EPS: f64;

    fn lift(x: f64) -> Self;
    fn lower(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;

    /// `(cos x, sin x)` accurate to working precision.
    fn cos_sin(self) -> (Self, Self);

    fn of_usize(k: usize) -> Self {
        Self::lift(k as f64)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn is_finite(self) -> bool {
        self.lower().is_finite()
    }
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON / 2.0;

    #[inline]
    fn lift(x: f64) -> Self {
        x
    }

    #[inline]
    fn lower(self) -> f64 {
        self
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn cos_sin(self) -> (Self, Self) {
        let (s, c) = self.sin_cos();
        (c, s)
    }
}

/// Double-double scalar.
///
/// Thin wrapper over `TwoFloat`: its add/sub/mul/sqrt are used as is, but
/// its quotient drops the low word of `1 − b·(1/b)` (no FMA), which leaves
/// division at binary64 accuracy. Division here is the FMA-corrected
/// reciprocal-times-numerator scheme.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DoubleDouble(pub TwoFloat);

impl DoubleDouble {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }

    fn recip(self) -> Self {
        let (bh, bl) = (self.0.hi(), self.0.lo());
        let th = 1.0 / bh;
        let rh = (-bh).mul_add(th, 1.0);
        let rl = -(bl * th);
        let e = TwoFloat::new_add(rh, rl);
        DoubleDouble(e * th + th)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble(TwoFloat::from(x))
    }
}

macro_rules! dd_binop {
    ($tr:ident, $f:ident, $e:expr) => {
        impl $tr for DoubleDouble {
            type Output = DoubleDouble;
            #[inline]
            fn $f(self, rhs: DoubleDouble) -> DoubleDouble {
                $e(self, rhs)
            }
        }
    };
}

dd_binop!(Add, add, |a: DoubleDouble, b: DoubleDouble| DoubleDouble(
    a.0 + b.0
));
dd_binop!(Sub, sub, |a: DoubleDouble, b: DoubleDouble| DoubleDouble(
    a.0 - b.0
));
dd_binop!(Mul, mul, |a: DoubleDouble, b: DoubleDouble| DoubleDouble(
    a.0 * b.0
));
dd_binop!(Div, div, |a: DoubleDouble, b: DoubleDouble| DoubleDouble(
    a.0 * b.recip().0
));
dd_binop!(Rem, rem, |a: DoubleDouble, b: DoubleDouble| {
    let q = DoubleDouble((a / b).0.trunc());
    a - q * b
});

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    #[inline]
    fn neg(self) -> DoubleDouble {
        DoubleDouble(-self.0)
    }
}

impl Zero for DoubleDouble {
    fn zero() -> Self {
        DoubleDouble::from(0.0)
    }
    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0 && self.0.lo() == 0.0
    }
}

impl One for DoubleDouble {
    fn one() -> Self {
        DoubleDouble::from(1.0)
    }
}

impl Num for DoubleDouble {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(DoubleDouble::from)
    }
}

impl Real for DoubleDouble {
    const EPS: f64 = 1.0e-32;

    #[inline]
    fn lift(x: f64) -> Self {
        DoubleDouble::from(x)
    }

    #[inline]
    fn lower(self) -> f64 {
        self.0.hi() + self.0.lo()
    }

    #[inline]
    fn abs(self) -> Self {
        DoubleDouble(self.0.abs())
    }

    #[inline]
    fn sqrt(self) -> Self {
        DoubleDouble(self.0.sqrt())
    }

    // Taylor series on a halved argument, doubled back up; twofloat's own
    // trig is only good to ~1e-10.
    fn cos_sin(self) -> (Self, Self) {
        let mut halvings = 0;
        let mut x = self;
        let eighth = Self::lift(0.125);
        while x.abs() > eighth {
            x = x * Self::lift(0.5);
            halvings += 1;
        }
        let x2 = x * x;
        let (mut c, mut s) = (Self::one(), x);
        let (mut tc, mut ts) = (Self::one(), x);
        let tiny = Self::lift(1e-34);
        for k in 1..20usize {
            tc = -tc * x2 / Self::of_usize((2 * k - 1) * (2 * k));
            ts = -ts * x2 / Self::of_usize((2 * k) * (2 * k + 1));
            c = c + tc;
            s = s + ts;
            if tc.abs() < tiny && ts.abs() < tiny {
                break;
            }
        }
        let two = Self::lift(2.0);
        for _ in 0..halvings {
            let (c0, s0) = (c, s);
            s = two * s0 * c0;
            c = c0 * c0 - s0 * s0;
        }
        (c, s)
    }
}

/// Arithmetic used by the numeric core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    /// Plain binary64.
    Double,
    /// Double-double (~106-bit mantissa).
    #[default]
    DoubleDouble,
    /// Binary64 with an a-posteriori rounding check; falls back to
    /// double-double when the check fails.
    Auto,
}

impl std::str::FromStr for Precision {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "double" | "f64" => Ok(Precision::Double),
            "double-double" | "dd" => Ok(Precision::DoubleDouble),
            "auto" => Ok(Precision::Auto),
            other => Err(format!("unknown precision '{other}'")),
        }
    }
}

#[inline]
pub(crate) fn clift<R: Real>(z: num_complex::Complex64) -> Complex<R> {
    Complex::new(R::lift(z.re), R::lift(z.im))
}

#[inline]
pub(crate) fn clower<R: Real>(z: Complex<R>) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.re.lower(), z.im.lower())
}

/// `|z|` using only `sqrt` (avoids transcendental paths of the DD backend).
#[inline]
pub(crate) fn cabs<R: Real>(z: Complex<R>) -> R {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Cheap magnitude, `|re| + |im|`.
#[inline]
pub(crate) fn cabs1<R: Real>(z: Complex<R>) -> R {
    z.re.abs() + z.im.abs()
}

/// Principal square root built from real `sqrt` only.
pub(crate) fn csqrt<R: Real>(z: Complex<R>) -> Complex<R> {
    let r = cabs(z);
    if r == R::zero() {
        return Complex::new(R::zero(), R::zero());
    }
    let half = R::lift(0.5);
    let re = Real::max((r + z.re) * half, R::zero()).sqrt();
    let im = Real::max((r - z.re) * half, R::zero()).sqrt();
    Complex::new(re, if z.im < R::zero() { -im } else { im })
}

/// `e^{i x}`.
pub(crate) fn cis<R: Real>(x: R) -> Complex<R> {
    let (c, s) = x.cos_sin();
    Complex::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_phase_matches_double_and_pythagoras() {
        for &x in &[0.0, 1e-3, -2e-3, 0.1, 0.7, -1.3, 3.0] {
            let (c, s) = DoubleDouble::from(x).cos_sin();
            assert!((c.lower() - x.cos()).abs() < 1e-15);
            assert!((s.lower() - x.sin()).abs() < 1e-15);
            let one = c * c + s * s - DoubleDouble::from(1.0);
            assert!(one.abs() < DoubleDouble::from(1e-30), "x={x}: {one:?}");
        }
    }

    #[test]
    fn dd_division_keeps_low_word() {
        let three = DoubleDouble::from(3.0);
        let third = DoubleDouble::from(1.0) / three;
        assert!((third * three - DoubleDouble::from(1.0)).abs() < DoubleDouble::from(1e-31));
        let a = DoubleDouble(TwoFloat::new_add(1.0, 1e-20));
        let b = DoubleDouble(TwoFloat::new_add(7.0, -3e-19));
        let q = a / b;
        assert!((q * b - a).abs() < DoubleDouble::from(1e-31));
    }

    #[test]
    fn dd_phase_small_argument_series() {
        // cos h - 1 + h^2/2 = h^4/24 - ..., which double cannot resolve for h = 1e-3.
        let h = DoubleDouble::from(1e-3);
        let (c, _) = h.cos_sin();
        let r = (c - DoubleDouble::from(1.0) + h * h / DoubleDouble::from(2.0)).lower();
        let want = 1e-12 / 24.0 - 1e-18 / 720.0;
        assert!((r - want).abs() < 1e-26, "{r} vs {want}");
    }

    #[test]
    fn csqrt_squares_back() {
        let z = Complex::new(-3.0_f64, 4.0);
        let w = csqrt(z);
        assert!((w * w - z).norm() < 1e-14);
        let z = Complex::new(-2.0_f64, -0.0);
        assert!((csqrt(z) * csqrt(z) - z).norm() < 1e-14);
    }
}
