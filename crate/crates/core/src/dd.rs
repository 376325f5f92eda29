//! Double-double arithmetic (an unevaluated sum `hi + lo` of two f64s,
//! roughly 32 significant digits). Used where a formula subtracts nearly
//! equal quantities, e.g. discriminants of nearly degenerate root pairs.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub(crate) struct Dd {
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
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

impl Dd {
    pub(crate) const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub(crate) const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub(crate) fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let s = self.hi.sqrt();
        // one Newton step: s + (x - s^2) / (2s)
        let s = Dd::from(s);
        s + (self - s * s) / (s * 2.0)
    }

    pub(crate) fn square(self) -> Dd {
        self * self
    }
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let p = self.hi * rhs.hi;
        let e = self.hi.mul_add(rhs.hi, -p);
        quick_two_sum(p, e + (self.hi * rhs.lo + self.lo * rhs.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let q = quick_two_sum(q1, q2);
        q + Dd::from(q3)
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Dd {
            type Output = Dd;
            fn $m(self, rhs: f64) -> Dd {
                $tr::$m(self, Dd::from(rhs))
            }
        }
        impl $tr<Dd> for f64 {
            type Output = Dd;
            fn $m(self, rhs: Dd) -> Dd {
                $tr::$m(Dd::from(self), rhs)
            }
        }
    )*};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_digits() {
        // (1 + 2^-60)^2 - 1 = 2^-59 + 2^-120
        let x = Dd::ONE + Dd::from(2f64.powi(-60));
        let d = x.square() - 1.0;
        assert_eq!(d.to_f64(), 2f64.powi(-59));
        // plain f64 loses it entirely
        let xf = 1.0 + 2f64.powi(-60);
        assert_eq!(xf * xf - 1.0, 0.0);
    }

    #[test]
    fn division_and_sqrt() {
        let third = Dd::ONE / 3.0;
        let back = third * 3.0 - 1.0;
        assert!(back.to_f64().abs() < 1e-30);
        let r = Dd::from(2.0).sqrt();
        assert!((r.square() - 2.0).to_f64().abs() < 1e-30);
        assert_eq!(Dd::ZERO.sqrt(), Dd::ZERO);
    }
}
