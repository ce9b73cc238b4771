//! Forward-mode automatic differentiation scalars.
//!
//! The expression evaluator is generic over [`Real`], so the same AST walk
//! produces plain values (`f64`), first derivatives (`Dual<f64>`), and second
//! derivatives (`Dual<Dual<f64>>`). Nesting duals instead of storing Hessians
//! keeps every derivative exact to floating-point roundoff: each chain rule is
//! applied once, with no step-size parameter anywhere.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar interface required by the expression evaluator.
///
/// Implemented for `f64` and for [`Dual<T>`] over any other implementation.
/// `primal` strips all derivative parts, which is what domain checks and
/// pivot selection need: a branch must depend on the point, never on the
/// perturbation.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Value part with every derivative component discarded.
    fn primal(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn atan(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    /// Integer power by binary exponentiation.
    ///
    /// Negative exponents go through one reciprocal; the caller is responsible
    /// for rejecting a zero base in that case (the evaluator checks the primal
    /// part before calling).
    fn powi(self, n: i32) -> Self {
        if n < 0 {
            return Self::one() / self.powi(-(n as i64) as i32);
        }
        let mut acc = Self::one();
        let mut base = self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn primal(self) -> f64 {
        self
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }

    fn tan(self) -> Self {
        f64::tan(self)
    }

    fn atan(self) -> Self {
        f64::atan(self)
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }

    fn ln(self) -> Self {
        f64::ln(self)
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Truncated first-order Taylor scalar: value plus one directional derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    /// Value part.
    pub re: T,
    /// Derivative part along the seeded direction.
    pub eps: T,
}

impl<T: Real> Dual<T> {
    /// Constant lift: derivative part zero.
    pub fn constant(v: T) -> Self {
        Dual {
            re: v,
            eps: T::zero(),
        }
    }

    /// Variable seed: derivative part one.
    pub fn seeded(v: T) -> Self {
        Dual {
            re: v,
            eps: T::one(),
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Dual {
            re: self.re + o.re,
            eps: self.eps + o.eps,
        }
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Dual {
            re: self.re - o.re,
            eps: self.eps - o.eps,
        }
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        Dual {
            re: self.re * o.re,
            eps: self.re * o.eps + self.eps * o.re,
        }
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;

    fn div(self, o: Self) -> Self {
        Dual {
            re: self.re / o.re,
            eps: (self.eps * o.re - self.re * o.eps) / (o.re * o.re),
        }
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Dual {
            re: -self.re,
            eps: -self.eps,
        }
    }
}

impl<T: Real> Real for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }

    fn primal(self) -> f64 {
        self.re.primal()
    }

    fn sin(self) -> Self {
        Dual {
            re: self.re.sin(),
            eps: self.eps * self.re.cos(),
        }
    }

    fn cos(self) -> Self {
        Dual {
            re: self.re.cos(),
            eps: -(self.eps * self.re.sin()),
        }
    }

    fn tan(self) -> Self {
        let t = self.re.tan();
        Dual {
            re: t,
            eps: self.eps * (T::one() + t * t),
        }
    }

    fn atan(self) -> Self {
        Dual {
            re: self.re.atan(),
            eps: self.eps / (T::one() + self.re * self.re),
        }
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual {
            re: e,
            eps: self.eps * e,
        }
    }

    fn ln(self) -> Self {
        Dual {
            re: self.re.ln(),
            eps: self.eps / self.re,
        }
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual {
            re: s,
            eps: self.eps / (s + s),
        }
    }
}
