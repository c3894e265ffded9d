use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::poly::IntPolynomial;

/// An element `a + b*sqrt(q)` of the real quadratic field Q(sqrt(q)).
///
/// When `q` is a perfect square the value is folded into `a` and `b` is 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    a: BigRational,
    b: BigRational,
    q: u64,
}

impl QuadraticNumber {
    pub fn new(a: BigRational, b: BigRational, q: u64) -> Self {
        assert!(q > 0, "radicand must be positive");
        let s = q.sqrt();
        if s * s == q {
            let a = a + b * BigRational::from_integer(BigInt::from(s));
            return QuadraticNumber {
                a,
                b: BigRational::zero(),
                q,
            };
        }
        QuadraticNumber { a, b, q }
    }

    pub fn from_integers(a: i64, b: i64, q: u64) -> Self {
        Self::new(
            BigRational::from_integer(a.into()),
            BigRational::from_integer(b.into()),
            q,
        )
    }

    pub fn rational(a: BigRational, q: u64) -> Self {
        Self::new(a, BigRational::zero(), q)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> u64 {
        self.q
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Exact sign: compares `a^2` with `b^2 q` when the two parts disagree.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (x, Ordering::Equal) => x,
            (Ordering::Equal, y) => y,
            (x, y) if x == y => x,
            (x, y) => {
                let a2 = &self.a * &self.a;
                let b2q = &self.b * &self.b * BigRational::from_integer(self.q.into());
                match a2.cmp(&b2q) {
                    Ordering::Greater => x,
                    Ordering::Less => y,
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
            + self.b.to_f64().unwrap_or(f64::NAN) * (self.q as f64).sqrt()
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        let mut guess = BigInt::from(self.to_f64().floor() as i64);
        // correct any floating error exactly
        while self.cmp_rational(&BigRational::from_integer(guess.clone())) == Ordering::Less {
            guess -= 1;
        }
        while self.cmp_rational(&BigRational::from_integer(&guess + 1)) != Ordering::Less {
            guess += 1;
        }
        guess
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        (self - &QuadraticNumber::rational(r.clone(), self.q)).signum()
    }

    /// Writes the value as `(A + B sqrt q)/D` with integers and `D > 0`.
    fn integral_parts(&self) -> (BigInt, BigInt, BigInt) {
        let d = self.a.denom().lcm(self.b.denom());
        let a = self.a.numer() * (&d / self.a.denom());
        let b = self.b.numer() * (&d / self.b.denom());
        (a, b, d)
    }

    /// Exact sign of `p(self)`, evaluated in Z[sqrt q] after clearing denominators.
    pub fn sign_of(&self, p: &IntPolynomial) -> Ordering {
        if p.is_zero() {
            return Ordering::Equal;
        }
        let (xa, xb, d) = self.integral_parts();
        let n = p.deg();
        let coeffs = p.coeffs();
        let q = BigInt::from(self.q);
        let mut acc_a = coeffs[n].clone();
        let mut acc_b = BigInt::zero();
        let mut dpow = BigInt::one();
        for k in (0..n).rev() {
            dpow *= &d;
            let na = &acc_a * &xa + &acc_b * &xb * &q;
            let nb = &acc_a * &xb + &acc_b * &xa;
            acc_a = na + &coeffs[k] * &dpow;
            acc_b = nb;
        }
        int_quadratic_sign(&acc_a, &acc_b, &q)
    }
}

fn int_quadratic_sign(a: &BigInt, b: &BigInt, q: &BigInt) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    use num_bigint::Sign::*;
    let to_ord = |s| match s {
        Minus => Ordering::Less,
        NoSign => Ordering::Equal,
        Plus => Ordering::Greater,
    };
    match (sa, sb) {
        (x, NoSign) => to_ord(x),
        (NoSign, y) => to_ord(y),
        (x, y) if x == y => to_ord(x),
        (x, y) => match (a * a).cmp(&(b * b * q)) {
            Ordering::Greater => to_ord(x),
            Ordering::Less => to_ord(y),
            Ordering::Equal => Ordering::Equal,
        },
    }
}

impl fmt::Debug for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sign = if self.b.is_negative() { '-' } else { '+' };
        let mag = self.b.abs();
        if self.a.is_zero() {
            let s = if self.b.is_negative() { "-" } else { "" };
            if mag.is_one() {
                return write!(f, "{s}sqrt({})", self.q);
            }
            return write!(f, "{s}{mag}*sqrt({})", self.q);
        }
        if mag.is_one() {
            write!(f, "{} {sign} sqrt({})", self.a, self.q)
        } else {
            write!(f, "{} {sign} {mag}*sqrt({})", self.a, self.q)
        }
    }
}

impl PartialOrd for QuadraticNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticNumber {
    /// Values from different fields are compared by radicand; within a field, exactly.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.q != other.q && !(self.is_rational() && other.is_rational()) {
            panic!("comparing elements of Q(sqrt {}) and Q(sqrt {})", self.q, other.q);
        }
        (self - other).signum()
    }
}

impl Add for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn add(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        QuadraticNumber::new(&self.a + &rhs.a, &self.b + &rhs.b, common_q(self, rhs))
    }
}

impl Sub for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn sub(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        QuadraticNumber::new(&self.a - &rhs.a, &self.b - &rhs.b, common_q(self, rhs))
    }
}

impl Mul for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn mul(self, rhs: &QuadraticNumber) -> QuadraticNumber {
        let q = common_q(self, rhs);
        let qr = BigRational::from_integer(q.into());
        QuadraticNumber::new(
            &self.a * &rhs.a + &self.b * &rhs.b * qr,
            &self.a * &rhs.b + &self.b * &rhs.a,
            q,
        )
    }
}

impl Neg for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        QuadraticNumber {
            a: -&self.a,
            b: -&self.b,
            q: self.q,
        }
    }
}

fn common_q(x: &QuadraticNumber, y: &QuadraticNumber) -> u64 {
    if x.q == y.q || y.is_rational() {
        x.q
    } else if x.is_rational() {
        y.q
    } else {
        panic!("mixing Q(sqrt {}) and Q(sqrt {})", x.q, y.q)
    }
}

/// Closed rational interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RationalInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Option<Self> {
        (lo <= hi).then_some(RationalInterval { lo, hi })
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}
