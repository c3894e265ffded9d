//! Outward-rounded floating-point intervals.
//!
//! Every operation computes the round-to-nearest result and then steps one
//! ulp outward, which contains the exact result because nearest rounding is
//! off by at most half an ulp. `ln` is widened by two ulps on each side.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

pub fn down(x: f64) -> f64 {
    x.next_down()
}

pub fn up(x: f64) -> f64 {
    x.next_up()
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "[{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// A float is exact, so its point interval is degenerate.
    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        let x = n.to_f64().unwrap_or(f64::NAN);
        if x.abs() < 9007199254740992.0 {
            Interval::point(x)
        } else {
            Interval::new(down(x), up(x))
        }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        let x = r.to_f64().unwrap_or(f64::NAN);
        if BigRational::from_float(x).as_ref() == Some(r) {
            Interval::point(x)
        } else {
            Interval::new(down(x), up(x))
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Natural log of a positive interval; the lower end may be zero.
    pub fn ln(&self) -> Self {
        debug_assert!(self.lo >= 0.0);
        let lo = if self.lo == 0.0 {
            f64::NEG_INFINITY
        } else {
            down(down(self.lo.ln()))
        };
        Interval::new(lo, up(up(self.hi.ln())))
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        // 0 * inf never arises: factors are finite or the other side is positive
        let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }
}

/// Upper bound of `|p(x)|` for `x` in `[m - h, m + h]`, from the Taylor
/// expansion of `p` at `m` computed in interval arithmetic.
pub fn sup_abs_taylor(coeffs: &[Interval], m: f64, h: f64) -> f64 {
    let n = coeffs.len();
    if n == 0 {
        return 0.0;
    }
    let mut c = coeffs.to_vec();
    let mi = Interval::point(m);
    for i in 0..n - 1 {
        for j in (i..n - 1).rev() {
            c[j] = c[j] + mi * c[j + 1];
        }
    }
    // sum |c_k| h^k, rounding up
    let mut acc = 0.0f64;
    for ck in c.iter().rev() {
        acc = up(up(acc * h) + ck.mag());
    }
    acc
}

/// Upper bound of `|p(x)|` on `[lo, hi]` by plain interval Horner.
pub fn sup_abs_horner(coeffs: &[Interval], x: Interval) -> f64 {
    let mut acc = Interval::point(0.0);
    for c in coeffs.iter().rev() {
        acc = acc * x + *c;
    }
    acc.mag()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_encloses() {
        let a = Interval::point(0.1);
        let b = Interval::point(0.2);
        let s = a + b;
        assert!(s.lo < 0.30000000000000004 && s.hi >= 0.30000000000000004);
        let p = Interval::new(-1.0, 2.0) * Interval::new(-3.0, 1.0);
        assert!(p.lo <= -6.0 && p.hi >= 3.0);
        let l = Interval::point(std::f64::consts::E).ln();
        assert!(l.contains(1.0));
    }

    #[test]
    fn taylor_bound_dominates_samples() {
        // (x - 1)(x - 2)(x - 3)
        let c: Vec<Interval> = [-6.0, 11.0, -6.0, 1.0].iter().map(|&v| Interval::point(v)).collect();
        for (m, h) in [(2.0, 1.5), (0.3, 0.01), (2.5, 0.25)] {
            let bound = sup_abs_taylor(&c, m, h);
            let hb = sup_abs_horner(&c, Interval::new(m - h, m + h));
            for k in 0..=100 {
                let x = m - h + 2.0 * h * k as f64 / 100.0;
                let v = ((x - 1.0) * (x - 2.0) * (x - 3.0)).abs();
                assert!(v <= bound && v <= hb, "{x}");
            }
        }
    }

    #[test]
    fn big_integers_are_widened() {
        let n = BigInt::from(2).pow(80) + 1;
        let i = Interval::from_bigint(&n);
        assert!(i.lo < i.hi);
        let r = BigRational::new(1.into(), 3.into());
        let i = Interval::from_rational(&r);
        assert!(i.lo < 1.0 / 3.0 + 1e-17 && i.hi > 1.0 / 3.0 - 1e-17 && i.lo < i.hi);
    }
}
