use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::poly::IntPolynomial;
use super::quadratic::{QuadraticNumber, RationalInterval};
use crate::error::{Error, Result};

/// Sturm sequence of the squarefree part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    polys: Vec<IntPolynomial>,
}

/// Distinct real roots relative to an interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootCount {
    /// Roots strictly inside `(lo, hi)`.
    pub open: usize,
    pub at_lo: bool,
    pub at_hi: bool,
}

impl RootCount {
    pub fn closed(&self) -> usize {
        self.open + usize::from(self.at_lo) + usize::from(self.at_hi)
    }
}

impl SturmSequence {
    pub fn new(p: &IntPolynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::invalid("Sturm sequence of the zero polynomial"));
        }
        let s = p.squarefree_part();
        let mut polys = vec![s.clone()];
        if s.deg() == 0 {
            return Ok(SturmSequence { polys });
        }
        polys.push(s.derivative().primitive_part());
        loop {
            let n = polys.len();
            let (a, b) = (&polys[n - 2], &polys[n - 1]);
            if b.deg() == 0 {
                break;
            }
            let r = a.pseudo_rem(b);
            if r.is_zero() {
                break;
            }
            // prem scales by lc(b)^(delta+1); undo its sign, then negate.
            let delta = a.deg() - b.deg();
            let lc_neg = b.leading().unwrap().is_negative();
            let flip = !(lc_neg && (delta + 1) % 2 == 1);
            let next = if flip { -&r } else { r };
            let g = next.content();
            polys.push(next.div_scalar_exact(&g).expect("content divides"));
        }
        Ok(SturmSequence { polys })
    }

    /// The squarefree polynomial heading the sequence.
    pub fn base(&self) -> &IntPolynomial {
        &self.polys[0]
    }

    fn changes(signs: impl Iterator<Item = Ordering>) -> usize {
        let mut last = Ordering::Equal;
        let mut n = 0;
        for s in signs.filter(|s| *s != Ordering::Equal) {
            if last != Ordering::Equal && s != last {
                n += 1;
            }
            last = s;
        }
        n
    }

    pub fn sign_changes_at(&self, x: &QuadraticNumber) -> usize {
        Self::changes(self.polys.iter().map(|p| x.sign_of(p)))
    }

    pub fn sign_changes_at_infinity(&self, positive: bool) -> usize {
        Self::changes(self.polys.iter().map(|p| {
            let lc = p.leading().unwrap().cmp(&BigInt::zero());
            if positive || p.deg() % 2 == 0 {
                lc
            } else {
                lc.reverse()
            }
        }))
    }

    pub fn count_real_roots(&self) -> usize {
        self.sign_changes_at_infinity(false) - self.sign_changes_at_infinity(true)
    }

    pub fn count(&self, lo: &QuadraticNumber, hi: &QuadraticNumber) -> Result<RootCount> {
        if lo > hi {
            return Err(Error::invalid(format!("empty interval ({lo}, {hi})")));
        }
        let base = self.base();
        let at_lo = lo.sign_of(base) == Ordering::Equal;
        let at_hi = hi.sign_of(base) == Ordering::Equal && lo != hi;
        // V(lo) - V(hi) counts the roots in (lo, hi] for squarefree input.
        let half_open = self.sign_changes_at(lo) - self.sign_changes_at(hi);
        Ok(RootCount {
            open: half_open - usize::from(at_hi),
            at_lo,
            at_hi,
        })
    }
}

/// Distinct real roots of `p` in the interval, with endpoint roots reported
/// separately rather than perturbed away.
pub fn count_roots(p: &IntPolynomial, lo: &QuadraticNumber, hi: &QuadraticNumber) -> Result<RootCount> {
    SturmSequence::new(p)?.count(lo, hi)
}

/// Number of distinct real roots in `(lo, hi]`.
pub fn sturm_count(p: &IntPolynomial, lo: &QuadraticNumber, hi: &QuadraticNumber) -> Result<usize> {
    let c = count_roots(p, lo, hi)?;
    Ok(c.open + usize::from(c.at_hi))
}

pub fn count_real_roots(p: &IntPolynomial) -> Result<usize> {
    Ok(SturmSequence::new(p)?.count_real_roots())
}

fn rational_point(x: &BigRational) -> QuadraticNumber {
    QuadraticNumber::rational(x.clone(), 1)
}

/// Isolates the distinct real roots of `p` inside `(lo, hi]` into disjoint
/// rational intervals of width at most `width`, in increasing order.
pub fn isolate_real_roots(
    p: &IntPolynomial,
    lo: &BigRational,
    hi: &BigRational,
    width: &BigRational,
) -> Result<Vec<RationalInterval>> {
    if !width.is_positive() {
        return Err(Error::invalid("isolation width must be positive"));
    }
    let seq = SturmSequence::new(p)?;
    let mut out = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone())];
    let two = BigRational::from_integer(2.into());
    while let Some((a, b)) = stack.pop() {
        let n = seq.sign_changes_at(&rational_point(&a)) - seq.sign_changes_at(&rational_point(&b));
        if n == 0 {
            continue;
        }
        if n == 1 && &(&b - &a) <= width {
            out.push(RationalInterval::new(a, b).expect("ordered"));
            continue;
        }
        let mid = (&a + &b) / &two;
        // right half first so the left half is processed next
        stack.push((mid.clone(), b));
        stack.push((a, mid));
    }
    Ok(out)
}

/// Real roots of `p` in `[lo, hi]` as floating-point approximations.
pub fn real_roots_f64(p: &IntPolynomial, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>> {
    let to_rat = |v: f64| {
        BigRational::from_float(v).ok_or_else(|| Error::invalid(format!("non-finite bound {v}")))
    };
    let lo_r = to_rat(lo)?;
    let lo_open = &lo_r - to_rat(tol)?;
    let roots = isolate_real_roots(p, &lo_open, &to_rat(hi)?, &to_rat(tol)?)?;
    Ok(roots
        .iter()
        .map(|iv| iv.midpoint().to_f64().unwrap_or(f64::NAN))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    fn qn(a: i64, b: i64, q: u64) -> QuadraticNumber {
        QuadraticNumber::from_integers(a, b, q)
    }

    #[test]
    fn spec_examples() {
        assert_eq!(sturm_count(&p("x^2-9x+19"), &qn(3, -2, 2), &qn(3, 2, 2)).unwrap(), 2);
        assert_eq!(sturm_count(&p("x-1"), &qn(0, 0, 2), &qn(2, 0, 2)).unwrap(), 1);
        assert_eq!(sturm_count(&p("x^2+1"), &qn(-10, 0, 2), &qn(10, 0, 2)).unwrap(), 0);
        assert!(sturm_count(&IntPolynomial::zero(), &qn(0, 0, 2), &qn(1, 0, 2)).is_err());
    }

    #[test]
    fn endpoint_roots_are_reported() {
        // x^2 - 8x + 4 has roots exactly 4 +- 2 sqrt 3
        let c = count_roots(&p("x^2-8x+4"), &qn(4, -2, 3), &qn(4, 2, 3)).unwrap();
        assert_eq!(c, RootCount { open: 0, at_lo: true, at_hi: true });
        let c = count_roots(&p("x-1"), &qn(1, 0, 4), &qn(9, 0, 4)).unwrap();
        assert_eq!(c, RootCount { open: 0, at_lo: true, at_hi: false });
        let c = count_roots(&p("x^2-3x+2"), &qn(1, 0, 4), &qn(9, 0, 4)).unwrap();
        assert_eq!(c, RootCount { open: 1, at_lo: true, at_hi: false });
    }

    #[test]
    fn repeated_roots_count_once() {
        let f = &p("x-2").pow(3) * &p("x+5");
        assert_eq!(count_real_roots(&f).unwrap(), 2);
    }

    #[test]
    fn isolation_brackets_roots() {
        let roots = real_roots_f64(&p("x^3-13x^2+54x-71"), 0.0, 6.0, 1e-9).unwrap();
        assert_eq!(roots.len(), 3);
        for r in roots {
            assert!(p("x^3-13x^2+54x-71").eval_f64(r).abs() < 1e-6);
        }
    }
}
