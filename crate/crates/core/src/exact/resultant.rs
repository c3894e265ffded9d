use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::poly::IntPolynomial;
use crate::error::{Error, Result};

fn exact(n: BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_rem(d);
    debug_assert!(r.is_zero(), "inexact subresultant division");
    q
}

/// Resultant of two integer polynomials by the subresultant pseudo-remainder
/// sequence; every intermediate division is exact.
pub fn resultant(a: &IntPolynomial, b: &IntPolynomial) -> Result<BigInt> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::invalid("resultant of the zero polynomial"));
    }
    if a.deg() == 0 {
        return Ok(num_traits::pow(a.coeff(0), b.deg()));
    }
    if b.deg() == 0 {
        return Ok(num_traits::pow(b.coeff(0), a.deg()));
    }

    let ca = a.content();
    let cb = b.content();
    let mut a = a.div_scalar_exact(&ca).expect("content divides");
    let mut b = b.div_scalar_exact(&cb).expect("content divides");
    let t = num_traits::pow(ca, b.deg()) * num_traits::pow(cb, a.deg());

    let mut g = BigInt::one();
    let mut h = BigInt::one();
    let mut s = BigInt::one();
    if a.deg() < b.deg() {
        std::mem::swap(&mut a, &mut b);
        if a.deg() % 2 == 1 && b.deg() % 2 == 1 {
            s = -s;
        }
    }

    loop {
        let (da, db) = (a.deg(), b.deg());
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
        let r = a.pseudo_rem(&b);
        a = b;
        if r.is_zero() {
            return Ok(BigInt::zero());
        }
        let div = &g * num_traits::pow(h.clone(), delta);
        b = r.div_scalar_exact(&div).ok_or_else(|| {
            Error::Internal("subresultant quotient not integral".into())
        })?;
        g = a.leading().unwrap().clone();
        if delta > 0 {
            h = exact(num_traits::pow(g.clone(), delta), &num_traits::pow(h, delta - 1));
        }
        if b.deg() == 0 {
            let la = a.deg();
            let lb = b.leading().unwrap().clone();
            let hh = exact(num_traits::pow(lb, la), &num_traits::pow(h, la - 1));
            return Ok(s * t * hh);
        }
    }
}
