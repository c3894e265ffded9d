use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::poly::IntPolynomial;
use crate::error::{Error, Result};

/// Power sums `s_1..s_k` of the roots of a monic polynomial, by Newton's identities.
pub fn power_sums(p: &IntPolynomial, up_to: usize) -> Result<Vec<BigInt>> {
    if !p.is_monic() {
        return Err(Error::invalid(format!("power sums need a monic polynomial, got {p}")));
    }
    let d = p.deg();
    // a[j] is the coefficient of x^(d-j), so a[0] = 1
    let a: Vec<BigInt> = (0..=d).map(|j| p.coeff(d - j)).collect();
    let mut s: Vec<BigInt> = Vec::with_capacity(up_to);
    for k in 1..=up_to {
        let mut acc = BigInt::zero();
        for j in 1..k.min(d + 1) {
            acc += &a[j] * &s[k - j - 1];
        }
        if k <= d {
            acc += &a[k] * BigInt::from(k);
        }
        s.push(-acc);
    }
    Ok(s)
}

/// Monic polynomial of degree `n` whose roots have power sums `sums[0..n]`.
///
/// Fails if the elementary symmetric functions are not integral.
pub fn from_power_sums(n: usize, sums: &[BigInt]) -> Result<IntPolynomial> {
    if sums.len() < n {
        return Err(Error::invalid(format!("need {n} power sums, got {}", sums.len())));
    }
    // e[k]: elementary symmetric functions, k * e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} s_i
    let mut e = vec![BigInt::one()];
    for k in 1..=n {
        let mut acc = BigInt::zero();
        for i in 1..=k {
            let term = &e[k - i] * &sums[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let (q, r) = acc.div_rem(&BigInt::from(k));
        if !r.is_zero() {
            return Err(Error::invalid("power sums do not come from an integral polynomial"));
        }
        e.push(q);
    }
    // x^n - e1 x^(n-1) + e2 x^(n-2) - ...
    let mut coeffs = vec![BigInt::zero(); n + 1];
    for (k, ek) in e.into_iter().enumerate() {
        coeffs[n - k] = if k % 2 == 0 { ek } else { -ek };
    }
    Ok(IntPolynomial::new(coeffs))
}
