//! Shifted monic Chebyshev polynomials `P_n = 2 T_n(x/2 - 1)` and their
//! translates, which realize normalized norms close to the ends of the Weil
//! interval.
//!
//! `P_n` has integer coefficients, leading coefficient 1 and roots
//! `2 + 2 cos((2k - 1) pi / 2n)` in `(0, 4)`. For odd `n` the root 2 occurs,
//! and `R_n = P_n / (x - 2)`.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;

use crate::enumerate::Side;
use crate::error::{Error, Result};
use crate::exact::IntPolynomial;
use crate::weil::{floor_upper_end, is_prime, ceil_lower_end, big_ln, FieldSize, RealOrbit};

/// `P_n`, built by `V_1 = x - 2`, `V_2 = (x-2)^2 - 2`, `V_{k+1} = (x-2) V_k - V_{k-1}`.
pub fn monic_chebyshev(n: usize) -> Result<IntPolynomial> {
    if n == 0 {
        return Err(Error::invalid("Chebyshev degree must be positive"));
    }
    let y = IntPolynomial::linear(BigInt::from(2));
    // V_0 = 2 makes the recurrence produce V_2 as well
    let mut prev = IntPolynomial::constant(BigInt::from(2));
    let mut cur = y.clone();
    for _ in 1..n {
        let next = &(&y * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `R_ell = P_ell / (x - 2)` for an odd prime `ell`.
pub fn chebyshev_cofactor(ell: usize) -> Result<IntPolynomial> {
    if ell == 2 || !is_prime(ell as u64) {
        return Err(Error::invalid(format!("{ell} is not an odd prime")));
    }
    let p = monic_chebyshev(ell)?;
    p.exact_div(&IntPolynomial::linear(BigInt::from(2)))
        .ok_or_else(|| Error::Internal(format!("x - 2 does not divide P_{ell}")))
}

/// `|P_n(-N)|`, exactly.
pub fn value_at_minus(n: usize, shift: u64) -> Result<BigInt> {
    Ok(monic_chebyshev(n)?.eval(&-BigInt::from(shift)).abs())
}

/// `|P_n(-N)|^(1/n)`.
pub fn growth_rate(n: usize, shift: u64) -> Result<f64> {
    if shift == 0 {
        return Err(Error::invalid("shift N must be positive"));
    }
    let v = value_at_minus(n, shift)?;
    Ok((big_ln(&v) / n as f64).exp())
}

/// `lim |P_n(-N)|^(1/n) = M + sqrt(M^2 - 1)` with `M = 1 + N/2`.
pub fn closed_form(shift: u64) -> f64 {
    let m = 1.0 + shift as f64 / 2.0;
    m + (m * m - 1.0).sqrt()
}

/// A Chebyshev polynomial with its optional cofactor and translate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChebyshevFamily {
    pub n: usize,
    #[serde(serialize_with = "as_coeffs")]
    pub p_n: IntPolynomial,
    /// `P_n / (x - 2)`, present for odd prime `n`.
    #[serde(serialize_with = "opt_as_coeffs")]
    pub r_n: Option<IntPolynomial>,
    pub shift: u64,
}

fn as_coeffs<S: serde::Serializer>(p: &IntPolynomial, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

fn opt_as_coeffs<S: serde::Serializer>(
    p: &Option<IntPolynomial>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.serialize_str(&p.to_string()),
        None => s.serialize_none(),
    }
}

impl ChebyshevFamily {
    pub fn new(n: usize, shift: u64) -> Result<Self> {
        let p_n = monic_chebyshev(n)?;
        let r_n = if n > 2 && is_prime(n as u64) {
            Some(chebyshev_cofactor(n)?)
        } else {
            None
        };
        Ok(ChebyshevFamily {
            n,
            p_n,
            r_n,
            shift,
        })
    }

    /// `R_n(x - N)`, or `P_n(x - N)` when no cofactor exists.
    pub fn translate(&self) -> IntPolynomial {
        let base = self.r_n.as_ref().unwrap_or(&self.p_n);
        base.taylor_shift(&-BigInt::from(self.shift))
    }

    /// Normalized norm of the translate: the geometric mean of its roots.
    pub fn normalized_norm(&self) -> f64 {
        let t = self.translate();
        let v = t.eval(&BigInt::from(0)).abs();
        (big_ln(&v) / t.deg() as f64).exp()
    }
}

/// Shift placing `[N, N+4]` at the lower or upper end of the Weil interval.
pub fn family_shift(q: FieldSize, side: Side) -> Result<u64> {
    let n = match side {
        Side::Lower => ceil_lower_end(q),
        Side::Upper => floor_upper_end(q) - 4,
    };
    u64::try_from(n).map_err(|_| Error::invalid(format!("no shifted family fits q = {q}")))
}

/// The orbit of `R_ell(x - N)`, checked for membership.
pub fn extremal_family(q: FieldSize, side: Side, ell: usize) -> Result<RealOrbit> {
    let r = chebyshev_cofactor(ell)?;
    let shift = family_shift(q, side)?;
    let p = r.taylor_shift(&-BigInt::from(shift));
    RealOrbit::new(p, q).map_err(|e| {
        Error::Internal(format!("shifted Chebyshev cofactor left the interval: {e}"))
    })
}

/// Odd primes in `3..=limit`.
pub fn odd_primes(limit: usize) -> Vec<usize> {
    (3..=limit).filter(|&n| is_prime(n as u64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weil::is_member;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn small_degrees() {
        assert_eq!(monic_chebyshev(1).unwrap(), p("x-2"));
        assert_eq!(monic_chebyshev(2).unwrap(), p("x^2-4x+2"));
        assert_eq!(monic_chebyshev(3).unwrap(), p("x^3-6x^2+9x-2"));
        assert!(monic_chebyshev(0).is_err());
    }

    #[test]
    fn roots_sit_on_cosines() {
        for n in [1usize, 2, 5, 8, 13] {
            let f = monic_chebyshev(n).unwrap();
            for k in 1..=n {
                let x = 2.0 + 2.0 * ((2 * k - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
                assert!(f.eval_f64(x).abs() < 1e-6, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn cofactors() {
        assert_eq!(chebyshev_cofactor(3).unwrap(), p("x^2-4x+1"));
        for ell in odd_primes(41) {
            let r = chebyshev_cofactor(ell).unwrap();
            assert_eq!(&r * &p("x-2"), monic_chebyshev(ell).unwrap());
        }
        assert!(chebyshev_cofactor(2).is_err());
        assert!(chebyshev_cofactor(9).is_err());
    }

    #[test]
    fn closed_forms() {
        assert!((closed_form(1) - 2.618034).abs() < 1e-6);
        assert!((closed_form(4) - 5.828427).abs() < 1e-6);
        assert!((growth_rate(101, 1).unwrap() - closed_form(1)).abs() < 0.05);
    }

    #[test]
    fn families_are_members() {
        let q9 = FieldSize::new(9).unwrap();
        let o = extremal_family(q9, Side::Lower, 5).unwrap();
        assert_eq!(o.polynomial(), &chebyshev_cofactor(5).unwrap().taylor_shift(&BigInt::from(-4)));
        let n = o.normalized_norm();
        assert!(n > 4.0 && n < 7.0, "{n}");
        let q2 = FieldSize::new(2).unwrap();
        assert_eq!(family_shift(q2, Side::Upper).unwrap(), 1);
        for ell in odd_primes(31) {
            assert!(is_member(extremal_family(q2, Side::Upper, ell).unwrap().polynomial(), q2).unwrap());
        }
        assert!(extremal_family(q2, Side::Upper, 4).is_err());
    }

    #[test]
    fn family_translate() {
        let f = ChebyshevFamily::new(3, 2).unwrap();
        assert_eq!(f.translate(), p("x^2-4x+1").taylor_shift(&BigInt::from(-2)));
        let g = ChebyshevFamily::new(4, 1).unwrap();
        assert!(g.r_n.is_none());
        assert!(BigInt::from(1) < value_at_minus(4, 1).unwrap());
    }
}
