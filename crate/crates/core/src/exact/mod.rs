//! Exact arithmetic kernel: integer polynomials, the real quadratic field
//! Q(sqrt q), Sturm sequences, subresultant resultants and Newton power sums.

mod poly;
mod power_sums;
mod quadratic;
mod resultant;
mod sturm;

pub use poly::{IntPolynomial, MAX_PARSED_DEGREE};
pub use power_sums::{from_power_sums, power_sums};
pub use quadratic::{QuadraticNumber, RationalInterval};
pub use resultant::resultant;
pub use sturm::{
    count_real_roots, count_roots, isolate_real_roots, real_roots_f64, sturm_count, RootCount,
    SturmSequence,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Parses a plain decimal such as `0.1445`, `-2`, `1e-4` or `3/7` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("not a decimal or fraction: {s:?}"));
    if s.is_empty() || s.len() > 512 {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            if e.abs() > 400 {
                return Err(bad());
            }
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Exact decimal rendering of `x` with `places` digits, rounded down (`up =
/// false`) or up.
pub fn format_directed(x: &BigRational, places: usize, up: bool) -> String {
    let scale = BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let scaled = x * &scale;
    let k = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let neg = k.is_negative();
    let digits = k.abs().to_string();
    let digits = if digits.len() <= places {
        format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
    } else {
        digits
    };
    let (ip, fp) = digits.split_at(digits.len() - places);
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{fp}")
    }
}

/// `p/q` string for exact exponents.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_rational("0.141").unwrap(), BigRational::new(141.into(), 1000.into()));
        assert_eq!(parse_rational("1e-4").unwrap(), BigRational::new(1.into(), 10000.into()));
        assert_eq!(parse_rational("-2").unwrap(), BigRational::from_integer((-2).into()));
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational(".5").unwrap(), BigRational::new(1.into(), 2.into()));
        for bad in ["", ".", "1/0", "abc", "1.2.3", "1e999", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn directed_formatting() {
        let x = parse_rational("4.0346125").unwrap();
        assert_eq!(format_directed(&x, 6, false), "4.034612");
        assert_eq!(format_directed(&x, 6, true), "4.034613");
        assert_eq!(format_directed(&parse_rational("0.05").unwrap(), 3, false), "0.050");
        assert_eq!(format_directed(&parse_rational("-1.5").unwrap(), 0, false), "-2");
        assert_eq!(format_directed(&BigRational::zero(), 2, true), "0.00");
    }
}
