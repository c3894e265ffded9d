//! The totally-real side of the Honda-Tate correspondence.
//!
//! A simple isogeny class over F_q is represented by the Galois orbit of a
//! totally real algebraic integer `alpha = (1 - gamma)(1 - conj(gamma))`
//! whose conjugates all lie in the Weil interval `[q+1-2 sqrt q, q+1+2 sqrt q]`.
//! The norm of `alpha` is the point count of the variety of dimension
//! `deg alpha`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{count_roots, from_power_sums, power_sums, IntPolynomial, QuadraticNumber};

/// Size of a finite field: a prime power `q = p^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct FieldSize {
    q: u64,
    p: u64,
    exponent: u32,
}

impl FieldSize {
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::invalid(format!("{q} is not a prime power")));
        }
        let p = smallest_prime_factor(q);
        let mut rest = q;
        let mut exponent = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            exponent += 1;
        }
        if rest != 1 {
            return Err(Error::invalid(format!("{q} is not a prime power")));
        }
        Ok(FieldSize { q, p, exponent })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_square(&self) -> bool {
        self.exponent.is_multiple_of(2)
    }

    /// `q^r`, the size of the degree-`r` extension.
    pub fn extension(&self, r: u32) -> Result<FieldSize> {
        let q = self
            .q
            .checked_pow(r)
            .ok_or_else(|| Error::invalid(format!("{}^{r} overflows", self.q)))?;
        FieldSize::new(q)
    }
}

impl TryFrom<u64> for FieldSize {
    type Error = Error;
    fn try_from(q: u64) -> Result<Self> {
        FieldSize::new(q)
    }
}

impl From<FieldSize> for u64 {
    fn from(f: FieldSize) -> u64 {
        f.q
    }
}

impl fmt::Display for FieldSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

pub(crate) fn smallest_prime_factor(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 2;
    }
    n
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && smallest_prime_factor(n) == n
}

/// The closed Weil interval `(q+1-2 sqrt q, q+1+2 sqrt q)`, exactly.
pub fn weil_interval(q: FieldSize) -> (QuadraticNumber, QuadraticNumber) {
    let c = q.q() as i64 + 1;
    (
        QuadraticNumber::from_integers(c, -2, q.q()),
        QuadraticNumber::from_integers(c, 2, q.q()),
    )
}

/// `floor((sqrt q - 1)^2)`.
pub fn floor_lower_end(q: FieldSize) -> i64 {
    weil_interval(q).0.floor().to_i64().expect("small")
}

/// `ceil((sqrt q - 1)^2)`.
pub fn ceil_lower_end(q: FieldSize) -> i64 {
    weil_interval(q).0.ceil().to_i64().expect("small")
}

/// `floor((sqrt q + 1)^2)`.
pub fn floor_upper_end(q: FieldSize) -> i64 {
    weil_interval(q).1.floor().to_i64().expect("small")
}

/// `ceil((sqrt q + 1)^2)`.
pub fn ceil_upper_end(q: FieldSize) -> i64 {
    weil_interval(q).1.ceil().to_i64().expect("small")
}

/// Floating-point Weil interval, for numerics only.
pub fn weil_interval_f64(q: FieldSize) -> (f64, f64) {
    let s = (q.q() as f64).sqrt();
    ((s - 1.0).powi(2), (s + 1.0).powi(2))
}

/// Where a member's roots touch the Weil interval boundary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointFlags {
    pub at_lower: bool,
    pub at_upper: bool,
}

impl EndpointFlags {
    pub fn any(&self) -> bool {
        self.at_lower || self.at_upper
    }
}

/// Membership test with endpoint information; `None` if not a member.
pub fn membership(p: &IntPolynomial, q: FieldSize) -> Result<Option<EndpointFlags>> {
    if p.is_zero() {
        return Err(Error::invalid("zero polynomial"));
    }
    if !p.is_monic() {
        return Err(Error::invalid(format!("{p} is not monic")));
    }
    if p.deg() == 0 {
        return Ok(None);
    }
    let (lo, hi) = weil_interval(q);
    let c = count_roots(p, &lo, &hi)?;
    let distinct = p.squarefree_part().deg();
    if c.closed() != distinct {
        return Ok(None);
    }
    Ok(Some(EndpointFlags {
        at_lower: c.at_lo,
        at_upper: c.at_hi,
    }))
}

/// True iff every root of the monic polynomial is real and lies in the closed
/// Weil interval.
pub fn is_member(p: &IntPolynomial, q: FieldSize) -> Result<bool> {
    Ok(membership(p, q)?.is_some())
}

/// Galois orbit of a totally real algebraic integer with conjugates in the
/// Weil interval. Irreducibility of the polynomial is the caller's contract.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RealOrbit {
    q: FieldSize,
    minimal_polynomial: IntPolynomial,
}

impl RealOrbit {
    pub fn new(minimal_polynomial: IntPolynomial, q: FieldSize) -> Result<Self> {
        match membership(&minimal_polynomial, q)? {
            Some(_) => Ok(RealOrbit {
                q,
                minimal_polynomial,
            }),
            None => Err(Error::invalid(format!(
                "{minimal_polynomial} has roots outside the Weil interval for q = {q}"
            ))),
        }
    }

    /// Skips the membership check; for polynomials produced by the enumerator.
    pub(crate) fn new_unchecked(minimal_polynomial: IntPolynomial, q: FieldSize) -> Self {
        RealOrbit {
            q,
            minimal_polynomial,
        }
    }

    pub fn q(&self) -> FieldSize {
        self.q
    }

    pub fn polynomial(&self) -> &IntPolynomial {
        &self.minimal_polynomial
    }

    pub fn degree(&self) -> usize {
        self.minimal_polynomial.deg()
    }

    pub fn endpoint_flags(&self) -> EndpointFlags {
        membership(&self.minimal_polynomial, self.q)
            .ok()
            .flatten()
            .unwrap_or_default()
    }

    /// `Norm(alpha) = (-1)^d p(0)`: the point count over F_q.
    pub fn point_count(&self) -> BigInt {
        let c0 = self.minimal_polynomial.coeff(0);
        if self.degree() % 2 == 1 {
            -c0
        } else {
            c0
        }
    }

    /// `Norm(alpha)^(1/d)` in floating point.
    pub fn normalized_norm(&self) -> f64 {
        let n = self.point_count();
        let d = self.degree() as f64;
        (big_ln(&n) / d).exp()
    }

    /// Compares normalized norms exactly: `N1^(1/d1)` vs `N2^(1/d2)`.
    pub fn cmp_normalized_norm(&self, other: &RealOrbit) -> Ordering {
        let a = num_traits::pow(self.point_count(), other.degree());
        let b = num_traits::pow(other.point_count(), self.degree());
        a.cmp(&b)
    }

    pub fn to_weil(&self) -> WeilPolynomial {
        to_weil(self)
    }

    /// Point count over F_{q^r}.
    pub fn point_count_extension(&self, r: u32) -> Result<BigInt> {
        point_count_extension(self, r)
    }

    pub fn quadratic_twist(&self) -> RealOrbit {
        quadratic_twist(self)
    }

    /// Serialization line `q;c_0,c_1,...,1`.
    pub fn to_line(&self) -> String {
        format!("{};{}", self.q, self.minimal_polynomial.to_coeff_list())
    }

    /// Parses a serialization line, checking monicity and membership.
    pub fn from_line(line: &str) -> Result<Self> {
        let (q, coeffs) = line
            .split_once(';')
            .ok_or_else(|| Error::invalid("orbit line must look like q;c0,c1,...,1"))?;
        let q: u64 = q
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad field size {q:?}")))?;
        let q = FieldSize::new(q)?;
        let p = IntPolynomial::from_coeff_list(coeffs)?;
        if p.deg() > 64 {
            return Err(Error::invalid("orbit degree above 64"));
        }
        if !p.is_monic() || p.deg() == 0 {
            return Err(Error::invalid(format!("{p} is not a monic nonconstant polynomial")));
        }
        RealOrbit::new(p, q)
    }
}

impl fmt::Display for RealOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.minimal_polynomial)
    }
}

impl FromStr for RealOrbit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RealOrbit::from_line(s)
    }
}

/// Natural log of a positive big integer, in floating point.
pub(crate) fn big_ln(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::NAN).abs().ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Characteristic polynomial of Frobenius attached to an orbit: a monic
/// polynomial of degree `2d` whose roots all have absolute value `sqrt q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeilPolynomial {
    q: FieldSize,
    polynomial: IntPolynomial,
}

impl WeilPolynomial {
    /// Checks evenness of degree, monicity and the functional equation
    /// `x^(2d) f(q/x) = q^d f(x)`.
    pub fn new(polynomial: IntPolynomial, q: FieldSize) -> Result<Self> {
        if !polynomial.is_monic() {
            return Err(Error::invalid(format!("{polynomial} is not monic")));
        }
        let n = polynomial.deg();
        if n % 2 == 1 || n == 0 {
            return Err(Error::invalid(format!("Weil polynomial {polynomial} has odd or zero degree")));
        }
        let d = n / 2;
        let qb = BigInt::from(q.q());
        // coefficient identity: c_{n-k} q^(k-d)... written without division as
        // c_k * q^(d-k) = c_{n-k} for k <= d
        for k in 0..=d {
            let lhs = polynomial.coeff(k);
            let rhs = polynomial.coeff(n - k) * num_traits::pow(qb.clone(), d - k);
            if lhs != rhs {
                return Err(Error::invalid(format!(
                    "{polynomial} fails the functional equation for q = {q}"
                )));
            }
        }
        Ok(WeilPolynomial { q, polynomial })
    }

    pub fn polynomial(&self) -> &IntPolynomial {
        &self.polynomial
    }

    pub fn q(&self) -> FieldSize {
        self.q
    }

    /// Frobenius trace `-c_{2d-1}`.
    pub fn trace(&self) -> BigInt {
        -self.polynomial.coeff(self.polynomial.deg() - 1)
    }

    pub fn to_orbit(&self) -> Result<RealOrbit> {
        from_weil(self)
    }
}

/// `prod_i (x^2 - (1 + q - alpha_i) x + q) = x^d u(x + q/x)` with
/// `u(y) = (-1)^d p(1 + q - y)`.
pub fn to_weil(orbit: &RealOrbit) -> WeilPolynomial {
    let q = orbit.q();
    let u = orbit.polynomial().reflect(&BigInt::from(q.q() + 1));
    let d = u.deg();
    let x2q = IntPolynomial::from_coeffs([BigInt::from(q.q()), BigInt::zero(), BigInt::one()]);
    let mut w = IntPolynomial::zero();
    let mut pw = IntPolynomial::one();
    for k in 0..=d {
        let term = &pw * &IntPolynomial::monomial(u.coeff(k), d - k);
        w = &w + &term;
        pw = &pw * &x2q;
    }
    WeilPolynomial {
        q,
        polynomial: w,
    }
}

/// Inverse of [`to_weil`]: recovers `u` top-down from `W = x^d u(x + q/x)`.
pub fn from_weil(w: &WeilPolynomial) -> Result<RealOrbit> {
    let q = w.q();
    let n = w.polynomial().deg();
    let d = n / 2;
    let x2q = IntPolynomial::from_coeffs([BigInt::from(q.q()), BigInt::zero(), BigInt::one()]);
    let mut rest = w.polynomial().clone();
    let mut u = vec![BigInt::zero(); d + 1];
    for k in (0..=d).rev() {
        let c = rest.coeff(d + k);
        if c.is_zero() {
            continue;
        }
        let term = &x2q.pow(k as u32) * &IntPolynomial::monomial(c.clone(), d - k);
        rest = &rest - &term;
        u[k] = c;
    }
    if !rest.is_zero() {
        return Err(Error::invalid(format!(
            "{} is not of the form x^d u(x + q/x)",
            w.polynomial()
        )));
    }
    let u = IntPolynomial::new(u);
    let p = u.reflect(&BigInt::from(q.q() + 1));
    RealOrbit::new(p, q).map_err(|_| {
        Error::invalid(format!(
            "{} has roots off the circle |x| = sqrt {q}",
            w.polynomial()
        ))
    })
}

/// `prod over Weil roots gamma of (1 - gamma^r)`: the point count over
/// F_{q^r}, via Newton power sums of the Weil polynomial.
pub fn point_count_extension(orbit: &RealOrbit, r: u32) -> Result<BigInt> {
    if r == 0 {
        return Err(Error::invalid("extension degree must be positive"));
    }
    let w = to_weil(orbit);
    let n = w.polynomial().deg();
    let r = r as usize;
    let sums = power_sums(w.polynomial(), n * r)?;
    // power sums of gamma^r are s_r, s_2r, ..., s_nr
    let powered: Vec<BigInt> = (1..=n).map(|j| sums[j * r - 1].clone()).collect();
    let wr = from_power_sums(n, &powered)?;
    Ok(wr.eval(&BigInt::one()))
}

/// Orbit of `2(1+q) - alpha`, the image of `gamma -> -gamma`.
pub fn quadratic_twist(orbit: &RealOrbit) -> RealOrbit {
    let c = BigInt::from(2 * (orbit.q().q() + 1));
    RealOrbit::new_unchecked(orbit.polynomial().reflect(&c), orbit.q())
}
