//! Certified bounds from auxiliary functions.
//!
//! For a system of monic integer polynomials `P_i` with positive exponents
//! `w_i`, any orbit `alpha` that is not a root of some `P_i` satisfies
//!
//! ```text
//! lower:  Norm(alpha)^(1/d) >= inf_x x * prod |P_i(x)|^(-w_i)
//! upper:  Norm(alpha)^(1/d) <= sup_x x * prod |P_i(x)|^(w_i)
//! ```
//!
//! with `x` over the Weil interval, since `prod_j P_i(alpha_j)` is a nonzero
//! integer. Both cases minimize `phi(x) = s ln x - sum w_i ln|P_i(x)|`, with
//! `s = 1` for the lower side and `s = -1` for the upper one. On a cell only an
//! upper bound of `|P_i|` is needed, so cells containing roots are harmless.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::enumerate::{OrbitSet, Side};
use crate::error::{Error, Result};
use crate::exact::{format_directed, parse_rational, rational_to_string, IntPolynomial, QuadraticNumber};
use crate::interval::{down, sup_abs_taylor, up, Interval};
use crate::weil::{floor_lower_end, ceil_upper_end, is_member, weil_interval, FieldSize, RealOrbit};

/// Digits after the decimal point in certified bounds.
pub const BOUND_DECIMALS: usize = 6;

/// Smallest accepted tolerance.
pub const MIN_TOLERANCE: f64 = 1e-8;

const CERTIFICATE_VERSION: u32 = 1;
const MAX_CELLS: usize = 4_000_000;

/// Auxiliary polynomials with their exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxiliarySystem {
    pub q: FieldSize,
    pub side: Side,
    pub polynomials: Vec<IntPolynomial>,
    pub exponents: Vec<BigRational>,
}

impl AuxiliarySystem {
    pub fn new(
        q: FieldSize,
        side: Side,
        polynomials: Vec<IntPolynomial>,
        exponents: Vec<BigRational>,
    ) -> Result<Self> {
        if polynomials.len() != exponents.len() {
            return Err(Error::invalid(format!(
                "{} polynomials but {} exponents",
                polynomials.len(),
                exponents.len()
            )));
        }
        for (p, e) in polynomials.iter().zip(&exponents) {
            if !e.is_positive() {
                return Err(Error::invalid(format!("exponent {e} of {p} is not positive")));
            }
            if !p.is_monic() || p.deg() == 0 {
                return Err(Error::invalid(format!("{p} is not a monic nonconstant polynomial")));
            }
        }
        Ok(AuxiliarySystem {
            q,
            side,
            polynomials,
            exponents,
        })
    }

    /// Parses exponents written as decimals or fractions.
    pub fn from_decimal_exponents(
        q: FieldSize,
        side: Side,
        polynomials: Vec<IntPolynomial>,
        exponents: &[&str],
    ) -> Result<Self> {
        let exps = exponents.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        AuxiliarySystem::new(q, side, polynomials, exps)
    }

    pub fn is_empty(&self) -> bool {
        self.polynomials.is_empty()
    }

    /// Floating-point value of `x * prod |P_i(x)|^(-+w_i)`.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let sign = match self.side {
            Side::Lower => -1.0,
            Side::Upper => 1.0,
        };
        let mut v = x.ln();
        for (p, w) in self.polynomials.iter().zip(&self.exponents) {
            v += sign * w.to_f64().unwrap_or(0.0) * p.eval_f64(x).abs().ln();
        }
        v.exp()
    }
}

/// One system polynomial viewed as an orbit where the auxiliary bound is silent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionRecord {
    pub poly: String,
    pub normalized_norm: String,
    pub violates: bool,
}

/// A certified bound together with the system that proves it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCertificate {
    pub system: AuxiliarySystem,
    /// The bound, exactly equal to its decimal rendering.
    pub certified_bound: BigRational,
    pub tolerance: BigRational,
    pub subdivision_depth: u32,
    pub exceptions: Vec<ExceptionRecord>,
    pub warnings: Vec<String>,
}

/// Serialized certificate layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub version: u32,
    pub q: u64,
    pub side: Side,
    pub polynomials: Vec<Vec<serde_json::Number>>,
    pub exponents: Vec<String>,
    pub certified_bound: String,
    pub direction: Side,
    pub tolerance: String,
    pub subdivision_depth: u32,
    pub exceptions: Vec<ExceptionRecord>,
    pub warnings: Vec<String>,
}

impl BoundCertificate {
    pub fn side(&self) -> Side {
        self.system.side
    }

    pub fn q(&self) -> FieldSize {
        self.system.q
    }

    pub fn bound_f64(&self) -> f64 {
        self.certified_bound.to_f64().unwrap_or(f64::NAN)
    }

    /// The bound as printed: six decimals, already rounded toward safety.
    pub fn bound_text(&self) -> String {
        format_directed(&self.certified_bound, BOUND_DECIMALS, false)
    }

    /// `>=1.359000` or `<=5.634100`.
    pub fn marked(&self) -> String {
        let m = match self.side() {
            Side::Lower => "≥",
            Side::Upper => "≤",
        };
        format!("{m}{}", self.bound_text())
    }

    /// Exact test of the certified inequality for a normalized norm.
    pub fn admits(&self, orbit: &RealOrbit) -> bool {
        norm_within(&orbit.point_count(), orbit.degree(), &self.certified_bound, self.side())
    }

    pub fn to_document(&self) -> Result<CertificateDocument> {
        let polynomials = self
            .system
            .polynomials
            .iter()
            .map(|p| {
                p.coeffs()
                    .iter()
                    .map(|c| {
                        c.to_i64()
                            .map(serde_json::Number::from)
                            .ok_or_else(|| Error::invalid(format!("coefficient {c} exceeds 64 bits")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CertificateDocument {
            version: CERTIFICATE_VERSION,
            q: self.q().q(),
            side: self.side(),
            polynomials,
            exponents: self.system.exponents.iter().map(rational_to_string).collect(),
            certified_bound: self.bound_text(),
            direction: self.side(),
            tolerance: rational_decimal(&self.tolerance),
            subdivision_depth: self.subdivision_depth,
            exceptions: self.exceptions.clone(),
            warnings: self.warnings.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document()?)?)
    }

    pub fn from_document(doc: CertificateDocument) -> Result<Self> {
        if doc.version != CERTIFICATE_VERSION {
            return Err(Error::invalid(format!("unsupported certificate version {}", doc.version)));
        }
        if doc.side != doc.direction {
            return Err(Error::invalid("side and direction disagree"));
        }
        let q = FieldSize::new(doc.q)?;
        let polynomials = doc
            .polynomials
            .iter()
            .map(|cs| {
                let coeffs = cs
                    .iter()
                    .map(|n| {
                        n.as_i64()
                            .map(BigInt::from)
                            .ok_or_else(|| Error::invalid(format!("coefficient {n} is not an integer")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.len() > crate::exact::MAX_PARSED_DEGREE {
                    return Err(Error::invalid("polynomial degree too large"));
                }
                Ok(IntPolynomial::new(coeffs))
            })
            .collect::<Result<Vec<_>>>()?;
        let exponents = doc.exponents.iter().map(|e| parse_rational(e)).collect::<Result<Vec<_>>>()?;
        let system = AuxiliarySystem::new(q, doc.side, polynomials, exponents)?;
        let certified_bound = parse_rational(&doc.certified_bound)?;
        let tolerance = parse_rational(&doc.tolerance)?;
        Ok(BoundCertificate {
            system,
            certified_bound,
            tolerance,
            subdivision_depth: doc.subdivision_depth,
            exceptions: doc.exceptions,
            warnings: doc.warnings,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        BoundCertificate::from_document(serde_json::from_str(s)?)
    }
}

/// Shortest exact decimal for a rational with a terminating expansion,
/// otherwise `p/q`.
pub fn rational_decimal(r: &BigRational) -> String {
    for places in 0..=40 {
        let s = format_directed(r, places, false);
        if parse_rational(&s).ok().as_ref() == Some(r) {
            return s;
        }
    }
    rational_to_string(r)
}

/// `bound <= N^(1/d)` (lower) or `N^(1/d) <= bound` (upper), exactly.
pub fn norm_within(norm: &BigInt, degree: usize, bound: &BigRational, side: Side) -> bool {
    let lhs = BigRational::from_integer(norm.clone());
    let rhs = num_traits::pow(bound.clone(), degree);
    match side {
        Side::Lower => lhs >= rhs,
        Side::Upper => lhs <= rhs,
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    lo: f64,
    hi: f64,
    bound: f64,
    depth: u32,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.bound.total_cmp(&o.bound) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    // min-heap on the lower bound of phi
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound)
    }
}

struct Objective {
    sign: f64,
    polys: Vec<Vec<Interval>>,
    weights: Vec<Interval>,
    weights_f64: Vec<f64>,
    polys_f64: Vec<IntPolynomial>,
}

impl Objective {
    fn new(system: &AuxiliarySystem) -> Self {
        Objective {
            sign: match system.side {
                Side::Lower => 1.0,
                Side::Upper => -1.0,
            },
            polys: system
                .polynomials
                .iter()
                .map(|p| p.coeffs().iter().map(Interval::from_bigint).collect())
                .collect(),
            weights: system.exponents.iter().map(Interval::from_rational).collect(),
            weights_f64: system.exponents.iter().map(|w| w.to_f64().unwrap_or(0.0)).collect(),
            polys_f64: system.polynomials.clone(),
        }
    }

    /// Rigorous lower bound of phi on `[lo, hi]`.
    fn cell_bound(&self, lo: f64, hi: f64) -> f64 {
        let m = 0.5 * (lo + hi);
        let h = up((m - lo).max(hi - m));
        let mut acc = if self.sign > 0.0 {
            Interval::point(lo).ln()
        } else {
            -Interval::point(hi).ln()
        };
        for (c, w) in self.polys.iter().zip(&self.weights) {
            let s = sup_abs_taylor(c, m, h);
            acc = acc - *w * Interval::new(0.0f64.max(s), s).ln();
        }
        if acc.lo.is_nan() {
            f64::NEG_INFINITY
        } else {
            acc.lo
        }
    }

    /// Plain floating evaluation of phi at a point.
    fn value(&self, x: f64) -> f64 {
        let mut v = self.sign * x.ln();
        for (p, w) in self.polys_f64.iter().zip(&self.weights_f64) {
            let y = p.eval_f64(x).abs();
            if y == 0.0 {
                return f64::INFINITY;
            }
            v -= w * y.ln();
        }
        v
    }
}

/// Float cover `[a, b]` of the exact Weil interval, checked exactly.
pub fn float_cover(q: FieldSize) -> (f64, f64) {
    let (lo, hi) = weil_interval(q);
    let mut a = down(lo.to_f64());
    let mut b = up(hi.to_f64());
    let exact = |x: f64| QuadraticNumber::rational(BigRational::from_float(x).unwrap(), q.q());
    while exact(a) > lo {
        a = down(a);
    }
    while exact(b) < hi {
        b = up(b);
    }
    (a, b)
}

/// Result of the branch and bound before rounding.
struct Extremum {
    /// Rigorous lower bound on `inf phi`.
    bound: f64,
    depth: u32,
}

fn minimize(obj: &Objective, a: f64, b: f64, tolerance: f64, sign: f64) -> Result<Extremum> {
    let mut heap = BinaryHeap::new();
    let mut incumbent = f64::INFINITY;
    let start = 64;
    for i in 0..start {
        let lo = a + (b - a) * i as f64 / start as f64;
        let hi = if i + 1 == start {
            b
        } else {
            a + (b - a) * (i + 1) as f64 / start as f64
        };
        incumbent = incumbent.min(obj.value(0.5 * (lo + hi)));
        heap.push(Cell {
            lo,
            hi,
            bound: obj.cell_bound(lo, hi),
            depth: 0,
        });
    }
    incumbent = incumbent.min(obj.value(a)).min(obj.value(b));
    // exp-space gap between the best sample and the rigorous bound
    let gap = |bound: f64, best: f64| -> f64 {
        if sign > 0.0 {
            best.exp() - bound.exp()
        } else {
            (-bound).exp() - (-best).exp()
        }
    };
    let mut depth = 0;
    let mut processed = 0usize;
    while let Some(cell) = heap.pop() {
        depth = depth.max(cell.depth);
        if gap(cell.bound, incumbent) <= tolerance {
            return Ok(Extremum {
                bound: cell.bound,
                depth,
            });
        }
        processed += 1;
        let mid = 0.5 * (cell.lo + cell.hi);
        if processed > MAX_CELLS || mid <= cell.lo || mid >= cell.hi {
            return Err(Error::Solver(format!(
                "branch and bound stalled near x = {mid} (bound {}, best {incumbent})",
                cell.bound
            )));
        }
        for (lo, hi) in [(cell.lo, mid), (mid, cell.hi)] {
            incumbent = incumbent.min(obj.value(0.5 * (lo + hi)));
            heap.push(Cell {
                lo,
                hi,
                bound: obj.cell_bound(lo, hi),
                depth: cell.depth + 1,
            });
        }
    }
    Err(Error::Internal("empty cell queue".into()))
}

/// Certifies `m <= inf` (lower) or `M >= sup` (upper) of the auxiliary
/// function over the Weil interval, to within `tolerance` of the extremum.
pub fn certify(system: &AuxiliarySystem, tolerance: &BigRational) -> Result<BoundCertificate> {
    let tol = tolerance.to_f64().unwrap_or(0.0);
    if tol < MIN_TOLERANCE || !tol.is_finite() {
        return Err(Error::invalid(format!("tolerance must be at least {MIN_TOLERANCE}")));
    }
    let q = system.q;
    let (a, b) = float_cover(q);
    let obj = Objective::new(system);
    // rounding to 6 decimals happens afterwards, so search a little tighter
    let search_tol = (tol - 1e-6).max(0.5 * tol);
    let ext = minimize(&obj, a, b, search_tol, obj.sign)?;
    let (value, up_dir) = match system.side {
        Side::Lower => (down(down(down(ext.bound.exp()))), false),
        Side::Upper => (up(up(up((-ext.bound).exp()))), true),
    };
    let exact = BigRational::from_float(value)
        .ok_or_else(|| Error::Solver(format!("non-finite bound {value}")))?;
    let certified_bound = parse_rational(&format_directed(&exact, BOUND_DECIMALS, up_dir))?;

    let mut warnings = Vec::new();
    let mut exceptions = Vec::new();
    for p in &system.polynomials {
        match is_member(p, q) {
            Ok(true) => {
                let o = RealOrbit::new_unchecked(p.clone(), q);
                exceptions.push(exception_record(&o, &certified_bound, system.side));
            }
            _ => warnings.push(format!(
                "{p} is not in the interval set for q = {q}: some root lies outside [{}, {}] or is not real",
                weil_interval(q).0,
                weil_interval(q).1
            )),
        }
    }
    Ok(BoundCertificate {
        system: system.clone(),
        certified_bound,
        tolerance: tolerance.clone(),
        subdivision_depth: ext.depth,
        exceptions,
        warnings,
    })
}

fn exception_record(o: &RealOrbit, bound: &BigRational, side: Side) -> ExceptionRecord {
    ExceptionRecord {
        poly: o.polynomial().to_string(),
        normalized_norm: format!("{:.6}", o.normalized_norm()),
        violates: !norm_within(&o.point_count(), o.degree(), bound, side),
    }
}

/// Orbits of the pool that are roots of some system polynomial, each tagged
/// with whether its normalized norm breaks the certified bound.
pub fn exception_set(cert: &BoundCertificate, pool: &OrbitSet) -> Vec<(RealOrbit, bool)> {
    pool.iter()
        .filter(|o| {
            cert.system
                .polynomials
                .iter()
                .any(|p| p.exact_div(o.polynomial()).is_some())
        })
        .map(|o| (o.clone(), !cert.admits(o)))
        .collect()
}

/// Orbits in the pool that break the certified bound.
pub fn violations<'a>(cert: &BoundCertificate, pool: &'a OrbitSet) -> Vec<&'a RealOrbit> {
    pool.iter().filter(|o| !cert.admits(o)).collect()
}

/// Single-polynomial bounds `floor((sqrt q - 1)^2) + 1` and
/// `ceil((sqrt q + 1)^2) - 1`, via `x / (x-n)^(1/(n+1))` and
/// `x |x - N|^(1/(N-1))`.
pub fn bound_theorem_easy(q: FieldSize, side: Side, tolerance: &BigRational) -> Result<BoundCertificate> {
    match side {
        Side::Lower => {
            let n = floor_lower_end(q);
            if n == 0 {
                let sys = AuxiliarySystem::new(q, side, vec![], vec![])?;
                let mut cert = certify(&sys, tolerance)?;
                if cert.certified_bound < BigRational::one() {
                    cert.warnings.push(format!(
                        "empty system: inf x = {} is below 1; point counts are positive integers, so the bound is raised to 1",
                        cert.bound_text()
                    ));
                    cert.certified_bound = BigRational::one();
                }
                Ok(cert)
            } else {
                let sys = AuxiliarySystem::new(
                    q,
                    side,
                    vec![IntPolynomial::linear(BigInt::from(n))],
                    vec![BigRational::new(BigInt::one(), BigInt::from(n + 1))],
                )?;
                certify(&sys, tolerance)
            }
        }
        Side::Upper => {
            let big_n = ceil_upper_end(q);
            let sys = AuxiliarySystem::new(
                q,
                side,
                vec![IntPolynomial::linear(BigInt::from(big_n))],
                vec![BigRational::new(BigInt::one(), BigInt::from(big_n - 1))],
            )?;
            certify(&sys, tolerance)
        }
    }
}

/// Default tolerance `1e-4` as an exact rational.
pub fn default_tolerance() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10_000))
}
