//! Verification harness: reproduces the published bound tables from fixture
//! data, audits the printed annotations, and runs the finite checks behind
//! the torsion, new-point and Chebyshev-family statements.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxbound::{bound_theorem_easy, certify, AuxiliarySystem, BoundCertificate, ExceptionRecord};
use crate::chebyshev::{closed_form, extremal_family, family_shift, odd_primes};
use crate::enumerate::{enumerate_orbits, norm_outliers, OrbitSet, Side, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::exact::{format_directed, parse_rational, IntPolynomial};
use crate::lpopt::optimize_system;
use crate::weil::{ceil_lower_end, floor_upper_end, is_member, is_prime, FieldSize, RealOrbit};

/// Field sizes with published auxiliary systems.
pub const SUPPORTED_Q: [u64; 7] = [2, 3, 4, 5, 7, 8, 9];
/// Allowed gap between a certified bound and its published value.
pub const REPRODUCTION_SLACK: f64 = 0.002;
/// Default degree cap for the exhaustive scans.
pub const DEFAULT_DEGREE_CAP: usize = 6;

const FIXTURES: &str = include_str!("../data/published_systems.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscrepancyKind {
    /// Certified bound differs from the printed one beyond the slack.
    Reproduction,
    /// A printed polynomial is not in the interval set.
    Membership,
    /// Asterisk disagrees with the normalized norm against the bound.
    Asterisk,
    /// Polynomial and exponent counts differ.
    Count,
    /// A printed polynomial is replaced for certification.
    Polynomial,
}

impl DiscrepancyKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "reproduction" => DiscrepancyKind::Reproduction,
            "membership" => DiscrepancyKind::Membership,
            "asterisk" => DiscrepancyKind::Asterisk,
            "count" => DiscrepancyKind::Count,
            "polynomial" => DiscrepancyKind::Polynomial,
            _ => return None,
        })
    }

    /// The printed table an anomaly of this kind belongs to: 1 for the
    /// bounds, 2 for the polynomials, 3 for the exponents.
    pub fn table(self) -> u8 {
        match self {
            DiscrepancyKind::Reproduction => 1,
            DiscrepancyKind::Membership | DiscrepancyKind::Asterisk | DiscrepancyKind::Polynomial => 2,
            DiscrepancyKind::Count => 3,
        }
    }
}

/// A known anomaly of the printed data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Misprint {
    pub kind: DiscrepancyKind,
    pub subject: Option<IntPolynomial>,
}

/// One printed auxiliary system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublishedSystem {
    pub q: FieldSize,
    pub side: Side,
    pub bound: BigRational,
    pub bound_text: String,
    pub polynomials: Vec<IntPolynomial>,
    pub starred: Vec<bool>,
    pub exponents: Vec<BigRational>,
    pub corrected: Option<Vec<IntPolynomial>>,
    pub misprints: Vec<Misprint>,
    pub notes: Vec<String>,
}

impl PublishedSystem {
    /// The system to certify: the correction when present, paired with the
    /// first `min(count)` exponents.
    pub fn auxiliary_system(&self) -> Result<AuxiliarySystem> {
        let polys = self.corrected.as_ref().unwrap_or(&self.polynomials);
        let n = polys.len().min(self.exponents.len());
        AuxiliarySystem::new(self.q, self.side, polys[..n].to_vec(), self.exponents[..n].to_vec())
    }

    /// The system exactly as printed, paired the same way.
    pub fn printed_system(&self) -> Result<AuxiliarySystem> {
        let n = self.polynomials.len().min(self.exponents.len());
        AuxiliarySystem::new(
            self.q,
            self.side,
            self.polynomials[..n].to_vec(),
            self.exponents[..n].to_vec(),
        )
    }

    fn is_annotated(&self, kind: DiscrepancyKind, subject: Option<&IntPolynomial>) -> bool {
        self.misprints
            .iter()
            .any(|m| m.kind == kind && (m.subject.is_none() || m.subject.as_ref() == subject))
    }
}

fn parse_poly_list(s: &str, line: usize) -> Result<(Vec<IntPolynomial>, Vec<bool>)> {
    let mut polys = Vec::new();
    let mut stars = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (body, star) = match item.strip_suffix('*') {
            Some(b) => (b.trim(), true),
            None => (item, false),
        };
        let p: IntPolynomial = body
            .parse()
            .map_err(|e| Error::parse(line, format!("bad polynomial {body:?}: {e}")))?;
        polys.push(p);
        stars.push(star);
    }
    Ok((polys, stars))
}

/// Parses fixture text: `[q=<q> <side>]` sections of `key = value` lines.
pub fn parse_fixtures(text: &str) -> Result<Vec<PublishedSystem>> {
    let mut out: Vec<PublishedSystem> = Vec::new();
    let mut have_bound = false;
    let finish = |out: &Vec<PublishedSystem>, have_bound: bool, line: usize| -> Result<()> {
        match out.last() {
            Some(s) if !have_bound => {
                Err(Error::parse(line, format!("section q={} {} has no bound", s.q, s.side)))
            }
            _ => Ok(()),
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(head) = l.strip_prefix('[') {
            finish(&out, have_bound, line)?;
            let head = head
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line, "unterminated section header"))?;
            let (qpart, side) = head
                .split_once(' ')
                .ok_or_else(|| Error::parse(line, "expected [q=<q> <side>]"))?;
            let q: u64 = qpart
                .strip_prefix("q=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(line, format!("bad field size {qpart:?}")))?;
            let q = FieldSize::new(q).map_err(|e| Error::parse(line, e.to_string()))?;
            let side: Side = side.trim().parse().map_err(|e: Error| Error::parse(line, e.to_string()))?;
            if out.iter().any(|s| s.q == q && s.side == side) {
                return Err(Error::parse(line, format!("duplicate section q={q} {side}")));
            }
            out.push(PublishedSystem {
                q,
                side,
                bound: BigRational::zero(),
                bound_text: String::new(),
                polynomials: vec![],
                starred: vec![],
                exponents: vec![],
                corrected: None,
                misprints: vec![],
                notes: vec![],
            });
            have_bound = false;
            continue;
        }
        let (key, value) = l
            .split_once('=')
            .ok_or_else(|| Error::parse(line, "expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let sys = out
            .last_mut()
            .ok_or_else(|| Error::parse(line, "key outside of a section"))?;
        match key {
            "bound" => {
                sys.bound = parse_rational(value).map_err(|e| Error::parse(line, e.to_string()))?;
                sys.bound_text = value.to_string();
                have_bound = true;
            }
            "polys" => (sys.polynomials, sys.starred) = parse_poly_list(value, line)?,
            "exponents" => {
                sys.exponents = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| parse_rational(t).map_err(|e| Error::parse(line, e.to_string())))
                    .collect::<Result<_>>()?;
            }
            "corrected" => sys.corrected = Some(parse_poly_list(value, line)?.0),
            "misprint" => {
                let mut it = value.splitn(2, ' ');
                let kind = it.next().unwrap_or("");
                let kind = DiscrepancyKind::parse(kind)
                    .ok_or_else(|| Error::parse(line, format!("unknown misprint kind {kind:?}")))?;
                let subject = match it.next().map(str::trim).filter(|s| !s.is_empty()) {
                    Some(s) => Some(s.parse().map_err(|e| Error::parse(line, format!("{e}")))?),
                    None => None,
                };
                sys.misprints.push(Misprint { kind, subject });
            }
            "note" => sys.notes.push(value.to_string()),
            other => return Err(Error::parse(line, format!("unknown key {other:?}"))),
        }
    }
    finish(&out, have_bound, text.lines().count())?;
    Ok(out)
}

/// The bundled fixtures.
pub fn published_systems() -> Result<Vec<PublishedSystem>> {
    parse_fixtures(FIXTURES)
}

pub fn published_system(q: FieldSize, side: Side) -> Result<PublishedSystem> {
    published_systems()?
        .into_iter()
        .find(|s| s.q == q && s.side == side)
        .ok_or_else(|| {
            Error::invalid(format!(
                "no published system for q = {q}; supported: {}",
                SUPPORTED_Q.map(|v| v.to_string()).join(", ")
            ))
        })
}

/// Certifies a published system; an empty system falls back to the
/// single-polynomial bound, which for q = 2 lower is the clamp to 1.
pub fn certify_published(sys: &PublishedSystem, tolerance: &BigRational) -> Result<BoundCertificate> {
    let aux = sys.auxiliary_system()?;
    if aux.is_empty() {
        bound_theorem_easy(sys.q, sys.side, tolerance)
    } else {
        certify(&aux, tolerance)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub q: u64,
    pub side: Side,
    pub kind: DiscrepancyKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subject: Option<String>,
    /// Present in the fixture's misprint list.
    pub annotated: bool,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub q: u64,
    pub m_certified: String,
    #[serde(rename = "M_certified")]
    pub upper_certified: String,
    pub m_paper: String,
    #[serde(rename = "M_paper")]
    pub upper_paper: String,
    pub exceptions_lower: Vec<ExceptionRecord>,
    pub exceptions_upper: Vec<ExceptionRecord>,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub tolerance: String,
    pub slack: String,
    pub rows: Vec<BoundsRow>,
}

/// Outcome of certifying and auditing one published system.
#[derive(Clone, Debug)]
pub struct SideResult {
    pub system: PublishedSystem,
    pub certificate: BoundCertificate,
    pub discrepancies: Vec<Discrepancy>,
}

impl SideResult {
    /// Certified bound within the slack of the printed one.
    pub fn reproduced(&self) -> bool {
        !self
            .discrepancies
            .iter()
            .any(|d| d.kind == DiscrepancyKind::Reproduction)
    }
}

/// Normalized norm `|p(0)|^(1/deg)` of a printed polynomial, as text.
fn norm_text(p: &IntPolynomial) -> String {
    let v = p.coeff(0).to_f64().unwrap_or(f64::NAN).abs();
    format!("{:.6}", v.powf(1.0 / p.deg() as f64))
}

/// Certifies one published system and audits it against its printed data.
pub fn audit_side(sys: &PublishedSystem, tolerance: &BigRational) -> Result<SideResult> {
    let q = sys.q;
    let side = sys.side;
    let cert = certify_published(sys, tolerance)?;
    let mut ds = Vec::new();
    let mut push = |kind, subject: Option<&IntPolynomial>, message: String| {
        ds.push(Discrepancy {
            q: q.q(),
            side,
            kind,
            subject: subject.map(|p| p.to_string()),
            annotated: sys.is_annotated(kind, subject),
            message,
        })
    };

    let printed = sys.bound.to_f64().unwrap_or(f64::NAN);
    let got = cert.bound_f64();
    if (got - printed).abs() > REPRODUCTION_SLACK {
        push(
            DiscrepancyKind::Reproduction,
            None,
            format!(
                "certified {} versus printed {} (difference {:+.4}, slack {REPRODUCTION_SLACK})",
                cert.marked(),
                sys.bound_text,
                got - printed
            ),
        );
    }
    if sys.polynomials.len() != sys.exponents.len() {
        push(
            DiscrepancyKind::Count,
            None,
            format!(
                "{} polynomials but {} exponents; the first {} pairs were certified",
                sys.polynomials.len(),
                sys.exponents.len(),
                sys.polynomials.len().min(sys.exponents.len())
            ),
        );
    }
    if let Some(fixed) = &sys.corrected {
        for (old, new) in sys.polynomials.iter().zip(fixed) {
            if old != new {
                let printed_cert = certify(&sys.printed_system()?, tolerance)?;
                push(
                    DiscrepancyKind::Polynomial,
                    Some(old),
                    format!(
                        "{old} replaced by {new}: printed system certifies {}, corrected {}",
                        printed_cert.marked(),
                        cert.marked()
                    ),
                );
            }
        }
    }
    for (p, &star) in sys.polynomials.iter().zip(&sys.starred) {
        if !is_member(p, q)? {
            push(
                DiscrepancyKind::Membership,
                Some(p),
                format!("{p} is not in the interval set for q = {q} (normalized norm {})", norm_text(p)),
            );
            continue;
        }
        let o = RealOrbit::new(p.clone(), q)?;
        let violates = !crate::auxbound::norm_within(&o.point_count(), o.degree(), &sys.bound, side);
        if violates != star {
            push(
                DiscrepancyKind::Asterisk,
                Some(p),
                format!(
                    "{p} has normalized norm {:.6}, which {} the printed bound {}, but is {}",
                    o.normalized_norm(),
                    if violates { "breaks" } else { "satisfies" },
                    sys.bound_text,
                    if star { "starred" } else { "not starred" }
                ),
            );
        }
    }
    Ok(SideResult {
        system: sys.clone(),
        certificate: cert,
        discrepancies: ds,
    })
}

/// Certifies every published system, compares with the printed bounds and
/// audits the annotations.
pub fn reproduce_tables(tolerance: &BigRational) -> Result<BoundsReport> {
    let systems = published_systems()?;
    let results: Vec<SideResult> = systems
        .par_iter()
        .map(|s| audit_side(s, tolerance))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &qv in &SUPPORTED_Q {
        let find = |side| {
            results
                .iter()
                .find(|r| r.system.q.q() == qv && r.system.side == side)
                .ok_or_else(|| Error::Internal(format!("fixture for q = {qv} {side} is missing")))
        };
        let lo = find(Side::Lower)?;
        let hi = find(Side::Upper)?;
        rows.push(BoundsRow {
            q: qv,
            m_certified: lo.certificate.marked(),
            upper_certified: hi.certificate.marked(),
            m_paper: lo.system.bound_text.clone(),
            upper_paper: hi.system.bound_text.clone(),
            exceptions_lower: lo.certificate.exceptions.clone(),
            exceptions_upper: hi.certificate.exceptions.clone(),
            discrepancies: lo.discrepancies.iter().chain(&hi.discrepancies).cloned().collect(),
        });
    }
    Ok(BoundsReport {
        tolerance: crate::exact::rational_to_string(tolerance),
        slack: REPRODUCTION_SLACK.to_string(),
        rows,
    })
}

impl BoundsReport {
    pub fn discrepancies(&self) -> impl Iterator<Item = &Discrepancy> {
        self.rows.iter().flat_map(|r| r.discrepancies.iter())
    }

    /// A certified value differs from the printed one beyond the slack,
    /// without a fixture annotation.
    pub fn has_contradiction(&self) -> bool {
        self.discrepancies()
            .any(|d| d.kind == DiscrepancyKind::Reproduction && !d.annotated)
    }

    /// Plain-text table; `tables` selects which printed tables to audit.
    pub fn render(&self, tables: &[u8]) -> String {
        let mut s = String::new();
        if tables.contains(&1) {
            let _ = writeln!(s, "{:>3}  {:>12} {:>8}  {:>12} {:>8}", "q", "m certified", "printed", "M certified", "printed");
            for r in &self.rows {
                let _ = writeln!(
                    s,
                    "{:>3}  {:>12} {:>8}  {:>12} {:>8}",
                    r.q, r.m_certified, r.m_paper, r.upper_certified, r.upper_paper
                );
            }
        }
        if tables.contains(&2) {
            let _ = writeln!(s, "\nexception sets (system polynomials in the interval set)");
            for r in &self.rows {
                let fmt = |v: &[ExceptionRecord]| {
                    v.iter()
                        .map(|e| format!("{}{} ({})", e.poly, if e.violates { "*" } else { "" }, e.normalized_norm))
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                let _ = writeln!(s, "  q={} lower: {}", r.q, fmt(&r.exceptions_lower));
                let _ = writeln!(s, "  q={} upper: {}", r.q, fmt(&r.exceptions_upper));
            }
        }
        for (title, annotated) in [("annotated discrepancies (known misprints)", true), ("other discrepancies", false)] {
            let items: Vec<&Discrepancy> = self
                .discrepancies()
                .filter(|d| d.annotated == annotated && tables.contains(&d.kind.table()))
                .collect();
            let _ = writeln!(s, "\n{title}: {}", items.len());
            for d in items {
                let _ = writeln!(s, "  q={} {} [{:?}] {}", d.q, d.side, d.kind, d.message);
            }
        }
        s
    }
}

/// Exponent counts against a mesh re-fit of the printed polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefitRow {
    pub q: u64,
    pub side: Side,
    pub printed: String,
    pub lp_objective: String,
    pub certified: String,
    pub exponents: Vec<String>,
}

/// Re-derives exponents for every published system by the mesh program
/// and certifies them.
pub fn refit_tables(mesh_size: usize, tolerance: &BigRational) -> Result<Vec<RefitRow>> {
    let systems = published_systems()?;
    systems
        .par_iter()
        .filter(|s| !s.polynomials.is_empty())
        .map(|s| {
            let polys = s.corrected.clone().unwrap_or_else(|| s.polynomials.clone());
            let opt = optimize_system(s.q, s.side, polys, mesh_size, tolerance)?;
            Ok(RefitRow {
                q: s.q.q(),
                side: s.side,
                printed: s.bound_text.clone(),
                lp_objective: format!("{:.6}", opt.solution.objective.exp()),
                certified: opt.certificate.marked(),
                exponents: opt
                    .certificate
                    .system
                    .exponents
                    .iter()
                    .map(|e| format_directed(e, 4, false))
                    .collect(),
            })
        })
        .collect()
}

/// Orbits of degree `<= max_degree` whose normalized norm breaks the lower
/// or upper certificate and that are not roots of a system polynomial.
pub fn unlisted_violators(
    lower: &BoundCertificate,
    upper: &BoundCertificate,
    max_degree: usize,
) -> Result<Vec<RealOrbit>> {
    let q = lower.q();
    if upper.q() != q || lower.side() != Side::Lower || upper.side() != Side::Upper {
        return Err(Error::invalid("need a lower and an upper certificate for one q"));
    }
    let mut out = Vec::new();
    for d in 1..=max_degree {
        let lo = num_traits::pow(lower.certified_bound.clone(), d).ceil().to_integer();
        let hi = num_traits::pow(upper.certified_bound.clone(), d).floor().to_integer();
        for o in norm_outliers(q, d, &lo, &hi)? {
            let listed = lower
                .system
                .polynomials
                .iter()
                .chain(&upper.system.polynomials)
                .any(|p| p == o.polynomial());
            if !listed && (!lower.admits(&o) || !upper.admits(&o)) {
                out.push(o);
            }
        }
    }
    Ok(out)
}

/// `sqrt(min(M, 16))` rounded up to three decimals: the bound on rational
/// 2-torsion over F_3 from a certified upper bound `M` over F_9.
pub fn torsion_bound(m9: &BigRational) -> BigRational {
    let weil = BigRational::from_integer(BigInt::from(16));
    let m = if *m9 > weil { weil } else { m9.clone() };
    // smallest k / 1000 with (k / 1000)^2 >= m
    let scaled = m * BigRational::from_integer(BigInt::from(1_000_000));
    let target = scaled.ceil().to_integer();
    let mut k = target.sqrt();
    if &k * &k < target {
        k += 1;
    }
    BigRational::new(k, BigInt::from(1000))
}

/// Certified upper bound over F_9 from the published system, then
/// `torsion_bound`.
pub fn torsion_from_tables(tolerance: &BigRational) -> Result<(BigRational, BoundCertificate)> {
    let sys = published_system(FieldSize::new(9)?, Side::Upper)?;
    let cert = certify_published(&sys, tolerance)?;
    Ok((torsion_bound(&cert.certified_bound), cert))
}

fn is_prime_power(n: u64) -> bool {
    n >= 2 && FieldSize::new(n).is_ok()
}

/// `ln(exp(a) + exp(b))` without overflow.
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Relative tolerance for the inequality tests; several are exact ties.
const TIE_TOLERANCE: f64 = 1e-9;
const PAIR_SEARCH_LIMIT: u64 = 64;
const GENUS_SEARCH_LIMIT: u32 = 64;

/// `(q^(r/4) - 1)^2 <= 2 sqrt(r)`: the divisor-count necessary condition.
pub fn passes_first_stage(q: u64, r: u32) -> bool {
    let lhs = ((q as f64).powf(r as f64 / 4.0) - 1.0).powi(2);
    lhs <= 2.0 * (r as f64).sqrt() * (1.0 + TIE_TOLERANCE)
}

/// Some `g` with `(q^(r/2) - 1)^(2g) <= sum_{d | r, d < r} (q^(d/2) + 1)^(2g)`.
pub fn passes_second_stage(q: u64, r: u32) -> bool {
    let qf = q as f64;
    let lhs_base = (qf.powf(r as f64 / 2.0) - 1.0).ln();
    let divisors: Vec<u32> = (1..r).filter(|d| r.is_multiple_of(*d)).collect();
    (1..=GENUS_SEARCH_LIMIT).any(|g| {
        let two_g = 2.0 * g as f64;
        let rhs = divisors
            .iter()
            .map(|&d| two_g * (qf.powf(d as f64 / 2.0) + 1.0).ln())
            .fold(f64::NEG_INFINITY, log_add);
        two_g * lhs_base <= rhs + TIE_TOLERANCE * rhs.abs().max(1.0)
    })
}

/// Pairs `(q, r)` with `r > 2` passing the first stage. The first stage
/// fails for all `q >= 5` and all `r >= 8`, and its left side grows in
/// both arguments, so the bounded search is complete.
pub fn candidate_pairs_first_stage() -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for q in (2..=PAIR_SEARCH_LIMIT).filter(|&q| is_prime_power(q)) {
        for r in 3..=PAIR_SEARCH_LIMIT as u32 {
            if passes_first_stage(q, r) {
                out.push((q, r));
            }
        }
    }
    out
}

/// First-stage pairs that also pass the second stage.
pub fn candidate_pairs() -> Vec<(u64, u32)> {
    candidate_pairs_first_stage()
        .into_iter()
        .filter(|&(q, r)| passes_second_stage(q, r))
        .collect()
}

/// `|union_{d | r, d < r} A(F_{q^d})|` by inclusion and exclusion over the
/// prime divisors of `r`, using `A(F_{q^a}) cap A(F_{q^b}) = A(F_{q^gcd(a,b)})`.
pub fn proper_subfield_points(orbit: &RealOrbit, r: u32) -> Result<BigInt> {
    if r < 2 {
        return Err(Error::invalid("extension degree must be at least 2"));
    }
    let primes: Vec<u32> = (2..=r).filter(|&p| r.is_multiple_of(p) && is_prime(p as u64)).collect();
    let mut cache: BTreeMap<u32, BigInt> = BTreeMap::new();
    let mut total = BigInt::zero();
    for mask in 1u32..(1 << primes.len()) {
        let mut d = r;
        for (i, &p) in primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                d /= p;
            }
        }
        let count = match cache.get(&d) {
            Some(c) => c.clone(),
            None => {
                let c = orbit.point_count_extension(d)?;
                cache.insert(d, c.clone());
                c
            }
        };
        if mask.count_ones() % 2 == 1 {
            total += count;
        } else {
            total -= count;
        }
    }
    Ok(total)
}

/// No point over `F_{q^r}` outside the proper subfields.
pub fn has_no_new_points(orbit: &RealOrbit, r: u32) -> Result<bool> {
    Ok(orbit.point_count_extension(r)? == proper_subfield_points(orbit, r)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalOrbit {
    pub q: u64,
    pub r: u32,
    pub orbit: String,
    /// `#A(F_{q^r})`.
    pub count: String,
    /// `#union of A(F_{q^d})` over proper divisors `d` of `r`.
    pub subfield_count: String,
    /// `#A(F_q)`, for comparing with the stricter `A(F_q) = A(F_{q^r})`.
    pub base_count: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewPointsReport {
    pub candidate_pairs: Vec<(u64, u32)>,
    pub surviving_pairs: Vec<(u64, u32)>,
    pub exceptional_orbits: Vec<ExceptionalOrbit>,
    /// Orbits of degree above the cap are not examined.
    pub degree_cap: usize,
    pub orbits_examined: BTreeMap<String, usize>,
}

/// Every orbit of degree `<= degree_cap` for each surviving pair, tested
/// for having no new points.
pub fn new_points_scan(degree_cap: usize) -> Result<NewPointsReport> {
    if degree_cap == 0 || degree_cap > MAX_DEGREE {
        return Err(Error::invalid(format!("degree cap must be in 1..={MAX_DEGREE}")));
    }
    let first = candidate_pairs_first_stage();
    let surviving: Vec<(u64, u32)> = first
        .iter()
        .copied()
        .filter(|&(q, r)| passes_second_stage(q, r))
        .collect();
    let mut sets: BTreeMap<u64, OrbitSet> = BTreeMap::new();
    for &(q, _) in &surviving {
        if let std::collections::btree_map::Entry::Vacant(e) = sets.entry(q) {
            e.insert(enumerate_orbits(FieldSize::new(q)?, degree_cap)?);
        }
    }
    let mut exceptional = Vec::new();
    let mut examined = BTreeMap::new();
    for &(q, r) in &surviving {
        let set = &sets[&q];
        examined.insert(format!("q={q} r={r}"), set.len());
        let found: Vec<ExceptionalOrbit> = set
            .orbits()
            .par_iter()
            .map(|o| -> Result<Option<ExceptionalOrbit>> {
                let count = o.point_count_extension(r)?;
                let sub = proper_subfield_points(o, r)?;
                Ok((count == sub).then(|| ExceptionalOrbit {
                    q,
                    r,
                    orbit: o.polynomial().to_string(),
                    count: count.to_string(),
                    subfield_count: sub.to_string(),
                    base_count: o.point_count().to_string(),
                }))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        exceptional.extend(found);
    }
    Ok(NewPointsReport {
        candidate_pairs: first,
        surviving_pairs: surviving,
        exceptional_orbits: exceptional,
        degree_cap,
        orbits_examined: examined,
    })
}

/// Finite-`ell` evidence for the near-extremal Chebyshev families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevBracket {
    pub q: u64,
    pub lower_shift: u64,
    pub upper_shift: Option<u64>,
    /// `ceil((sqrt q - 1)^2) + 2`.
    pub lower_target: f64,
    /// `floor((sqrt q + 1)^2) - 2 - 1/q`.
    pub upper_target: f64,
    /// Smallest family norm over the sampled primes.
    pub lower_best: f64,
    /// Largest family norm over the sampled primes, when a family fits.
    pub upper_best: Option<f64>,
    /// Limits of the family norms as `ell` grows.
    pub lower_limit: f64,
    pub upper_limit: Option<f64>,
    pub primes: Vec<usize>,
    pub all_members: bool,
}

/// Normalized norms of `R_ell(x - N)` for odd primes `ell <= max_ell`,
/// compared with the bracket targets.
pub fn chebyshev_bracket(q: FieldSize, max_ell: usize) -> Result<ChebyshevBracket> {
    let primes = odd_primes(max_ell);
    if primes.is_empty() {
        return Err(Error::invalid("need at least one odd prime"));
    }
    let lower_shift = family_shift(q, Side::Lower)?;
    let upper_shift = family_shift(q, Side::Upper).ok().filter(|&n| n > 0);
    let mut all_members = true;
    let mut norms = |side: Side| -> Result<Vec<f64>> {
        primes
            .iter()
            .map(|&ell| {
                let o = extremal_family(q, side, ell)?;
                all_members &= is_member(o.polynomial(), q)?;
                Ok(o.normalized_norm())
            })
            .collect()
    };
    let lower = norms(Side::Lower)?;
    let upper = match upper_shift {
        Some(_) => Some(norms(Side::Upper)?),
        None => None,
    };
    let qf = q.q() as f64;
    Ok(ChebyshevBracket {
        q: q.q(),
        lower_shift,
        upper_shift,
        lower_target: ceil_lower_end(q) as f64 + 2.0,
        upper_target: floor_upper_end(q) as f64 - 2.0 - 1.0 / qf,
        lower_best: lower.iter().cloned().fold(f64::INFINITY, f64::min),
        upper_best: upper.map(|v| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        lower_limit: closed_form(lower_shift),
        upper_limit: upper_shift.map(closed_form),
        primes,
        all_members,
    })
}
