//! Exhaustive enumeration of orbits in the Weil interval up to a degree cap.
//!
//! Candidates are built coefficient by coefficient in the centered variable
//! `y = x - (q+1)`, where the interval becomes `[-2 sqrt q, 2 sqrt q]`. With
//! `D_k = f^(k)/k!`, the constant term of `D_k` is the coefficient `a_k`, and
//! `D_k` has all roots in the interval iff its values alternate in sign at the
//! roots of `D_{k+1}` and have the right signs at both ends. Each condition is
//! linear in `a_k`, so every level yields an integer range. Leaves are checked
//! exactly with Sturm sequences.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::IntPolynomial;
use crate::weil::{membership, FieldSize, RealOrbit};

/// Largest supported degree cap.
pub const MAX_DEGREE: usize = 8;

const CACHE_MAGIC: &str = "avbounds-orbits v1";

/// Which end of the normalized-norm range is of interest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Side::Lower),
            "upper" => Ok(Side::Upper),
            _ => Err(Error::invalid(format!("side must be lower or upper, got {s:?}"))),
        }
    }
}

/// All irreducible orbits of degree at most `max_degree`, sorted by degree and
/// then by normalized norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitSet {
    q: FieldSize,
    max_degree: usize,
    orbits: Vec<RealOrbit>,
}

/// Degree, then normalized norm (floats first, exact comparison on near ties),
/// then coefficients.
fn sort_orbits(orbits: &mut Vec<RealOrbit>) {
    let mut keyed: Vec<(f64, RealOrbit)> = std::mem::take(orbits)
        .into_iter()
        .map(|o| (o.normalized_norm(), o))
        .collect();
    keyed.sort_by(|(na, a), (nb, b)| {
        a.degree().cmp(&b.degree()).then_with(|| {
            if (na - nb).abs() > 1e-9 * na.max(*nb) {
                na.partial_cmp(nb).unwrap_or(Ordering::Equal)
            } else {
                a.cmp_normalized_norm(b)
            }
            .then_with(|| a.polynomial().cmp(b.polynomial()))
        })
    });
    *orbits = keyed.into_iter().map(|(_, o)| o).collect();
}

impl OrbitSet {
    /// Builds a set from arbitrary orbits: sorts and removes duplicates.
    pub fn from_orbits(q: FieldSize, max_degree: usize, mut orbits: Vec<RealOrbit>) -> Result<Self> {
        for o in &orbits {
            if o.q() != q {
                return Err(Error::invalid(format!("orbit {o} belongs to q = {}", o.q())));
            }
            if o.degree() > max_degree {
                return Err(Error::invalid(format!("orbit {o} exceeds degree {max_degree}")));
            }
        }
        sort_orbits(&mut orbits);
        orbits.dedup();
        Ok(OrbitSet {
            q,
            max_degree,
            orbits,
        })
    }

    pub fn q(&self) -> FieldSize {
        self.q
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn orbits(&self) -> &[RealOrbit] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RealOrbit> {
        self.orbits.iter()
    }

    pub fn of_degree(&self, d: usize) -> impl Iterator<Item = &RealOrbit> {
        self.orbits.iter().filter(move |o| o.degree() == d)
    }

    pub fn contains(&self, p: &IntPolynomial) -> bool {
        self.orbits.iter().any(|o| o.polynomial() == p)
    }

    /// Number of orbits per degree, degrees 1..=max_degree.
    pub fn counts_by_degree(&self) -> BTreeMap<usize, usize> {
        let mut m: BTreeMap<usize, usize> = (1..=self.max_degree).map(|d| (d, 0)).collect();
        for o in &self.orbits {
            *m.entry(o.degree()).or_default() += 1;
        }
        m
    }

    /// Restricts to degrees at most `d`.
    pub fn truncate(&self, d: usize) -> OrbitSet {
        OrbitSet {
            q: self.q,
            max_degree: d.min(self.max_degree),
            orbits: self.orbits.iter().filter(|o| o.degree() <= d).cloned().collect(),
        }
    }

    pub fn to_cache_string(&self) -> String {
        let mut s = format!(
            "{CACHE_MAGIC} q={} maxdeg={} count={}\n",
            self.q,
            self.max_degree,
            self.orbits.len()
        );
        for o in &self.orbits {
            s.push_str(&o.to_line());
            s.push('\n');
        }
        s
    }

    /// Parses the cache format; errors name the 1-based line number.
    pub fn from_cache_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty cache file"))?;
        let rest = header
            .strip_prefix(CACHE_MAGIC)
            .ok_or_else(|| Error::parse(1, format!("expected header starting with {CACHE_MAGIC:?}")))?;
        let mut q = None;
        let mut max_degree = None;
        let mut count = None;
        for field in rest.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("bad header field {field:?}")))?;
            let v: u64 = v
                .parse()
                .map_err(|_| Error::parse(1, format!("bad header value {field:?}")))?;
            match k {
                "q" => q = Some(v),
                "maxdeg" => max_degree = Some(v),
                "count" => count = Some(v),
                _ => return Err(Error::parse(1, format!("unknown header field {k:?}"))),
            }
        }
        let (Some(q), Some(max_degree), Some(count)) = (q, max_degree, count) else {
            return Err(Error::parse(1, "header needs q, maxdeg and count"));
        };
        let q = FieldSize::new(q).map_err(|e| Error::parse(1, e.to_string()))?;
        if max_degree == 0 || max_degree as usize > MAX_DEGREE {
            return Err(Error::parse(1, format!("maxdeg must be in 1..={MAX_DEGREE}")));
        }
        let max_degree = max_degree as usize;
        let mut orbits = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let o = RealOrbit::from_line(line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
            if o.q() != q {
                return Err(Error::parse(i + 1, format!("orbit for q = {} in a q = {q} cache", o.q())));
            }
            if o.degree() > max_degree {
                return Err(Error::parse(i + 1, format!("degree {} above maxdeg", o.degree())));
            }
            orbits.push(o);
        }
        if orbits.len() as u64 != count {
            return Err(Error::parse(
                text.lines().count().max(1),
                format!("header says {count} orbits, body has {}", orbits.len()),
            ));
        }
        OrbitSet::from_orbits(q, max_degree, orbits)
    }
}

impl<'a> IntoIterator for &'a OrbitSet {
    type Item = &'a RealOrbit;
    type IntoIter = std::slice::Iter<'a, RealOrbit>;
    fn into_iter(self) -> Self::IntoIter {
        self.orbits.iter()
    }
}

pub fn save_cache(set: &OrbitSet, path: &Path) -> Result<()> {
    fs::write(path, set.to_cache_string()).map_err(|e| Error::io(path, e))
}

pub fn load_cache(path: &Path) -> Result<OrbitSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    OrbitSet::from_cache_str(&text)
}

/// Enumerates every monic irreducible integer polynomial of degree at most
/// `max_degree` whose roots all lie in the closed Weil interval.
pub fn enumerate_orbits(q: FieldSize, max_degree: usize) -> Result<OrbitSet> {
    if max_degree == 0 || max_degree > MAX_DEGREE {
        return Err(Error::invalid(format!(
            "degree cap must be in 1..={MAX_DEGREE}, got {max_degree}"
        )));
    }
    check_coefficient_range(q, max_degree)?;
    let center = BigInt::from(q.q() + 1);
    // irreducible members so far, in centered coordinates
    let mut irreducible: Vec<Vec<i64>> = Vec::new();
    let mut orbits = Vec::new();
    for d in 1..=max_degree {
        let lower: Vec<&Vec<i64>> = irreducible.iter().filter(|f| 2 * (f.len() - 1) <= d).collect();
        let fresh: Vec<Vec<i64>> = centered_members(q, d)
            .into_par_iter()
            .filter(|f| !has_factor_among(f, &lower))
            .collect();
        for f in &fresh {
            let p = IntPolynomial::new(f.iter().map(|&c| BigInt::from(c)).collect());
            orbits.push(RealOrbit::new_unchecked(p.taylor_shift(&(-&center)), q));
        }
        irreducible.extend(fresh);
    }
    OrbitSet::from_orbits(q, max_degree, orbits)
}

/// All monic members of degree exactly `d`, reducible ones included, in the
/// original variable.
pub fn members_of_degree(q: FieldSize, d: usize) -> Result<Vec<IntPolynomial>> {
    if d == 0 || d > MAX_DEGREE {
        return Err(Error::invalid(format!("degree must be in 1..={MAX_DEGREE}")));
    }
    check_coefficient_range(q, d)?;
    let center = BigInt::from(q.q() + 1);
    let mut out: Vec<IntPolynomial> = centered_members(q, d)
        .into_iter()
        .map(|f| {
            IntPolynomial::new(f.into_iter().map(BigInt::from).collect()).taylor_shift(&(-&center))
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Centered coefficients are bounded by `C(d, k) (2 sqrt q)^(d-k)`; keep them
/// well inside i64 so the integer filters below cannot overflow.
fn check_coefficient_range(q: FieldSize, d: usize) -> Result<()> {
    let r = 2.0 * (q.q() as f64).sqrt();
    let bound = (1..=d).map(|k| binom(d, k) * r.powi(k as i32)).fold(0.0, f64::max);
    if bound * 4.0 > 2f64.powi(52) {
        return Err(Error::invalid(format!(
            "degree {d} over q = {q} is beyond the enumerator's coefficient range"
        )));
    }
    Ok(())
}

fn centered_members(q: FieldSize, d: usize) -> Vec<Vec<i64>> {
    Search::new(q, d, None).run()
}

/// Depth-first search state for one degree.
struct Search {
    q: FieldSize,
    d: usize,
    r: f64,
    /// Leaves whose norm lies in this closed range are skipped without being
    /// checked; the last coefficient enters the norm linearly.
    skip_norms: Option<(i128, i128)>,
}

impl Search {
    fn new(q: FieldSize, d: usize, skip_norms: Option<(i128, i128)>) -> Self {
        Search {
            q,
            d,
            r: 2.0 * (q.q() as f64).sqrt(),
            skip_norms,
        }
    }

    fn run(&self) -> Vec<Vec<i64>> {
        let d = self.d;
        let mut a = vec![0i64; d + 1];
        a[d] = 1;
        let firsts: Vec<i64> = match level_range(&derivative_coeffs(&a, d, d - 1), &[], self.r) {
            Some((lo, hi)) => (lo..=hi).collect(),
            None => Vec::new(),
        };
        firsts
            .into_par_iter()
            .flat_map_iter(|first| {
                let mut a = vec![0i64; d + 1];
                a[d] = 1;
                a[d - 1] = first;
                let mut found = Vec::new();
                let roots = vec![-(first as f64) / d as f64];
                self.descend(&mut a, d - 1, roots, &mut found);
                found
            })
            .collect()
    }

    fn descend(&self, a: &mut Vec<i64>, k: usize, crit: Vec<f64>, out: &mut Vec<Vec<i64>>) {
        // a_k is fixed and crit holds the roots of D_k
        if k > 0 && self.norms_surely_skipped(&crit) {
            return;
        }
        if k == 0 {
            if leaf_is_member(a, &crit, self.q, self.r) {
                out.push(a.clone());
            }
            return;
        }
        let next = k - 1;
        let mut dk = derivative_coeffs(a, self.d, next);
        let Some((lo, hi)) = level_range(&dk, &crit, self.r) else {
            return;
        };
        let skip = if next == 0 { self.skipped_constants(a) } else { None };
        for v in lo..=hi {
            if let Some((s0, s1)) = skip {
                if (s0..=s1).contains(&(v as i128)) {
                    continue;
                }
            }
            a[next] = v;
            dk[0] = v as f64;
            let roots = interlaced_roots(&dk, &crit, self.r);
            self.descend(a, next, roots, out);
        }
        a[next] = 0;
    }

    /// With `b_j` the roots of `D_k`, every leaf root satisfies
    /// `b_(i-k) <= rho_i <= b_i` (missing indices read as `-r` and `r`), which
    /// brackets the norm `prod (c + rho_i)` of every leaf below this node.
    fn norms_surely_skipped(&self, crit: &[f64]) -> bool {
        let Some((lo, hi)) = self.skip_norms else {
            return false;
        };
        let d = self.d as isize;
        let k = d - crit.len() as isize;
        let c = (self.q.q() + 1) as f64;
        let root = |j: isize| -> f64 {
            if j < 1 {
                -self.r
            } else if j > crit.len() as isize {
                self.r
            } else {
                crit[(j - 1) as usize]
            }
        };
        let (mut least, mut most) = (1.0f64, 1.0f64);
        for i in 1..=d {
            least *= c + root(i - k);
            most *= c + root(i);
        }
        least >= lo as f64 * (1.0 + 1e-6) + 1.0 && most <= hi as f64 * (1.0 - 1e-6) - 1.0
    }

    /// Constant terms whose leaf norm falls in `skip_norms`. The norm is
    /// `(-1)^d p(0) = (-1)^d (a_0 + S)` with `S = sum_{j >= 1} a_j (-c)^j`.
    fn skipped_constants(&self, a: &[i64]) -> Option<(i128, i128)> {
        let (lo, hi) = self.skip_norms?;
        let c = -((self.q.q() + 1) as i128);
        let mut s: i128 = 0;
        for &aj in a[1..].iter().rev() {
            s = s.checked_add(aj as i128)?.checked_mul(c)?;
        }
        if self.d.is_multiple_of(2) {
            Some((lo.checked_sub(s)?, hi.checked_sub(s)?))
        } else {
            Some((hi.checked_neg()?.checked_sub(s)?, lo.checked_neg()?.checked_sub(s)?))
        }
    }
}

/// Irreducible orbits of degree `d` whose norm lies outside `[norm_lo,
/// norm_hi]`, found without materializing the orbits in between.
pub fn norm_outliers(q: FieldSize, d: usize, norm_lo: &BigInt, norm_hi: &BigInt) -> Result<Vec<RealOrbit>> {
    if d == 0 || d > MAX_DEGREE {
        return Err(Error::invalid(format!("degree must be in 1..={MAX_DEGREE}")));
    }
    check_coefficient_range(q, d)?;
    let center = BigInt::from(q.q() + 1);
    let skip = match (norm_lo.to_i128(), norm_hi.to_i128()) {
        (Some(lo), Some(hi)) if lo <= hi => Some((lo, hi)),
        _ => None,
    };
    let factors: Vec<Vec<i64>> = if d >= 2 {
        enumerate_orbits(q, d / 2)?
            .iter()
            .map(|o| {
                o.polynomial()
                    .taylor_shift(&center)
                    .coeffs()
                    .iter()
                    .map(|c| c.to_i64().expect("checked coefficient range"))
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };
    let factor_refs: Vec<&Vec<i64>> = factors.iter().collect();
    let mut out: Vec<RealOrbit> = Search::new(q, d, skip)
        .run()
        .into_iter()
        .filter(|f| !has_factor_among(f, &factor_refs))
        .map(|f| {
            let p = IntPolynomial::new(f.into_iter().map(BigInt::from).collect());
            RealOrbit::new_unchecked(p.taylor_shift(&(-&center)), q)
        })
        .filter(|o| {
            let n = o.point_count();
            &n < norm_lo || &n > norm_hi
        })
        .collect();
    sort_orbits(&mut out);
    Ok(out)
}

/// Coefficients of `D_k(y) = sum_{j >= k} C(j, k) a_j y^(j-k)`, ascending,
/// with the constant term `a_k` left as zero.
fn derivative_coeffs(a: &[i64], d: usize, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; d - k + 1];
    for j in k + 1..=d {
        c[j - k] = binom(j, k) * a[j] as f64;
    }
    c
}

/// Value and absolute-value sum of a float polynomial at `y`.
fn horner(c: &[f64], y: f64) -> (f64, f64) {
    let mut acc = 0.0;
    let mut mag = 0.0;
    for &cj in c.iter().rev() {
        acc = acc * y + cj;
        mag = mag * y.abs() + cj.abs();
    }
    (acc, mag)
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Integer range for the constant term of `D_k`, given its other coefficients
/// and the sorted roots of `D_{k+1}`.
fn level_range(dk: &[f64], crit: &[f64], r: f64) -> Option<(i64, i64)> {
    let n = dk.len() - 1;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut impose = |y: f64, nonneg: bool| {
        let (e, scale) = horner(dk, y);
        let margin = 1e-7 * (1.0 + scale);
        if nonneg {
            lo = lo.max(-e - margin);
        } else {
            hi = hi.min(-e + margin);
        }
    };
    impose(r, true);
    impose(-r, n.is_multiple_of(2));
    // the i-th critical point (0-based) lies between roots i and i+1, with
    // n - i - 1 roots above it
    for (i, &b) in crit.iter().enumerate() {
        impose(b, (n - i - 1).is_multiple_of(2));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return None;
    }
    let (lo, hi) = (lo.ceil(), hi.floor());
    (lo <= hi).then_some((lo as i64, hi as i64))
}

/// Roots of `D_k` in `[-r, r]`, bracketed by the roots of `D_{k+1}`.
fn interlaced_roots(dk: &[f64], crit: &[f64], r: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(crit.len() + 1);
    let mut left = -r;
    for &right in crit.iter().chain(std::iter::once(&r)) {
        out.push(bisect(dk, left, right));
        left = right;
    }
    out
}

/// Root of `c` in `[lo, hi]`. A window without a certain sign change holds a
/// root of even multiplicity at one of its ends (or none at all); the end
/// where the polynomial is smaller is returned then.
fn bisect(c: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let noise = |y: f64| {
        let (v, mag) = horner(c, y);
        (v, 16.0 * c.len() as f64 * f64::EPSILON * mag)
    };
    let (flo, elo) = noise(lo);
    let (fhi, ehi) = noise(hi);
    if flo.abs() <= elo || fhi.abs() <= ehi || (flo < 0.0) == (fhi < 0.0) {
        return if flo.abs() - elo <= fhi.abs() - ehi { lo } else { hi };
    }
    let tol = 1e-14 * (1.0 + lo.abs().max(hi.abs()));
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = horner(c, mid).0;
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const GRID: f64 = (1u64 << 20) as f64;

/// Sign of the centered polynomial at a dyadic point, certified by a Horner
/// error bound; `None` when the value is too close to zero to decide.
fn certified_sign(a: &[i64], y: f64) -> Option<Ordering> {
    let n = a.len() - 1;
    let mut acc = 0.0f64;
    let mut mag = 0.0f64;
    for &c in a.iter().rev() {
        acc = acc * y + c as f64;
        mag = mag * y.abs() + (c as f64).abs();
    }
    let err = (4 * n + 4) as f64 * f64::EPSILON * mag;
    if acc > err {
        Some(Ordering::Greater)
    } else if acc < -err {
        Some(Ordering::Less)
    } else {
        None
    }
}

/// `|y| < 2 sqrt q`, exact for points on the dyadic grid.
fn strictly_inside(y: f64, q: FieldSize) -> bool {
    // y = m / 2^20 with |m| < 2^26, so y^2 is exact
    y * y < 4.0 * q.q() as f64
}

/// Exact membership of a leaf: first by strict sign alternation at dyadic
/// separators between the approximate roots, then by Sturm sequences.
fn leaf_is_member(a: &[i64], approx_roots: &[f64], q: FieldSize, r: f64) -> bool {
    let n = a.len() - 1;
    if approx_roots.len() == n {
        let mut seps = Vec::with_capacity(n + 1);
        seps.push(((approx_roots[0] - r) * 0.5 * GRID).floor() / GRID);
        for w in approx_roots.windows(2) {
            seps.push(((w[0] + w[1]) * 0.5 * GRID).round() / GRID);
        }
        seps.push(((approx_roots[n - 1] + r) * 0.5 * GRID).ceil() / GRID);
        let ordered = seps.windows(2).all(|w| w[0] < w[1]);
        if ordered && strictly_inside(seps[0], q) && strictly_inside(seps[n], q) {
            let alternates = seps.iter().enumerate().all(|(i, &s)| {
                let want = if (n - i).is_multiple_of(2) {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
                certified_sign(a, s) == Some(want)
            });
            if alternates {
                return true;
            }
        }
    }
    let f = IntPolynomial::new(a.iter().map(|&c| BigInt::from(c)).collect());
    let p = f.taylor_shift(&(-BigInt::from(q.q() + 1)));
    matches!(membership(&p, q), Ok(Some(_)))
}

fn eval_i128(f: &[i64], x: i128) -> i128 {
    f.iter().rev().fold(0i128, |acc, &c| acc * x + c as i128)
}

/// Any monic factor of a member has its roots in the interval, so a member is
/// reducible iff some irreducible member of at most half its degree divides it.
fn has_factor_among(p: &[i64], lower: &[&Vec<i64>]) -> bool {
    let values = [eval_i128(p, 0), eval_i128(p, 1), eval_i128(p, -1)];
    let divides = |small: i128, big: i128| if small == 0 { big == 0 } else { big % small == 0 };
    lower.iter().any(|f| {
        divides(eval_i128(f, 0), values[0])
            && divides(eval_i128(f, 1), values[1])
            && divides(eval_i128(f, -1), values[2])
            && divides_monic(f, p)
    })
}

/// True iff the monic `f` divides `p` over the integers.
fn divides_monic(f: &[i64], p: &[i64]) -> bool {
    let m = f.len() - 1;
    let mut rem: Vec<i128> = p.iter().map(|&c| c as i128).collect();
    for top in (m..rem.len()).rev() {
        let c = rem[top];
        if c == 0 {
            continue;
        }
        for (j, &fj) in f.iter().enumerate() {
            rem[top - m + j] -= c * fj as i128;
        }
    }
    rem[..m].iter().all(|&c| c == 0)
}

/// The `count` orbits with smallest (lower) or largest (upper) normalized norm.
pub fn extremal_orbits(set: &OrbitSet, side: Side, count: usize) -> Vec<RealOrbit> {
    let mut v: Vec<RealOrbit> = set.orbits.clone();
    v.sort_by(|a, b| {
        let o = a.cmp_normalized_norm(b).then_with(|| a.degree().cmp(&b.degree()));
        match side {
            Side::Lower => o,
            Side::Upper => o.reverse().then_with(|| a.degree().cmp(&b.degree())),
        }
    });
    v.truncate(count);
    v
}

/// Largest absolute coefficient across a set, as a rough size statistic.
pub fn max_coefficient(set: &OrbitSet) -> BigInt {
    set.iter()
        .flat_map(|o| o.polynomial().coeffs().iter().map(|c| c.abs()))
        .max()
        .unwrap_or_default()
}

/// Normalized norm range over an orbit set, as floats.
pub fn norm_range(set: &OrbitSet) -> Option<(f64, f64)> {
    let it = set.iter().map(|o| o.normalized_norm());
    let v: Vec<f64> = it.collect();
    if v.is_empty() {
        return None;
    }
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fq(q: u64) -> FieldSize {
        FieldSize::new(q).unwrap()
    }

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn linear_members() {
        let s = enumerate_orbits(fq(2), 1).unwrap();
        let got: Vec<String> = s.iter().map(|o| o.to_string()).collect();
        assert_eq!(got, ["x - 1", "x - 2", "x - 3", "x - 4", "x - 5"]);
        assert_eq!(enumerate_orbits(fq(3), 1).unwrap().len(), 7);
        // square q: both integer endpoints belong
        let s = enumerate_orbits(fq(4), 1).unwrap();
        assert_eq!(s.len(), 9);
        assert!(s.orbits()[0].endpoint_flags().at_lower);
    }

    #[test]
    fn degree_cap_is_enforced() {
        assert!(enumerate_orbits(fq(2), 0).is_err());
        assert!(enumerate_orbits(fq(2), 9).is_err());
    }

    #[test]
    fn reducible_members_are_dropped() {
        let s = enumerate_orbits(fq(2), 3).unwrap();
        assert!(s.contains(&p("x^3-13x^2+54x-71")));
        assert!(!s.contains(&p("x^2-3x+2")));
        assert!(!s.contains(&p("x^2-2x+1")));
        assert!(s.contains(&p("x^2-9x+19")));
    }

    #[test]
    fn extremes() {
        let s = enumerate_orbits(fq(3), 2).unwrap();
        assert_eq!(extremal_orbits(&s, Side::Lower, 1)[0].polynomial(), &p("x-1"));
        let s = enumerate_orbits(fq(2), 2).unwrap();
        assert_eq!(extremal_orbits(&s, Side::Upper, 1)[0].polynomial(), &p("x-5"));
        let s = enumerate_orbits(fq(5), 2).unwrap();
        let top = extremal_orbits(&s, Side::Upper, 2);
        assert!(top.iter().any(|o| o.polynomial() == &p("x-10")));
    }

    #[test]
    fn cache_text_roundtrip() {
        let s = enumerate_orbits(fq(2), 2).unwrap();
        let text = s.to_cache_string();
        assert!(text.starts_with("avbounds-orbits v1 q=2 maxdeg=2 count="));
        assert_eq!(OrbitSet::from_cache_str(&text).unwrap(), s);
        let empty = OrbitSet::from_orbits(fq(3), 1, vec![]).unwrap();
        assert_eq!(OrbitSet::from_cache_str(&empty.to_cache_string()).unwrap(), empty);
    }

    #[test]
    fn cache_errors_name_lines() {
        let bad = "avbounds-orbits v1 q=2 maxdeg=1 count=2\n2;-1,1\n";
        match OrbitSet::from_cache_str(bad) {
            Err(Error::Parse { .. }) => {}
            other => panic!("{other:?}"),
        }
        let bad = "avbounds-orbits v1 q=2 maxdeg=1 count=1\n2;-9,1\n";
        match OrbitSet::from_cache_str(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(OrbitSet::from_cache_str("nonsense").is_err());
        assert!(OrbitSet::from_cache_str("").is_err());
    }
}
