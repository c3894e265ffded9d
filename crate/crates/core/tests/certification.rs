mod common;

use avbounds::auxbound::{
    bound_theorem_easy, certify, default_tolerance, exception_set, AuxiliarySystem, BoundCertificate,
};
use avbounds::enumerate::{enumerate_orbits, Side};
use avbounds::exact::{parse_rational, IntPolynomial};
use avbounds::paperlab::{certify_published, published_system};
use avbounds::weil::{weil_interval_f64, FieldSize, RealOrbit};
use common::{fixed, poly};
use num_traits::ToPrimitive;
use proptest::prelude::*;

const SAMPLES: usize = 100_000;

fn fq(q: u64) -> FieldSize {
    FieldSize::new(q).unwrap()
}

fn system(q: u64, side: Side, polys: &[&str], exps: &[&str]) -> AuxiliarySystem {
    AuxiliarySystem::from_decimal_exponents(fq(q), side, polys.iter().map(|s| poly(s)).collect(), exps).unwrap()
}

/// Extreme value of the auxiliary function over an even grid (endpoints
/// included), skipping exact roots.
fn sampled_extreme(sys: &AuxiliarySystem, n: usize) -> f64 {
    let (a, b) = weil_interval_f64(sys.q);
    let vals = (0..=n).map(|k| sys.eval_f64(a + (b - a) * k as f64 / n as f64)).filter(|v| v.is_finite() && *v > 0.0);
    match sys.side {
        Side::Lower => vals.fold(f64::INFINITY, f64::min),
        Side::Upper => vals.fold(f64::NEG_INFINITY, f64::max),
    }
}

#[test]
fn published_q2_upper_reproduces() {
    let c = certify_published(&published_system(fq(2), Side::Upper).unwrap(), &default_tolerance()).unwrap();
    assert!((4.034..=4.036).contains(&c.bound_f64()), "{}", c.marked());
}

#[test]
fn corrected_q4_lower_reproduces() {
    let c = certify_published(&published_system(fq(4), Side::Lower).unwrap(), &default_tolerance()).unwrap();
    assert!((2.274..=2.276).contains(&c.bound_f64()), "{}", c.marked());
}

#[test]
fn single_factor_minimum_is_two() {
    // x / sqrt(x - 1) has its minimum 2 at x = 2
    let c = certify(&system(4, Side::Lower, &["x-1"], &["1/2"]), &default_tolerance()).unwrap();
    assert!(c.bound_f64() <= 2.0 && c.bound_f64() >= 2.0 - 1e-4, "{}", c.marked());
}

#[test]
fn exception_tags() {
    let pool = enumerate_orbits(fq(2), 3).unwrap();
    let c = certify_published(&published_system(fq(2), Side::Upper).unwrap(), &default_tolerance()).unwrap();
    let tags = exception_set(&c, &pool);
    let tag = |s: &str| tags.iter().find(|(o, _)| o.polynomial() == &poly(s)).map(|t| t.1);
    assert_eq!(tag("x-5"), Some(true));
    assert_eq!(tag("x^2-9x+19"), Some(true));
    let pool3 = enumerate_orbits(fq(3), 1).unwrap();
    let c3 = certify_published(&published_system(fq(3), Side::Lower).unwrap(), &default_tolerance()).unwrap();
    let tags3 = exception_set(&c3, &pool3);
    assert!(tags3.contains(&(RealOrbit::new(poly("x-1"), fq(3)).unwrap(), true)));
}

/// The single-polynomial bounds equal `n + 1` and `N - 1` within the
/// tolerance, for every prime power up to 9.
#[test]
fn easy_bounds_for_small_fields() {
    let tol = default_tolerance();
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let sq = (q as f64).sqrt();
        let n = (sq - 1.0).powi(2).floor();
        let big_n = (sq + 1.0).powi(2).ceil();
        let lo = bound_theorem_easy(fq(q), Side::Lower, &tol).unwrap();
        let hi = bound_theorem_easy(fq(q), Side::Upper, &tol).unwrap();
        let want_lo = if n == 0.0 { 1.0 } else { n + 1.0 };
        assert!((lo.bound_f64() - want_lo).abs() <= 1e-4 && lo.bound_f64() <= want_lo, "q={q}: {}", lo.marked());
        assert!((hi.bound_f64() - (big_n - 1.0)).abs() <= 1e-4 && hi.bound_f64() >= big_n - 1.0, "q={q}: {}", hi.marked());
    }
    let two = bound_theorem_easy(fq(2), Side::Lower, &tol).unwrap();
    assert_eq!(two.bound_f64(), 1.0);
    assert!(!two.warnings.is_empty());
}

#[test]
fn mismatched_or_bad_systems_are_rejected() {
    let q = fq(3);
    assert!(AuxiliarySystem::from_decimal_exponents(q, Side::Lower, vec![poly("x-1")], &[]).is_err());
    assert!(AuxiliarySystem::from_decimal_exponents(q, Side::Lower, vec![poly("x-1")], &["0"]).is_err());
    assert!(AuxiliarySystem::from_decimal_exponents(q, Side::Lower, vec![poly("2x-1")], &["0.1"]).is_err());
    let sys = system(3, Side::Lower, &["x-1"], &["0.3"]);
    assert!(certify(&sys, &parse_rational("0").unwrap()).is_err());
}

fn pool_poly(q: u64) -> impl Strategy<Value = IntPolynomial> {
    let pool: Vec<IntPolynomial> = enumerate_orbits(fq(q), 2).unwrap().iter().map(|o| o.polynomial().clone()).collect();
    prop::sample::select(pool)
}

fn random_system() -> impl Strategy<Value = AuxiliarySystem> {
    (
        prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9]),
        prop::bool::ANY,
    )
        .prop_flat_map(|(q, lower)| {
            let side = if lower { Side::Lower } else { Side::Upper };
            prop::collection::vec((pool_poly(q), 1u32..=300), 1..=4).prop_map(move |terms| {
                let mut polys: Vec<IntPolynomial> = Vec::new();
                let mut exps = Vec::new();
                for (p, w) in terms {
                    if !polys.contains(&p) {
                        polys.push(p);
                        exps.push(parse_rational(&format!("{}/1000", w)).unwrap());
                    }
                }
                AuxiliarySystem::new(fq(q), side, polys, exps).unwrap()
            })
        })
}

proptest! {
    #![proptest_config(fixed(24))]

    /// No sampled point beats the certified bound, and the bound is not
    /// looser than the sampled extreme by more than the tolerance plus the
    /// grid error.
    #[test]
    fn certificates_hold_on_dense_samples(sys in random_system()) {
        let tol = default_tolerance();
        let c = certify(&sys, &tol).unwrap();
        let bound = c.bound_f64();
        let ext = sampled_extreme(&sys, SAMPLES);
        match sys.side {
            Side::Lower => {
                prop_assert!(ext >= bound * (1.0 - 1e-12), "sampled {} below certified {}", ext, bound);
                prop_assert!(ext - bound <= tol.to_f64().unwrap() + 1e-2, "loose: {} vs {}", bound, ext);
            }
            Side::Upper => {
                prop_assert!(ext <= bound * (1.0 + 1e-12), "sampled {} above certified {}", ext, bound);
                prop_assert!(bound - ext <= tol.to_f64().unwrap() + 1e-2, "loose: {} vs {}", bound, ext);
            }
        }
    }

    #[test]
    fn certificate_json_roundtrip(sys in random_system()) {
        let c = certify(&sys, &default_tolerance()).unwrap();
        let json = c.to_json().unwrap();
        let back = BoundCertificate::from_json(&json).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_json().unwrap(), json);
    }
}
