mod common;

use std::sync::OnceLock;

use avbounds::enumerate::{enumerate_orbits, extremal_orbits, norm_outliers, OrbitSet, Side};
use avbounds::exact::{real_roots_f64, IntPolynomial, QuadraticNumber};
use avbounds::weil::{
    from_weil, is_member, weil_interval, weil_interval_f64, FieldSize, RealOrbit, WeilPolynomial,
};
use avbounds::Error;
use common::{fixed, poly};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

const QS: [u64; 7] = [2, 3, 4, 5, 7, 8, 9];

fn fq(q: u64) -> FieldSize {
    FieldSize::new(q).unwrap()
}

fn orbit(s: &str, q: u64) -> RealOrbit {
    RealOrbit::new(poly(s), fq(q)).unwrap()
}

/// Every orbit of degree <= 3 for the supported field sizes.
fn pools() -> &'static Vec<OrbitSet> {
    static POOLS: OnceLock<Vec<OrbitSet>> = OnceLock::new();
    POOLS.get_or_init(|| QS.iter().map(|&q| enumerate_orbits(fq(q), 3).unwrap()).collect())
}

fn any_orbit() -> impl Strategy<Value = RealOrbit> {
    (0..QS.len(), any::<prop::sample::Index>()).prop_map(|(i, ix)| {
        let set = &pools()[i];
        set.orbits()[ix.index(set.len())].clone()
    })
}

/// `#A(F_{q^r})` from the Frobenius eigenvalues in complex floating point.
fn float_extension_count(o: &RealOrbit, r: u32) -> f64 {
    let q = o.q().q() as f64;
    let (a, b) = weil_interval_f64(o.q());
    let roots = real_roots_f64(o.polynomial(), a - 1e-9, b + 1e-9, 1e-13).unwrap();
    assert_eq!(roots.len(), o.degree());
    roots
        .iter()
        .map(|alpha| {
            let t = q + 1.0 - alpha;
            let im = (q - t * t / 4.0).max(0.0).sqrt();
            let (mut re_p, mut im_p) = (1.0f64, 0.0f64);
            for _ in 0..r {
                (re_p, im_p) = (re_p * t / 2.0 - im_p * im, re_p * im + im_p * t / 2.0);
            }
            (1.0 - re_p).powi(2) + im_p.powi(2)
        })
        .product()
}

#[test]
fn interval_and_membership_examples() {
    let (lo, hi) = weil_interval(fq(2));
    assert_eq!(lo, QuadraticNumber::from_integers(3, -2, 2));
    assert_eq!(hi, QuadraticNumber::from_integers(3, 2, 2));
    let (lo, hi) = weil_interval(fq(4));
    assert_eq!((lo.to_f64(), hi.to_f64()), (1.0, 9.0));
    let (lo, hi) = weil_interval(fq(9));
    assert_eq!((lo.to_f64(), hi.to_f64()), (4.0, 16.0));
    assert!(is_member(&poly("x^2-4x+2"), fq(3)).unwrap());
    assert!(is_member(&poly("x-5"), fq(2)).unwrap());
    assert!(!is_member(&poly("x-6"), fq(2)).unwrap());
    assert!(matches!(is_member(&poly("2x-5"), fq(2)), Err(Error::InvalidInput(_))));
    assert!(FieldSize::new(6).is_err());
    assert!(FieldSize::new(1).is_err());
}

#[test]
fn weil_polynomial_examples() {
    assert_eq!(orbit("x-3", 2).to_weil().polynomial(), &poly("x^2+2"));
    assert_eq!(orbit("x-4", 2).to_weil().polynomial(), &poly("x^2+x+2"));
    assert_eq!(orbit("x-1", 3).to_weil().polynomial(), &poly("x^2-3x+3"));
    let w = WeilPolynomial::new(poly("x^2+x+2"), fq(2)).unwrap();
    assert_eq!(from_weil(&w).unwrap(), orbit("x-4", 2));
    assert!(WeilPolynomial::new(poly("x^2+x+3"), fq(2)).is_err());
}

#[test]
fn point_count_examples() {
    assert_eq!(orbit("x-5", 2).point_count(), BigInt::from(5));
    assert_eq!(orbit("x-1", 3).point_count(), BigInt::from(1));
    assert_eq!(orbit("x^2-4x+2", 3).point_count(), BigInt::from(2));
    assert_eq!(orbit("x-4", 2).point_count_extension(3).unwrap(), BigInt::from(4));
    assert_eq!(orbit("x-5", 2).point_count_extension(3).unwrap(), BigInt::from(5));
    assert_eq!(orbit("x-3", 2).point_count_extension(4).unwrap(), BigInt::from(9));
    assert!(orbit("x-3", 2).point_count_extension(0).is_err());
    assert_eq!(orbit("x-1", 3).quadratic_twist(), orbit("x-7", 3));
    assert_eq!(orbit("x-3", 2).quadratic_twist(), orbit("x-3", 2));
}

#[test]
fn linear_orbits_are_the_interval_integers() {
    let names = |q: u64| -> Vec<String> {
        enumerate_orbits(fq(q), 1).unwrap().iter().map(|o| o.to_string()).collect()
    };
    assert_eq!(names(2), ["x - 1", "x - 2", "x - 3", "x - 4", "x - 5"]);
    assert_eq!(names(3).len(), 7);
    assert!(enumerate_orbits(fq(2), 9).is_err());
}

#[test]
fn extremal_examples() {
    let s3 = &pools()[1];
    assert_eq!(extremal_orbits(s3, Side::Lower, 1), vec![orbit("x-1", 3)]);
    assert_eq!(extremal_orbits(&pools()[0], Side::Upper, 1), vec![orbit("x-5", 2)]);
    assert!(extremal_orbits(&pools()[3], Side::Upper, 2).contains(&orbit("x-10", 5)));
}

/// Brute force over `x^2 - s x + n`: irreducible (non-square discriminant)
/// with both roots in the closed interval.
#[test]
fn quadratic_orbits_match_brute_force() {
    for (i, &q) in QS.iter().enumerate() {
        let (a, b) = weil_interval_f64(fq(q));
        let mut want = Vec::new();
        for s in 0..=(2.0 * b).ceil() as i64 {
            for n in 0..=(b * b).ceil() as i64 {
                let disc = s * s - 4 * n;
                if disc <= 0 {
                    continue;
                }
                let r = (disc as f64).sqrt().round() as i64;
                if r * r == disc {
                    continue;
                }
                let (lo, hi) = ((s as f64 - (disc as f64).sqrt()) / 2.0, (s as f64 + (disc as f64).sqrt()) / 2.0);
                // the only quadratic that can touch an irrational end is the endpoints' own
                let ends = s == 2 * (q as i64 + 1) && n == (q as i64 - 1).pow(2);
                if ends || (lo > a - 1e-12 && hi < b + 1e-12) {
                    want.push(IntPolynomial::from_coeffs([n, -s, 1]));
                }
            }
        }
        let mut got: Vec<IntPolynomial> = pools()[i].of_degree(2).map(|o| o.polynomial().clone()).collect();
        want.sort();
        got.sort();
        assert_eq!(got, want, "q = {q}");
        let ints = ((a - 1e-12).ceil() as i64..=(b + 1e-12).floor() as i64).count();
        assert_eq!(pools()[i].of_degree(1).count(), ints, "q = {q}");
    }
}

/// The pruned outlier search returns exactly what filtering the full
/// enumeration returns.
#[test]
fn norm_outliers_match_full_enumeration() {
    for (i, &q) in QS.iter().enumerate() {
        let sq = (q as f64).sqrt();
        for d in 1..=3usize {
            for (wl, wh) in [(0.5, 0.5), (1.5, 1.5), (2.5, 0.5), (0.3, 3.0)] {
                let lo = BigInt::from(((sq - 1.0).powi(2) + wl).powi(d as i32) as i64);
                let hi = BigInt::from(((sq + 1.0).powi(2) - wh).powi(d as i32) as i64);
                let want: Vec<RealOrbit> = pools()[i]
                    .of_degree(d)
                    .filter(|o| o.point_count() < lo || o.point_count() > hi)
                    .cloned()
                    .collect();
                let got = norm_outliers(fq(q), d, &lo, &hi).unwrap();
                assert_eq!(got, want, "q = {q}, d = {d}, window [{lo}, {hi}]");
            }
        }
    }
}

#[test]
fn cache_errors_name_lines() {
    let good = pools()[0].truncate(1).to_cache_string();
    assert_eq!(OrbitSet::from_cache_str(&good).unwrap(), pools()[0].truncate(1));
    let bad_count = good.replace("count=5", "count=6");
    assert!(matches!(OrbitSet::from_cache_str(&bad_count), Err(Error::Parse { .. })));
    let bad_line = good.replace("2;-3,1", "2;-6,1");
    match OrbitSet::from_cache_str(&bad_line) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    assert!(matches!(OrbitSet::from_cache_str("nonsense"), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn cache_file_roundtrip_and_missing_path() {
    let dir = std::env::temp_dir().join(format!("avbounds-cache-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("orbits.txt");
    avbounds::enumerate::save_cache(&pools()[2], &path).unwrap();
    assert_eq!(avbounds::enumerate::load_cache(&path).unwrap(), pools()[2]);
    std::fs::remove_dir_all(&dir).unwrap();
    match avbounds::enumerate::load_cache(&path) {
        Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(fixed(512))]

    #[test]
    fn twist_is_an_involution(o in any_orbit()) {
        let t = o.quadratic_twist();
        prop_assert_eq!(t.quadratic_twist(), o.clone());
        // a variety and its twist agree over the quadratic extension
        prop_assert_eq!(t.point_count_extension(2).unwrap(), o.point_count_extension(2).unwrap());
        prop_assert_eq!(&t.point_count() + &o.point_count() > BigInt::zero(), true);
    }

    #[test]
    fn extension_counts_divide_and_match_eigenvalues(o in any_orbit(), r in 1u32..=6) {
        let base = o.point_count();
        let ext = o.point_count_extension(r).unwrap();
        prop_assert!((&ext % &base).is_zero(), "{} does not divide {}", base, ext);
        if r == 1 {
            prop_assert_eq!(&ext, &base);
        }
        let f = float_extension_count(&o, r);
        let e = ext.to_f64().unwrap();
        prop_assert!((f - e).abs() <= 1e-6 * e.max(1.0), "{}: float {} vs exact {}", o, f, e);
    }

    #[test]
    fn point_count_is_the_norm(o in any_orbit()) {
        let n = o.polynomial().coeff(0);
        let n = if o.degree() % 2 == 0 { n } else { -n };
        prop_assert_eq!(o.point_count(), n);
        prop_assert!(o.normalized_norm() >= weil_interval_f64(o.q()).0 - 1e-12);
        prop_assert!(o.normalized_norm() <= weil_interval_f64(o.q()).1 + 1e-12);
    }

    #[test]
    fn weil_polynomial_roundtrip(o in any_orbit()) {
        let w = o.to_weil();
        let p = w.polynomial();
        let (d, q) = (o.degree(), BigInt::from(o.q().q()));
        prop_assert_eq!(p.deg(), 2 * d);
        // functional equation: a_{2d-k} = q^(d-k) a_k
        for k in 0..d {
            prop_assert_eq!(p.coeff(k), p.coeff(2 * d - k) * q.pow((d - k) as u32));
        }
        prop_assert_eq!(from_weil(&w).unwrap(), o);
    }

    #[test]
    fn orbit_line_roundtrip(o in any_orbit()) {
        let line = o.to_line();
        prop_assert!(line.ends_with(",1"));
        prop_assert_eq!(RealOrbit::from_line(&line).unwrap(), o);
    }

}

proptest! {
    // each case re-validates a few thousand orbits
    #![proptest_config(fixed(24))]

    #[test]
    fn cache_text_roundtrip(i in 0..QS.len(), keep in prop::collection::vec(any::<bool>(), 64)) {
        let set = &pools()[i];
        let orbits: Vec<RealOrbit> = set.iter().zip(keep.iter().cycle()).filter(|(_, k)| **k).map(|(o, _)| o.clone()).collect();
        let sub = OrbitSet::from_orbits(set.q(), 3, orbits).unwrap();
        prop_assert_eq!(OrbitSet::from_cache_str(&sub.to_cache_string()).unwrap(), sub);
    }
}
