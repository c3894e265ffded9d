#![allow(dead_code)]

use avbounds::exact::IntPolynomial;
use proptest::test_runner::{Config, RngSeed};

/// Fixed-seed runner configuration, so every run draws the same cases.
pub fn fixed(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x00c0_ffee),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn poly(s: &str) -> IntPolynomial {
    s.parse().unwrap()
}

/// `prod (x - r)` for the given integer roots.
pub fn from_roots(roots: &[i64]) -> IntPolynomial {
    roots
        .iter()
        .fold(IntPolynomial::one(), |acc, &r| &acc * &IntPolynomial::linear(r))
}
