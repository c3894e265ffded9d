#![no_main]

use avbounds::exact::IntPolynomial;
use libfuzzer_sys::fuzz_target;

// Display output parses back to the same polynomial.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = s.parse::<IntPolynomial>() {
        let back: IntPolynomial = p.to_string().parse().expect("display output must parse");
        assert_eq!(back, p);
        if let Ok(q) = IntPolynomial::from_coeff_list(&p.to_coeff_list()) {
            assert_eq!(q, p);
        }
    }
});
