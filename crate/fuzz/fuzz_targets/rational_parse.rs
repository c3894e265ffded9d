#![no_main]

use avbounds::exact::{parse_rational, rational_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_rational(s) {
        assert_eq!(parse_rational(&rational_to_string(&r)).expect("printed rational must parse"), r);
    }
});
