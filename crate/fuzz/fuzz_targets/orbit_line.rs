#![no_main]

use avbounds::weil::RealOrbit;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(o) = RealOrbit::from_line(s) {
        assert_eq!(RealOrbit::from_line(&o.to_line()).expect("written line must load"), o);
    }
});
