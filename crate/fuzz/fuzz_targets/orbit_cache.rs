#![no_main]

use avbounds::enumerate::OrbitSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(set) = OrbitSet::from_cache_str(s) {
        let again = OrbitSet::from_cache_str(&set.to_cache_string()).expect("written cache must load");
        assert_eq!(again.orbits(), set.orbits());
    }
});
