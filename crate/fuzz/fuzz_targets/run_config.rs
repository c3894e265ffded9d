#![no_main]

use avbounds::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(c) = RunConfig::parse(s) {
        assert_eq!(RunConfig::parse(&c.to_text()).expect("written config must parse"), c);
    }
});
