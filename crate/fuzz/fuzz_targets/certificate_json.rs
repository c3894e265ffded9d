#![no_main]

use avbounds::auxbound::BoundCertificate;
use libfuzzer_sys::fuzz_target;

// Accepted documents serialize back to an equal certificate.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 4096 {
        return;
    }
    if let Ok(c) = BoundCertificate::from_json(s) {
        let json = c.to_json().expect("loaded certificate must serialize");
        assert_eq!(BoundCertificate::from_json(&json).expect("own output must load"), c);
    }
});
