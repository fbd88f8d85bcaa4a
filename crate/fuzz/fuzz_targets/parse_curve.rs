#![no_main]
//! Curve files: parsing must never panic, and an accepted curve must
//! survive a serialize/parse round trip.

use libfuzzer_sys::fuzz_target;
use sigma_toda::io::{curve_to_json, parse_curve};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(curve) = parse_curve(s) {
        let again = parse_curve(&curve_to_json(&curve)).expect("round trip");
        assert_eq!(again.genus(), curve.genus());
        let _ = curve.branch_points();
    }
});
