#![no_main]
//! Toda states; small accepted states also go through the spectral curve.

use libfuzzer_sys::fuzz_target;
use sigma_toda::io::parse_state;
use sigma_toda::toda::char_poly;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(state) = parse_state(s) {
        if state.len() <= 12 {
            let _ = char_poly(&state);
        }
    }
});
