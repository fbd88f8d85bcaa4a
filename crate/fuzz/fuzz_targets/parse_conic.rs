#![no_main]
use libfuzzer_sys::fuzz_target;
use sigma_toda::io::parse_conic;
use sigma_toda::poncelet::reduce_to_elliptic;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(pair) = parse_conic(s) {
        let _ = pair.step_abscissa();
        let _ = reduce_to_elliptic(&pair);
    }
});
