#![no_main]
use libfuzzer_sys::fuzz_target;
use sigma_toda::io::parse_points;
use sigma_toda::HyperellipticCurve;
use sigma_toda::C64;
use std::sync::OnceLock;

fn curve() -> &'static HyperellipticCurve {
    static CURVE: OnceLock<HyperellipticCurve> = OnceLock::new();
    CURVE.get_or_init(|| {
        let z = C64::new(0.0, 0.0);
        HyperellipticCurve::new(1, vec![z, C64::new(-1.0, 0.0), z]).unwrap()
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(pts) = parse_points(s, curve()) {
        for p in pts {
            assert!(curve().on_curve(p, 1e-8));
        }
    }
});
