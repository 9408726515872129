#![no_main]

use bergman_core::config::parse_norm;
use bergman_core::Complex64;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(norm) = parse_norm(text) {
        let z = [Complex64::new(0.6, -0.2), Complex64::new(0.0, 0.3), Complex64::new(-1.5, 0.0)];
        let v = norm.eval(&z);
        assert!(v.is_finite() && v >= 0.0);
        if let Some(p) = norm.p_value() {
            assert!(p >= 1.0);
            let w = norm.dual_witness(&z).unwrap();
            assert!((norm.dual_eval(w.as_slice()).unwrap() - 1.0).abs() < 1e-9);
        }
    }
});
