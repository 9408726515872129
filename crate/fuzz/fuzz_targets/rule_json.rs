#![no_main]

use bergman_core::config::parse_rule;
use bergman_core::QuadratureRule;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for d in 1..=3 {
        if let Ok(rule) = parse_rule(text, d) {
            rule.validate(d).unwrap();
            if let QuadratureRule::ProductRule { .. } = rule {
                assert!(d <= 2);
            }
        }
    }
});
