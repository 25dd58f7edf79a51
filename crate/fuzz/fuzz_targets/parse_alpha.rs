#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(alpha) = durrmeyer::experiments::parse_alpha(s) {
        assert!(alpha.is_finite() && alpha >= 0.0, "{s:?} -> {alpha}");
    }
});
