#![no_main]

use durrmeyer::experiments::config::SuiteConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SuiteConfig::parse(s) {
        assert!(!cfg.ns.is_empty() && !cfg.checks.is_empty());
    }
});
