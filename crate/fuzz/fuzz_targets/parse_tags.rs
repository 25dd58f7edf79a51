#![no_main]

use durrmeyer::experiments::{FigurePreset, Metric};
use durrmeyer::stat_conv::TestMonomial;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(m) = Metric::parse(s) {
        assert_eq!(Metric::parse(m.name()).unwrap(), m);
    }
    let _ = FigurePreset::parse(s);
    if let Ok(order) = s.trim().parse::<u32>() {
        let _ = TestMonomial::from_order(order);
    }
});
