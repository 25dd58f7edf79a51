#![no_main]

use durrmeyer::SampledFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(f) = SampledFunction::parse_csv(s) else { return };
    let xs = f.xs();
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    let last = xs[xs.len() - 1];
    for t in [0.0, xs[0], 0.5 * (xs[0] + last), last, last + 1.0] {
        let _ = f.eval(t);
    }
});
