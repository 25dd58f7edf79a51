#![no_main]

use durrmeyer::TargetFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(f) = s.parse::<TargetFunction>() else { return };
    // every parsed function prints back to an equivalent spelling
    let again: TargetFunction = f.to_string().parse().expect("display form parses");
    assert_eq!(f, again);
    let _ = f.value(0.5);
    let _ = f.growth();
});
