#![no_main]
use libfuzzer_sys::fuzz_target;
use nhbraid_experiment::expr::eval;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(v) = eval(s) {
            assert!(v.is_finite());
        }
    }
});
