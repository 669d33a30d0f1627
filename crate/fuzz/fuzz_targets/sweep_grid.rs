#![no_main]
use libfuzzer_sys::fuzz_target;
use nhbraid_experiment::grid::{parse_grid, MAX_POINTS};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(g) = parse_grid(s) {
            assert!(!g.is_empty() && g.len() <= MAX_POINTS);
            assert!(g.iter().all(|x| x.is_finite()));
        }
    }
});
