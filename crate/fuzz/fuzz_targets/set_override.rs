#![no_main]
use libfuzzer_sys::fuzz_target;
use nhbraid_experiment::{parse_override, ResolvedConfig, ScenarioName};

fuzz_target!(|data: &[u8]| {
    let Ok(arg) = std::str::from_utf8(data) else { return };
    if let Ok((k, v)) = parse_override(arg) {
        assert!(!k.is_empty() && !v.is_empty());
        let _ = ResolvedConfig::resolve(ScenarioName::Fig2a, None, &[arg.to_string()], None);
    }
});
