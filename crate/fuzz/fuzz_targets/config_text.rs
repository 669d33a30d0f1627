#![no_main]
use libfuzzer_sys::fuzz_target;
use nhbraid_experiment::{parse_config_text, ResolvedConfig, ScenarioName};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if parse_config_text(text).is_ok() {
        let _ = ResolvedConfig::resolve(ScenarioName::Custom, Some(text), &[], None);
    }
});
