//! The checked-in fuzz corpus must stay valid input for its parsers.

use std::fs;
use std::path::PathBuf;

use nhbraid_experiment::config::ScenarioName;
use nhbraid_experiment::expr::eval;
use nhbraid_experiment::grid::parse_grid;
use nhbraid_experiment::{parse_config_text, parse_override, Manifest, ResolvedConfig};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn config_seeds_resolve() {
    for (p, text) in seeds("config_text") {
        parse_config_text(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        ResolvedConfig::resolve(ScenarioName::Custom, Some(&text), &[], None)
            .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn override_seeds_resolve() {
    for (p, text) in seeds("set_override") {
        parse_override(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        ResolvedConfig::resolve(ScenarioName::Fig2a, None, std::slice::from_ref(&text), None)
            .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn expression_and_grid_seeds_parse() {
    for (p, text) in seeds("angle_expr") {
        eval(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
    for (p, text) in seeds("sweep_grid") {
        parse_grid(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn manifest_seeds_resolve() {
    for (p, text) in seeds("manifest_json") {
        let m = Manifest::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        m.resolved_config().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}
