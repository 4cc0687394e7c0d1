//! One PASS/FAIL line per acceptance criterion, with tolerances pinned in
//! `checks` and runtime limits checked alongside.

use std::process::Command;

use affine_limit_cli::checks::{Suite, RUNTIME_LIMITS};
use affine_limit_cli::config::RunConfig;

fn verify_twice() -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("verify");
    let args = [
        "verify",
        "--k-grid",
        "1e2,1e3,1e4",
        "--theta-max",
        "4pi",
        "--density",
        "250",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
    ];
    let mut reports = Vec::new();
    for _ in 0..2 {
        Command::new(env!("CARGO_BIN_EXE_affine-limit"))
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        reports.push(std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?);
    }
    if reports[0] == reports[1] {
        Ok(())
    } else {
        Err(format!(
            "reports differ ({} vs {} bytes)",
            reports[0].len(),
            reports[1].len()
        ))
    }
}

fn main() {
    let mut suite = Suite::new(&RunConfig::default());
    let mut failed = Vec::new();
    for id in 1..=9u8 {
        let check = suite.run(id);
        let limit = RUNTIME_LIMITS.iter().find(|(i, _)| *i == id).map(|&(_, s)| s);
        let in_time = limit.is_none_or(|l| check.seconds < l);
        let pass = check.pass && check.error.is_none() && in_time;
        let mut note = format!("{:.2}s", check.seconds);
        if let Some(l) = limit {
            note.push_str(&format!(" (limit {l:.0}s)"));
        }
        if let Some(e) = &check.error {
            note.push_str(&format!(" error: {e}"));
        }
        println!("{} {id} {}: {note}", if pass { "PASS" } else { "FAIL" }, check.name);
        if !pass {
            failed.push(id);
        }
    }
    match verify_twice() {
        Ok(()) => println!("PASS 10 determinism"),
        Err(e) => {
            println!("FAIL 10 determinism: {e}");
            failed.push(10);
        }
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
