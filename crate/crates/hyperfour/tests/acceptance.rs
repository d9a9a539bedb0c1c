use std::io::Write;

use hyperfour::verify::{run_criterion, CRITERIA};

#[test]
fn acceptance_criteria() {
    let mut err = std::io::stderr().lock();
    writeln!(err).unwrap();
    let mut failed = Vec::new();
    for id in CRITERIA {
        let report = run_criterion(id).expect("known criterion");
        writeln!(err, "{report}").unwrap();
        for c in &report.checks {
            writeln!(
                err,
                "    {} {:<44} {:.3e} (tol {:.1e})",
                if c.passed() { "ok  " } else { "FAIL" },
                c.label,
                c.measured,
                c.tolerance
            )
            .unwrap();
        }
        if !report.passed() {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
