use fcl_cli::selftest::{run_selftest, SelftestOptions};

#[test]
fn acceptance_criteria() {
    let report = run_selftest(&SelftestOptions::default());
    for c in &report.criteria {
        println!("{}", c.line());
    }
    assert_eq!(report.criteria.len(), 9);
    let failed: Vec<String> = report
        .criteria
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.id, c.failures.join("; ")))
        .collect();
    assert!(failed.is_empty(), "{}", failed.join("\n"));
}
