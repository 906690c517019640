use degentrace::acceptance::run_all;

#[test]
fn acceptance_suite() {
    let reports = run_all();
    for r in &reports {
        println!("{}", r.line());
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert_eq!(reports.len(), 10);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
