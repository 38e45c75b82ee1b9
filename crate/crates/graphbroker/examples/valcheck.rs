use graphbroker::validation::{run_validation, ValidationOptions};
fn main() {
    let corrupt = std::env::args().any(|a| a == "--corrupt");
    let quick = std::env::args().any(|a| a == "--quick");
    let results = run_validation(&ValidationOptions { corrupt_byproducts: corrupt, quick });
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    std::process::exit(if results.iter().all(|r| r.passed) { 0 } else { 1 });
}
