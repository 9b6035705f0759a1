//! Run the randomized property suites programmatically with custom counts.

use krobust::selftest::{run_all, write_table, SelftestConfig};

fn main() {
    let mut config = SelftestConfig::quick(42);
    config.sandwich_states = 60;
    config.entangled_states = 40;

    let results = run_all(&config);
    write_table(&results, &mut std::io::stdout());

    let failed = results.iter().filter(|r| !r.passed).count();
    println!();
    println!(
        "{} of {} suites passed",
        results.len() - failed,
        results.len()
    );
}
