//! Runs the fast acceptance criteria on the shipped configuration.

use dspec::acceptance::run_all;
use dspec::config::RunConfig;

fn main() -> dspec::Result<()> {
    let report = run_all(&RunConfig::default(), &[1, 3, 6, 8], |c| println!("{}", c.line()))?;
    println!("all passed: {}", report.passed);
    Ok(())
}
