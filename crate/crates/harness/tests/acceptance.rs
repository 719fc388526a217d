//! The full acceptance suite at the default seed: one line per criterion.
//! Run with `cargo test -p conebessel-cli --test acceptance -- --nocapture`.

use conebessel_cli::checks::{run_suite, Scope, Verdict, CRITERIA};
use conebessel_cli::config::DEFAULT_SEED;

#[test]
fn acceptance_suite() {
    let results = run_suite(&[], &Scope::default(), DEFAULT_SEED, |r| println!("{}", r.line()));
    assert_eq!(results.len(), CRITERIA.len());
    let failed: Vec<usize> = results.iter().filter(|r| r.verdict != Verdict::Pass).map(|r| r.id).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    assert!(failed.is_empty(), "criteria not passing: {failed:?}");
}
