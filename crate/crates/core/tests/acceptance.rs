//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use crysect_core::verify::{run_check, CHECKS};

const SEED: u64 = 20_241_016;

fn main() {
    let mut failed = 0;
    for (id, name, limit) in CHECKS {
        let c = run_check(id, SEED);
        println!("{} {:>2} {:<20} {:>7.2}s/{:.0}s  {}", if c.passed { "PASS" } else { "FAIL" }, id, name, c.seconds, limit, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} criteria passed", CHECKS.len() - failed, CHECKS.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
