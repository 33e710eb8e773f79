//! The full oracle self-test for one (p, L), and the same suite against a
//! deliberately corrupted ψ table.

use canard::psi::Fault;
use canard::validator::selftest_suite;

fn main() {
    let clean = selftest_suite(3, 2, None);
    println!("{clean}\n");
    let broken = selftest_suite(3, 2, Some(Fault::RhoOffByOne));
    for c in broken.failures() {
        println!("corrupted table caught by {}", c.name);
    }
}
