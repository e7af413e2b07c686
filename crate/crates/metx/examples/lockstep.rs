//! Step a capability-based program and its translation side by side.
//!
//! cargo run --example lockstep

use metx::harness::{lockstep_simulate, Calculus, Source, DEFAULT_WINDOW};

fn main() {
    let text = "try { a: (1) => Int => a(()) + 1 } with { p r => r(10) + r(20) }";
    let src = Source::parse(Calculus::SystemC, text).expect("program parses");
    let report = lockstep_simulate("resume-twice", &src, 10_000, DEFAULT_WINDOW);
    print!("{}", report.render());
    println!("{}", report.json());
}
