//! Generate well-typed programs and run the property suites on them.
//!
//! cargo run --example properties [count]

use metx::effect::Theory;
use metx::harness::gen::{feps, systemc, MetGen};
use metx::harness::props;
use metx::harness::Calculus;

fn main() {
    let count: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let mut g = MetGen::new(Theory::ScopedRows, 1, 5);
    for _ in 0..3 {
        let t = g.term();
        println!("met:     {} : {} @ {}", t.term, t.ty, metx::met::print::ambient(&t.ambient));
    }
    for p in feps::gen_programs(2, 5, 3) {
        println!("feps:    {}", feps::render(&p).replace('\n', " | "));
    }
    for p in systemc::gen_programs(2, 5, 3) {
        println!("systemc: {}", systemc::render(&p));
    }
    println!();
    for theory in Theory::ALL {
        println!("{}", props::progress_and_preservation(theory, 1, count, 10_000));
        println!("{}", props::modality_laws(theory, 1, 10 * count));
        println!("{}", props::transform_soundness(theory, 1, count));
        println!("{}", props::subeffect_exhaustive(theory, 2));
    }
    for c in [Calculus::Met, Calculus::Feps, Calculus::SystemC] {
        println!("{}", props::preservation_generated(c, 1, count));
        println!("{}", props::lockstep_generated(c, 1, count, 10_000, 64));
    }
}
