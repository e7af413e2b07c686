//! Translate row-based and capability-based programs into the core
//! calculus and check the results there.
//!
//! cargo run --example translate

use metx::harness::preserve::{recheck, translate};
use metx::harness::{Calculus, Source};
use metx::met::print;

fn show(calculus: Calculus, text: &str) {
    let src = Source::parse(calculus, text).expect("program parses");
    let t = translate(&src).expect("program typechecks");
    let again = recheck(&t).expect("translation typechecks");
    println!("{calculus}: {}", text.lines().last().unwrap_or_default());
    println!("  source judgement: {}", t.source);
    println!("  translation:      {}", t.term);
    println!("  core judgement:   {} @ {}\n", print::ty(&again), print::ambient(&t.ambient));
}

fn main() {
    show(Calculus::Feps, "effect yield : Int =>> 1\nfun<yield> (x: Int) -> do yield x");
    show(Calculus::Feps, "tfun ($e) -> fun (f: Int ->{$e} 1) -> fun<$e> (x: Int) -> f x");
    show(Calculus::SystemC, "block y : (Int) => 1\n{ (x: Int) => y(x) }");
    show(Calculus::SystemC, "{ (f: (Int) => 1) => box { (x: Int) => f(x) } }");
}
