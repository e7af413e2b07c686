//! Replay the curated corpus through checking, evaluation, type
//! preservation and lockstep simulation.
//!
//! cargo run --example corpus

use metx::cli::{check_corpus_program, Overrides};
use metx::harness::load_corpus;
use std::path::Path;

fn main() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/corpus.manifest");
    let programs = load_corpus(&manifest).expect("manifest loads");
    let mut failed = 0;
    for p in &programs {
        let r = check_corpus_program(p, &Overrides::default(), 10_000, 64);
        failed += usize::from(!r.passed());
        println!("{}", r.line());
    }
    println!("{} programs, {failed} failed", programs.len());
}
