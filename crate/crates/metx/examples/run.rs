//! Evaluate the summing program in all three calculi.
//!
//! cargo run --example run

use metx::cli::{evaluate, load, Overrides};
use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    for file in ["sum.mex", "sum.fe", "sum.sc", "app.mex", "nested.sc"] {
        let src = load(&dir.join(file), &Overrides::default()).expect("example loads");
        let r = evaluate(&src, 10_000).expect("example typechecks");
        println!("{file:<12} {:?} after {} steps", r.outcome, r.steps());
    }
}
