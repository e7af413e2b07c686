//! Typecheck core programs and report locked variables.
//!
//! cargo run --example check

use metx::met::{self, parse::parse_program, RuntimeLabels};

fn judge(src: &str) {
    let p = parse_program(src).expect("program parses");
    let (ctx, ambient) = p.context();
    match met::typecheck(p.theory, &p.sigs, &RuntimeLabels::default(), &ctx, &p.term, &ambient) {
        Ok(ty) => println!("{}  :  {} @ {}", p.term, met::print::ty(&ty), met::print::ambient(&ambient)),
        Err(e) => println!("{}  rejected: [{}] {e}", p.term, e.kind_name()),
    }
}

fn main() {
    let yield_sig = "effect yield : Int =>> 1\n";
    judge(&format!("#ambient yield\n{yield_sig}fun (x: Int) -> do yield x"));
    judge(&format!("{yield_sig}mod<[yield]> (fun (x: Int) -> do yield x)"));
    judge(&format!(
        "#ambient ask\n{yield_sig}effect ask : 1 =>> Int\nmod<<yield>> (fun (x: Int) -> do yield (do ask ()))"
    ));
    // A parameter of unknown effects cannot be used under a box that fixes them.
    judge(&format!("{yield_sig}fun (f: Int -> 1) -> mod<[yield]> (fun (x: Int) -> f x)"));
    // Annotating it with the same modality makes the use safe.
    judge(&format!("{yield_sig}var<[yield]> f : Int -> 1\nlock <[yield]>\nfun (x: Int) -> f x"));
}
