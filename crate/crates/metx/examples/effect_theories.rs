//! How the three effect theories order the same effect contexts.
//!
//! cargo run --example effect_theories

use metx::effect::{any_atom, canon, equiv_context, extend_leq, subeffect, wf_context, wf_extension, Row, Theory};
use metx::met::modality::transform;
use metx::met::Modality;
use metx::syntax::Parser;

fn row(s: &str) -> Row {
    Parser::pragma_row(s).expect("row parses")
}

fn main() {
    let pairs = [
        ("yield", "yield, ask"),
        ("yield, yield", "yield"),
        ("ask, yield", "yield, ask"),
        ("yield, $e", "yield, ask, $e"),
    ];
    for theory in Theory::ALL {
        println!("{theory}:");
        for (e, f) in pairs {
            let (e, f) = (row(e), row(f));
            if !wf_context(theory, &any_atom, &e) || !wf_context(theory, &any_atom, &f) {
                println!("  {e:<14} is not well formed here");
                continue;
            }
            println!(
                "  {e:<14} <= {f:<16} {:<5}  equivalent {:<5}  canonical form of left: {}",
                subeffect(theory, &e, &f),
                equiv_context(theory, &e, &f),
                canon(theory, &e)
            );
        }
        // Extending with yield twice is at most extending once only when duplicates collapse.
        let twice = row("yield, yield");
        if wf_extension(theory, &any_atom, &twice) {
            println!("  <yield,yield> => <yield> @ ask: {}", extend_leq(theory, &twice, &row("yield"), &row("ask")));
        }
        let mu = Modality::Absolute(row("yield"));
        let nu = Modality::Relative(row("yield"));
        println!("  [yield] => <yield> @ . : {}", transform(theory, &mu, &nu, &Row::empty()));
    }
}
