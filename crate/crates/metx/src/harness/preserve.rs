//! Type preservation: a source judgement `M : A` translates to a core
//! judgement `⟦M⟧ : ⟦A⟧` at the translated effect context.

use super::Source;
use crate::effect::{Row, Theory};
use crate::met::{self, print, typecheck, types::type_equiv, Context, RuntimeLabels, Signatures, Term, Type};
use crate::systemc::{self, check::translate_labels, CLabels};
use crate::{feps, syntax::ParseError};
use std::fmt;

/// The outcome of a preservation check.
#[derive(Clone, Debug, PartialEq)]
pub enum Preservation {
    /// Both judgements hold and the types agree.
    Pass { source: String, target: String },
    /// The source program is ill-typed, so there is nothing to preserve.
    SourceRejected(String),
    /// The translation is rejected or has a different type.
    Fail { judgement: String, reason: String },
}

impl Preservation {
    pub fn passed(&self) -> bool {
        matches!(self, Preservation::Pass { .. })
    }
}

impl fmt::Display for Preservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preservation::Pass { source, target } => write!(f, "pass: {source} ~> {target}"),
            Preservation::SourceRejected(e) => write!(f, "source rejected: {e}"),
            Preservation::Fail { judgement, reason } => write!(f, "FAIL: {judgement}: {reason}"),
        }
    }
}

/// A translated judgement ready to be re-checked in the core calculus.
pub struct Translated {
    pub theory: Theory,
    pub sigs: Signatures,
    pub omega: RuntimeLabels,
    pub ctx: Context,
    pub term: Term,
    pub ty: Type,
    pub ambient: Row,
    /// The source judgement, rendered.
    pub source: String,
}

/// Check the source program and translate its judgement.
pub fn translate(src: &Source) -> Result<Translated, String> {
    match src {
        Source::Met(p) => {
            let (ctx, ambient) = p.context();
            let omega = RuntimeLabels::default();
            let ty = typecheck(p.theory, &p.sigs, &omega, &ctx, &p.term, &ambient).map_err(|e| e.to_string())?;
            let source = format!("{} @ {}", print::ty(&ty), print::ambient(&ambient));
            Ok(Translated {
                theory: p.theory,
                sigs: p.sigs.clone(),
                omega,
                ctx,
                term: p.term.clone(),
                ty,
                ambient,
                source,
            })
        }
        Source::Feps(p) => {
            let t = feps::check_program(p, &p.effects).map_err(|e| e.to_string())?;
            let source = format!("{} @ {}", t.source_type(), print::ambient(&p.effects));
            Ok(Translated {
                theory: Theory::ScopedRows,
                sigs: feps::sigs_to_met(&p.sigs),
                omega: RuntimeLabels::default(),
                ctx: feps::check::program_context(p),
                term: t.term,
                ty: t.ty,
                ambient: p.effects.clone(),
                source,
            })
        }
        Source::SystemC(p) => translate_c(p, &CLabels::default()),
    }
}

/// Translate a C judgement whose runtime labels are `omega`.
pub fn translate_c(p: &systemc::CProgram, omega: &CLabels) -> Result<Translated, String> {
    let t = systemc::check_program(p, omega).map_err(|e| e.to_string())?;
    let ambient = t.ambient();
    Ok(Translated {
        theory: Theory::Sets,
        sigs: Signatures::new(),
        omega: translate_labels(omega),
        ctx: systemc::check::met_context(p, &ambient),
        ty: t.met_type(),
        source: t.judgement(),
        term: t.term,
        ambient,
    })
}

/// Re-check a translated judgement in the core calculus.
pub fn recheck(t: &Translated) -> Result<Type, met::TypeError> {
    typecheck(t.theory, &t.sigs, &t.omega, &t.ctx, &t.term, &t.ambient)
}

/// Check the program, translate it, re-check the translation and
/// compare the types up to equivalence.
pub fn check_type_preservation(src: &Source) -> Preservation {
    let t = match translate(src) {
        Ok(t) => t,
        Err(e) => return Preservation::SourceRejected(e),
    };
    let judgement = format!("{} : {} @ {}", t.term, print::ty(&t.ty), print::ambient(&t.ambient));
    match recheck(&t) {
        Ok(got) if type_equiv(t.theory, &got, &t.ty) => Preservation::Pass {
            source: t.source,
            target: format!("{} @ {}", print::ty(&got), print::ambient(&t.ambient)),
        },
        Ok(got) => Preservation::Fail { judgement, reason: format!("the translation has type {}", print::ty(&got)) },
        Err(e) => Preservation::Fail { judgement, reason: e.to_string() },
    }
}

/// Parse and check preservation of program text.
pub fn preservation_of_text(calculus: super::Calculus, text: &str) -> Result<Preservation, ParseError> {
    Ok(check_type_preservation(&Source::parse(calculus, text)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Calculus;

    fn pass(c: Calculus, text: &str) -> String {
        match preservation_of_text(c, text).unwrap() {
            Preservation::Pass { target, .. } => target,
            other => panic!("{text}: {other}"),
        }
    }

    #[test]
    fn both_translations_preserve_types() {
        assert_eq!(
            pass(Calculus::Feps, "effect yield : Int =>> 1\nfun<yield> (x: Int) -> do yield x"),
            "[yield] (Int -> 1) @ ."
        );
        assert_eq!(
            pass(Calculus::SystemC, "{ (x: Int, f: (Int) => 1) => f(x) }"),
            "forall $f . <$f> (Int -> [$f] (Int -> 1) -> 1) @ ."
        );
        assert_eq!(pass(Calculus::Met, "()"), "1 @ .");
    }

    #[test]
    fn ill_typed_sources_are_not_failures() {
        let p = preservation_of_text(Calculus::Feps, "effect yield : Int =>> 1\nfun (x: Int) -> do yield x").unwrap();
        assert!(matches!(p, Preservation::SourceRejected(_)));
    }
}
