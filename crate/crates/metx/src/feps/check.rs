//! Checking with elaboration: every judgement also produces the
//! translated core term, reading the rows and types the translation
//! needs straight off the derivation.

use super::{sigs_to_met, Clause, Comp, FDecl, FProgram, FSignatures, FType, Value};
use crate::effect::{equiv_context, subeffect, Atom, Row, Theory};
use crate::met::subst::free_vars;
use crate::met::types::{fresh_name, subst_type, type_equiv};
use crate::met::{self, Checker, Context, Entry, Handler, Kind, Modality, RuntimeLabels, Signatures, Term, Type};
use thiserror::Error;

const THEORY: Theory = Theory::ScopedRows;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("row mismatch: {0}")]
    RowMismatch(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("kind error: {0}")]
    KindError(String),
}

impl FError {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FError::UnboundVar(_) => "UnboundVar",
            FError::RowMismatch(_) => "RowMismatch",
            FError::TypeMismatch(_) => "TypeMismatch",
            FError::UnknownLabel(_) => "UnknownLabel",
            FError::KindError(_) => "KindError",
        }
    }
}

fn kind_err(e: met::TypeError) -> FError {
    FError::KindError(e.to_string())
}

/// A checked judgement: the type, already in translated form, and the
/// translated term.
#[derive(Clone, Debug, PartialEq)]
pub struct Typed {
    pub ty: Type,
    pub term: Term,
}

impl Typed {
    /// The source type.
    pub fn source_type(&self) -> FType {
        FType::from_met(&self.ty).expect("source types are closed under translation")
    }
}

/// Checking environment. Source contexts are held in their translated
/// form; a source entry `x : A` becomes `x : ⟦A⟧` with no locks.
pub struct FChecker {
    pub sigs: FSignatures,
    pub msigs: Signatures,
    omega: RuntimeLabels,
}

fn show(t: &Type) -> String {
    match FType::from_met(t) {
        Some(f) => f.to_string(),
        None => met::print::ty(t),
    }
}

fn row_plus(l: &str, e: &Row) -> Row {
    Row(std::iter::once(Atom::label(l)).chain(e.0.iter().cloned()).collect())
}

/// `mod`-free helper for `letmod<<>; [E]> x = v in body`.
fn unbox(e: &Row, x: &str, v: Term, body: Term) -> Term {
    Term::letmod(Modality::identity(), Modality::Absolute(e.clone()), x, v, body)
}

impl FChecker {
    pub fn new(sigs: &FSignatures) -> FChecker {
        FChecker { sigs: sigs.clone(), msigs: sigs_to_met(sigs), omega: RuntimeLabels::default() }
    }

    fn met(&self) -> Checker<'_> {
        Checker::new(THEORY, &self.msigs, &self.omega)
    }

    fn wf_type(&self, ctx: &Context, a: &FType) -> Result<Type, FError> {
        let t = a.to_met();
        let k = self.met().kind(ctx, &t).map_err(kind_err)?;
        if k != Kind::Abs {
            return Err(FError::KindError(format!("`{a}` is not a value type")));
        }
        Ok(t)
    }

    fn wf_row(&self, ctx: &Context, e: &Row) -> Result<(), FError> {
        self.met().wf_row(ctx, e).map_err(kind_err)
    }

    fn sig(&self, l: &str) -> Result<(Type, Type), FError> {
        let s = self.msigs.get(l).ok_or_else(|| FError::UnknownLabel(l.into()))?;
        Ok((s.arg.clone(), s.res.clone()))
    }

    fn expect(&self, expected: &Type, got: &Type, what: &str) -> Result<(), FError> {
        if type_equiv(THEORY, expected, got) {
            Ok(())
        } else {
            Err(FError::TypeMismatch(format!("{what}: expected {}, found {}", show(expected), show(got))))
        }
    }

    fn with_var<T>(ctx: &mut Context, x: &str, t: &Type, f: impl FnOnce(&mut Context) -> T) -> T {
        let n = ctx.len();
        ctx.push(Entry::Var { name: x.into(), modality: Modality::identity(), index: Row::empty(), ty: t.clone() });
        let r = f(ctx);
        ctx.truncate(n);
        r
    }

    /// `Γ ⊢ V : A`.
    pub fn value(&self, ctx: &mut Context, v: &Value) -> Result<Typed, FError> {
        match v {
            Value::Unit => Ok(Typed { ty: Type::Unit, term: Term::Unit }),
            Value::Int(n) => Ok(Typed { ty: Type::Int, term: Term::Int(*n) }),
            Value::Var(x) => match ctx.lookup(x) {
                Some(found) => Ok(Typed { ty: found.ty.clone(), term: Term::var(x) }),
                None => Err(FError::UnboundVar(x.clone())),
            },
            Value::Lam { row: e, var, ty: a, body } => {
                self.wf_row(ctx, e)?;
                let ta = self.wf_type(ctx, a)?;
                let b = Self::with_var(ctx, var, &ta, |ctx| self.comp(ctx, body, e))?;
                Ok(Typed {
                    ty: Type::boxed(Modality::Absolute(e.clone()), Type::arrow(ta.clone(), b.ty)),
                    term: Term::modal(Modality::Absolute(e.clone()), Term::lam(var, ta, b.term)),
                })
            }
            Value::TyLam(a, k, body) => {
                let n = ctx.len();
                ctx.push(Entry::TyVar { name: a.clone(), kind: k.to_met() });
                let r = self.value(ctx, body);
                ctx.truncate(n);
                let r = r?;
                Ok(Typed { ty: Type::forall(a, k.to_met(), r.ty), term: Term::tylam(a, k.to_met(), r.term) })
            }
            Value::Handler { row: e, result, clause } => {
                self.wf_row(ctx, e)?;
                let ta = self.wf_type(ctx, result)?;
                let handled = row_plus(&clause.label, e);
                let h = self.clause(ctx, clause, e, &ta)?;
                let thunk = Type::boxed(Modality::Absolute(handled.clone()), Type::arrow(Type::Unit, ta.clone()));
                let mut avoid = free_vars(&h.op_body);
                avoid.insert(clause.param.clone());
                avoid.insert(clause.resume.clone());
                let f = fresh_name("f", |c| avoid.contains(c));
                let f1 = format!("{f}'");
                let scrutinee = unbox(&handled, &f1, Term::var(&f), Term::app(Term::var(&f1), Term::Unit));
                let body = Term::handle(Modality::Absolute(e.clone()), scrutinee, h);
                Ok(Typed {
                    ty: Type::boxed(Modality::Absolute(e.clone()), Type::arrow(thunk.clone(), ta)),
                    term: Term::modal(Modality::Absolute(e.clone()), Term::lam(f, thunk, body)),
                })
            }
        }
    }

    /// Check an operation clause whose continuation returns `A` at `E`,
    /// producing the translated handler with its return clause.
    fn clause(&self, ctx: &mut Context, c: &Clause, e: &Row, a: &Type) -> Result<Handler, FError> {
        let (arg, res) = self.sig(&c.label)?;
        let r_ty = Type::boxed(Modality::Absolute(e.clone()), Type::arrow(res, a.clone()));
        let n = Self::with_var(ctx, &c.param, &arg, |ctx| {
            Self::with_var(ctx, &c.resume, &r_ty, |ctx| self.comp(ctx, &c.body, e))
        })?;
        self.expect(a, &n.ty, "operation clause")?;
        let handled = row_plus(&c.label, e);
        Ok(Handler {
            ret_var: "x".into(),
            ret_body: unbox(&handled, "x'", Term::var("x"), Term::var("x'")),
            label: c.label.clone(),
            param: c.param.clone(),
            resume: c.resume.clone(),
            op_body: n.term,
        })
    }

    /// `Γ ⊢ M : A ! E`.
    pub fn comp(&self, ctx: &mut Context, m: &Comp, e: &Row) -> Result<Typed, FError> {
        match m {
            Comp::Return(v) => self.value(ctx, v),
            Comp::App(v, w) => {
                let f = self.value(ctx, v)?;
                let (row, a, b) = match &f.ty {
                    Type::Boxed(Modality::Absolute(row), inner) => match &**inner {
                        Type::Arrow(a, b) => (row.clone(), (**a).clone(), (**b).clone()),
                        _ => unreachable!("source arrows translate to boxed arrows"),
                    },
                    other => return Err(FError::TypeMismatch(format!("expected a function, found {}", show(other)))),
                };
                if !equiv_context(THEORY, &row, e) {
                    return Err(FError::RowMismatch(format!(
                        "function has row {{{row}}} but the context expects {{{e}}}"
                    )));
                }
                let x = self.value(ctx, w)?;
                self.expect(&a, &x.ty, "argument")?;
                Ok(Typed { ty: b, term: unbox(&row, "x''", f.term, Term::app(Term::var("x''"), x.term)) })
            }
            Comp::TyApp(v, t) => {
                let f = self.value(ctx, v)?;
                let Type::Forall(a, k, body) = &f.ty else {
                    return Err(FError::TypeMismatch(format!("expected a polymorphic value, found {}", show(&f.ty))));
                };
                let arg = t.to_met();
                self.met().arg_kind(ctx, &arg, *k).map_err(kind_err)?;
                Ok(Typed { ty: subst_type(body, a, &arg), term: Term::tyapp(f.term, arg) })
            }
            Comp::Do(l, v) => {
                let (arg, res) = self.sig(l)?;
                if !subeffect(THEORY, &Row(vec![Atom::label(l)]), e) {
                    return Err(FError::RowMismatch(format!("operation `{l}` is not in the row {{{e}}}")));
                }
                let x = self.value(ctx, v)?;
                self.expect(&arg, &x.ty, "operation argument")?;
                Ok(Typed { ty: res, term: Term::do_(l, x.term) })
            }
            Comp::Let(x, m1, n) => {
                let a = self.comp(ctx, m1, e)?;
                let b = Self::with_var(ctx, x, &a.ty, |ctx| self.comp(ctx, n, e))?;
                Ok(Typed { ty: b.ty, term: Term::let_(x, a.term, b.term) })
            }
            Comp::Add(m1, n) => {
                let a = self.comp(ctx, m1, e)?;
                self.expect(&Type::Int, &a.ty, "left operand of +")?;
                let b = self.comp(ctx, n, e)?;
                self.expect(&Type::Int, &b.ty, "right operand of +")?;
                Ok(Typed { ty: Type::Int, term: Term::add(a.term, b.term) })
            }
            Comp::Handle { row, body, clause } => {
                if !equiv_context(THEORY, row, e) {
                    return Err(FError::RowMismatch(format!("handler row {{{row}}} but the context expects {{{e}}}")));
                }
                let handled = row_plus(&clause.label, row);
                let a = self.comp(ctx, body, &handled)?;
                let h = self.clause(ctx, clause, row, &a.ty)?;
                Ok(Typed { ty: a.ty, term: Term::handle(Modality::Absolute(row.clone()), a.term, h) })
            }
        }
    }
}

/// The translated context and signatures of a program, for re-checking
/// its translation in the core calculus.
pub fn program_context(p: &FProgram) -> Context {
    let mut ctx = Context::new();
    for d in &p.decls {
        match d {
            FDecl::Var(x, a) => ctx.push(Entry::Var {
                name: x.clone(),
                modality: Modality::identity(),
                index: Row::empty(),
                ty: a.to_met(),
            }),
            FDecl::TyVar(a, k) => ctx.push(Entry::TyVar { name: a.clone(), kind: k.to_met() }),
        }
    }
    ctx
}

/// Check a program against its declared row, returning the translated
/// judgement.
pub fn check_program(p: &FProgram, effects: &Row) -> Result<Typed, FError> {
    let chk = FChecker::new(&p.sigs);
    let mut ctx = program_context(p);
    for d in &p.decls {
        if let FDecl::Var(_, a) = d {
            chk.wf_type(&ctx, a)?;
        }
    }
    chk.wf_row(&ctx, effects)?;
    chk.comp(&mut ctx, &p.term, effects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feps::parse::parse_program;

    fn check(src: &str) -> Result<Typed, FError> {
        let p = parse_program(src).unwrap();
        check_program(&p, &p.effects.clone())
    }

    #[test]
    fn gen_has_its_row() {
        let t = check("effect yield : Int =>> 1\nfun<yield> (x: Int) -> do yield x").unwrap();
        assert_eq!(t.source_type().to_string(), "Int ->{yield} 1");
        assert_eq!(t.term.to_string(), "mod<[yield]> (fun (x: Int) -> do yield x)");
    }

    #[test]
    fn app_is_polymorphic() {
        let t = check("tfun ($e) -> fun (f: Int ->{$e} 1) -> fun<$e> (x: Int) -> f x").unwrap();
        assert_eq!(t.source_type().to_string(), "forall $e . (Int ->{$e} 1) -> Int ->{$e} 1");
    }

    #[test]
    fn rows_must_agree() {
        let e = check("effect yield : Int =>> 1\nfun (x: Int) -> do yield x").unwrap_err();
        assert_eq!(e.kind_name(), "RowMismatch");
    }
}
