//! The syntax-directed type checker.

use super::context::{Context, Entry};
use super::subst::{all_names, rename_label_term, rename_tyvar_term};
use super::types::{
    check_arg_kind, fresh_name, kind_of, labels_of, subst_type, type_equiv, wf_modality, KindEnv, KindIssue,
};
use super::{Kind, Modality, RuntimeLabels, Sig, Signatures, Term, Type};
use crate::effect::{subeffect, Atom, Row, Theory};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("variable `{var}` is locked: its modality {modality} does not transform to {locks} at {index}")]
    LockedVar { var: String, modality: String, locks: String, index: String },
    #[error("kind error: {0}")]
    KindError(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("effect `{label}` is not available in the effect context {ambient}")]
    EffectNotAvailable { label: String, ambient: String },
    #[error("handler modality {modality} is not comonadic at {index}")]
    ComonadCheckFailed { modality: String, index: String },
    #[error("label `{0}` escapes its scope")]
    LabelEscape(String),
    #[error("value restriction: {0} is not a value")]
    ValueRestriction(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

impl TypeError {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TypeError::UnboundVar(_) => "UnboundVar",
            TypeError::LockedVar { .. } => "LockedVar",
            TypeError::KindError(_) => "KindError",
            TypeError::TypeMismatch(_) => "TypeMismatch",
            TypeError::EffectNotAvailable { .. } => "EffectNotAvailable",
            TypeError::ComonadCheckFailed { .. } => "ComonadCheckFailed",
            TypeError::LabelEscape(_) => "LabelEscape",
            TypeError::ValueRestriction(_) => "ValueRestriction",
            TypeError::UnknownLabel(_) => "UnknownLabel",
        }
    }
}

fn kind_err(i: KindIssue) -> TypeError {
    TypeError::KindError(match i {
        KindIssue::UnboundTypeVar(a) => format!("unbound type variable `{a}`"),
        KindIssue::EffectAsType(a) => format!("`{a}` is not a value type"),
        KindIssue::IllFormedRow(r) => format!("ill-formed effect collection `{}`", super::print::row(&r)),
        KindIssue::RowAsType => "effect collection used where a value type is expected".into(),
    })
}

/// Checking environment: the theory, global signatures and runtime labels.
#[derive(Clone, Copy)]
pub struct Checker<'a> {
    pub theory: Theory,
    pub sigs: &'a Signatures,
    pub omega: &'a RuntimeLabels,
}

struct Env<'a, 'c> {
    chk: &'a Checker<'a>,
    ctx: &'c Context,
}

impl KindEnv for Env<'_, '_> {
    fn tyvar_kind(&self, a: &str) -> Option<Kind> {
        self.ctx.tyvar_kind(a)
    }

    fn label_declared(&self, l: &str) -> bool {
        self.chk.label_sig(self.ctx, l).is_some()
    }
}

/// Saved shape of a context, restored after checking under a binder.
struct Mark {
    len: usize,
    last: Option<Entry>,
}

fn mark(ctx: &Context) -> Mark {
    Mark { len: ctx.len(), last: ctx.entries().last().cloned() }
}

fn restore(ctx: &mut Context, m: Mark) {
    ctx.reset(m.len, m.last);
}

/// Check `M` under the given context and ambient effect context.
pub fn typecheck(
    theory: Theory,
    sigs: &Signatures,
    omega: &RuntimeLabels,
    ctx: &Context,
    m: &Term,
    ambient: &Row,
) -> Result<Type, TypeError> {
    let chk = Checker { theory, sigs, omega };
    let mut ctx = ctx.clone();
    chk.check(&mut ctx, m, ambient)
}

impl<'a> Checker<'a> {
    pub fn new(theory: Theory, sigs: &'a Signatures, omega: &'a RuntimeLabels) -> Self {
        Checker { theory, sigs, omega }
    }

    pub fn label_sig<'s>(&'s self, ctx: &'s Context, l: &str) -> Option<&'s Sig> {
        ctx.label(l).or_else(|| self.omega.get(l)).or_else(|| self.sigs.get(l))
    }

    pub fn kind(&self, ctx: &Context, t: &Type) -> Result<Kind, TypeError> {
        kind_of(self.theory, &Env { chk: self, ctx }, t).map_err(kind_err)
    }

    /// `Γ ⊢ A : K` for a type-application argument.
    pub fn arg_kind(&self, ctx: &Context, arg: &Type, k: Kind) -> Result<(), TypeError> {
        check_arg_kind(self.theory, &Env { chk: self, ctx }, arg, k).map_err(kind_err)
    }

    /// `Γ ⊢ E` for an effect context.
    pub fn wf_row(&self, ctx: &Context, e: &Row) -> Result<(), TypeError> {
        super::types::wf_effect_context(self.theory, &Env { chk: self, ctx }, e).map_err(kind_err)
    }

    fn wf_mod(&self, ctx: &Context, mu: &Modality) -> Result<(), TypeError> {
        wf_modality(self.theory, &Env { chk: self, ctx }, mu).map_err(kind_err)
    }

    fn equiv(&self, a: &Type, b: &Type) -> bool {
        type_equiv(self.theory, a, b)
    }

    fn expect_equiv(&self, expected: &Type, got: &Type, what: &str) -> Result<(), TypeError> {
        if self.equiv(expected, got) {
            Ok(())
        } else {
            Err(TypeError::TypeMismatch(format!(
                "{what}: expected {expected}, found {got}",
                expected = super::print::ty(expected),
                got = super::print::ty(got)
            )))
        }
    }

    fn value(&self, v: &Term) -> Result<(), TypeError> {
        if v.is_value() {
            Ok(())
        } else {
            Err(TypeError::ValueRestriction(super::print::term(v)))
        }
    }

    pub fn check(&self, ctx: &mut Context, m: &Term, e: &Row) -> Result<Type, TypeError> {
        match m {
            Term::Unit => Ok(Type::Unit),
            Term::Int(_) => Ok(Type::Int),
            Term::Add(a, b) => {
                let ta = self.check(ctx, a, e)?;
                self.expect_equiv(&Type::Int, &ta, "left operand of +")?;
                let tb = self.check(ctx, b, e)?;
                self.expect_equiv(&Type::Int, &tb, "right operand of +")?;
                Ok(Type::Int)
            }
            Term::Var(x) => self.var(ctx, x),
            Term::Lam(x, a, body) => {
                self.kind(ctx, a)?;
                let mk = mark(ctx);
                ctx.push(Entry::Var {
                    name: x.clone(),
                    modality: Modality::identity(),
                    index: e.clone(),
                    ty: a.clone(),
                });
                let b = self.check(ctx, body, e);
                restore(ctx, mk);
                Ok(Type::arrow(a.clone(), b?))
            }
            Term::App(f, arg) => {
                let tf = self.check(ctx, f, e)?;
                let (a, b) = match tf {
                    Type::Arrow(a, b) => (*a, *b),
                    other => {
                        return Err(TypeError::TypeMismatch(format!(
                            "expected a function type, found {}",
                            super::print::ty(&other)
                        )))
                    }
                };
                let ta = self.check(ctx, arg, e)?;
                self.expect_equiv(&a, &ta, "argument")?;
                Ok(b)
            }
            Term::TyLam(a, k, v) => {
                self.value(v)?;
                let (a, v) = if ctx.tyvar_kind(a).is_some() {
                    let mut avoid = BTreeSet::new();
                    all_names(v, &mut avoid);
                    let na = fresh_name(a, |c| avoid.contains(c) || ctx.tyvar_kind(c).is_some());
                    let nv = rename_tyvar_term(v, a, &na, *k);
                    (na, nv)
                } else {
                    (a.clone(), (**v).clone())
                };
                let mk = mark(ctx);
                ctx.push(Entry::TyVar { name: a.clone(), kind: *k });
                let t = self.check(ctx, &v, e);
                restore(ctx, mk);
                Ok(Type::forall(a, *k, t?))
            }
            Term::TyApp(f, arg) => {
                let tf = self.check(ctx, f, e)?;
                match tf {
                    Type::Forall(a, k, body) => {
                        check_arg_kind(self.theory, &Env { chk: self, ctx }, arg, k).map_err(kind_err)?;
                        Ok(subst_type(&body, &a, arg))
                    }
                    other => Err(TypeError::TypeMismatch(format!(
                        "expected a polymorphic type, found {}",
                        super::print::ty(&other)
                    ))),
                }
            }
            Term::Mod(mu, v) => {
                self.value(v)?;
                self.wf_mod(ctx, mu)?;
                let mk = mark(ctx);
                ctx.push_lock(mu.clone(), e.clone());
                let t = self.check(ctx, v, &mu.apply(e));
                restore(ctx, mk);
                Ok(Type::boxed(mu.clone(), t?))
            }
            Term::LetMod { outer, inner, var, bound, body } => {
                self.value(bound)?;
                self.wf_mod(ctx, outer)?;
                self.wf_mod(ctx, inner)?;
                let mk = mark(ctx);
                ctx.push_lock(outer.clone(), e.clone());
                let t = self.check(ctx, bound, &outer.apply(e));
                restore(ctx, mk);
                let a = match t? {
                    Type::Boxed(m2, a) if m2.equiv(inner, self.theory) => *a,
                    other => {
                        return Err(TypeError::TypeMismatch(format!(
                            "letmod expected a value of type {} _, found {}",
                            super::print::modality(inner),
                            super::print::ty(&other)
                        )))
                    }
                };
                let mk = mark(ctx);
                ctx.push(Entry::Var { name: var.clone(), modality: outer.compose(inner), index: e.clone(), ty: a });
                let r = self.check(ctx, body, e);
                restore(ctx, mk);
                r
            }
            Term::Let(x, a, b) => {
                let ta = self.check(ctx, a, e)?;
                let mk = mark(ctx);
                ctx.push(Entry::Var { name: x.clone(), modality: Modality::identity(), index: e.clone(), ty: ta });
                let r = self.check(ctx, b, e);
                restore(ctx, mk);
                r
            }
            Term::Do(l, arg) => {
                let sig = self.label_sig(ctx, l).cloned().ok_or_else(|| TypeError::UnknownLabel(l.clone()))?;
                let ta = self.check(ctx, arg, e)?;
                self.expect_equiv(&sig.arg, &ta, &format!("argument of operation `{l}`"))?;
                if !subeffect(self.theory, &Row(vec![Atom::label(l.clone())]), e) {
                    return Err(TypeError::EffectNotAvailable { label: l.clone(), ambient: super::print::ambient(e) });
                }
                Ok(sig.res)
            }
            Term::Local(l, sig, body) => self.local(ctx, l, sig, body, e),
            Term::Handle(mu, body, h) => self.handle(ctx, mu, body, h, e),
        }
    }

    fn var(&self, ctx: &Context, x: &str) -> Result<Type, TypeError> {
        let found = ctx.lookup(x).ok_or_else(|| TypeError::UnboundVar(x.to_string()))?;
        if self.kind(ctx, found.ty)? == Kind::Abs
            || super::modality::transform(self.theory, found.modality, &found.locks, found.index)
        {
            Ok(found.ty.clone())
        } else {
            Err(TypeError::LockedVar {
                var: x.to_string(),
                modality: super::print::modality(found.modality),
                locks: super::print::modality(&found.locks),
                index: super::print::ambient(found.index),
            })
        }
    }

    fn local(&self, ctx: &mut Context, l: &str, sig: &Sig, body: &Term, e: &Row) -> Result<Type, TypeError> {
        for t in [&sig.arg, &sig.res] {
            if self.kind(ctx, t)? != Kind::Abs {
                return Err(TypeError::KindError(format!(
                    "operation signature type {} must have kind abs",
                    super::print::ty(t)
                )));
            }
        }
        let clash = |c: &str| self.label_sig(ctx, c).is_some() || e.contains_label(c);
        let (name, body) = if clash(l) {
            let mut avoid = BTreeSet::new();
            all_names(body, &mut avoid);
            let n = fresh_name(l, |c| avoid.contains(c) || clash(c));
            let b = rename_label_term(body, l, &n);
            (n, b)
        } else {
            (l.to_string(), body.clone())
        };
        let mk = mark(ctx);
        ctx.push(Entry::Label { name: name.clone(), sig: sig.clone() });
        let t = self.check(ctx, &body, e);
        restore(ctx, mk);
        let t = t?;
        let mut ls = BTreeSet::new();
        labels_of(&t, &mut ls);
        if ls.contains(&name) || e.contains_label(&name) {
            return Err(TypeError::LabelEscape(l.to_string()));
        }
        Ok(t)
    }

    fn handle(
        &self,
        ctx: &mut Context,
        mu: &Modality,
        body: &Term,
        h: &super::Handler,
        f: &Row,
    ) -> Result<Type, TypeError> {
        self.wf_mod(ctx, mu)?;
        let e = mu.apply(f);
        let th = self.theory;
        if !super::modality::transform(th, mu, &Modality::identity(), f)
            || !super::modality::transform(th, mu, &mu.compose(mu), f)
        {
            return Err(TypeError::ComonadCheckFailed {
                modality: super::print::modality(mu),
                index: super::print::ambient(f),
            });
        }
        let sig = self.label_sig(ctx, &h.label).cloned().ok_or_else(|| TypeError::UnknownLabel(h.label.clone()))?;
        let ell = Modality::Relative(Row(vec![Atom::label(h.label.clone())]));

        let mk = mark(ctx);
        ctx.push_lock(mu.clone(), f.clone());
        ctx.push_lock(ell.clone(), e.clone());
        let a = self.check(ctx, body, &ell.apply(&e));
        restore(ctx, mk);
        let a = a?;

        let mk = mark(ctx);
        ctx.push_lock(mu.clone(), f.clone());
        ctx.push(Entry::Var {
            name: h.ret_var.clone(),
            modality: Modality::identity(),
            index: e.clone(),
            ty: Type::boxed(mu.compose(&ell), a),
        });
        let b = self.check(ctx, &h.ret_body, &e);
        restore(ctx, mk);
        let b = b?;

        let mk = mark(ctx);
        ctx.push_lock(mu.clone(), f.clone());
        ctx.push(Entry::Var {
            name: h.param.clone(),
            modality: Modality::identity(),
            index: e.clone(),
            ty: sig.arg.clone(),
        });
        ctx.push(Entry::Var {
            name: h.resume.clone(),
            modality: Modality::identity(),
            index: e.clone(),
            ty: Type::boxed(mu.clone(), Type::arrow(sig.res.clone(), b.clone())),
        });
        let b2 = self.check(ctx, &h.op_body, &e);
        restore(ctx, mk);
        self.expect_equiv(&b, &b2?, "operation clause")?;
        Ok(b)
    }
}
