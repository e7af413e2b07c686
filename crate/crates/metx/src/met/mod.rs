//! The modal effect calculus: syntax, modalities, kinding, contexts with
//! locks, the syntax-directed type checker and a small-step evaluator.

pub mod check;
pub mod context;
pub mod eval;
pub mod modality;
pub mod parse;
pub mod print;
pub mod subst;
pub mod types;

use crate::effect::Row;
use std::collections::BTreeMap;

pub use check::{typecheck, Checker, TypeError};
pub use context::{Context, Entry};
pub use eval::{run, step, Outcome, StepResult, Trace};
pub use modality::Modality;

/// Kinds of type variables: `Abs ≤ Any` classify value types, `Effect`
/// classifies extensions and effect contexts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Abs,
    Any,
    Effect,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Abs => "abs",
            Kind::Any => "any",
            Kind::Effect => "effect",
        }
    }

    /// `self ≤ other` in the subkind order.
    pub fn sub(self, other: Kind) -> bool {
        self == other || (self == Kind::Abs && other == Kind::Any)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Unit,
    Int,
    Var(String),
    Arrow(Box<Type>, Box<Type>),
    Boxed(Modality, Box<Type>),
    Forall(String, Kind, Box<Type>),
    /// An effect context in argument position of a type application.
    Row(Row),
}

impl Type {
    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn boxed(m: Modality, a: Type) -> Type {
        Type::Boxed(m, Box::new(a))
    }

    pub fn forall(a: impl Into<String>, k: Kind, body: Type) -> Type {
        Type::Forall(a.into(), k, Box::new(body))
    }
}

/// An operation signature `A ↠ B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sig {
    pub arg: Type,
    pub res: Type,
}

/// Global operation signatures.
pub type Signatures = BTreeMap<String, Sig>;

/// Runtime labels generated by local effect declarations, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuntimeLabels {
    pub entries: Vec<(String, Sig)>,
}

impl RuntimeLabels {
    pub fn get(&self, name: &str) -> Option<&Sig> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    /// Allocate the next `%n` label.
    pub fn fresh(&mut self, sig: Sig) -> String {
        let name = format!("%{}", self.entries.len());
        self.entries.push((name.clone(), sig));
        name
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(n, _)| n.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Handler {
    pub ret_var: String,
    pub ret_body: Term,
    pub label: String,
    pub param: String,
    pub resume: String,
    pub op_body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Unit,
    Int(i64),
    Add(Box<Term>, Box<Term>),
    Var(String),
    Lam(String, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    TyLam(String, Kind, Box<Term>),
    TyApp(Box<Term>, Type),
    Mod(Modality, Box<Term>),
    LetMod {
        outer: Modality,
        inner: Modality,
        var: String,
        bound: Box<Term>,
        body: Box<Term>,
    },
    /// `let x = M in N`; the binder `_` renders as `M; N`.
    Let(String, Box<Term>, Box<Term>),
    Do(String, Box<Term>),
    Local(String, Sig, Box<Term>),
    Handle(Modality, Box<Term>, Box<Handler>),
}

/// Binder name used by sequencing.
pub const SEQ_VAR: &str = "_";

impl Term {
    pub fn var(x: impl Into<String>) -> Term {
        Term::Var(x.into())
    }

    pub fn lam(x: impl Into<String>, a: Type, body: Term) -> Term {
        Term::Lam(x.into(), a, Box::new(body))
    }

    pub fn app(m: Term, n: Term) -> Term {
        Term::App(Box::new(m), Box::new(n))
    }

    pub fn tylam(a: impl Into<String>, k: Kind, v: Term) -> Term {
        Term::TyLam(a.into(), k, Box::new(v))
    }

    pub fn tyapp(m: Term, a: Type) -> Term {
        Term::TyApp(Box::new(m), a)
    }

    pub fn modal(mu: Modality, v: Term) -> Term {
        Term::Mod(mu, Box::new(v))
    }

    pub fn letmod(outer: Modality, inner: Modality, var: impl Into<String>, bound: Term, body: Term) -> Term {
        Term::LetMod { outer, inner, var: var.into(), bound: Box::new(bound), body: Box::new(body) }
    }

    pub fn let_(x: impl Into<String>, m: Term, n: Term) -> Term {
        Term::Let(x.into(), Box::new(m), Box::new(n))
    }

    pub fn seq(m: Term, n: Term) -> Term {
        Term::Let(SEQ_VAR.into(), Box::new(m), Box::new(n))
    }

    pub fn add(m: Term, n: Term) -> Term {
        Term::Add(Box::new(m), Box::new(n))
    }

    pub fn do_(l: impl Into<String>, m: Term) -> Term {
        Term::Do(l.into(), Box::new(m))
    }

    pub fn handle(mu: Modality, m: Term, h: Handler) -> Term {
        Term::Handle(mu, Box::new(m), Box::new(h))
    }

    /// Syntactic values, including the complex forms `V A` and `letmod`.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Unit | Term::Int(_) | Term::Var(_) | Term::Lam(..) => true,
            Term::TyLam(_, _, v) | Term::Mod(_, v) | Term::TyApp(v, _) => v.is_value(),
            Term::LetMod { bound, body, .. } => bound.is_value() && body.is_value(),
            _ => false,
        }
    }

    /// Value normal forms `U`.
    pub fn is_normal(&self) -> bool {
        match self {
            Term::Unit | Term::Int(_) | Term::Var(_) | Term::Lam(..) | Term::TyLam(..) => true,
            Term::Mod(_, u) => u.is_normal(),
            _ => false,
        }
    }

    /// Number of nodes, used to bound generated programs.
    pub fn size(&self) -> usize {
        match self {
            Term::Unit | Term::Int(_) | Term::Var(_) => 1,
            Term::Lam(_, _, m) | Term::TyLam(_, _, m) | Term::TyApp(m, _) | Term::Mod(_, m) => 1 + m.size(),
            Term::Do(_, m) | Term::Local(_, _, m) => 1 + m.size(),
            Term::App(m, n) | Term::Let(_, m, n) | Term::Add(m, n) => 1 + m.size() + n.size(),
            Term::LetMod { bound, body, .. } => 1 + bound.size() + body.size(),
            Term::Handle(_, m, h) => 1 + m.size() + h.ret_body.size() + h.op_body.size(),
        }
    }
}

/// A parsed program: theory, declarations and the term to check.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub theory: crate::effect::Theory,
    pub sigs: Signatures,
    /// Outermost ambient effect context.
    pub ambient: Row,
    pub decls: Vec<Decl>,
    pub term: Term,
}

/// Context declarations in a program header.
#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Var { name: String, modality: Modality, ty: Type },
    Lock(Modality),
    TyVar(String, Kind),
}

impl Program {
    /// Build the typing context from the declarations and return it with
    /// the ambient effect context in force after the last lock.
    pub fn context(&self) -> (Context, Row) {
        let mut ctx = Context::new();
        let mut ambient = self.ambient.clone();
        for d in &self.decls {
            match d {
                Decl::Var { name, modality, ty } => ctx.push(Entry::Var {
                    name: name.clone(),
                    modality: modality.clone(),
                    index: ambient.clone(),
                    ty: ty.clone(),
                }),
                Decl::Lock(mu) => {
                    ctx.push_lock(mu.clone(), ambient.clone());
                    ambient = mu.apply(&ambient);
                }
                Decl::TyVar(a, k) => ctx.push(Entry::TyVar { name: a.clone(), kind: *k }),
            }
        }
        (ctx, ambient)
    }
}
