//! A fine-grain call-by-value calculus with effect rows and
//! handler values, its checker, interpreter and the type-directed
//! translation into the core calculus over scoped rows.

pub mod check;
pub mod eval;
pub mod parse;
pub mod print;

use crate::effect::Row;
use crate::met::{self, Kind, Modality, Signatures, Type};
use std::collections::BTreeMap;

pub use check::{check_program, FChecker, FError, Typed};
pub use eval::{f_run, f_step, FOutcome, FStep};
pub use parse::{parse_comp, parse_program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FKind {
    Value,
    Effect,
}

impl FKind {
    pub fn name(self) -> &'static str {
        match self {
            FKind::Value => "value",
            FKind::Effect => "effect",
        }
    }

    pub fn to_met(self) -> Kind {
        match self {
            FKind::Value => Kind::Abs,
            FKind::Effect => Kind::Effect,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FType {
    Unit,
    Int,
    Var(String),
    /// `A ->{E} B`.
    Arrow(Box<FType>, Row, Box<FType>),
    Forall(String, FKind, Box<FType>),
    /// An effect row passed to a type application.
    Row(Row),
}

impl FType {
    pub fn arrow(a: FType, e: Row, b: FType) -> FType {
        FType::Arrow(Box::new(a), e, Box::new(b))
    }

    /// The type translation: arrows become boxed at their row.
    pub fn to_met(&self) -> Type {
        match self {
            FType::Unit => Type::Unit,
            FType::Int => Type::Int,
            FType::Var(a) => Type::Var(a.clone()),
            FType::Arrow(a, e, b) => Type::boxed(Modality::Absolute(e.clone()), Type::arrow(a.to_met(), b.to_met())),
            FType::Forall(a, k, body) => Type::forall(a.clone(), k.to_met(), body.to_met()),
            FType::Row(r) => Type::Row(r.clone()),
        }
    }

    /// Inverse of `to_met` on its image.
    pub fn from_met(t: &Type) -> Option<FType> {
        Some(match t {
            Type::Unit => FType::Unit,
            Type::Int => FType::Int,
            Type::Var(a) => FType::Var(a.clone()),
            Type::Boxed(Modality::Absolute(e), inner) => match &**inner {
                Type::Arrow(a, b) => FType::arrow(FType::from_met(a)?, e.clone(), FType::from_met(b)?),
                _ => return None,
            },
            Type::Forall(a, k, body) => {
                let k = match k {
                    Kind::Abs => FKind::Value,
                    Kind::Effect => FKind::Effect,
                    Kind::Any => return None,
                };
                FType::Forall(a.clone(), k, Box::new(FType::from_met(body)?))
            }
            Type::Row(r) => FType::Row(r.clone()),
            Type::Arrow(..) | Type::Boxed(..) => return None,
        })
    }
}

/// An operation signature `A =>> B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FSig {
    pub arg: FType,
    pub res: FType,
}

pub type FSignatures = BTreeMap<String, FSig>;

/// Translate a signature context.
pub fn sigs_to_met(sigs: &FSignatures) -> Signatures {
    sigs.iter().map(|(l, s)| (l.clone(), met::Sig { arg: s.arg.to_met(), res: s.res.to_met() })).collect()
}

/// The single operation clause `{ l p r -> N }`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub label: String,
    pub param: String,
    pub resume: String,
    pub body: Comp,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Unit,
    Int(i64),
    Var(String),
    /// `fun<E> (x: A) -> M`.
    Lam {
        row: Row,
        var: String,
        ty: FType,
        body: Box<Comp>,
    },
    TyLam(String, FKind, Box<Value>),
    /// `handler<E; A> { l p r -> N }`, annotated with the rows and
    /// result type its synthesised type mentions.
    Handler {
        row: Row,
        result: FType,
        clause: Box<Clause>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Comp {
    Return(Value),
    App(Value, Value),
    TyApp(Value, FType),
    Do(String, Value),
    /// `let x = M in N`; the binder `_` renders as `M; N`.
    Let(String, Box<Comp>, Box<Comp>),
    Add(Box<Comp>, Box<Comp>),
    /// Runtime `handle<E> M with { l p r -> N }`.
    Handle {
        row: Row,
        body: Box<Comp>,
        clause: Box<Clause>,
    },
}

impl Comp {
    pub fn let_(x: impl Into<String>, m: Comp, n: Comp) -> Comp {
        Comp::Let(x.into(), Box::new(m), Box::new(n))
    }

    pub fn seq(m: Comp, n: Comp) -> Comp {
        Comp::let_(met::SEQ_VAR, m, n)
    }

    pub fn add(m: Comp, n: Comp) -> Comp {
        Comp::Add(Box::new(m), Box::new(n))
    }

    pub fn handle(row: Row, body: Comp, clause: Clause) -> Comp {
        Comp::Handle { row, body: Box::new(body), clause: Box::new(clause) }
    }

    pub fn size(&self) -> usize {
        match self {
            Comp::Return(v) | Comp::Do(_, v) | Comp::TyApp(v, _) => 1 + v.size(),
            Comp::App(v, w) => 1 + v.size() + w.size(),
            Comp::Let(_, m, n) | Comp::Add(m, n) => 1 + m.size() + n.size(),
            Comp::Handle { body, clause, .. } => 1 + body.size() + clause.body.size(),
        }
    }
}

impl Value {
    pub fn lam(row: Row, var: impl Into<String>, ty: FType, body: Comp) -> Value {
        Value::Lam { row, var: var.into(), ty, body: Box::new(body) }
    }

    pub fn size(&self) -> usize {
        match self {
            Value::Unit | Value::Int(_) | Value::Var(_) => 1,
            Value::Lam { body, .. } => 1 + body.size(),
            Value::TyLam(_, _, v) => 1 + v.size(),
            Value::Handler { clause, .. } => 1 + clause.body.size(),
        }
    }
}

/// Context declarations in a program header.
#[derive(Clone, Debug, PartialEq)]
pub enum FDecl {
    Var(String, FType),
    TyVar(String, FKind),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FProgram {
    pub sigs: FSignatures,
    /// Row the computation is checked against.
    pub effects: Row,
    pub decls: Vec<FDecl>,
    pub term: Comp,
}
