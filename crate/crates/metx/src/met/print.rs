//! Deterministic, minimally parenthesised rendering of types and terms.
//! The output parses back to the same tree.

use super::{Handler, Kind, Modality, Term, Type, SEQ_VAR};
use crate::effect::Row;
use std::fmt;

/// Atoms joined by commas; empty rows render as nothing.
pub fn row(r: &Row) -> String {
    r.to_string()
}

/// An ambient effect context; the empty context renders as `.`.
pub fn ambient(r: &Row) -> String {
    if r.is_empty() {
        ".".into()
    } else {
        row(r)
    }
}

pub fn modality(m: &Modality) -> String {
    match m {
        Modality::Absolute(e) => format!("[{}]", row(e)),
        Modality::Relative(d) => format!("<{}>", row(d)),
    }
}

/// The kind a binder gets when its annotation is omitted.
pub fn default_kind(name: &str) -> Kind {
    if name.starts_with('$') {
        Kind::Effect
    } else {
        Kind::Any
    }
}

fn binder(name: &str, k: Kind) -> String {
    if k == default_kind(name) {
        name.to_string()
    } else {
        format!("{name} :: {}", k.name())
    }
}

pub fn ty(t: &Type) -> String {
    let mut s = String::new();
    ty_at(t, 0, &mut s);
    s
}

fn ty_at(t: &Type, lvl: u8, out: &mut String) {
    let need = match t {
        Type::Arrow(..) | Type::Forall(..) => lvl > 0,
        Type::Boxed(..) => lvl > 1,
        _ => false,
    };
    if need {
        out.push('(');
    }
    match t {
        Type::Unit => out.push('1'),
        Type::Int => out.push_str("Int"),
        Type::Var(a) => out.push_str(a),
        Type::Row(r) => {
            out.push('{');
            out.push_str(&row(r));
            out.push('}');
        }
        Type::Arrow(a, b) => {
            ty_at(a, 1, out);
            out.push_str(" -> ");
            ty_at(b, 0, out);
        }
        Type::Boxed(m, a) => {
            out.push_str(&modality(m));
            out.push(' ');
            ty_at(a, 1, out);
        }
        Type::Forall(a, k, body) => {
            out.push_str("forall ");
            out.push_str(&binder(a, *k));
            out.push_str(" . ");
            ty_at(body, 0, out);
        }
    }
    if need {
        out.push(')');
    }
}

pub fn term(m: &Term) -> String {
    let mut s = String::new();
    term_at(m, 0, &mut s);
    s
}

/// Precedence levels: 0 sequence, 1 binders, 2 sums, 3 prefix forms,
/// 4 application, 5 atoms.
fn level(m: &Term) -> u8 {
    match m {
        Term::Let(x, ..) if x == SEQ_VAR => 0,
        Term::Lam(..) | Term::TyLam(..) | Term::LetMod { .. } | Term::Let(..) | Term::Local(..) | Term::Handle(..) => 1,
        Term::Add(..) => 2,
        Term::Do(..) | Term::Mod(..) => 3,
        Term::App(..) | Term::TyApp(..) => 4,
        Term::Unit | Term::Int(_) | Term::Var(_) => 5,
    }
}

fn term_at(m: &Term, lvl: u8, out: &mut String) {
    let paren = level(m) < lvl;
    if paren {
        out.push('(');
    }
    match m {
        Term::Unit => out.push_str("()"),
        Term::Int(n) => out.push_str(&n.to_string()),
        Term::Var(x) => out.push_str(x),
        Term::Add(a, b) => {
            term_at(a, 2, out);
            out.push_str(" + ");
            term_at(b, 3, out);
        }
        Term::Lam(x, a, b) => {
            out.push_str(&format!("fun ({x}: {}) -> ", ty(a)));
            term_at(b, 0, out);
        }
        Term::TyLam(a, k, v) => {
            out.push_str(&format!("tfun ({}) -> ", binder(a, *k)));
            term_at(v, 0, out);
        }
        Term::App(f, a) => {
            term_at(f, 4, out);
            out.push(' ');
            term_at(a, 5, out);
        }
        Term::TyApp(f, a) => {
            term_at(f, 4, out);
            out.push_str(" @");
            ty_at(a, 2, out);
        }
        Term::Mod(mu, v) => {
            out.push_str(&format!("mod<{}> ", modality(mu)));
            term_at(v, 3, out);
        }
        Term::LetMod { outer, inner, var, bound, body } => {
            out.push_str(&format!("letmod<{}; {}> {var} = ", modality(outer), modality(inner)));
            term_at(bound, 0, out);
            out.push_str(" in ");
            term_at(body, 0, out);
        }
        Term::Let(x, a, b) if x == SEQ_VAR => {
            term_at(a, 2, out);
            out.push_str("; ");
            term_at(b, 0, out);
        }
        Term::Let(x, a, b) => {
            out.push_str(&format!("let {x} = "));
            term_at(a, 0, out);
            out.push_str(" in ");
            term_at(b, 0, out);
        }
        Term::Do(l, a) => {
            out.push_str(&format!("do {l} "));
            term_at(a, 3, out);
        }
        Term::Local(l, s, b) => {
            out.push_str(&format!("local {l} : {} =>> {} in ", ty(&s.arg), ty(&s.res)));
            term_at(b, 0, out);
        }
        Term::Handle(mu, a, h) => {
            out.push_str(&format!("handle<{}> ", modality(mu)));
            term_at(a, 1, out);
            out.push_str(" with ");
            handler(h, out);
        }
    }
    if paren {
        out.push(')');
    }
}

fn handler(h: &Handler, out: &mut String) {
    out.push_str(&format!("{{ return {} -> ", h.ret_var));
    term_at(&h.ret_body, 0, out);
    out.push_str(&format!(", {} {} {} -> ", h.label, h.param, h.resume));
    term_at(&h.op_body, 0, out);
    out.push_str(" }");
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&ty(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&term(self))
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&modality(self))
    }
}
