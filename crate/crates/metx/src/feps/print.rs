//! Rendering of `.fe` types and terms. The output parses back to the
//! same tree.

use super::{Clause, Comp, FKind, FType, Value};
use crate::met::print::row;
use crate::met::SEQ_VAR;
use std::fmt;

pub fn default_kind(name: &str) -> FKind {
    if name.starts_with('$') {
        FKind::Effect
    } else {
        FKind::Value
    }
}

fn binder(name: &str, k: FKind) -> String {
    if k == default_kind(name) {
        name.to_string()
    } else {
        format!("{name} :: {}", k.name())
    }
}

pub fn ty(t: &FType) -> String {
    let mut s = String::new();
    ty_at(t, 0, &mut s);
    s
}

fn ty_at(t: &FType, lvl: u8, out: &mut String) {
    let need = matches!(t, FType::Arrow(..) | FType::Forall(..)) && lvl > 0;
    if need {
        out.push('(');
    }
    match t {
        FType::Unit => out.push('1'),
        FType::Int => out.push_str("Int"),
        FType::Var(a) => out.push_str(a),
        FType::Row(r) => {
            out.push('{');
            out.push_str(&row(r));
            out.push('}');
        }
        FType::Arrow(a, e, b) => {
            ty_at(a, 1, out);
            if e.is_empty() {
                out.push_str(" -> ");
            } else {
                out.push_str(&format!(" ->{{{}}} ", row(e)));
            }
            ty_at(b, 0, out);
        }
        FType::Forall(a, k, body) => {
            out.push_str(&format!("forall {} . ", binder(a, *k)));
            ty_at(body, 0, out);
        }
    }
    if need {
        out.push(')');
    }
}

pub fn comp(m: &Comp) -> String {
    let mut s = String::new();
    comp_at(m, 0, &mut s);
    s
}

pub fn value(v: &Value) -> String {
    let mut s = String::new();
    value_at(v, 0, &mut s);
    s
}

fn value_level(v: &Value) -> u8 {
    match v {
        Value::Lam { .. } | Value::TyLam(..) => 1,
        _ => 5,
    }
}

/// Precedence levels match the core syntax: 0 sequence, 1 binders,
/// 2 sums, 3 `do`, 4 application, 5 atoms.
fn comp_level(m: &Comp) -> u8 {
    match m {
        Comp::Let(x, ..) if x == SEQ_VAR => 0,
        Comp::Let(..) | Comp::Handle { .. } => 1,
        Comp::Add(..) => 2,
        Comp::Do(..) => 3,
        Comp::App(..) | Comp::TyApp(..) => 4,
        Comp::Return(v) => value_level(v),
    }
}

fn value_at(v: &Value, lvl: u8, out: &mut String) {
    let paren = value_level(v) < lvl;
    if paren {
        out.push('(');
    }
    match v {
        Value::Unit => out.push_str("()"),
        Value::Int(n) => out.push_str(&n.to_string()),
        Value::Var(x) => out.push_str(x),
        Value::Lam { row: e, var, ty: a, body } => {
            if e.is_empty() {
                out.push_str("fun ");
            } else {
                out.push_str(&format!("fun<{}> ", row(e)));
            }
            out.push_str(&format!("({var}: {}) -> ", ty(a)));
            comp_at(body, 0, out);
        }
        Value::TyLam(a, k, body) => {
            out.push_str(&format!("tfun ({}) -> ", binder(a, *k)));
            value_at(body, 0, out);
        }
        Value::Handler { row: e, result, clause: c } => {
            out.push_str(&format!("handler<{}; {}> ", row(e), ty(result)));
            clause(c, out);
        }
    }
    if paren {
        out.push(')');
    }
}

fn clause(c: &Clause, out: &mut String) {
    out.push_str(&format!("{{ {} {} {} -> ", c.label, c.param, c.resume));
    comp_at(&c.body, 0, out);
    out.push_str(" }");
}

fn comp_at(m: &Comp, lvl: u8, out: &mut String) {
    if let Comp::Return(v) = m {
        return value_at(v, lvl, out);
    }
    let paren = comp_level(m) < lvl;
    if paren {
        out.push('(');
    }
    match m {
        Comp::Return(_) => unreachable!(),
        Comp::App(v, w) => {
            value_at(v, 5, out);
            out.push(' ');
            value_at(w, 5, out);
        }
        Comp::TyApp(v, a) => {
            value_at(v, 5, out);
            out.push_str(" @");
            ty_at(a, 1, out);
        }
        Comp::Do(l, v) => {
            out.push_str(&format!("do {l} "));
            value_at(v, 5, out);
        }
        Comp::Let(x, a, b) if x == SEQ_VAR => {
            comp_at(a, 2, out);
            out.push_str("; ");
            comp_at(b, 0, out);
        }
        Comp::Let(x, a, b) => {
            out.push_str(&format!("let {x} = "));
            comp_at(a, 0, out);
            out.push_str(" in ");
            comp_at(b, 0, out);
        }
        Comp::Add(a, b) => {
            comp_at(a, 2, out);
            out.push_str(" + ");
            comp_at(b, 3, out);
        }
        Comp::Handle { row: e, body, clause: c } => {
            out.push_str(&format!("handle<{}> ", row(e)));
            comp_at(body, 1, out);
            out.push_str(" with ");
            clause(c, out);
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for FType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&ty(self))
    }
}

impl fmt::Display for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&comp(self))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&value(self))
    }
}
