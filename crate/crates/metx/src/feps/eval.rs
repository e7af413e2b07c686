//! Small-step semantics with deep handlers. Programs are closed, so
//! substitution never goes under a binder that could capture.

use super::{Clause, Comp, FSignatures, FType, Value};
use crate::effect::Row;
use crate::met::types::{subst_row, subst_type};

/// Substitute a closed value for `x`.
pub fn subst_comp(m: &Comp, x: &str, v: &Value) -> Comp {
    match m {
        Comp::Return(w) => Comp::Return(subst_value(w, x, v)),
        Comp::App(f, a) => Comp::App(subst_value(f, x, v), subst_value(a, x, v)),
        Comp::TyApp(f, t) => Comp::TyApp(subst_value(f, x, v), t.clone()),
        Comp::Do(l, w) => Comp::Do(l.clone(), subst_value(w, x, v)),
        Comp::Let(y, a, b) => {
            let b = if y == x { (**b).clone() } else { subst_comp(b, x, v) };
            Comp::let_(y.clone(), subst_comp(a, x, v), b)
        }
        Comp::Add(a, b) => Comp::add(subst_comp(a, x, v), subst_comp(b, x, v)),
        Comp::Handle { row, body, clause } => {
            Comp::handle(row.clone(), subst_comp(body, x, v), subst_clause(clause, x, v))
        }
    }
}

fn subst_clause(c: &Clause, x: &str, v: &Value) -> Clause {
    let body = if c.param == x || c.resume == x { c.body.clone() } else { subst_comp(&c.body, x, v) };
    Clause { body, ..c.clone() }
}

pub fn subst_value(w: &Value, x: &str, v: &Value) -> Value {
    match w {
        Value::Var(y) if y == x => v.clone(),
        Value::Unit | Value::Int(_) | Value::Var(_) => w.clone(),
        Value::Lam { row, var, ty, body } => {
            let body = if var == x { (**body).clone() } else { subst_comp(body, x, v) };
            Value::lam(row.clone(), var.clone(), ty.clone(), body)
        }
        Value::TyLam(a, k, body) => Value::TyLam(a.clone(), *k, Box::new(subst_value(body, x, v))),
        Value::Handler { row, result, clause } => {
            Value::Handler { row: row.clone(), result: result.clone(), clause: Box::new(subst_clause(clause, x, v)) }
        }
    }
}

fn st_ty(t: &FType, a: &str, with: &FType) -> FType {
    FType::from_met(&subst_type(&t.to_met(), a, &with.to_met())).expect("substitution preserves source types")
}

fn st_row(r: &Row, a: &str, with: &FType) -> Row {
    match with {
        FType::Row(w) => subst_row(r, a, w),
        _ => r.clone(),
    }
}

/// Substitute a closed type or row for the type variable `a`.
pub fn subst_type_comp(m: &Comp, a: &str, t: &FType) -> Comp {
    match m {
        Comp::Return(w) => Comp::Return(subst_type_value(w, a, t)),
        Comp::App(f, x) => Comp::App(subst_type_value(f, a, t), subst_type_value(x, a, t)),
        Comp::TyApp(f, b) => Comp::TyApp(subst_type_value(f, a, t), st_ty(b, a, t)),
        Comp::Do(l, w) => Comp::Do(l.clone(), subst_type_value(w, a, t)),
        Comp::Let(y, m1, n) => Comp::let_(y.clone(), subst_type_comp(m1, a, t), subst_type_comp(n, a, t)),
        Comp::Add(m1, n) => Comp::add(subst_type_comp(m1, a, t), subst_type_comp(n, a, t)),
        Comp::Handle { row, body, clause } => Comp::handle(
            st_row(row, a, t),
            subst_type_comp(body, a, t),
            Clause { body: subst_type_comp(&clause.body, a, t), ..(**clause).clone() },
        ),
    }
}

pub fn subst_type_value(w: &Value, a: &str, t: &FType) -> Value {
    match w {
        Value::Unit | Value::Int(_) | Value::Var(_) => w.clone(),
        Value::Lam { row, var, ty, body } => {
            Value::lam(st_row(row, a, t), var.clone(), st_ty(ty, a, t), subst_type_comp(body, a, t))
        }
        Value::TyLam(b, _, _) if b == a => w.clone(),
        Value::TyLam(b, k, body) => Value::TyLam(b.clone(), *k, Box::new(subst_type_value(body, a, t))),
        Value::Handler { row, result, clause } => Value::Handler {
            row: st_row(row, a, t),
            result: st_ty(result, a, t),
            clause: Box::new(Clause { body: subst_type_comp(&clause.body, a, t), ..(**clause).clone() }),
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Frame {
    Let(String, Comp),
    AddL(Comp),
    AddR(Value),
    Handle(Row, Clause),
}

fn plug(frames: &[Frame], hole: Comp) -> Comp {
    frames.iter().rev().fold(hole, |m, f| match f {
        Frame::Let(x, n) => Comp::let_(x.clone(), m, n.clone()),
        Frame::AddL(n) => Comp::add(m, n.clone()),
        Frame::AddR(v) => Comp::add(Comp::Return(v.clone()), m),
        Frame::Handle(row, c) => Comp::handle(row.clone(), m, c.clone()),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum FStep {
    Stepped(Comp),
    /// `return V`.
    Finished,
    /// An operation with no enclosing handler.
    Suspended {
        label: String,
        payload: Value,
    },
    Stuck(String),
}

enum Focus {
    Done,
    Contract(Comp),
    Op(String, Value),
    Stuck(String),
}

fn decompose(m: &Comp, frames: &mut Vec<Frame>) -> Focus {
    match m {
        Comp::Return(_) => Focus::Done,
        Comp::App(f, w) => match f {
            Value::Lam { var, body, .. } => Focus::Contract(subst_comp(body, var, w)),
            Value::Handler { row, clause, .. } => {
                Focus::Contract(Comp::handle(row.clone(), Comp::App(w.clone(), Value::Unit), (**clause).clone()))
            }
            other => Focus::Stuck(format!("application of non-function {other}")),
        },
        Comp::TyApp(f, t) => match f {
            Value::TyLam(a, _, v) => Focus::Contract(Comp::Return(subst_type_value(v, a, t))),
            other => Focus::Stuck(format!("type application of {other}")),
        },
        Comp::Do(l, v) => Focus::Op(l.clone(), v.clone()),
        Comp::Let(x, a, n) => match &**a {
            Comp::Return(v) => Focus::Contract(subst_comp(n, x, v)),
            _ => {
                frames.push(Frame::Let(x.clone(), (**n).clone()));
                decompose(a, frames)
            }
        },
        Comp::Add(a, b) => match (&**a, &**b) {
            (Comp::Return(Value::Int(x)), Comp::Return(Value::Int(y))) => {
                Focus::Contract(Comp::Return(Value::Int(x.wrapping_add(*y))))
            }
            (Comp::Return(v), Comp::Return(w)) => Focus::Stuck(format!("addition of non-integers {v} and {w}")),
            (Comp::Return(v), _) => {
                frames.push(Frame::AddR(v.clone()));
                decompose(b, frames)
            }
            _ => {
                frames.push(Frame::AddL((**b).clone()));
                decompose(a, frames)
            }
        },
        Comp::Handle { row, body, clause } => match &**body {
            Comp::Return(v) => Focus::Contract(Comp::Return(v.clone())),
            _ => {
                frames.push(Frame::Handle(row.clone(), (**clause).clone()));
                decompose(body, frames)
            }
        },
    }
}

/// One reduction step of a closed computation.
pub fn f_step(m: &Comp, sigs: &FSignatures) -> FStep {
    let mut frames = Vec::new();
    match decompose(m, &mut frames) {
        Focus::Done => FStep::Finished,
        Focus::Stuck(why) => FStep::Stuck(why),
        Focus::Contract(n) => FStep::Stepped(plug(&frames, n)),
        Focus::Op(label, payload) => {
            let Some(i) = frames.iter().rposition(|f| matches!(f, Frame::Handle(_, c) if c.label == label)) else {
                return FStep::Suspended { label, payload };
            };
            let Frame::Handle(row, clause) = frames[i].clone() else { unreachable!() };
            let Some(sig) = sigs.get(&label) else {
                return FStep::Stuck(format!("operation `{label}` has no signature"));
            };
            let inner = plug(&frames[i + 1..], Comp::Return(Value::Var("y".into())));
            let resumption = Value::lam(row.clone(), "y", sig.res.clone(), Comp::handle(row, inner, clause.clone()));
            let body = subst_comp(&clause.body, &clause.param, &payload);
            let body = subst_comp(&body, &clause.resume, &resumption);
            FStep::Stepped(plug(&frames[..i], body))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FOutcome {
    Finished(Value),
    Suspended { label: String, payload: Value },
    Stuck(String),
    FuelExhausted,
}

/// Run to completion, returning every visited computation.
pub fn f_run(m: &Comp, sigs: &FSignatures, fuel: usize) -> (Vec<Comp>, FOutcome) {
    let mut states = vec![m.clone()];
    for _ in 0..fuel {
        let cur = states.last().expect("nonempty");
        match f_step(cur, sigs) {
            FStep::Stepped(n) => states.push(n),
            FStep::Finished => {
                let Comp::Return(v) = cur else { unreachable!() };
                let v = v.clone();
                return (states, FOutcome::Finished(v));
            }
            FStep::Suspended { label, payload } => return (states, FOutcome::Suspended { label, payload }),
            FStep::Stuck(why) => return (states, FOutcome::Stuck(why)),
        }
    }
    let out = match states.last() {
        Some(Comp::Return(v)) => FOutcome::Finished(v.clone()),
        _ => FOutcome::FuelExhausted,
    };
    (states, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feps::parse::parse_program;

    #[test]
    fn sum_reaches_79() {
        let p = parse_program(
            "effect yield : Int =>> 1\n\
             let sum = tfun ($e) -> handler<$e; Int> { yield p r -> p + r () } in\n\
             let s = sum @{} in\n\
             s (fun<yield> (x: 1) -> do yield 42; do yield 37; 0)",
        )
        .unwrap();
        let (states, out) = f_run(&p.term, &p.sigs, 1000);
        assert_eq!(out, FOutcome::Finished(Value::Int(79)));
        assert!(states.len() < 200);
    }

    #[test]
    fn handle_return() {
        let p = parse_program("effect yield : Int =>> 1\nhandle<> 3 with { yield p r -> 0 }").unwrap();
        assert_eq!(f_step(&p.term, &p.sigs), FStep::Stepped(Comp::Return(Value::Int(3))));
    }
}
