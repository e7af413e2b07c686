//! Small-step semantics with generative handlers. Each `try` allocates
//! a fresh runtime label and substitutes its capability into the body.
//! Programs are closed, so substitution never captures.

use super::subst::{all_names, subst_block, subst_value};
use super::{Block, CChecker, CClause, CLabels, CValue, CapSet, Comp};
use crate::met::types::fresh_name;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
enum Frame {
    Let(String, Comp),
    AddL(Comp),
    AddR(CValue),
    TryRt(String, CapSet, CClause),
}

fn plug(frames: &[Frame], hole: Comp) -> Comp {
    frames.iter().rev().fold(hole, |m, f| match f {
        Frame::Let(x, n) => Comp::let_(x.clone(), m, n.clone()),
        Frame::AddL(n) => Comp::add(m, n.clone()),
        Frame::AddR(v) => Comp::add(Comp::Return(v.clone()), m),
        Frame::TryRt(l, caps, c) => {
            Comp::TryRt { label: l.clone(), caps: caps.clone(), body: Box::new(m), clause: Box::new(c.clone()) }
        }
    })
}

/// The reduction rule a step used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CRule {
    /// `(unbox box P)(…)` calls `P`.
    Box,
    Call,
    Def,
    /// A `try` allocates its label.
    Gen,
    /// A handled computation returns.
    Ret,
    /// An operation reaches its handler.
    Op,
    Let,
    Add,
}

impl fmt::Display for CRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CStep {
    Stepped(Comp, CRule),
    Finished,
    /// An operation on a label with no enclosing handler.
    Suspended {
        label: String,
        payload: CValue,
    },
    Stuck(String),
}

enum Focus {
    Done,
    Contract(Comp, CRule),
    Op(String, CValue),
    Stuck(String),
}

fn decompose(m: &Comp, frames: &mut Vec<Frame>, omega: &mut CLabels) -> Focus {
    match m {
        Comp::Return(_) => Focus::Done,
        Comp::Call(p, vs, qs) => call(p, vs, qs, omega),
        Comp::Let(x, a, n) => match &**a {
            Comp::Return(v) => Focus::Contract(subst_value(n, x, v), CRule::Let),
            _ => {
                frames.push(Frame::Let(x.clone(), (**n).clone()));
                decompose(a, frames, omega)
            }
        },
        Comp::Add(a, b) => match (&**a, &**b) {
            (Comp::Return(CValue::Int(x)), Comp::Return(CValue::Int(y))) => {
                Focus::Contract(Comp::Return(CValue::Int(x.wrapping_add(*y))), CRule::Add)
            }
            (Comp::Return(v), Comp::Return(w)) => Focus::Stuck(format!("addition of non-integers {v} and {w}")),
            (Comp::Return(v), _) => {
                frames.push(Frame::AddR(v.clone()));
                decompose(b, frames, omega)
            }
            _ => {
                frames.push(Frame::AddL((**b).clone()));
                decompose(a, frames, omega)
            }
        },
        Comp::Def(f, p, n) => Focus::Contract(subst_block(n, f, p, None), CRule::Def),
        Comp::Try { cap, sig, body, clause, caps } => {
            let Some(caps) = caps else {
                return Focus::Stuck("handler without an elaborated capability set".into());
            };
            let l = omega.fresh(sig.clone());
            let body = subst_block(body, cap, &Block::Cap(l.clone()), Some(&std::iter::once(l.clone()).collect()));
            Focus::Contract(
                Comp::TryRt { label: l, caps: caps.clone(), body: Box::new(body), clause: clause.clone() },
                CRule::Gen,
            )
        }
        Comp::TryRt { label, caps, body, clause } => match &**body {
            Comp::Return(v) => Focus::Contract(Comp::Return(v.clone()), CRule::Ret),
            _ => {
                frames.push(Frame::TryRt(label.clone(), caps.clone(), (**clause).clone()));
                decompose(body, frames, omega)
            }
        },
    }
}

fn call(p: &Block, vs: &[CValue], qs: &[Block], omega: &CLabels) -> Focus {
    match p {
        Block::Lit { vals, blocks, body } => {
            if vals.len() != vs.len() || blocks.len() != qs.len() {
                return Focus::Stuck(format!("arity mismatch calling {p}"));
            }
            let mut m = (**body).clone();
            for ((x, _), v) in vals.iter().zip(vs) {
                m = subst_value(&m, x, v);
            }
            let chk = CChecker::new(omega);
            for ((f, _), q) in blocks.iter().zip(qs) {
                let c = match chk.block_caps(q) {
                    Ok(c) => c,
                    Err(e) => return Focus::Stuck(format!("ill-typed block argument {q}: {e}")),
                };
                m = subst_block(&m, f, q, Some(&c));
            }
            Focus::Contract(m, CRule::Call)
        }
        Block::Unbox(CValue::Box(q, _)) => {
            Focus::Contract(Comp::Call((**q).clone(), vs.to_vec(), qs.to_vec()), CRule::Box)
        }
        Block::Cap(l) => match (vs, qs) {
            ([v], []) => Focus::Op(l.clone(), v.clone()),
            _ => Focus::Stuck(format!("capability {l} takes one value argument")),
        },
        other => Focus::Stuck(format!("call of {other}")),
    }
}

/// One reduction step of a closed computation; `try` extends `omega`.
pub fn c_step(m: &Comp, omega: &mut CLabels) -> CStep {
    let mut frames = Vec::new();
    match decompose(m, &mut frames, omega) {
        Focus::Done => CStep::Finished,
        Focus::Stuck(why) => CStep::Stuck(why),
        Focus::Contract(n, rule) => CStep::Stepped(plug(&frames, n), rule),
        Focus::Op(label, payload) => {
            let Some(i) = frames.iter().rposition(|f| matches!(f, Frame::TryRt(l, ..) if *l == label)) else {
                return CStep::Suspended { label, payload };
            };
            let Frame::TryRt(_, caps, clause) = frames[i].clone() else { unreachable!() };
            let Some((_, res)) = omega.get(&label).and_then(|t| t.as_simple()) else {
                return CStep::Stuck(format!("capability {label} has no simple signature"));
            };
            let mut avoid = BTreeSet::new();
            all_names(m, &mut avoid);
            let y = fresh_name("y", |c| avoid.contains(c));
            let inner = plug(&frames[i + 1..], Comp::Return(CValue::Var(y.clone())));
            let rehandled = Comp::TryRt { label, caps, body: Box::new(inner), clause: Box::new(clause.clone()) };
            let resumption = Block::lit(vec![(y, res.clone())], Vec::new(), rehandled);
            let body = subst_value(&clause.body, &clause.param, &payload);
            let body = subst_block(&body, &clause.resume, &resumption, None);
            CStep::Stepped(plug(&frames[..i], body), CRule::Op)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum COutcome {
    Finished(CValue),
    Suspended { label: String, payload: CValue },
    Stuck(String),
    FuelExhausted,
}

/// Run to completion, returning every visited computation with the
/// runtime labels allocated so far.
pub fn c_run(m: &Comp, omega: &CLabels, fuel: usize) -> (Vec<(Comp, CLabels)>, COutcome) {
    let mut states = vec![(m.clone(), omega.clone())];
    for _ in 0..fuel {
        let (cur, om) = states.last().expect("nonempty");
        let mut om = om.clone();
        match c_step(cur, &mut om) {
            CStep::Stepped(n, _) => states.push((n, om)),
            CStep::Finished => {
                let Comp::Return(v) = cur else { unreachable!() };
                let v = v.clone();
                return (states, COutcome::Finished(v));
            }
            CStep::Suspended { label, payload } => return (states, COutcome::Suspended { label, payload }),
            CStep::Stuck(why) => return (states, COutcome::Stuck(why)),
        }
    }
    let out = match states.last() {
        Some((Comp::Return(v), _)) => COutcome::Finished(v.clone()),
        _ => COutcome::FuelExhausted,
    };
    (states, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systemc::{check_program, parse_program, CTerm};

    fn elaborate(src: &str) -> Comp {
        let p = parse_program(src).unwrap();
        match check_program(&p, &CLabels::default()).unwrap().elab {
            CTerm::Comp(m) => m,
            CTerm::Block(_) => panic!("expected a computation"),
        }
    }

    #[test]
    fn sum_reaches_79() {
        let m = elaborate(
            "def sum = { (f: (y: (Int) => 1) => Int) => \
               try { y: (Int) => 1 => f(y) } with { p r => p + r(()) } } in \
             sum({ (y: (Int) => 1) => y(42); y(37); 0 })",
        );
        let (states, out) = c_run(&m, &CLabels::default(), 1000);
        assert_eq!(out, COutcome::Finished(CValue::Int(79)));
        assert!(states.len() < 200, "{} steps", states.len());
    }

    #[test]
    fn handlers_are_generative() {
        let m = elaborate(
            "try { a: (Int) => Int => try { b: (Int) => Int => a(1) + b(2) } with { p r => r(p) } } \
             with { p r => let q = p + 10 in r(q) }",
        );
        let (states, out) = c_run(&m, &CLabels::default(), 1000);
        assert_eq!(out, COutcome::Finished(CValue::Int(13)));
        assert_eq!(states.last().unwrap().1.entries.len(), 2);
    }
}
