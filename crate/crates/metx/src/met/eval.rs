//! Small-step evaluation by decomposition into an evaluation context and
//! a redex.

use super::subst::{all_names, rename_label_term, subst_term, subst_type_term};
use super::types::fresh_name;
use super::{Handler, Modality, RuntimeLabels, Signatures, Term, Type};
use crate::effect::{Atom, Row};
use std::collections::BTreeSet;

/// Default step budget for `run`.
pub const DEFAULT_FUEL: usize = 100_000;

/// One frame of an evaluation context.
#[derive(Clone, Debug, PartialEq)]
pub enum Frame {
    AppL(Term),
    AppR(Term),
    TyApp(Type),
    Mod(Modality),
    LetMod { outer: Modality, inner: Modality, var: String, body: Term },
    Let(String, Term),
    AddL(Term),
    AddR(Term),
    Do(String),
    Handle(Modality, Handler),
}

/// Rebuild `frames[hole]`, outermost frame first.
pub fn plug(frames: &[Frame], hole: Term) -> Term {
    frames.iter().rev().fold(hole, |t, f| match f {
        Frame::AppL(n) => Term::app(t, n.clone()),
        Frame::AppR(u) => Term::app(u.clone(), t),
        Frame::TyApp(a) => Term::tyapp(t, a.clone()),
        Frame::Mod(mu) => Term::modal(mu.clone(), t),
        Frame::LetMod { outer, inner, var, body } => {
            Term::letmod(outer.clone(), inner.clone(), var.clone(), t, body.clone())
        }
        Frame::Let(x, n) => Term::let_(x.clone(), t, n.clone()),
        Frame::AddL(n) => Term::add(t, n.clone()),
        Frame::AddR(n) => Term::add(n.clone(), t),
        Frame::Do(l) => Term::do_(l.clone(), t),
        Frame::Handle(mu, h) => Term::handle(mu.clone(), t, h.clone()),
    })
}

/// Labels with handlers installed in a context.
pub fn bound_labels(frames: &[Frame]) -> BTreeSet<String> {
    frames
        .iter()
        .filter_map(|f| match f {
            Frame::Handle(_, h) => Some(h.label.clone()),
            _ => None,
        })
        .collect()
}

/// Which rule fired, for traces and handler-discipline checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    App,
    TApp,
    Letmod,
    Let,
    Add,
    Gen,
    Ret,
    Op,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepResult {
    Stepped(Term, Rule),
    /// The term is a value normal form.
    Finished,
    /// `ℰ[do ℓ U]` with no handler for `ℓ` in `ℰ`.
    Suspended {
        label: String,
        payload: Term,
        depth: usize,
    },
    Stuck(String),
}

enum Focus {
    Normal,
    Contract(Term, Rule),
    Op(String, Term),
    Stuck(String),
}

fn decompose(t: &Term, frames: &mut Vec<Frame>, omega: &mut RuntimeLabels) -> Focus {
    if t.is_normal() {
        return Focus::Normal;
    }
    let sub = |f: Frame, inner: &Term, frames: &mut Vec<Frame>, omega: &mut RuntimeLabels| {
        frames.push(f);
        match decompose(inner, frames, omega) {
            Focus::Normal => unreachable!("non-normal subterm"),
            other => other,
        }
    };
    match t {
        Term::Unit | Term::Int(_) | Term::Var(_) | Term::Lam(..) | Term::TyLam(..) => Focus::Normal,
        Term::App(m, n) => {
            if !m.is_normal() {
                sub(Frame::AppL((**n).clone()), m, frames, omega)
            } else if !n.is_normal() {
                sub(Frame::AppR((**m).clone()), n, frames, omega)
            } else {
                match &**m {
                    Term::Lam(x, _, body) => Focus::Contract(subst_term(body, x, n), Rule::App),
                    other => Focus::Stuck(format!("application of non-function {other}")),
                }
            }
        }
        Term::TyApp(m, a) => {
            if !m.is_normal() {
                sub(Frame::TyApp(a.clone()), m, frames, omega)
            } else {
                match &**m {
                    Term::TyLam(b, _, v) => Focus::Contract(subst_type_term(v, b, a), Rule::TApp),
                    other => Focus::Stuck(format!("type application of {other}")),
                }
            }
        }
        Term::Mod(mu, v) => sub(Frame::Mod(mu.clone()), v, frames, omega),
        Term::LetMod { outer, inner, var, bound, body } => {
            if !bound.is_normal() {
                sub(
                    Frame::LetMod {
                        outer: outer.clone(),
                        inner: inner.clone(),
                        var: var.clone(),
                        body: (**body).clone(),
                    },
                    bound,
                    frames,
                    omega,
                )
            } else {
                match &**bound {
                    Term::Mod(_, u) => Focus::Contract(subst_term(body, var, u), Rule::Letmod),
                    other => Focus::Stuck(format!("letmod of unboxed value {other}")),
                }
            }
        }
        Term::Let(x, m, n) => {
            if !m.is_normal() {
                sub(Frame::Let(x.clone(), (**n).clone()), m, frames, omega)
            } else {
                Focus::Contract(subst_term(n, x, m), Rule::Let)
            }
        }
        Term::Add(a, b) => {
            if !a.is_normal() {
                sub(Frame::AddL((**b).clone()), a, frames, omega)
            } else if !b.is_normal() {
                sub(Frame::AddR((**a).clone()), b, frames, omega)
            } else {
                match (&**a, &**b) {
                    (Term::Int(x), Term::Int(y)) => Focus::Contract(Term::Int(x.wrapping_add(*y)), Rule::Add),
                    _ => Focus::Stuck(format!("addition of non-integers {a} and {b}")),
                }
            }
        }
        Term::Do(l, m) => {
            if !m.is_normal() {
                sub(Frame::Do(l.clone()), m, frames, omega)
            } else {
                Focus::Op(l.clone(), (**m).clone())
            }
        }
        Term::Local(l, sig, body) => {
            let fresh = omega.fresh(sig.clone());
            Focus::Contract(rename_label_term(body, l, &fresh), Rule::Gen)
        }
        Term::Handle(mu, m, h) => {
            if !m.is_normal() {
                sub(Frame::Handle(mu.clone(), (**h).clone()), m, frames, omega)
            } else {
                let ell = Modality::Relative(Row(vec![Atom::label(h.label.clone())]));
                let boxed = Term::modal(mu.compose(&ell), (**m).clone());
                Focus::Contract(subst_term(&h.ret_body, &h.ret_var, &boxed), Rule::Ret)
            }
        }
    }
}

/// One reduction step. `omega` grows when a local label is generated.
pub fn step(t: &Term, omega: &mut RuntimeLabels, sigs: &Signatures) -> StepResult {
    let mut frames = Vec::new();
    match decompose(t, &mut frames, omega) {
        Focus::Normal => StepResult::Finished,
        Focus::Stuck(why) => StepResult::Stuck(why),
        Focus::Contract(n, rule) => StepResult::Stepped(plug(&frames, n), rule),
        Focus::Op(label, payload) => {
            let Some(i) = frames.iter().rposition(|f| matches!(f, Frame::Handle(_, h) if h.label == label)) else {
                return StepResult::Suspended { label, payload, depth: frames.len() };
            };
            let Frame::Handle(mu, h) = frames[i].clone() else { unreachable!() };
            let Some(res_ty) = omega.get(&label).or_else(|| sigs.get(&label)).map(|s| s.res.clone()) else {
                return StepResult::Stuck(format!("operation `{label}` has no signature"));
            };
            let mut names = BTreeSet::new();
            all_names(t, &mut names);
            let y = if names.contains("y") { fresh_name("y", |c| names.contains(c)) } else { "y".to_string() };
            let cont = Term::handle(mu.clone(), plug(&frames[i + 1..], Term::var(&y)), h.clone());
            let resumption = Term::modal(mu, Term::lam(y, res_ty, cont));
            let body = subst_term(&h.op_body, &h.param, &payload);
            let body = subst_term(&body, &h.resume, &resumption);
            StepResult::Stepped(plug(&frames[..i], body), Rule::Op)
        }
    }
}

/// How a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Finished(Term),
    Suspended { label: String, payload: Term, depth: usize },
    Stuck(String),
    FuelExhausted,
}

/// Every term visited by a run, with the runtime labels in force.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub states: Vec<(Term, RuntimeLabels)>,
    pub rules: Vec<Rule>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn last(&self) -> &Term {
        &self.states.last().expect("trace has an initial state").0
    }

    /// One line per state: `N: <term> | Ω=<labels>`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, (t, om)) in self.states.iter().enumerate() {
            s.push_str(&format!("{i}: {t} | Ω={}\n", render_omega(om)));
        }
        s
    }
}

pub fn render_omega(om: &RuntimeLabels) -> String {
    if om.entries.is_empty() {
        ".".into()
    } else {
        om.names().join(",")
    }
}

/// Iterate `step` until a normal form, a stuck term or the fuel runs out.
pub fn run(t: &Term, omega: &RuntimeLabels, sigs: &Signatures, fuel: usize) -> Trace {
    let mut om = omega.clone();
    let mut states = vec![(t.clone(), om.clone())];
    let mut rules = Vec::new();
    let mut cur = t.clone();
    for _ in 0..fuel {
        match step(&cur, &mut om, sigs) {
            StepResult::Stepped(n, rule) => {
                states.push((n.clone(), om.clone()));
                rules.push(rule);
                cur = n;
            }
            StepResult::Finished => return Trace { states, rules, outcome: Outcome::Finished(cur) },
            StepResult::Suspended { label, payload, depth } => {
                return Trace { states, rules, outcome: Outcome::Suspended { label, payload, depth } }
            }
            StepResult::Stuck(why) => return Trace { states, rules, outcome: Outcome::Stuck(why) },
        }
    }
    let outcome = match step(&cur, &mut om.clone(), sigs) {
        StepResult::Finished => Outcome::Finished(cur),
        _ => Outcome::FuelExhausted,
    };
    Trace { states, rules, outcome }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::met::parse::parse_program;

    #[test]
    fn sum_reduces_to_79() {
        let p = parse_program(
            "effect yield : Int =>> 1\nhandle (do yield 42; do yield 37; 0) with { yield p r -> p + r () }",
        )
        .unwrap();
        let tr = run(&p.term, &RuntimeLabels::default(), &p.sigs, 1000);
        assert_eq!(tr.outcome, Outcome::Finished(Term::Int(79)));
    }

    #[test]
    fn unhandled_operation_suspends() {
        let p = parse_program("effect yield : Int =>> 1\ndo yield 1").unwrap();
        let tr = run(&p.term, &RuntimeLabels::default(), &p.sigs, 10);
        assert_eq!(tr.outcome, Outcome::Suspended { label: "yield".into(), payload: Term::Int(1), depth: 0 });
    }

    #[test]
    fn generative_labels() {
        let p = parse_program("local l : Int =>> 1 in ()").unwrap();
        let mut om = RuntimeLabels::default();
        assert_eq!(step(&p.term, &mut om, &p.sigs), StepResult::Stepped(Term::Unit, Rule::Gen));
        assert_eq!(om.names(), vec!["%0".to_string()]);
    }
}
