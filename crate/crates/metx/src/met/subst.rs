//! Capture-avoiding substitution of values for variables, types for type
//! variables and labels for labels.

use super::types::{fresh_name, ftv, rename_label_row, rename_label_type, subst_row, subst_type};
use super::{Handler, Modality, Sig, Term, Type};
use crate::effect::Atom;
use std::collections::BTreeSet;

/// Free term variables.
pub fn free_vars(m: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_into(m, &mut Vec::new(), &mut out);
    out
}

fn fv_into(m: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let under = |x: &[&String], body: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>| {
        let n = bound.len();
        bound.extend(x.iter().map(|s| (*s).clone()));
        fv_into(body, bound, out);
        bound.truncate(n);
    };
    match m {
        Term::Unit | Term::Int(_) => {}
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Lam(x, _, b) => under(&[x], b, bound, out),
        Term::TyLam(_, _, b) | Term::TyApp(b, _) | Term::Mod(_, b) | Term::Do(_, b) | Term::Local(_, _, b) => {
            fv_into(b, bound, out)
        }
        Term::App(a, b) | Term::Add(a, b) => {
            fv_into(a, bound, out);
            fv_into(b, bound, out);
        }
        Term::LetMod { var, bound: v, body, .. } => {
            fv_into(v, bound, out);
            under(&[var], body, bound, out);
        }
        Term::Let(x, a, b) => {
            fv_into(a, bound, out);
            under(&[x], b, bound, out);
        }
        Term::Handle(_, a, h) => {
            fv_into(a, bound, out);
            under(&[&h.ret_var], &h.ret_body, bound, out);
            under(&[&h.param, &h.resume], &h.op_body, bound, out);
        }
    }
}

/// Every name occurring in a term: variables, binders, type variables and
/// labels. Used to pick fresh names.
pub fn all_names(m: &Term, out: &mut BTreeSet<String>) {
    let ty = |t: &Type, out: &mut BTreeSet<String>| {
        out.extend(ftv(t));
        super::types::labels_of(t, out);
    };
    let md = |mu: &Modality, out: &mut BTreeSet<String>| out.extend(mu.row().0.iter().map(|a| a.name().to_string()));
    match m {
        Term::Unit | Term::Int(_) => {}
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Lam(x, a, b) => {
            out.insert(x.clone());
            ty(a, out);
            all_names(b, out);
        }
        Term::TyLam(a, _, b) => {
            out.insert(a.clone());
            all_names(b, out);
        }
        Term::TyApp(b, a) => {
            ty(a, out);
            all_names(b, out);
        }
        Term::Mod(mu, b) => {
            md(mu, out);
            all_names(b, out);
        }
        Term::Do(l, b) => {
            out.insert(l.clone());
            all_names(b, out);
        }
        Term::Local(l, s, b) => {
            out.insert(l.clone());
            ty(&s.arg, out);
            ty(&s.res, out);
            all_names(b, out);
        }
        Term::App(a, b) | Term::Add(a, b) => {
            all_names(a, out);
            all_names(b, out);
        }
        Term::LetMod { outer, inner, var, bound, body } => {
            md(outer, out);
            md(inner, out);
            out.insert(var.clone());
            all_names(bound, out);
            all_names(body, out);
        }
        Term::Let(x, a, b) => {
            out.insert(x.clone());
            all_names(a, out);
            all_names(b, out);
        }
        Term::Handle(mu, a, h) => {
            md(mu, out);
            all_names(a, out);
            out.extend([h.ret_var.clone(), h.label.clone(), h.param.clone(), h.resume.clone()]);
            all_names(&h.ret_body, out);
            all_names(&h.op_body, out);
        }
    }
}

/// `m[v/x]`.
pub fn subst_term(m: &Term, x: &str, v: &Term) -> Term {
    let fv = free_vars(v);
    Subst { x, v, fv: &fv }.go(m)
}

struct Subst<'a> {
    x: &'a str,
    v: &'a Term,
    fv: &'a BTreeSet<String>,
}

impl Subst<'_> {
    /// Rename binder `b` in `body` when it would capture a free variable
    /// of the substituted value. Returns the binder and body to recurse
    /// into, or `None` when `b` shadows the substituted variable.
    fn binder(&self, b: &str, bodies: &[&Term]) -> Option<(String, Vec<Term>)> {
        if b == self.x {
            return None;
        }
        if self.fv.contains(b) {
            let mut avoid = self.fv.clone();
            for t in bodies {
                all_names(t, &mut avoid);
            }
            avoid.insert(self.x.to_string());
            let nb = fresh_name(b, |c| avoid.contains(c));
            let renamed = bodies.iter().map(|t| subst_term(t, b, &Term::Var(nb.clone()))).collect();
            Some((nb, renamed))
        } else {
            Some((b.to_string(), bodies.iter().map(|t| (*t).clone()).collect()))
        }
    }

    fn under(&self, b: &str, body: &Term) -> (String, Term) {
        match self.binder(b, &[body]) {
            None => (b.to_string(), body.clone()),
            Some((nb, mut v)) => (nb, self.go(&v.pop().unwrap())),
        }
    }

    fn go(&self, m: &Term) -> Term {
        match m {
            Term::Unit | Term::Int(_) => m.clone(),
            Term::Var(y) if y == self.x => self.v.clone(),
            Term::Var(_) => m.clone(),
            Term::Lam(y, a, b) => {
                let (y, b) = self.under(y, b);
                Term::Lam(y, a.clone(), Box::new(b))
            }
            Term::TyLam(a, k, b) => Term::TyLam(a.clone(), *k, Box::new(self.go(b))),
            Term::TyApp(b, a) => Term::TyApp(Box::new(self.go(b)), a.clone()),
            Term::Mod(mu, b) => Term::Mod(mu.clone(), Box::new(self.go(b))),
            Term::Do(l, b) => Term::Do(l.clone(), Box::new(self.go(b))),
            Term::Local(l, s, b) => Term::Local(l.clone(), s.clone(), Box::new(self.go(b))),
            Term::App(a, b) => Term::app(self.go(a), self.go(b)),
            Term::Add(a, b) => Term::add(self.go(a), self.go(b)),
            Term::LetMod { outer, inner, var, bound, body } => {
                let (var, body) = self.under(var, body);
                Term::letmod(outer.clone(), inner.clone(), var, self.go(bound), body)
            }
            Term::Let(y, a, b) => {
                let (y, b) = self.under(y, b);
                Term::Let(y, Box::new(self.go(a)), Box::new(b))
            }
            Term::Handle(mu, a, h) => {
                let (ret_var, ret_body) = self.under(&h.ret_var, &h.ret_body);
                let (param, resume, op_body) = if h.param == self.x || h.resume == self.x {
                    (h.param.clone(), h.resume.clone(), h.op_body.clone())
                } else {
                    let (p, b1) = match self.binder(&h.param, &[&h.op_body]) {
                        Some((p, mut v)) => (p, v.pop().unwrap()),
                        None => unreachable!(),
                    };
                    let (r, b2) = match self.binder(&h.resume, &[&b1]) {
                        Some((r, mut v)) => (r, v.pop().unwrap()),
                        None => unreachable!(),
                    };
                    (p, r, self.go(&b2))
                };
                Term::handle(
                    mu.clone(),
                    self.go(a),
                    Handler { ret_var, ret_body, label: h.label.clone(), param, resume, op_body },
                )
            }
        }
    }
}

/// `m[b/a]` for a type or effect variable `a`.
pub fn subst_type_term(m: &Term, a: &str, b: &Type) -> Term {
    let fv = ftv(b);
    TySubst { a, b, fv: &fv }.go(m)
}

struct TySubst<'a> {
    a: &'a str,
    b: &'a Type,
    fv: &'a BTreeSet<String>,
}

impl TySubst<'_> {
    fn ty(&self, t: &Type) -> Type {
        subst_type(t, self.a, self.b)
    }

    fn md(&self, mu: &Modality) -> Modality {
        match self.b {
            Type::Row(w) => mu.map_row(|r| subst_row(r, self.a, w)),
            _ => mu.clone(),
        }
    }

    fn go(&self, m: &Term) -> Term {
        match m {
            Term::Unit | Term::Int(_) | Term::Var(_) => m.clone(),
            Term::Lam(x, t, b) => Term::Lam(x.clone(), self.ty(t), Box::new(self.go(b))),
            Term::TyLam(c, _, _) if c == self.a => m.clone(),
            Term::TyLam(c, k, body) => {
                if self.fv.contains(c) {
                    let mut avoid = self.fv.clone();
                    all_names(body, &mut avoid);
                    avoid.insert(self.a.to_string());
                    let nc = fresh_name(c, |n| avoid.contains(n));
                    let renamed = rename_tyvar_term(body, c, &nc, *k);
                    Term::TyLam(nc, *k, Box::new(self.go(&renamed)))
                } else {
                    Term::TyLam(c.clone(), *k, Box::new(self.go(body)))
                }
            }
            Term::TyApp(v, t) => Term::TyApp(Box::new(self.go(v)), self.ty(t)),
            Term::Mod(mu, v) => Term::Mod(self.md(mu), Box::new(self.go(v))),
            Term::Do(l, v) => Term::Do(l.clone(), Box::new(self.go(v))),
            Term::Local(l, s, v) => {
                Term::Local(l.clone(), Sig { arg: self.ty(&s.arg), res: self.ty(&s.res) }, Box::new(self.go(v)))
            }
            Term::App(x, y) => Term::app(self.go(x), self.go(y)),
            Term::Add(x, y) => Term::add(self.go(x), self.go(y)),
            Term::LetMod { outer, inner, var, bound, body } => {
                Term::letmod(self.md(outer), self.md(inner), var.clone(), self.go(bound), self.go(body))
            }
            Term::Let(x, a, b) => Term::Let(x.clone(), Box::new(self.go(a)), Box::new(self.go(b))),
            Term::Handle(mu, a, h) => Term::handle(
                self.md(mu),
                self.go(a),
                Handler { ret_body: self.go(&h.ret_body), op_body: self.go(&h.op_body), ..(**h).clone() },
            ),
        }
    }
}

/// Rename a bound type or effect variable throughout a term.
pub fn rename_tyvar_term(m: &Term, from: &str, to: &str, k: super::Kind) -> Term {
    let target = if k == super::Kind::Effect {
        Type::Row(crate::effect::Row(vec![Atom::var(to)]))
    } else {
        Type::Var(to.to_string())
    };
    subst_type_term(m, from, &target)
}

/// `m[to/from]` for labels. Stops at an inner `local` rebinding `from`.
pub fn rename_label_term(m: &Term, from: &str, to: &str) -> Term {
    let ty = |t: &Type| rename_label_type(t, from, to);
    let md = |mu: &Modality| mu.map_row(|r| rename_label_row(r, from, to));
    let go = |t: &Term| rename_label_term(t, from, to);
    match m {
        Term::Unit | Term::Int(_) | Term::Var(_) => m.clone(),
        Term::Lam(x, t, b) => Term::Lam(x.clone(), ty(t), Box::new(go(b))),
        Term::TyLam(c, k, b) => Term::TyLam(c.clone(), *k, Box::new(go(b))),
        Term::TyApp(v, t) => Term::TyApp(Box::new(go(v)), ty(t)),
        Term::Mod(mu, v) => Term::Mod(md(mu), Box::new(go(v))),
        Term::Do(l, v) => {
            let l = if l == from { to.to_string() } else { l.clone() };
            Term::Do(l, Box::new(go(v)))
        }
        Term::Local(l, s, v) => {
            let sig = Sig { arg: ty(&s.arg), res: ty(&s.res) };
            let body = if l == from { (**v).clone() } else { go(v) };
            Term::Local(l.clone(), sig, Box::new(body))
        }
        Term::App(x, y) => Term::app(go(x), go(y)),
        Term::Add(x, y) => Term::add(go(x), go(y)),
        Term::LetMod { outer, inner, var, bound, body } => {
            Term::letmod(md(outer), md(inner), var.clone(), go(bound), go(body))
        }
        Term::Let(x, a, b) => Term::Let(x.clone(), Box::new(go(a)), Box::new(go(b))),
        Term::Handle(mu, a, h) => Term::handle(
            md(mu),
            go(a),
            Handler {
                label: if h.label == from { to.to_string() } else { h.label.clone() },
                ret_body: go(&h.ret_body),
                op_body: go(&h.op_body),
                ..(**h).clone()
            },
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_skips_bound_occurrences() {
        let id = Term::lam("x", Type::Int, Term::var("x"));
        assert_eq!(subst_term(&id, "y", &Term::Int(42)), id);
    }

    #[test]
    fn substitution_avoids_capture() {
        let m = Term::lam("x", Type::Int, Term::app(Term::var("f"), Term::var("x")));
        let s = subst_term(&m, "f", &Term::var("x"));
        match s {
            Term::Lam(y, _, body) => {
                assert_ne!(y, "x");
                assert_eq!(*body, Term::app(Term::var("x"), Term::var(y)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn label_renaming() {
        let m = Term::do_("l", Term::var("x"));
        assert_eq!(rename_label_term(&m, "l", "%0"), Term::do_("%0", Term::var("x")));
    }
}
