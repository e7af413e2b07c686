//! Equality of core terms up to renaming of bound names and a
//! correspondence between runtime labels, plus the administrative
//! normalisation applied before comparing translated terms.

use crate::effect::{canon, Atom, Row, Theory};
use crate::met::subst::{subst_term, subst_type_term};
use crate::met::{Handler, Modality, Sig, Term, Type};
use std::collections::BTreeMap;

/// Label correspondence from the left term's labels to the right's.
pub type LabelCorr = BTreeMap<String, String>;

/// Positional correspondence: the n-th label of `left` maps to the n-th
/// label of `right`.
pub fn positional_corr(left: &[String], right: &[String]) -> LabelCorr {
    left.iter().zip(right).map(|(a, b)| (a.clone(), b.clone())).collect()
}

/// α-equivalence after renaming the labels of `m` by `corr`. Rows are
/// compared as written.
pub fn alpha_label_equiv(m: &Term, n: &Term, corr: &LabelCorr) -> bool {
    Canon::new(None, corr).term(m) == Canon::new(None, &LabelCorr::new()).term(n)
}

/// As [`alpha_label_equiv`], comparing rows up to the equivalence of
/// `theory`.
pub fn alpha_label_equiv_in(theory: Theory, m: &Term, n: &Term, corr: &LabelCorr) -> bool {
    Canon::new(Some(theory), corr).term(m) == Canon::new(Some(theory), &LabelCorr::new()).term(n)
}

/// Renames every binder to a positional name, so α-equivalent terms
/// become syntactically equal.
struct Canon<'a> {
    theory: Option<Theory>,
    corr: &'a LabelCorr,
    vars: Vec<(String, String)>,
    tyvars: Vec<(String, String)>,
    labels: Vec<(String, String)>,
    next: usize,
}

fn lookup(scope: &[(String, String)], x: &str) -> Option<String> {
    scope.iter().rev().find(|(a, _)| a == x).map(|(_, b)| b.clone())
}

impl<'a> Canon<'a> {
    fn new(theory: Option<Theory>, corr: &'a LabelCorr) -> Canon<'a> {
        Canon { theory, corr, vars: Vec::new(), tyvars: Vec::new(), labels: Vec::new(), next: 0 }
    }

    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("#{}", self.next)
    }

    fn label(&self, l: &str) -> String {
        lookup(&self.labels, l).or_else(|| self.corr.get(l).cloned()).unwrap_or_else(|| l.to_string())
    }

    fn row(&self, r: &Row) -> Row {
        let r = Row(r
            .0
            .iter()
            .map(|a| match a {
                Atom::Label(l) => Atom::Label(self.label(l)),
                Atom::Var(v) => Atom::Var(lookup(&self.tyvars, v).unwrap_or_else(|| v.clone())),
            })
            .collect());
        match self.theory {
            Some(t) => canon(t, &r),
            None => r,
        }
    }

    fn modality(&self, m: &Modality) -> Modality {
        m.map_row(|r| self.row(r))
    }

    fn ty(&mut self, t: &Type) -> Type {
        match t {
            Type::Unit | Type::Int => t.clone(),
            Type::Var(a) => Type::Var(lookup(&self.tyvars, a).unwrap_or_else(|| a.clone())),
            Type::Arrow(a, b) => Type::arrow(self.ty(a), self.ty(b)),
            Type::Boxed(m, a) => Type::boxed(self.modality(m), self.ty(a)),
            Type::Forall(a, k, body) => {
                let c = self.fresh();
                self.tyvars.push((a.clone(), c.clone()));
                let body = self.ty(body);
                self.tyvars.pop();
                Type::forall(c, *k, body)
            }
            Type::Row(r) => Type::Row(self.row(r)),
        }
    }

    fn sig(&mut self, s: &Sig) -> Sig {
        Sig { arg: self.ty(&s.arg), res: self.ty(&s.res) }
    }

    fn bind_var(&mut self, x: &str) -> String {
        let c = self.fresh();
        self.vars.push((x.to_string(), c.clone()));
        c
    }

    fn under(&mut self, xs: &[&str], body: &Term) -> (Vec<String>, Term) {
        let names: Vec<String> = xs.iter().map(|x| self.bind_var(x)).collect();
        let b = self.term(body);
        self.vars.truncate(self.vars.len() - xs.len());
        (names, b)
    }

    fn term(&mut self, m: &Term) -> Term {
        match m {
            Term::Unit | Term::Int(_) => m.clone(),
            Term::Var(x) => Term::Var(lookup(&self.vars, x).unwrap_or_else(|| x.clone())),
            Term::Add(a, b) => Term::add(self.term(a), self.term(b)),
            Term::App(a, b) => Term::app(self.term(a), self.term(b)),
            Term::Lam(x, t, b) => {
                let t = self.ty(t);
                let (xs, b) = self.under(&[x], b);
                Term::lam(xs[0].clone(), t, b)
            }
            Term::TyLam(a, k, v) => {
                let c = self.fresh();
                self.tyvars.push((a.clone(), c.clone()));
                let v = self.term(v);
                self.tyvars.pop();
                Term::tylam(c, *k, v)
            }
            Term::TyApp(v, t) => {
                let v = self.term(v);
                Term::tyapp(v, self.ty(t))
            }
            Term::Mod(mu, v) => Term::modal(self.modality(mu), self.term(v)),
            Term::LetMod { outer, inner, var, bound, body } => {
                let bound = self.term(bound);
                let (xs, body) = self.under(&[var], body);
                Term::letmod(self.modality(outer), self.modality(inner), xs[0].clone(), bound, body)
            }
            Term::Let(x, a, b) => {
                let a = self.term(a);
                let (xs, b) = self.under(&[x], b);
                Term::let_(xs[0].clone(), a, b)
            }
            Term::Do(l, v) => Term::do_(self.label(l), self.term(v)),
            Term::Local(l, s, body) => {
                let s = self.sig(s);
                let c = self.fresh();
                self.labels.push((l.clone(), c.clone()));
                let body = self.term(body);
                self.labels.pop();
                Term::Local(c, s, Box::new(body))
            }
            Term::Handle(mu, body, h) => {
                let mu = self.modality(mu);
                let body = self.term(body);
                let (r, ret_body) = self.under(&[&h.ret_var], &h.ret_body);
                let (pr, op_body) = self.under(&[&h.param, &h.resume], &h.op_body);
                let h = Handler {
                    ret_var: r[0].clone(),
                    ret_body,
                    label: self.label(&h.label),
                    param: pr[0].clone(),
                    resume: pr[1].clone(),
                    op_body,
                };
                Term::handle(mu, body, h)
            }
        }
    }
}

/// Contract every administrative redex, under binders too:
/// `letmod … x = mod U in N` with `U` a value, and `(Λa. V) A`.
/// Translations leave these redexes in positions evaluation does not
/// reach, so both sides of a comparison are normalised first.
pub fn admin_normalise(m: &Term) -> Term {
    let go = |t: &Term| Box::new(admin_normalise(t));
    match m {
        Term::Unit | Term::Int(_) | Term::Var(_) => m.clone(),
        Term::Add(a, b) => Term::Add(go(a), go(b)),
        Term::App(a, b) => Term::App(go(a), go(b)),
        Term::Lam(x, t, b) => Term::Lam(x.clone(), t.clone(), go(b)),
        Term::TyLam(a, k, v) => Term::TyLam(a.clone(), *k, go(v)),
        Term::TyApp(v, t) => match admin_normalise(v) {
            Term::TyLam(a, _, body) => admin_normalise(&subst_type_term(&body, &a, t)),
            v => Term::TyApp(Box::new(v), t.clone()),
        },
        Term::Mod(mu, v) => Term::Mod(mu.clone(), go(v)),
        Term::LetMod { outer, inner, var, bound, body } => {
            let bound = admin_normalise(bound);
            match &bound {
                Term::Mod(_, u) if u.is_value() => admin_normalise(&subst_term(body, var, u)),
                _ => Term::letmod(outer.clone(), inner.clone(), var.clone(), bound, admin_normalise(body)),
            }
        }
        Term::Let(x, a, b) => Term::Let(x.clone(), go(a), go(b)),
        Term::Do(l, v) => Term::Do(l.clone(), go(v)),
        Term::Local(l, s, b) => Term::Local(l.clone(), s.clone(), go(b)),
        Term::Handle(mu, b, h) => Term::handle(
            mu.clone(),
            admin_normalise(b),
            Handler { ret_body: admin_normalise(&h.ret_body), op_body: admin_normalise(&h.op_body), ..(**h).clone() },
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::met::parse::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn renaming_of_binders() {
        assert!(alpha_label_equiv(&t("fun (x: Int) -> x"), &t("fun (y: Int) -> y"), &LabelCorr::new()));
        assert!(!alpha_label_equiv(&t("fun (x: Int) -> x"), &t("fun (y: Int) -> x"), &LabelCorr::new()));
        assert!(alpha_label_equiv(
            &t("tfun ($a) -> mod<[$a]> (fun (x: Int) -> x)"),
            &t("tfun ($b) -> mod<[$b]> (fun (x: Int) -> x)"),
            &LabelCorr::new()
        ));
    }

    #[test]
    fn label_correspondence() {
        let corr: LabelCorr = [("%0".to_string(), "%3".to_string())].into_iter().collect();
        assert!(alpha_label_equiv(&t("do %0 1"), &t("do %3 1"), &corr));
        assert!(!alpha_label_equiv(&t("do %0 1"), &t("do %3 1"), &LabelCorr::new()));
        assert!(!alpha_label_equiv(&t("mod<[%0]> ()"), &t("mod<[%1]> ()"), &LabelCorr::new()));
    }

    #[test]
    fn rows_up_to_theory() {
        let (a, b) = (t("mod<[%0,$e]> ()"), t("mod<[$e,%0]> ()"));
        assert!(!alpha_label_equiv(&a, &b, &LabelCorr::new()));
        assert!(alpha_label_equiv_in(Theory::Sets, &a, &b, &LabelCorr::new()));
    }

    #[test]
    fn administrative_redexes_contract() {
        let m = t("fun (z: 1) -> letmod<<>;[]> f = mod<[]> (fun (x: Int) -> x) in f 1");
        assert_eq!(admin_normalise(&m), t("fun (z: 1) -> (fun (x: Int) -> x) 1"));
        let n = t("(tfun ($a) -> mod<[$a]> ()) @{yield}");
        assert_eq!(admin_normalise(&n), t("mod<[yield]> ()"));
    }
}
