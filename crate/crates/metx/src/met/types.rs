//! Kinding, type substitution and type equivalence.

use super::{Kind, Modality, Type};
use crate::effect::{canon, wf_context, wf_extension, Atom, Row, Theory};
use std::collections::BTreeSet;

/// Append a counter to `base` until `taken` rejects the candidate.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() || stem == "$" { base } else { stem };
    (1..).map(|i| format!("{stem}{i}")).find(|c| !taken(c)).expect("unbounded counter")
}

/// Free type and effect variables of a type.
pub fn ftv(t: &Type) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    ftv_into(t, &mut Vec::new(), &mut out);
    out
}

fn row_vars(r: &Row, bound: &[String], out: &mut BTreeSet<String>) {
    for a in &r.0 {
        if let Atom::Var(v) = a {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
    }
}

fn ftv_into(t: &Type, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Type::Unit | Type::Int => {}
        Type::Var(a) => {
            if !bound.contains(a) {
                out.insert(a.clone());
            }
        }
        Type::Arrow(a, b) => {
            ftv_into(a, bound, out);
            ftv_into(b, bound, out);
        }
        Type::Boxed(m, a) => {
            row_vars(m.row(), bound, out);
            ftv_into(a, bound, out);
        }
        Type::Forall(a, _, body) => {
            bound.push(a.clone());
            ftv_into(body, bound, out);
            bound.pop();
        }
        Type::Row(r) => row_vars(r, bound, out),
    }
}

/// Labels occurring anywhere in a type.
pub fn labels_of(t: &Type, out: &mut BTreeSet<String>) {
    let row = |r: &Row, out: &mut BTreeSet<String>| {
        for a in &r.0 {
            if let Atom::Label(l) = a {
                out.insert(l.clone());
            }
        }
    };
    match t {
        Type::Unit | Type::Int | Type::Var(_) => {}
        Type::Arrow(a, b) => {
            labels_of(a, out);
            labels_of(b, out);
        }
        Type::Boxed(m, a) => {
            row(m.row(), out);
            labels_of(a, out);
        }
        Type::Forall(_, _, b) => labels_of(b, out),
        Type::Row(r) => row(r, out),
    }
}

/// Splice `with` for the effect variable `a` inside a row.
pub fn subst_row(r: &Row, a: &str, with: &Row) -> Row {
    r.flat_map(|atom| match atom {
        Atom::Var(v) if v == a => with.clone(),
        other => Row(vec![other.clone()]),
    })
}

/// Rename the label `from` to `to` inside a row.
pub fn rename_label_row(r: &Row, from: &str, to: &str) -> Row {
    Row(r
        .0
        .iter()
        .map(|atom| match atom {
            Atom::Label(l) if l == from => Atom::Label(to.to_string()),
            other => other.clone(),
        })
        .collect())
}

/// `t[with/a]`. Effect arguments arrive as `Type::Row` and are spliced
/// into rows; value types replace type variables.
pub fn subst_type(t: &Type, a: &str, with: &Type) -> Type {
    let fv = ftv(with);
    subst_type_fv(t, a, with, &fv)
}

fn subst_type_fv(t: &Type, a: &str, with: &Type, fv: &BTreeSet<String>) -> Type {
    let row = |r: &Row| match with {
        Type::Row(w) => subst_row(r, a, w),
        _ => r.clone(),
    };
    match t {
        Type::Unit | Type::Int => t.clone(),
        Type::Var(b) if b == a => match with {
            Type::Row(_) => t.clone(),
            _ => with.clone(),
        },
        Type::Var(_) => t.clone(),
        Type::Arrow(x, y) => Type::arrow(subst_type_fv(x, a, with, fv), subst_type_fv(y, a, with, fv)),
        Type::Boxed(m, x) => Type::boxed(m.map_row(row), subst_type_fv(x, a, with, fv)),
        Type::Row(r) => Type::Row(row(r)),
        Type::Forall(b, _, _) if b == a => t.clone(),
        Type::Forall(b, k, body) => {
            if fv.contains(b) {
                let body_fv = ftv(body);
                let nb = fresh_name(b, |c| fv.contains(c) || body_fv.contains(c) || c == a);
                let renamed = rename_tyvar(body, b, &nb, *k);
                Type::forall(nb, *k, subst_type_fv(&renamed, a, with, fv))
            } else {
                Type::forall(b.clone(), *k, subst_type_fv(body, a, with, fv))
            }
        }
    }
}

/// Rename a type or effect variable, respecting its kind's namespace.
pub fn rename_tyvar(t: &Type, from: &str, to: &str, k: Kind) -> Type {
    let target = if k == Kind::Effect { Type::Row(Row(vec![Atom::var(to)])) } else { Type::Var(to.to_string()) };
    subst_type(t, from, &target)
}

/// Rename a label everywhere in a type.
pub fn rename_label_type(t: &Type, from: &str, to: &str) -> Type {
    match t {
        Type::Unit | Type::Int | Type::Var(_) => t.clone(),
        Type::Arrow(a, b) => Type::arrow(rename_label_type(a, from, to), rename_label_type(b, from, to)),
        Type::Boxed(m, a) => Type::boxed(m.map_row(|r| rename_label_row(r, from, to)), rename_label_type(a, from, to)),
        Type::Forall(b, k, body) => Type::forall(b.clone(), *k, rename_label_type(body, from, to)),
        Type::Row(r) => Type::Row(rename_label_row(r, from, to)),
    }
}

/// Canonical representative: bound variables renamed by depth and every
/// row put in canonical form.
pub fn canon_type(theory: Theory, t: &Type) -> Type {
    canon_rec(theory, t, &mut Vec::new())
}

fn canon_atoms(theory: Theory, r: &Row, env: &[(String, String)]) -> Row {
    let renamed = Row(r
        .0
        .iter()
        .map(|atom| match atom {
            Atom::Var(v) => match env.iter().rev().find(|(o, _)| o == v) {
                Some((_, n)) => Atom::Var(n.clone()),
                None => atom.clone(),
            },
            other => other.clone(),
        })
        .collect());
    canon(theory, &renamed)
}

fn canon_rec(theory: Theory, t: &Type, env: &mut Vec<(String, String)>) -> Type {
    match t {
        Type::Unit | Type::Int => t.clone(),
        Type::Var(a) => match env.iter().rev().find(|(o, _)| o == a) {
            Some((_, n)) => Type::Var(n.clone()),
            None => t.clone(),
        },
        Type::Arrow(a, b) => Type::arrow(canon_rec(theory, a, env), canon_rec(theory, b, env)),
        Type::Boxed(m, a) => Type::boxed(m.map_row(|r| canon_atoms(theory, r, env)), canon_rec(theory, a, env)),
        Type::Row(r) => Type::Row(canon_atoms(theory, r, env)),
        Type::Forall(a, k, body) => {
            let n = format!("#{}", env.len());
            env.push((a.clone(), n.clone()));
            let b = canon_rec(theory, body, env);
            env.pop();
            Type::forall(n, *k, b)
        }
    }
}

/// `A ≡ B`.
pub fn type_equiv(theory: Theory, a: &Type, b: &Type) -> bool {
    canon_type(theory, a) == canon_type(theory, b)
}

/// Why a type failed to kind-check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KindIssue {
    UnboundTypeVar(String),
    EffectAsType(String),
    IllFormedRow(Row),
    RowAsType,
}

/// Scope information consulted by kinding.
pub trait KindEnv {
    fn tyvar_kind(&self, a: &str) -> Option<Kind>;
    fn label_declared(&self, l: &str) -> bool;

    fn atom_ok(&self, a: &Atom) -> bool {
        match a {
            Atom::Label(l) => self.label_declared(l),
            Atom::Var(v) => self.tyvar_kind(v) == Some(Kind::Effect),
        }
    }
}

struct Extended<'a> {
    base: &'a dyn KindEnv,
    bound: Vec<(String, Kind)>,
}

impl KindEnv for Extended<'_> {
    fn tyvar_kind(&self, a: &str) -> Option<Kind> {
        match self.bound.iter().rev().find(|(n, _)| n == a) {
            Some((_, k)) => Some(*k),
            None => self.base.tyvar_kind(a),
        }
    }

    fn label_declared(&self, l: &str) -> bool {
        self.base.label_declared(l)
    }
}

/// `Γ ⊢ μ`.
pub fn wf_modality(theory: Theory, env: &dyn KindEnv, m: &Modality) -> Result<(), KindIssue> {
    let ok = |a: &Atom| env.atom_ok(a);
    let good = match m {
        Modality::Absolute(e) => wf_context(theory, &ok, e),
        Modality::Relative(d) => wf_extension(theory, &ok, d),
    };
    if good {
        Ok(())
    } else {
        Err(KindIssue::IllFormedRow(m.row().clone()))
    }
}

/// `Γ ⊢ E : Effect` for an effect context.
pub fn wf_effect_context(theory: Theory, env: &dyn KindEnv, e: &Row) -> Result<(), KindIssue> {
    if wf_context(theory, &|a: &Atom| env.atom_ok(a), e) {
        Ok(())
    } else {
        Err(KindIssue::IllFormedRow(e.clone()))
    }
}

/// The least kind of a type.
pub fn kind_of(theory: Theory, env: &dyn KindEnv, t: &Type) -> Result<Kind, KindIssue> {
    let mut ext = Extended { base: env, bound: Vec::new() };
    kind_rec(theory, &mut ext, t)
}

fn kind_rec(theory: Theory, env: &mut Extended<'_>, t: &Type) -> Result<Kind, KindIssue> {
    match t {
        Type::Unit | Type::Int => Ok(Kind::Abs),
        Type::Var(a) => match env.tyvar_kind(a) {
            None => Err(KindIssue::UnboundTypeVar(a.clone())),
            Some(Kind::Effect) => Err(KindIssue::EffectAsType(a.clone())),
            Some(k) => Ok(k),
        },
        Type::Arrow(a, b) => {
            kind_rec(theory, env, a)?;
            kind_rec(theory, env, b)?;
            Ok(Kind::Any)
        }
        Type::Boxed(m, a) => {
            wf_modality(theory, env, m)?;
            let k = kind_rec(theory, env, a)?;
            Ok(if m.is_absolute() { Kind::Abs } else { k })
        }
        Type::Forall(a, k, body) => {
            env.bound.push((a.clone(), *k));
            let r = kind_rec(theory, env, body);
            env.bound.pop();
            r
        }
        Type::Row(_) => Err(KindIssue::RowAsType),
    }
}

/// `Γ ⊢ B : K` for a type-application argument.
pub fn check_arg_kind(theory: Theory, env: &dyn KindEnv, arg: &Type, k: Kind) -> Result<(), KindIssue> {
    match (arg, k) {
        (Type::Row(r), Kind::Effect) => wf_effect_context(theory, env, r),
        (Type::Row(_), _) => Err(KindIssue::RowAsType),
        (_, Kind::Effect) => Err(KindIssue::RowAsType),
        (t, k) => {
            let got = kind_of(theory, env, t)?;
            if got.sub(k) {
                Ok(())
            } else {
                Err(KindIssue::EffectAsType(format!("{got:?} is not {k:?}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Empty;
    impl KindEnv for Empty {
        fn tyvar_kind(&self, _: &str) -> Option<Kind> {
            None
        }
        fn label_declared(&self, _: &str) -> bool {
            true
        }
    }

    #[test]
    fn kinds() {
        let one_one = Type::arrow(Type::Unit, Type::Unit);
        let t = Type::arrow(one_one, Type::Unit);
        assert_eq!(kind_of(Theory::Sets, &Empty, &t), Ok(Kind::Any));
        let b = Type::boxed(Modality::Absolute(Row::empty()), t);
        assert_eq!(kind_of(Theory::Sets, &Empty, &b), Ok(Kind::Abs));
    }

    #[test]
    fn equivalence_up_to_rows_and_binders() {
        let m = |r: &[&str]| Modality::Absolute(Row::labels(r));
        let a = Type::boxed(m(&["ask", "yield"]), Type::Unit);
        let b = Type::boxed(m(&["yield", "ask"]), Type::Unit);
        assert!(type_equiv(Theory::ScopedRows, &a, &b));
        let r = |s: &[&str]| Modality::Relative(Row::labels(s));
        let c = Type::boxed(r(&["yield", "yield"]), Type::Unit);
        let d = Type::boxed(r(&["yield"]), Type::Unit);
        assert!(type_equiv(Theory::Sets, &c, &d));
        assert!(!type_equiv(Theory::ScopedRows, &c, &d));
        let f1 =
            Type::forall("$a", Kind::Effect, Type::boxed(Modality::Absolute(Row(vec![Atom::var("$a")])), Type::Unit));
        let f2 =
            Type::forall("$b", Kind::Effect, Type::boxed(Modality::Absolute(Row(vec![Atom::var("$b")])), Type::Unit));
        assert!(type_equiv(Theory::ScopedRows, &f1, &f2));
    }

    #[test]
    fn capture_avoiding_type_substitution() {
        let t = Type::forall("b", Kind::Any, Type::arrow(Type::Var("a".into()), Type::Var("b".into())));
        let s = subst_type(&t, "a", &Type::Var("b".into()));
        match s {
            Type::Forall(n, _, body) => {
                assert_ne!(n, "b");
                assert_eq!(*body, Type::arrow(Type::Var("b".into()), Type::Var(n)));
            }
            _ => panic!(),
        }
    }
}
