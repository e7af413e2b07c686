//! Effect theories: atoms, extensions, effect contexts and the three
//! built-in theories (sets, simple rows, scoped rows).
//!
//! Every relation is decided on canonical forms. Subeffecting and the
//! universally quantified extension ordering use closed forms that are
//! cross-checked against the brute-force searches in [`oracle`].

pub mod oracle;

use std::collections::BTreeMap;
use std::fmt;

/// A single entry of an effect collection.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// An operation label such as `yield`, or a runtime label `%0`.
    Label(String),
    /// An effect variable; its surface name carries a leading `$`.
    Var(String),
}

impl Atom {
    pub fn label(name: impl Into<String>) -> Atom {
        Atom::Label(name.into())
    }

    pub fn var(name: impl Into<String>) -> Atom {
        Atom::Var(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Atom::Label(n) | Atom::Var(n) => n,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Atom::Var(_))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An ordered sequence of atoms. Used both for extensions `D` and for
/// effect contexts `E`; which reading applies is decided by the caller.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Row(pub Vec<Atom>);

pub type Extension = Row;
pub type EffectContext = Row;

impl Row {
    pub fn empty() -> Row {
        Row(Vec::new())
    }

    pub fn labels<S: AsRef<str>>(names: &[S]) -> Row {
        Row(names.iter().map(|n| Atom::label(n.as_ref())).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    /// `self, other` as a sequence.
    pub fn concat(&self, other: &Row) -> Row {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Row(v)
    }

    pub fn contains_label(&self, name: &str) -> bool {
        self.0.iter().any(|a| matches!(a, Atom::Label(l) if l == name))
    }

    pub fn has_var(&self) -> bool {
        self.0.iter().any(Atom::is_var)
    }

    fn label_names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter_map(|a| match a {
            Atom::Label(l) => Some(l.as_str()),
            Atom::Var(_) => None,
        })
    }

    fn vars(&self) -> impl Iterator<Item = &str> {
        self.0.iter().filter_map(|a| match a {
            Atom::Var(v) => Some(v.as_str()),
            Atom::Label(_) => None,
        })
    }

    /// Replace every atom through `f`, splicing in the returned rows.
    pub fn flat_map(&self, mut f: impl FnMut(&Atom) -> Row) -> Row {
        Row(self.0.iter().flat_map(|a| f(a).0).collect())
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromIterator<Atom> for Row {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Row(iter.into_iter().collect())
    }
}

/// The effect theory a program is checked under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theory {
    Sets,
    SimpleRows,
    ScopedRows,
}

impl Theory {
    pub const ALL: [Theory; 3] = [Theory::Sets, Theory::SimpleRows, Theory::ScopedRows];

    pub fn name(self) -> &'static str {
        match self {
            Theory::Sets => "sets",
            Theory::SimpleRows => "simple",
            Theory::ScopedRows => "scoped",
        }
    }

    pub fn from_name(s: &str) -> Option<Theory> {
        match s {
            "sets" => Some(Theory::Sets),
            "simple" => Some(Theory::SimpleRows),
            "scoped" => Some(Theory::ScopedRows),
            _ => None,
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn label_counts(r: &Row) -> BTreeMap<&str, usize> {
    let mut m = BTreeMap::new();
    for l in r.label_names() {
        *m.entry(l).or_insert(0) += 1;
    }
    m
}

fn multiset_le(a: &BTreeMap<&str, usize>, b: &BTreeMap<&str, usize>) -> bool {
    a.iter().all(|(k, n)| b.get(k).is_some_and(|m| n <= m))
}

fn set_le(a: &BTreeMap<&str, usize>, b: &BTreeMap<&str, usize>) -> bool {
    a.keys().all(|k| b.contains_key(k))
}

fn same_keys(a: &BTreeMap<&str, usize>, b: &BTreeMap<&str, usize>) -> bool {
    a.len() == b.len() && set_le(a, b)
}

/// The canonical representative of the equivalence class of `r`.
///
/// Sets sort and deduplicate all atoms. Scoped rows sort labels and keep
/// duplicates. Simple rows sort and deduplicate labels. Rows keep their
/// variables after the labels in their original order.
pub fn canon(theory: Theory, r: &Row) -> Row {
    match theory {
        Theory::Sets => {
            let mut v = r.0.clone();
            v.sort();
            v.dedup();
            Row(v)
        }
        Theory::ScopedRows | Theory::SimpleRows => {
            let mut labels: Vec<Atom> = r.0.iter().filter(|a| !a.is_var()).cloned().collect();
            labels.sort();
            if theory == Theory::SimpleRows {
                labels.dedup();
            }
            labels.extend(r.0.iter().filter(|a| a.is_var()).cloned());
            Row(labels)
        }
    }
}

/// `Γ ⊢ D : Effect` for extensions; `declared` decides scoping of atoms.
pub fn wf_extension(theory: Theory, declared: &dyn Fn(&Atom) -> bool, d: &Row) -> bool {
    if !d.0.iter().all(declared) {
        return false;
    }
    match theory {
        Theory::Sets => true,
        Theory::ScopedRows => !d.has_var(),
        Theory::SimpleRows => !d.has_var() && label_counts(d).values().all(|&n| n == 1),
    }
}

/// `Γ ⊢ E : Effect` for effect contexts. Rows admit at most one variable,
/// in tail position.
pub fn wf_context(theory: Theory, declared: &dyn Fn(&Atom) -> bool, e: &Row) -> bool {
    if !e.0.iter().all(declared) {
        return false;
    }
    match theory {
        Theory::Sets => true,
        Theory::ScopedRows | Theory::SimpleRows => {
            let n = e.0.len();
            e.0.iter().enumerate().all(|(i, a)| !a.is_var() || i + 1 == n)
        }
    }
}

/// Scope predicate that accepts every atom.
pub fn any_atom(_: &Atom) -> bool {
    true
}

pub fn equiv_extension(theory: Theory, d1: &Row, d2: &Row) -> bool {
    canon(theory, d1) == canon(theory, d2)
}

pub fn equiv_context(theory: Theory, e1: &Row, e2: &Row) -> bool {
    canon(theory, e1) == canon(theory, e2)
}

/// `E ⩽ F`, i.e. there is an `E′` with `E, E′ ≡ F`.
pub fn subeffect(theory: Theory, e: &Row, f: &Row) -> bool {
    match theory {
        Theory::Sets => e.0.iter().all(|a| f.0.contains(a)),
        Theory::ScopedRows | Theory::SimpleRows => {
            let le: fn(&BTreeMap<&str, usize>, &BTreeMap<&str, usize>) -> bool =
                if theory == Theory::ScopedRows { multiset_le } else { set_le };
            let (ce, cf) = (label_counts(e), label_counts(f));
            match e.vars().last() {
                None => le(&ce, &cf),
                Some(v) => {
                    let eq = if theory == Theory::ScopedRows { ce == cf } else { same_keys(&ce, &cf) };
                    f.vars().last() == Some(v) && eq
                }
            }
        }
    }
}

/// `D1,F ⩽ D2,F` for every `F` with `E ⩽ F`.
pub fn extend_leq(theory: Theory, d1: &Row, d2: &Row, e: &Row) -> bool {
    match theory {
        Theory::Sets => d1.0.iter().all(|a| d2.0.contains(a) || e.0.contains(a)),
        Theory::ScopedRows => label_counts(d1) == label_counts(d2),
        Theory::SimpleRows => {
            let mut a = label_counts(d1);
            let mut b = label_counts(d2);
            for l in e.label_names() {
                a.insert(l, 1);
                b.insert(l, 1);
            }
            same_keys(&a, &b)
        }
    }
}

/// Counterexamples to the two validity conditions of an effect theory.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub theory: Option<Theory>,
    pub samples: usize,
    /// Contexts `E` with `E ⩽ ·` but `E` not empty.
    pub empty_violations: Vec<Row>,
    /// Triples `(ℓ, ℓ′, E)` with `ℓ ⩽ ℓ′,E`, `ℓ ≠ ℓ′` and not `ℓ ⩽ E`.
    pub label_violations: Vec<(String, String, Row)>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.empty_violations.is_empty() && self.label_violations.is_empty()
    }
}

/// Property-check both validity conditions over the given samples. Each
/// sample is a context `E` together with two labels `ℓ` and `ℓ′`.
pub fn validity_probe<I>(theory: Theory, samples: I) -> ValidityReport
where
    I: IntoIterator<Item = (Row, String, String)>,
{
    let mut report = ValidityReport { theory: Some(theory), ..Default::default() };
    let empty = Row::empty();
    for (e, l, l2) in samples {
        report.samples += 1;
        if !wf_context(theory, &any_atom, &e) {
            continue;
        }
        if subeffect(theory, &e, &empty) && !e.is_empty() {
            report.empty_violations.push(e.clone());
        }
        let single = Row(vec![Atom::Label(l.clone())]);
        let ext = Row(vec![Atom::Label(l2.clone())]).concat(&e);
        if l != l2 && subeffect(theory, &single, &ext) && !subeffect(theory, &single, &e) {
            report.label_violations.push((l, l2, e));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Row {
        Row(s
            .split(',')
            .filter(|x| !x.is_empty())
            .map(|x| if x.starts_with('$') { Atom::var(x) } else { Atom::label(x) })
            .collect())
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canon(Theory::Sets, &r("b,$e,a,a")), r("a,b,$e"));
        assert_eq!(canon(Theory::ScopedRows, &r("b,a,b,$e")), r("a,b,b,$e"));
        assert_eq!(canon(Theory::SimpleRows, &r("b,a,b,$e")), r("a,b,$e"));
    }

    #[test]
    fn subeffect_closed_forms() {
        assert!(subeffect(Theory::ScopedRows, &r("yield"), &r("yield,ask")));
        assert!(!subeffect(Theory::ScopedRows, &r("yield,$e"), &r("yield,ask,$e")));
        assert!(subeffect(Theory::Sets, &r("$e1,yield"), &r("yield,ask,$e1")));
        assert!(!subeffect(Theory::ScopedRows, &r("yield,yield"), &r("yield,ask")));
        assert!(subeffect(Theory::SimpleRows, &r("yield,yield"), &r("yield,ask")));
    }

    #[test]
    fn extend_leq_closed_forms() {
        assert!(extend_leq(Theory::Sets, &r("l1"), &r(""), &r("l1")));
        assert!(!extend_leq(Theory::ScopedRows, &r("yield"), &r("yield,ask"), &r("ask")));
        assert!(extend_leq(Theory::SimpleRows, &r("yield"), &r("yield,ask"), &r("ask")));
    }
}
