//! Ordered typing contexts with locks.
//!
//! Every variable binding and lock records the effect context it was
//! introduced at. Identity locks are dropped and adjacent locks fuse on
//! insertion, so contexts stay in the normal form of the context
//! equations.

use super::{Kind, Modality, Sig, Type};
use crate::effect::Row;

#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    /// `x :_{μ_F} A`; unannotated bindings carry the identity modality.
    Var {
        name: String,
        modality: Modality,
        index: Row,
        ty: Type,
    },
    /// A lock `μ_F`.
    Lock {
        modality: Modality,
        index: Row,
    },
    TyVar {
        name: String,
        kind: Kind,
    },
    Label {
        name: String,
        sig: Sig,
    },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Context {
    entries: Vec<Entry>,
}

/// A variable found by lookup, with the composition of the locks to its
/// right.
#[derive(Clone, Debug, PartialEq)]
pub struct Found<'a> {
    pub modality: &'a Modality,
    pub index: &'a Row,
    pub ty: &'a Type,
    pub locks: Modality,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.entries.truncate(n);
    }

    /// Truncate to `len` entries and overwrite the last one verbatim.
    pub fn reset(&mut self, len: usize, last: Option<Entry>) {
        self.entries.truncate(len);
        if let (Some(slot), Some(e)) = (self.entries.last_mut(), last) {
            *slot = e;
        }
    }

    /// Push a non-lock entry.
    pub fn push(&mut self, e: Entry) {
        if let Entry::Lock { modality, index } = e {
            self.push_lock(modality, index);
        } else {
            self.entries.push(e);
        }
    }

    /// Push a lock `μ_F`, normalising by the context equations.
    pub fn push_lock(&mut self, modality: Modality, index: Row) {
        if modality.is_identity() {
            return;
        }
        if let Some(Entry::Lock { modality: prev, .. }) = self.entries.last_mut() {
            *prev = prev.compose(&modality);
            if prev.is_identity() {
                self.entries.pop();
            }
            return;
        }
        self.entries.push(Entry::Lock { modality, index });
    }

    /// Innermost binding of `x` and `locks(Γ′)` for the suffix after it.
    pub fn lookup(&self, x: &str) -> Option<Found<'_>> {
        let mut locks = Modality::identity();
        for e in self.entries.iter().rev() {
            match e {
                Entry::Lock { modality, .. } => locks = modality.compose(&locks),
                Entry::Var { name, modality, index, ty } if name == x => {
                    return Some(Found { modality, index, ty, locks });
                }
                _ => {}
            }
        }
        None
    }

    pub fn tyvar_kind(&self, a: &str) -> Option<Kind> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::TyVar { name, kind } if name == a => Some(*kind),
            _ => None,
        })
    }

    pub fn label(&self, l: &str) -> Option<&Sig> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::Label { name, sig } if name == l => Some(sig),
            _ => None,
        })
    }

    pub fn has_var(&self, x: &str) -> bool {
        self.entries.iter().any(|e| matches!(e, Entry::Var { name, .. } if name == x))
    }
}

/// `locks(Γ)`: compose every lock left to right.
pub fn locks_compose(entries: &[Entry]) -> Modality {
    entries.iter().fold(Modality::identity(), |acc, e| match e {
        Entry::Lock { modality, .. } => acc.compose(modality),
        _ => acc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locks_fuse_and_vanish() {
        let e = Row::labels(&["e"]);
        let mut ctx = Context::new();
        ctx.push_lock(Modality::identity(), e.clone());
        assert!(ctx.is_empty());
        ctx.push_lock(Modality::Absolute(e.clone()), Row::labels(&["f"]));
        ctx.push_lock(Modality::Relative(Row::labels(&["l"])), e.clone());
        assert_eq!(
            ctx.entries(),
            &[Entry::Lock { modality: Modality::Absolute(Row::labels(&["l", "e"])), index: Row::labels(&["f"]) }]
        );
    }

    #[test]
    fn locks_of_suffix() {
        let e = Row::labels(&["e"]);
        let entries = vec![
            Entry::Lock { modality: Modality::Absolute(e.clone()), index: Row::labels(&["f"]) },
            Entry::Lock { modality: Modality::Relative(Row::labels(&["l"])), index: e },
        ];
        assert_eq!(locks_compose(&entries), Modality::Absolute(Row::labels(&["l", "e"])));
        assert_eq!(locks_compose(&[]), Modality::identity());
    }
}
