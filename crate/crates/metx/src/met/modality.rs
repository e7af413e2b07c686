//! Modalities: action on effect contexts, composition and the
//! transformation relation `μ ⇒ ν @ F`.

use crate::effect::{canon, extend_leq, subeffect, Row, Theory};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    /// `[E]` replaces the ambient effect context with `E`.
    Absolute(Row),
    /// `<D>` extends the ambient effect context with `D`.
    Relative(Row),
}

impl Modality {
    pub fn identity() -> Modality {
        Modality::Relative(Row::empty())
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Modality::Relative(d) if d.is_empty())
    }

    pub fn is_absolute(&self) -> bool {
        matches!(self, Modality::Absolute(_))
    }

    pub fn row(&self) -> &Row {
        match self {
            Modality::Absolute(r) | Modality::Relative(r) => r,
        }
    }

    /// `μ(F)`.
    pub fn apply(&self, f: &Row) -> Row {
        match self {
            Modality::Absolute(e) => e.clone(),
            Modality::Relative(d) => d.concat(f),
        }
    }

    /// `self ∘ next`, read left to right: `(μ∘ν)(E) = ν(μ(E))`.
    pub fn compose(&self, next: &Modality) -> Modality {
        match (self, next) {
            (_, Modality::Absolute(_)) => next.clone(),
            (Modality::Absolute(e), Modality::Relative(d)) => Modality::Absolute(d.concat(e)),
            (Modality::Relative(d1), Modality::Relative(d2)) => Modality::Relative(d2.concat(d1)),
        }
    }

    pub fn map_row(&self, f: impl FnOnce(&Row) -> Row) -> Modality {
        match self {
            Modality::Absolute(r) => Modality::Absolute(f(r)),
            Modality::Relative(r) => Modality::Relative(f(r)),
        }
    }

    /// Canonical representative under the theory's equivalence.
    pub fn canon(&self, theory: Theory) -> Modality {
        self.map_row(|r| canon(theory, r))
    }

    pub fn equiv(&self, other: &Modality, theory: Theory) -> bool {
        self.canon(theory) == other.canon(theory)
    }
}

/// `μ ⇒ ν @ F`.
pub fn transform(theory: Theory, mu: &Modality, nu: &Modality, f: &Row) -> bool {
    match (mu, nu) {
        (Modality::Absolute(e), _) => subeffect(theory, e, &nu.apply(f)),
        (Modality::Relative(d1), Modality::Relative(d2)) => extend_leq(theory, d1, d2, f),
        (Modality::Relative(_), Modality::Absolute(_)) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effect::Atom;

    fn abs(s: &[&str]) -> Modality {
        Modality::Absolute(Row::labels(s))
    }

    #[test]
    fn action_and_composition() {
        assert_eq!(abs(&["yield"]).apply(&Row::labels(&["ask"])), Row::labels(&["yield"]));
        let rel = Modality::Relative(Row::labels(&["yield"]));
        assert_eq!(rel.apply(&Row::labels(&["ask"])), Row::labels(&["yield", "ask"]));
        let eps = Modality::Absolute(Row(vec![Atom::var("$e")]));
        assert_eq!(eps.compose(&rel), Modality::Absolute(Row(vec![Atom::label("yield"), Atom::var("$e")])));
    }

    #[test]
    fn transformation() {
        let y = Row::labels(&["yield"]);
        assert!(transform(Theory::ScopedRows, &abs(&["yield"]), &Modality::identity(), &y));
        let rel = Modality::Relative(Row::labels(&["l"]));
        assert!(!transform(Theory::ScopedRows, &rel, &abs(&["m"]), &y));
    }
}
