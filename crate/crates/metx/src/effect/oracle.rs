//! Brute-force searches that serve as ground truth for the closed forms
//! of subeffecting and of the extension ordering.

use super::{any_atom, canon, subeffect, wf_context, Atom, Row, Theory};

/// The single fresh effect variable the searches draw on. Theories never
/// distinguish fresh variables by name, so one suffices.
pub fn fresh_var() -> Atom {
    Atom::var("$fresh")
}

/// All sequences over `alphabet` of length at most `bound`.
pub fn sequences(alphabet: &[Atom], bound: usize) -> Vec<Row> {
    let mut out = vec![Row::empty()];
    let mut frontier = vec![Row::empty()];
    for _ in 0..bound {
        let mut next = Vec::with_capacity(frontier.len() * alphabet.len());
        for r in &frontier {
            for a in alphabet {
                let mut v = r.0.clone();
                v.push(a.clone());
                next.push(Row(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn dedup_atoms(atoms: impl IntoIterator<Item = Atom>) -> Vec<Atom> {
    let mut v: Vec<Atom> = atoms.into_iter().collect();
    v.sort();
    v.dedup();
    v
}

/// Search for `E′` over `atoms(F) ∪ {fresh}` of length at most `bound`
/// such that `E, E′` is well formed and `E, E′ ≡ F`.
pub fn oracle_subeffect(theory: Theory, e: &Row, f: &Row, bound: usize) -> bool {
    let target = canon(theory, f);
    let mut alphabet = dedup_atoms(f.0.iter().cloned());
    alphabet.push(fresh_var());
    sequences(&alphabet, bound).iter().any(|tail| {
        let whole = e.concat(tail);
        wf_context(theory, &any_atom, &whole) && canon(theory, &whole) == target
    })
}

/// Every context `F` with `E ⩽ F` reachable as `E, E′` where `E′` ranges
/// over sequences of length at most `bound` drawn from `alphabet ∪ {fresh}`.
pub fn extensions_of(theory: Theory, e: &Row, alphabet: &[Atom], bound: usize) -> Vec<Row> {
    let mut alpha = dedup_atoms(alphabet.iter().cloned().chain(e.0.iter().cloned()));
    alpha.push(fresh_var());
    let mut out: Vec<Row> = sequences(&alpha, bound)
        .into_iter()
        .map(|t| e.concat(&t))
        .filter(|f| wf_context(theory, &any_atom, f))
        .map(|f| canon(theory, &f))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Bounded reading of `∀F. E ⩽ F ⟹ D1,F ⩽ D2,F`.
pub fn oracle_extend_leq(theory: Theory, d1: &Row, d2: &Row, e: &Row, alphabet: &[Atom], bound: usize) -> bool {
    let alpha: Vec<Atom> = alphabet.iter().chain(d1.0.iter()).chain(d2.0.iter()).cloned().collect();
    extensions_of(theory, e, &alpha, bound).iter().all(|f| subeffect(theory, &d1.concat(f), &d2.concat(f)))
}

/// The canonical forms reachable from `E` by appending any well-formed
/// tail over `alphabet` of length at most `bound`. Used to decide the
/// subeffect oracle for many `F` at once.
pub fn reachable_from(theory: Theory, e: &Row, alphabet: &[Atom], bound: usize) -> Vec<Row> {
    let mut out: Vec<Row> = sequences(alphabet, bound)
        .into_iter()
        .map(|t| e.concat(&t))
        .filter(|w| wf_context(theory, &any_atom, w))
        .map(|w| canon(theory, &w))
        .collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_basics() {
        let empty = Row::empty();
        for t in Theory::ALL {
            assert!(oracle_subeffect(t, &empty, &empty, 1));
        }
        assert!(!oracle_subeffect(Theory::ScopedRows, &Row::labels(&["yield"]), &empty, 2));
        assert_eq!(sequences(&[Atom::label("a"), Atom::label("b")], 2).len(), 7);
    }
}
