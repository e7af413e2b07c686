//! Property suites: progress and subject reduction of the core
//! calculus, the laws of the mode theory, soundness of modality
//! transformation, and exhaustive comparison of the effect-theory
//! decision procedures with brute-force searches.

use super::gen::{self, feps::FepsGen, systemc::CGen, MetGen};
use super::{lockstep_simulate, preserve::check_type_preservation, Source, Verdict};
use crate::effect::oracle::{extensions_of, reachable_from, sequences};
use crate::effect::{
    any_atom, canon, extend_leq, oracle::oracle_extend_leq, subeffect, validity_probe, wf_context, wf_extension, Atom,
    Row, Theory,
};
use crate::met::modality::transform;
use crate::met::{self, step, types::type_equiv, Context, Modality, RuntimeLabels, StepResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Result of one property suite.
#[derive(Clone, Debug, Default)]
pub struct PropReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// The first few counterexamples, rendered.
    pub examples: Vec<String>,
}

const KEEP: usize = 5;

impl PropReport {
    fn new(name: impl Into<String>) -> PropReport {
        PropReport { name: name.into(), ..Default::default() }
    }

    fn record(&mut self, ok: bool, why: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < KEEP {
                self.examples.push(why());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for PropReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}/{} hold", self.name, self.cases - self.failures, self.cases)?;
        for e in &self.examples {
            write!(f, "\n  counterexample: {e}")?;
        }
        Ok(())
    }
}

/// Progress and subject reduction on generated closed terms: no term is
/// stuck, every suspension is on an operation the ambient context
/// allows, and every intermediate term re-checks, with the runtime
/// labels in scope, at a type equivalent to the original.
pub fn progress_and_preservation(theory: Theory, seed: u64, count: usize, fuel: usize) -> PropReport {
    let mut r = PropReport::new(format!("progress and subject reduction ({theory})"));
    let mut g = MetGen::new(theory, seed, 7);
    let sigs = gen::met_signatures();
    for _ in 0..count {
        let t = g.term();
        let mut omega = RuntimeLabels::default();
        let mut cur = t.term.clone();
        let mut ok = Ok(());
        for i in 0..=fuel {
            match met::typecheck(theory, &sigs, &omega, &Context::new(), &cur, &t.ambient) {
                Ok(ty) if type_equiv(theory, &ty, &t.ty) => {}
                Ok(ty) => {
                    ok = Err(format!("step {i}: {cur} has type {}", met::print::ty(&ty)));
                    break;
                }
                Err(e) => {
                    ok = Err(format!("step {i}: {cur}: {e}"));
                    break;
                }
            }
            match step(&cur, &mut omega, &sigs) {
                StepResult::Stepped(n, _) => cur = n,
                StepResult::Finished => break,
                StepResult::Suspended { label, .. } => {
                    if !subeffect(theory, &Row(vec![Atom::label(&label)]), &t.ambient) {
                        ok = Err(format!("{cur} performs {label} outside {}", t.ambient));
                    }
                    break;
                }
                StepResult::Stuck(why) => {
                    ok = Err(format!("stuck at step {i}: {cur}: {why}"));
                    break;
                }
            }
        }
        r.record(ok.is_ok(), || format!("{} @ {}: {}", t.term, t.ambient, ok.clone().unwrap_err()));
    }
    r
}

const LABELS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 2] = ["$x", "$y"];

/// The alphabet of the exhaustive suites: three labels, two variables.
pub fn alphabet() -> Vec<Atom> {
    LABELS.iter().map(|l| Atom::label(*l)).chain(VARS.iter().map(|v| Atom::var(*v))).collect()
}

fn random_row(rng: &mut ChaCha8Rng, max: usize, vars: bool) -> Row {
    let n = rng.gen_range(0..=max);
    let mut v: Vec<Atom> = (0..n).map(|_| Atom::label(LABELS[rng.gen_range(0..LABELS.len())])).collect();
    if vars && rng.gen_bool(0.3) {
        v.push(Atom::var(VARS[rng.gen_range(0..VARS.len())]));
    }
    Row(v)
}

/// A random context well formed in `theory`.
fn random_context(theory: Theory, rng: &mut ChaCha8Rng) -> Row {
    let r = random_row(rng, 3, true);
    debug_assert!(wf_context(theory, &any_atom, &r));
    r
}

/// A random modality whose row is well formed in `theory`.
fn random_modality(theory: Theory, rng: &mut ChaCha8Rng) -> Modality {
    if rng.gen_bool(0.4) {
        Modality::Absolute(random_context(theory, rng))
    } else {
        let mut d = random_row(rng, 3, theory == Theory::Sets);
        if theory == Theory::SimpleRows {
            d = canon(theory, &d);
        }
        debug_assert!(wf_extension(theory, &any_atom, &d));
        Modality::Relative(d)
    }
}

/// Associativity and identity of composition, and compatibility of the
/// action with composition, on `count` random triples.
pub fn modality_laws(theory: Theory, seed: u64, count: usize) -> PropReport {
    let mut r = PropReport::new(format!("modality laws ({theory})"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = Modality::identity();
    for _ in 0..count {
        let (m, n, k) =
            (random_modality(theory, &mut rng), random_modality(theory, &mut rng), random_modality(theory, &mut rng));
        let e = random_context(theory, &mut rng);
        let assoc = m.compose(&n).compose(&k).equiv(&m.compose(&n.compose(&k)), theory);
        let ident = id.compose(&m).equiv(&m, theory) && m.compose(&id).equiv(&m, theory);
        let action = canon(theory, &m.compose(&n).apply(&e)) == canon(theory, &n.apply(&m.apply(&e)));
        r.record(assoc && ident && action, || {
            format!("μ={m:?} ν={n:?} ξ={k:?} E={e}: assoc {assoc}, identity {ident}, action {action}")
        });
    }
    r
}

/// `μ ⇒ ν @ F` implies `μ(F′) ⩽ ν(F′)` for every enumerated `F′ ⩾ F`.
/// Candidate pairs are sampled until `count` transformations hold.
pub fn transform_soundness(theory: Theory, seed: u64, count: usize) -> PropReport {
    let mut r = PropReport::new(format!("transformation soundness ({theory})"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = alphabet();
    let mut ext_cache: BTreeMap<Row, Vec<Row>> = BTreeMap::new();
    let mut attempts = 0;
    while r.cases < count && attempts < 100 * count {
        attempts += 1;
        let mu = random_modality(theory, &mut rng);
        // Bias towards related pairs so that many transformations hold.
        let nu = if rng.gen_bool(0.5) {
            mu.map_row(|d| {
                let extra = random_row(&mut rng, 2, false);
                let row = extra.concat(d);
                if theory == Theory::SimpleRows {
                    canon(theory, &row)
                } else {
                    row
                }
            })
        } else {
            random_modality(theory, &mut rng)
        };
        let f = random_context(theory, &mut rng);
        if !transform(theory, &mu, &nu, &f) {
            continue;
        }
        let exts = ext_cache.entry(canon(theory, &f)).or_insert_with(|| extensions_of(theory, &f, &alpha, 2));
        let bad = exts.iter().find(|f2| {
            let (a, b) = (mu.apply(f2), nu.apply(f2));
            wf_context(theory, &any_atom, &a) && wf_context(theory, &any_atom, &b) && !subeffect(theory, &a, &b)
        });
        r.record(bad.is_none(), || format!("{mu:?} => {nu:?} @ {f} but not at {}", bad.unwrap()));
    }
    r
}

/// Every well-formed context of length at most `bound`.
fn contexts(theory: Theory, bound: usize) -> Vec<Row> {
    sequences(&alphabet(), bound).into_iter().filter(|e| wf_context(theory, &any_atom, e)).collect()
}

/// Canonical representatives of the well-formed extensions of length at
/// most `bound`.
fn extension_classes(theory: Theory, bound: usize) -> Vec<Row> {
    let set: BTreeSet<Row> = sequences(&alphabet(), bound)
        .into_iter()
        .filter(|d| wf_extension(theory, &any_atom, d))
        .map(|d| canon(theory, &d))
        .collect();
    set.into_iter().collect()
}

/// `subeffect` against the search for a witness tail, over every pair
/// of well-formed contexts of length at most `bound`.
pub fn subeffect_exhaustive(theory: Theory, bound: usize) -> PropReport {
    let mut r = PropReport::new(format!("subeffect vs oracle ({theory}, length <= {bound})"));
    let all = contexts(theory, bound);
    let alpha = alphabet();
    let canons: Vec<Row> = all.iter().map(|f| canon(theory, f)).collect();
    for e in &all {
        let reach: BTreeSet<Row> = reachable_from(theory, e, &alpha, bound).into_iter().collect();
        for (f, cf) in all.iter().zip(&canons) {
            let want = reach.contains(cf);
            let got = subeffect(theory, e, f);
            r.record(got == want, || format!("{e} <= {f}: decided {got}, oracle {want}"));
        }
    }
    r
}

/// `extend_leq` against its bounded universal reading, over every
/// triple of equivalence classes of length at most `bound`.
pub fn extend_leq_exhaustive(theory: Theory, bound: usize) -> PropReport {
    let mut r = PropReport::new(format!("extend_leq vs oracle ({theory}, classes of length <= {bound})"));
    let exts = extension_classes(theory, bound);
    let ctxs: BTreeSet<Row> = contexts(theory, bound).iter().map(|e| canon(theory, e)).collect();
    let alpha = alphabet();
    for e in &ctxs {
        for d1 in &exts {
            for d2 in &exts {
                let want = oracle_extend_leq(theory, d1, d2, e, &alpha, 2);
                let got = extend_leq(theory, d1, d2, e);
                r.record(got == want, || format!("<{d1}> => <{d2}> @ {e}: decided {got}, oracle {want}"));
            }
        }
    }
    r
}

/// Both validity conditions on every well-formed context of length at
/// most `bound` and every pair of labels.
pub fn validity_exhaustive(theory: Theory, bound: usize) -> PropReport {
    let mut r = PropReport::new(format!("validity conditions ({theory}, length <= {bound})"));
    let mut samples = Vec::new();
    for e in contexts(theory, bound) {
        for l in LABELS {
            for l2 in LABELS {
                samples.push((e.clone(), l.to_string(), l2.to_string()));
            }
        }
    }
    let report = validity_probe(theory, samples);
    r.cases = report.samples;
    r.failures = report.empty_violations.len() + report.label_violations.len();
    r.examples.extend(report.empty_violations.iter().take(KEEP).map(|e| format!("{e} <= . but is not empty")));
    r.examples.extend(
        report.label_violations.iter().take(KEEP).map(|(l, l2, e)| format!("{l} <= {l2},{e} but not {l} <= {e}")),
    );
    r
}

/// Generated programs of a calculus, as sources.
pub fn generated_sources(calculus: super::Calculus, seed: u64, count: usize) -> Vec<Source> {
    match calculus {
        super::Calculus::Met => {
            let theories = Theory::ALL;
            let mut out = Vec::new();
            for (i, theory) in theories.iter().enumerate() {
                let n = count / theories.len() + usize::from(i < count % theories.len());
                let mut g = MetGen::new(*theory, seed + i as u64, 7);
                for _ in 0..n {
                    let t = g.term();
                    out.push(Source::Met(met::Program {
                        theory: *theory,
                        sigs: g.signatures().clone(),
                        ambient: t.ambient,
                        decls: Vec::new(),
                        term: t.term,
                    }));
                }
            }
            out
        }
        super::Calculus::Feps => {
            let mut g = FepsGen::new(seed, 7);
            (0..count).map(|_| Source::Feps(g.program())).collect()
        }
        super::Calculus::SystemC => {
            let mut g = CGen::new(seed, 7);
            (0..count).map(|_| Source::SystemC(g.program())).collect()
        }
    }
}

/// Type preservation on generated programs.
pub fn preservation_generated(calculus: super::Calculus, seed: u64, count: usize) -> PropReport {
    let mut r = PropReport::new(format!("type preservation ({calculus}, generated)"));
    for src in generated_sources(calculus, seed, count) {
        let p = check_type_preservation(&src);
        r.record(p.passed(), || p.to_string());
    }
    r
}

/// Lockstep simulation on generated programs.
pub fn lockstep_generated(
    calculus: super::Calculus,
    seed: u64,
    count: usize,
    fuel: usize,
    window: usize,
) -> PropReport {
    let mut r = PropReport::new(format!("lockstep simulation ({calculus}, generated)"));
    for (i, src) in generated_sources(calculus, seed, count).iter().enumerate() {
        let d = lockstep_simulate(&format!("gen-{i}"), src, fuel, window);
        r.record(!matches!(d.verdict, Verdict::Mismatch(_)), || d.summary_line());
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Calculus;

    fn assert_holds(r: PropReport) {
        assert!(r.passed(), "{r}");
        assert!(r.cases > 0, "{r}");
    }

    #[test]
    fn small_suites_hold() {
        for theory in Theory::ALL {
            assert_holds(progress_and_preservation(theory, 1, 30, 500));
            assert_holds(modality_laws(theory, 1, 500));
            assert_holds(transform_soundness(theory, 1, 100));
            assert_holds(subeffect_exhaustive(theory, 2));
            assert_holds(extend_leq_exhaustive(theory, 2));
            assert_holds(validity_exhaustive(theory, 2));
        }
    }

    #[test]
    fn generated_programs_preserve_and_simulate() {
        for c in [Calculus::Met, Calculus::Feps, Calculus::SystemC] {
            assert_holds(preservation_generated(c, 3, 30));
        }
        for c in [Calculus::Feps, Calculus::SystemC] {
            assert_holds(lockstep_generated(c, 3, 20, 2000, 64));
        }
    }
}
