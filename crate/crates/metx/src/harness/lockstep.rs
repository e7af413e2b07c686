//! Semantics preservation by lockstep simulation. Every source step
//! `M ⇝ N` must be matched by a run of the core evaluator from the
//! current target state to a term equal to `⟦N⟧`, up to bound names,
//! administrative redexes and the positional label correspondence.

use super::equiv::{admin_normalise, alpha_label_equiv_in, positional_corr};
use super::{Calculus, Source};
use crate::effect::Theory;
use crate::met::{self, step, RuntimeLabels, Signatures, StepResult, Term};
use crate::systemc::{self, CLabels, COutcome, CProgram, CTerm};
use crate::{feps, met::eval::Outcome};
use serde_json::json;
use std::fmt::Write as _;

/// How far the target may run to match one source step.
pub const DEFAULT_WINDOW: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch(String),
    /// The program cannot be run on its own, such as an open term.
    Skipped(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::Mismatch(_) => "mismatch",
            Verdict::Skipped(_) => "skipped",
        }
    }

    pub fn is_mismatch(&self) -> bool {
        matches!(self, Verdict::Mismatch(_))
    }
}

/// One source step and the target run that matched it.
#[derive(Clone, Debug)]
pub struct StepRecord {
    /// Index of the source state reached by this step.
    pub index: usize,
    pub source: String,
    pub translated: Term,
    /// Target states visited, excluding the one the run started from.
    pub target: Vec<Term>,
    pub verdict: Verdict,
    /// `⟦N⟧` occurred again later in the window.
    pub repeated: bool,
}

#[derive(Clone, Debug)]
pub struct DiffReport {
    pub id: String,
    pub calculus: Calculus,
    pub records: Vec<StepRecord>,
    pub source_steps: usize,
    pub matched: usize,
    pub target_steps: usize,
    /// The most target steps any one source step needed.
    pub max_window: usize,
    pub repeats: usize,
    pub source_outcome: String,
    pub target_outcome: String,
    pub verdict: Verdict,
}

impl DiffReport {
    /// Line-oriented rendering of every step.
    pub fn render(&self) -> String {
        let mut s = format!("lockstep {} ({})\n", self.id, self.calculus);
        for r in &self.records {
            let _ = writeln!(s, "step {}: {}", r.index, r.source);
            let _ = writeln!(s, "  translated: {}", r.translated);
            let _ = writeln!(s, "  target +{}:", r.target.len());
            for t in &r.target {
                let _ = writeln!(s, "    {t}");
            }
            let flag = if r.repeated { " (repeated in window)" } else { "" };
            match &r.verdict {
                Verdict::Mismatch(why) => {
                    let _ = writeln!(s, "  verdict: mismatch: {why}");
                }
                v => {
                    let _ = writeln!(s, "  verdict: {}{flag}", v.name());
                }
            }
        }
        let _ = writeln!(s, "source outcome: {}", self.source_outcome);
        let _ = writeln!(s, "target outcome: {}", self.target_outcome);
        s.push_str(&self.summary_line());
        s.push('\n');
        s
    }

    /// `id: verdict (n source steps, m matched, …)`.
    pub fn summary_line(&self) -> String {
        let detail = match &self.verdict {
            Verdict::Match => String::new(),
            Verdict::Mismatch(w) | Verdict::Skipped(w) => format!(": {w}"),
        };
        format!(
            "{}: {} ({} source steps, {} matched, {} target steps, max window {}, {} repeats){detail}",
            self.id,
            self.verdict.name(),
            self.source_steps,
            self.matched,
            self.target_steps,
            self.max_window,
            self.repeats
        )
    }

    /// One JSON record: id, steps, matched and verdict.
    pub fn json(&self) -> String {
        json!({
            "id": self.id,
            "calculus": self.calculus.name(),
            "steps": self.source_steps,
            "matched": self.matched,
            "target_steps": self.target_steps,
            "max_window": self.max_window,
            "repeats": self.repeats,
            "verdict": self.verdict.name(),
        })
        .to_string()
    }
}

/// A source state with its translation.
struct SourceState {
    shown: String,
    translated: Result<Term, String>,
    labels: Vec<String>,
}

enum SourceEnd {
    Finished,
    Suspended(String),
    Stuck(String),
    FuelExhausted,
}

struct SourceTrace {
    theory: Theory,
    sigs: Signatures,
    states: Vec<SourceState>,
    end: SourceEnd,
}

fn feps_trace(p: &feps::FProgram, fuel: usize) -> SourceTrace {
    let (states, out) = feps::f_run(&p.term, &p.sigs, fuel);
    let states = states
        .into_iter()
        .map(|m| {
            let q = feps::FProgram { term: m.clone(), ..p.clone() };
            SourceState {
                shown: m.to_string(),
                translated: feps::check_program(&q, &p.effects).map(|t| t.term).map_err(|e| e.to_string()),
                labels: Vec::new(),
            }
        })
        .collect();
    let end = match out {
        feps::FOutcome::Finished(_) => SourceEnd::Finished,
        feps::FOutcome::Suspended { label, .. } => SourceEnd::Suspended(label),
        feps::FOutcome::Stuck(why) => SourceEnd::Stuck(why),
        feps::FOutcome::FuelExhausted => SourceEnd::FuelExhausted,
    };
    SourceTrace { theory: Theory::ScopedRows, sigs: feps::sigs_to_met(&p.sigs), states, end }
}

fn c_trace(m: &systemc::Comp, fuel: usize) -> SourceTrace {
    let (states, out) = systemc::c_run(m, &CLabels::default(), fuel);
    let states = states
        .into_iter()
        .map(|(n, om)| {
            let q = CProgram { decls: Vec::new(), term: CTerm::Comp(n.clone()) };
            SourceState {
                shown: n.to_string(),
                translated: systemc::check_program(&q, &om).map(|t| t.term).map_err(|e| e.to_string()),
                labels: om.entries.iter().map(|(l, _)| l.clone()).collect(),
            }
        })
        .collect();
    let end = match out {
        COutcome::Finished(_) => SourceEnd::Finished,
        COutcome::Suspended { label, .. } => SourceEnd::Suspended(label),
        COutcome::Stuck(why) => SourceEnd::Stuck(why),
        COutcome::FuelExhausted => SourceEnd::FuelExhausted,
    };
    SourceTrace { theory: Theory::Sets, sigs: Signatures::new(), states, end }
}

fn met_trace(p: &met::Program, fuel: usize) -> SourceTrace {
    let tr = met::run(&p.term, &RuntimeLabels::default(), &p.sigs, fuel);
    let states = tr
        .states
        .iter()
        .map(|(t, om)| SourceState { shown: t.to_string(), translated: Ok(t.clone()), labels: om.names() })
        .collect();
    let end = match tr.outcome {
        Outcome::Finished(_) => SourceEnd::Finished,
        Outcome::Suspended { label, .. } => SourceEnd::Suspended(label),
        Outcome::Stuck(why) => SourceEnd::Stuck(why),
        Outcome::FuelExhausted => SourceEnd::FuelExhausted,
    };
    SourceTrace { theory: p.theory, sigs: p.sigs.clone(), states, end }
}

/// The core evaluator, run on demand, with normalised states cached.
struct Target<'a> {
    sigs: &'a Signatures,
    states: Vec<(Term, RuntimeLabels)>,
    norm: Vec<Option<Term>>,
    end: Option<StepResult>,
}

impl<'a> Target<'a> {
    fn new(start: Term, sigs: &'a Signatures) -> Target<'a> {
        Target { sigs, states: vec![(start, RuntimeLabels::default())], norm: vec![None], end: None }
    }

    /// Make state `k` available; false when the run ended before it.
    fn reach(&mut self, k: usize) -> bool {
        while self.states.len() <= k {
            if self.end.is_some() {
                return false;
            }
            let (t, om) = self.states.last().expect("nonempty");
            let mut om = om.clone();
            match step(t, &mut om, self.sigs) {
                StepResult::Stepped(n, _) => {
                    self.states.push((n, om));
                    self.norm.push(None);
                }
                other => self.end = Some(other),
            }
        }
        true
    }

    fn normal(&mut self, k: usize) -> &Term {
        if self.norm[k].is_none() {
            self.norm[k] = Some(admin_normalise(&self.states[k].0));
        }
        self.norm[k].as_ref().expect("just set")
    }

    fn labels(&self, k: usize) -> Vec<String> {
        self.states[k].1.names()
    }

    fn outcome(&self) -> String {
        match &self.end {
            None => "running".into(),
            Some(StepResult::Finished) => format!("finished {}", self.states.last().expect("nonempty").0),
            Some(StepResult::Suspended { label, payload, .. }) => format!("suspended do {label} {payload}"),
            Some(StepResult::Stuck(why)) => format!("stuck: {why}"),
            Some(StepResult::Stepped(..)) => unreachable!("stepped states are pushed"),
        }
    }
}

/// Run the source program and check every step against the core
/// evaluator on its translation.
pub fn lockstep_simulate(id: &str, src: &Source, fuel: usize, window: usize) -> DiffReport {
    let mut report = DiffReport {
        id: id.to_string(),
        calculus: src.calculus(),
        records: Vec::new(),
        source_steps: 0,
        matched: 0,
        target_steps: 0,
        max_window: 0,
        repeats: 0,
        source_outcome: String::new(),
        target_outcome: String::new(),
        verdict: Verdict::Match,
    };
    let skip = |mut r: DiffReport, why: &str| {
        r.verdict = Verdict::Skipped(why.into());
        r
    };
    let trace = match src {
        Source::Met(p) if !p.decls.is_empty() => return skip(report, "open program"),
        Source::Feps(p) if !p.decls.is_empty() => return skip(report, "open program"),
        Source::SystemC(p) if !p.decls.is_empty() => return skip(report, "open program"),
        Source::SystemC(CProgram { term: CTerm::Block(_), .. }) => return skip(report, "a block, not a computation"),
        Source::Met(p) => met_trace(p, fuel),
        Source::Feps(p) => feps_trace(p, fuel),
        Source::SystemC(CProgram { term: CTerm::Comp(m), .. }) => {
            // Elaboration fills in the annotations evaluation needs.
            let q = CProgram { decls: Vec::new(), term: CTerm::Comp(m.clone()) };
            match systemc::check_program(&q, &CLabels::default()) {
                Ok(t) => match t.elab {
                    CTerm::Comp(m) => c_trace(&m, fuel),
                    CTerm::Block(_) => unreachable!("computations elaborate to computations"),
                },
                Err(e) => return skip(report, &format!("ill-typed source: {e}")),
            }
        }
    };
    simulate(&mut report, trace, window);
    report
}

fn simulate(report: &mut DiffReport, trace: SourceTrace, window: usize) {
    let theory = trace.theory;
    let start = match &trace.states[0].translated {
        Ok(t) => t.clone(),
        Err(e) => {
            report.verdict = Verdict::Skipped(format!("ill-typed source: {e}"));
            return;
        }
    };
    let mut target = Target::new(start, &trace.sigs);
    let mut pos = 0;
    report.source_steps = trace.states.len() - 1;
    for (i, st) in trace.states.iter().enumerate().skip(1) {
        let translated = match &st.translated {
            Ok(t) => t.clone(),
            Err(e) => {
                report.verdict = Verdict::Mismatch(format!("step {i}: source state does not check: {e}"));
                report.records.push(StepRecord {
                    index: i,
                    source: st.shown.clone(),
                    translated: Term::Unit,
                    target: Vec::new(),
                    verdict: report.verdict.clone(),
                    repeated: false,
                });
                break;
            }
        };
        let want = admin_normalise(&translated);
        let matches = |target: &mut Target, k: usize| {
            let corr = positional_corr(&st.labels, &target.labels(k));
            let got = target.normal(k).clone();
            alpha_label_equiv_in(theory, &want, &got, &corr)
        };
        let mut found = None;
        let mut repeated = false;
        for k in pos..=pos + window {
            if !target.reach(k) {
                break;
            }
            if matches(&mut target, k) {
                if found.is_none() {
                    found = Some(k);
                } else {
                    repeated = true;
                    break;
                }
            }
        }
        let (verdict, upto) = match found {
            Some(k) => (Verdict::Match, k),
            None => {
                let last = (pos + window).min(target.states.len() - 1);
                (Verdict::Mismatch(format!("step {i}: no target state within {window} steps matches")), last)
            }
        };
        report.records.push(StepRecord {
            index: i,
            source: st.shown.clone(),
            translated,
            target: target.states[pos + 1..=upto.max(pos)].iter().map(|(t, _)| t.clone()).collect(),
            verdict: verdict.clone(),
            repeated,
        });
        if verdict.is_mismatch() {
            report.verdict = verdict;
            break;
        }
        report.matched += 1;
        report.repeats += usize::from(repeated);
        report.max_window = report.max_window.max(upto - pos);
        pos = upto;
    }
    if !report.verdict.is_mismatch() {
        report.verdict = finish(&trace, &mut target, pos, window, theory);
    }
    report.target_steps = pos;
    report.source_outcome = match &trace.end {
        SourceEnd::Finished => format!("finished {}", trace.states.last().expect("nonempty").shown),
        SourceEnd::Suspended(l) => format!("suspended at {l}"),
        SourceEnd::Stuck(why) => format!("stuck: {why}"),
        SourceEnd::FuelExhausted => "fuel exhausted".into(),
    };
    report.target_outcome = target.outcome();
}

/// After the last source step, the target must end the same way.
fn finish(trace: &SourceTrace, target: &mut Target, pos: usize, window: usize, theory: Theory) -> Verdict {
    let last = trace.states.last().expect("nonempty");
    match &trace.end {
        SourceEnd::FuelExhausted => Verdict::Match,
        SourceEnd::Stuck(why) => Verdict::Mismatch(format!("source is stuck: {why}")),
        SourceEnd::Finished | SourceEnd::Suspended(_) => {
            target.reach(pos + window + 1);
            let Some(end) = target.end.clone() else {
                return Verdict::Mismatch(format!("target still running {window} steps after the source ended"));
            };
            let k = target.states.len() - 1;
            let corr = positional_corr(&last.labels, &target.labels(k));
            match (&trace.end, end) {
                (SourceEnd::Finished, StepResult::Finished) => {
                    let want = admin_normalise(last.translated.as_ref().expect("matched states translate"));
                    let got = target.normal(k).clone();
                    if alpha_label_equiv_in(theory, &want, &got, &corr) {
                        Verdict::Match
                    } else {
                        Verdict::Mismatch(format!("final values differ: {want} vs {got}"))
                    }
                }
                (SourceEnd::Suspended(l), StepResult::Suspended { label, .. }) => {
                    if corr.get(l).unwrap_or(l) == &label {
                        Verdict::Match
                    } else {
                        Verdict::Mismatch(format!("suspended at {l} but the target at {label}"))
                    }
                }
                _ => Verdict::Mismatch(format!("outcomes differ; target {}", target.outcome())),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(c: Calculus, text: &str) -> DiffReport {
        let src = Source::parse(c, text).unwrap();
        lockstep_simulate("t", &src, 1000, DEFAULT_WINDOW)
    }

    #[test]
    fn pure_values_match_trivially() {
        let r = sim(Calculus::Feps, "()");
        assert_eq!(r.verdict, Verdict::Match);
        assert_eq!(r.source_steps, 0);
    }

    #[test]
    fn feps_sum_matches() {
        let r = sim(
            Calculus::Feps,
            "effect yield : Int =>> 1\n\
             let sum = tfun ($e) -> handler<$e; Int> { yield p r -> p + r () } in\n\
             let s = sum @{} in\n\
             s (fun<yield> (x: 1) -> do yield 42; do yield 37; 0)",
        );
        assert_eq!(r.verdict, Verdict::Match, "{}", r.render());
        assert!(r.target_outcome.ends_with("79"), "{}", r.target_outcome);
    }

    #[test]
    fn c_sum_matches() {
        let r = sim(
            Calculus::SystemC,
            "def sum = { (f: (y: (Int) => 1) => Int) => \
               try { y: (Int) => 1 => f(y) } with { p r => p + r(()) } } in \
             sum({ (y: (Int) => 1) => y(42); y(37); 0 })",
        );
        assert_eq!(r.verdict, Verdict::Match, "{}", r.render());
        assert!(r.target_outcome.ends_with("79"), "{}", r.target_outcome);
    }

    #[test]
    fn open_programs_are_skipped() {
        let r = sim(Calculus::SystemC, "block y : (Int) => 1\ny(1)");
        assert!(matches!(r.verdict, Verdict::Skipped(_)));
    }
}
