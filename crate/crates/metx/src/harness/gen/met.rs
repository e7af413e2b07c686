//! Type-directed generation of closed core terms. A goal type and an
//! ambient effect context select the constructs that can produce it;
//! every construct consumes the AST depth it adds.

use super::Rng;
use crate::effect::{subeffect, Atom, Row, Theory};
use crate::met::{
    typecheck, types::type_equiv, Context, Handler, Kind, Modality, RuntimeLabels, Sig, Signatures, Term, Type,
};

/// The global operations generated terms use.
pub fn met_signatures() -> Signatures {
    [
        ("yield".to_string(), Sig { arg: Type::Int, res: Type::Unit }),
        ("ask".to_string(), Sig { arg: Type::Unit, res: Type::Int }),
    ]
    .into_iter()
    .collect()
}

/// A generated term with the goal it was built for.
#[derive(Clone, Debug)]
pub struct GenTerm {
    pub term: Term,
    pub ty: Type,
    pub ambient: Row,
}

/// The least depth at which a goal has an inhabitant: a boxed function
/// needs `mod`, `fun` and a body.
fn need(goal: &Type) -> usize {
    if matches!(goal, Type::Boxed(..)) {
        3
    } else {
        1
    }
}

/// Nesting depth of a term.
pub fn depth(m: &Term) -> usize {
    1 + match m {
        Term::Unit | Term::Int(_) | Term::Var(_) => 0,
        Term::Lam(_, _, b) | Term::TyLam(_, _, b) | Term::TyApp(b, _) | Term::Mod(_, b) => depth(b),
        Term::Do(_, b) | Term::Local(_, _, b) => depth(b),
        Term::App(a, b) | Term::Let(_, a, b) | Term::Add(a, b) => depth(a).max(depth(b)),
        Term::LetMod { bound, body, .. } => depth(bound).max(depth(body)),
        Term::Handle(_, b, h) => depth(b).max(depth(&h.ret_body)).max(depth(&h.op_body)),
    }
}

#[derive(Clone)]
struct Scope {
    /// Variables, all of kind `Abs`, so usable under any lock.
    vars: Vec<(String, Type)>,
    /// Labels in scope with their signatures.
    labels: Vec<(String, Sig)>,
}

impl Scope {
    fn with_var(&self, x: &str, t: &Type) -> Scope {
        let mut s = self.clone();
        s.vars.push((x.to_string(), t.clone()));
        s
    }
}

pub struct MetGen {
    rng: Rng,
    theory: Theory,
    max_depth: usize,
    next: usize,
    sigs: Signatures,
}

fn row(names: &[&str]) -> Row {
    Row(names.iter().map(|n| Atom::label(*n)).collect())
}

fn boxed_fun(f: Row, a: Type, b: Type) -> Type {
    Type::boxed(Modality::Absolute(f), Type::arrow(a, b))
}

fn cons(l: &str, e: &Row) -> Row {
    Row(std::iter::once(Atom::label(l)).chain(e.0.iter().cloned()).collect())
}

impl MetGen {
    pub fn new(theory: Theory, seed: u64, max_depth: usize) -> MetGen {
        MetGen { rng: super::rng(seed), theory, max_depth, next: 0, sigs: met_signatures() }
    }

    pub fn signatures(&self) -> &Signatures {
        &self.sigs
    }

    fn fresh(&mut self, base: &str) -> String {
        self.next += 1;
        format!("{base}{}", self.next)
    }

    fn top_scope(&self) -> Scope {
        Scope { vars: Vec::new(), labels: self.sigs.iter().map(|(l, s)| (l.clone(), s.clone())).collect() }
    }

    fn base(&mut self) -> Type {
        if self.rng.coin(0.5) {
            Type::Int
        } else {
            Type::Unit
        }
    }

    fn global_row(&mut self) -> Row {
        match self.rng.below(4) {
            0 => Row::empty(),
            1 => row(&["yield"]),
            2 => row(&["ask"]),
            _ => row(&["yield", "ask"]),
        }
    }

    fn goal(&mut self) -> Type {
        match self.rng.below(5) {
            0 | 1 => Type::Int,
            2 => Type::Unit,
            _ => {
                let (f, a, b) = (self.global_row(), self.base(), self.base());
                boxed_fun(f, a, b)
            }
        }
    }

    /// A closed term of a random goal type at a random ambient context.
    pub fn term(&mut self) -> GenTerm {
        let ty = self.goal();
        let ambient = self.global_row();
        let term = self.at(&ty, &ambient);
        GenTerm { term, ty, ambient }
    }

    /// A closed term of the given goal at the given ambient context.
    pub fn at(&mut self, goal: &Type, ambient: &Row) -> Term {
        let scope = self.top_scope();
        self.gen(goal, ambient, &scope, self.max_depth)
    }

    fn can_perform(&self, l: &str, e: &Row) -> bool {
        subeffect(self.theory, &row(&[l]), e)
    }

    /// Handling `l` extends the ambient context with `l`; simple rows
    /// forbid the duplicate this makes when `l` is already present.
    fn can_handle(&self, l: &str, e: &Row) -> bool {
        self.theory != Theory::SimpleRows || !e.contains_label(l)
    }

    fn leaf(&mut self, goal: &Type, e: &Row, s: &Scope, d: usize) -> Term {
        let vars: Vec<&String> =
            s.vars.iter().filter(|(_, t)| type_equiv(self.theory, t, goal)).map(|(x, _)| x).collect();
        if !vars.is_empty() && self.rng.coin(0.4) {
            return Term::var(vars[self.rng.below(vars.len())].clone());
        }
        match goal {
            Type::Int => Term::Int(self.rng.below(50) as i64),
            Type::Boxed(Modality::Absolute(f), inner) if d >= 3 => match &**inner {
                Type::Arrow(a, b) => {
                    let x = self.fresh("x");
                    let body = self.gen(b, f, &s.with_var(&x, a), d - 2);
                    Term::modal(Modality::Absolute(f.clone()), Term::lam(x, (**a).clone(), body))
                }
                _ => unreachable!("goals box functions"),
            },
            _ => {
                let _ = e;
                Term::Unit
            }
        }
    }

    fn gen(&mut self, goal: &Type, e: &Row, s: &Scope, d: usize) -> Term {
        let need = need(goal);
        debug_assert!(d >= need, "depth {d} cannot build {goal:?}");
        if d <= need || self.rng.coin(0.15) {
            return self.leaf(goal, e, s, d);
        }
        loop {
            match self.rng.below(11) {
                0 if d > need => {
                    let a = self.base();
                    let x = self.fresh("x");
                    let m = self.gen(&a, e, s, d - 1);
                    return Term::let_(x.clone(), m, self.gen(goal, e, &s.with_var(&x, &a), d - 1));
                }
                1 if d > need => {
                    let m = self.gen(&Type::Unit, e, s, d - 1);
                    return Term::seq(m, self.gen(goal, e, s, d - 1));
                }
                2 if *goal == Type::Int => {
                    let a = self.gen(&Type::Int, e, s, d - 1);
                    return Term::add(a, self.gen(&Type::Int, e, s, d - 1));
                }
                3 => {
                    let ops: Vec<(String, Sig)> = s
                        .labels
                        .iter()
                        .filter(|(l, sig)| sig.res == *goal && self.can_perform(l, e))
                        .cloned()
                        .collect();
                    if ops.is_empty() {
                        continue;
                    }
                    let (l, sig) = ops[self.rng.below(ops.len())].clone();
                    return Term::do_(l, self.gen(&sig.arg, e, s, d - 1));
                }
                4 if d >= need + 2 => {
                    let a = self.base();
                    let x = self.fresh("x");
                    let body = self.gen(goal, e, &s.with_var(&x, &a), d - 2);
                    let arg = self.gen(&a, e, s, d - 1);
                    return Term::app(Term::lam(x, a, body), arg);
                }
                5 | 6 if d >= need + 3 => {
                    let labels: Vec<(String, Sig)> =
                        s.labels.iter().filter(|(l, _)| self.can_handle(l, e)).cloned().collect();
                    if labels.is_empty() {
                        continue;
                    }
                    let (l, sig) = labels[self.rng.below(labels.len())].clone();
                    return self.handler(goal, e, s, d, &l, &sig);
                }
                7 if d >= need + 4 => {
                    let l = self.fresh("l");
                    let sig = if self.rng.coin(0.5) {
                        Sig { arg: Type::Int, res: Type::Unit }
                    } else {
                        Sig { arg: Type::Unit, res: Type::Int }
                    };
                    let mut inner = s.clone();
                    inner.labels.push((l.clone(), sig.clone()));
                    let h = self.handler(goal, e, &inner, d - 1, &l, &sig);
                    return Term::Local(l, sig, Box::new(h));
                }
                8 | 9 if d >= need + 4 => {
                    // Use a boxed function whose effects are available.
                    let f = self.global_row();
                    if !subeffect(self.theory, &f, e) {
                        continue;
                    }
                    let a = self.base();
                    let fty = boxed_fun(f.clone(), a.clone(), goal.clone());
                    let v = if d >= need + 6 && self.rng.coin(0.4) {
                        self.poly(&f, &a, goal, s, d - 1)
                    } else {
                        self.gen_value(&fty, s, d - 1)
                    };
                    let k = self.fresh("f");
                    let arg = self.gen(&a, e, s, d - 2);
                    let call = Term::app(Term::var(&k), arg);
                    return Term::letmod(Modality::identity(), Modality::Absolute(f), k, v, call);
                }
                _ => return self.leaf(goal, e, s, d),
            }
        }
    }

    /// A value of a boxed function type: a variable or `mod`.
    fn gen_value(&mut self, goal: &Type, s: &Scope, d: usize) -> Term {
        self.leaf(goal, &Row::empty(), s, d)
    }

    /// `(Λα. mod<[α]> (λx. M)) {F}` instantiating a polymorphic function.
    fn poly(&mut self, f: &Row, a: &Type, b: &Type, s: &Scope, d: usize) -> Term {
        let alpha = self.fresh("$e");
        let inner_e = if self.rng.coin(0.5) {
            Row(vec![Atom::var(&alpha)])
        } else {
            cons("yield", &Row(vec![Atom::var(&alpha)]))
        };
        let arg = if inner_e.len() == 1 {
            f.clone()
        } else {
            // `yield, α` instantiated at `F` must equal `F`: drop one `yield`.
            match f.0.iter().position(|x| x == &Atom::label("yield")) {
                Some(i) => Row(f.0.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect()),
                None => return self.gen_value(&boxed_fun(f.clone(), a.clone(), b.clone()), s, d),
            }
        };
        let x = self.fresh("x");
        let body = self.gen(b, &inner_e, &s.with_var(&x, a), d - 4);
        let v = Term::modal(Modality::Absolute(inner_e), Term::lam(x, a.clone(), body));
        Term::tyapp(Term::tylam(alpha, Kind::Effect, v), Type::Row(arg))
    }

    /// A handler for `l` around a body of the goal type, annotated with
    /// either the identity or the absolute ambient modality.
    fn handler(&mut self, goal: &Type, e: &Row, s: &Scope, d: usize, l: &str, sig: &Sig) -> Term {
        let mu = if self.rng.coin(0.5) { Modality::identity() } else { Modality::Absolute(e.clone()) };
        let ell = Modality::Relative(row(&[l]));
        let body = self.gen(goal, &cons(l, e), s, d - 1);
        let xr = self.fresh("x");
        let xv = self.fresh("v");
        let ret_tail = self.gen(goal, e, &s.with_var(&xv, goal), d - 2);
        let ret_body = Term::letmod(Modality::identity(), mu.compose(&ell), xv, Term::var(&xr), ret_tail);
        let p = self.fresh("p");
        let r = self.fresh("r");
        let k = self.fresh("k");
        let ps = s.with_var(&p, &sig.arg);
        let resume_arg = |g: &mut MetGen| -> Term {
            let vars: Vec<String> = ps.vars.iter().filter(|(_, t)| *t == sig.res).map(|(x, _)| x.clone()).collect();
            if !vars.is_empty() && g.rng.coin(0.5) {
                Term::var(vars[g.rng.below(vars.len())].clone())
            } else {
                g.leaf(&sig.res, e, &ps, 1)
            }
        };
        let op = match self.rng.below(4) {
            0 => Term::app(Term::var(&k), resume_arg(self)),
            1 if *goal == Type::Int && d >= 5 => {
                let left = self.gen(&Type::Int, e, &ps, d - 3);
                Term::add(left, Term::app(Term::var(&k), resume_arg(self)))
            }
            2 if d >= need(goal) + 4 => {
                let z = self.fresh("z");
                let first = Term::app(Term::var(&k), resume_arg(self));
                let rest = self.gen(goal, e, &ps.with_var(&z, goal), d - 3);
                Term::let_(z, first, rest)
            }
            _ => self.gen(goal, e, &ps, d - 2),
        };
        let op_body = Term::letmod(Modality::identity(), mu.clone(), k, Term::var(&r), op);
        Term::handle(mu, body, Handler { ret_var: xr, ret_body, label: l.to_string(), param: p, resume: r, op_body })
    }
}

/// Generate `count` closed well-typed terms. Candidates the checker
/// rejects are dropped; the second component counts them.
pub fn gen_corpus(theory: Theory, seed: u64, max_depth: usize, count: usize) -> (Vec<GenTerm>, usize) {
    let mut g = MetGen::new(theory, seed, max_depth);
    let sigs = met_signatures();
    let mut out = Vec::new();
    let mut rejected = 0;
    while out.len() < count {
        let t = g.term();
        match typecheck(theory, &sigs, &RuntimeLabels::default(), &Context::new(), &t.term, &t.ambient) {
            Ok(ty) if type_equiv(theory, &ty, &t.ty) => out.push(t),
            _ => rejected += 1,
        }
        if rejected > 10 * count + 100 {
            break;
        }
    }
    (out, rejected)
}

/// Terms generated for one goal, for inspecting what a goal yields.
pub fn for_goal(theory: Theory, seed: u64, max_depth: usize, goal: &Type, ambient: &Row, count: usize) -> Vec<Term> {
    let mut g = MetGen::new(theory, seed, max_depth);
    (0..count).map(|_| g.at(goal, ambient)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::met::parse::{parse_term, parse_type};

    #[test]
    fn every_candidate_typechecks() {
        for theory in Theory::ALL {
            for seed in 0..4 {
                let mut g = MetGen::new(theory, seed, 7);
                for _ in 0..200 {
                    let t = g.term();
                    assert!(depth(&t.term) <= 7, "{}", t.term);
                    let got = typecheck(
                        theory,
                        g.signatures(),
                        &RuntimeLabels::default(),
                        &Context::new(),
                        &t.term,
                        &t.ambient,
                    );
                    match got {
                        Ok(ty) if type_equiv(theory, &ty, &t.ty) => {}
                        other => panic!("{theory:?} seed {seed}: {} @ {}: {other:?}", t.term, t.ambient),
                    }
                }
            }
        }
    }

    #[test]
    fn small_goals_include_canonical_inhabitants() {
        let unit = for_goal(Theory::Sets, 0, 3, &Type::Unit, &Row::empty(), 50);
        assert!(unit.contains(&Term::Unit));
        let goal = parse_type("[yield] (1 -> 1)").unwrap();
        let fns = for_goal(Theory::Sets, 0, 3, &goal, &Row::empty(), 50);
        let want = parse_term("mod<[yield]> (fun (x: 1) -> x)").unwrap();
        assert!(fns.iter().any(|t| crate::harness::alpha_label_equiv(t, &want, &Default::default())));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_corpus(Theory::ScopedRows, 7, 7, 20).0;
        let b = gen_corpus(Theory::ScopedRows, 7, 7, 20).0;
        assert!(a.iter().zip(&b).all(|(x, y)| x.term == y.term));
    }
}
