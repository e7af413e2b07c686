//! Generation of closed row-based programs. Rows must match the
//! context exactly, so every construct is chosen with the row it runs at.

use super::Rng;
use crate::effect::{Atom, Row};
use crate::feps::{Clause, Comp, FKind, FProgram, FSig, FSignatures, FType, Value};

pub fn feps_signatures() -> FSignatures {
    [
        ("yield".to_string(), FSig { arg: FType::Int, res: FType::Unit }),
        ("ask".to_string(), FSig { arg: FType::Unit, res: FType::Int }),
    ]
    .into_iter()
    .collect()
}

/// Nesting depth of a computation.
pub fn depth(m: &Comp) -> usize {
    1 + match m {
        Comp::Return(v) | Comp::Do(_, v) | Comp::TyApp(v, _) => value_depth(v),
        Comp::App(v, w) => value_depth(v).max(value_depth(w)),
        Comp::Let(_, m, n) | Comp::Add(m, n) => depth(m).max(depth(n)),
        Comp::Handle { body, clause, .. } => depth(body).max(depth(&clause.body)),
    }
}

fn value_depth(v: &Value) -> usize {
    match v {
        Value::Unit | Value::Int(_) | Value::Var(_) => 0,
        Value::Lam { body, .. } => 1 + depth(body),
        Value::TyLam(_, _, v) => 1 + value_depth(v),
        Value::Handler { clause, .. } => 1 + depth(&clause.body),
    }
}

fn need(goal: &FType) -> usize {
    if matches!(goal, FType::Arrow(..)) {
        3
    } else {
        1
    }
}

fn plus(l: &str, e: &Row) -> Row {
    Row(std::iter::once(Atom::label(l)).chain(e.0.iter().cloned()).collect())
}

pub struct FepsGen {
    rng: Rng,
    max_depth: usize,
    next: usize,
    sigs: FSignatures,
}

type Env = Vec<(String, FType)>;

fn with(env: &Env, x: &str, t: &FType) -> Env {
    let mut env = env.clone();
    env.push((x.to_string(), t.clone()));
    env
}

impl FepsGen {
    pub fn new(seed: u64, max_depth: usize) -> FepsGen {
        FepsGen { rng: super::rng(seed), max_depth, next: 0, sigs: feps_signatures() }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.next += 1;
        format!("{base}{}", self.next)
    }

    fn base(&mut self) -> FType {
        if self.rng.coin(0.5) {
            FType::Int
        } else {
            FType::Unit
        }
    }

    fn row(&mut self) -> Row {
        let names: &[&[&str]] = &[&[], &["yield"], &["ask"], &["yield", "ask"]];
        Row::labels(self.rng.pick(names))
    }

    fn goal(&mut self) -> FType {
        match self.rng.below(5) {
            0 | 1 => FType::Int,
            2 => FType::Unit,
            _ => {
                let (a, e, b) = (self.base(), self.row(), self.base());
                FType::arrow(a, e, b)
            }
        }
    }

    /// A closed program of a random type at a random row.
    pub fn program(&mut self) -> FProgram {
        let goal = self.goal();
        let effects = self.row();
        let term = self.comp(&goal, &effects, &Env::new(), self.max_depth);
        FProgram { sigs: self.sigs.clone(), effects, decls: Vec::new(), term }
    }

    /// A value of depth below `d`, so `return` of it fits in `d`.
    fn value(&mut self, goal: &FType, env: &Env, d: usize) -> Value {
        let vars: Vec<&String> = env.iter().filter(|(_, t)| t == goal).map(|(x, _)| x).collect();
        if !vars.is_empty() && self.rng.coin(0.4) {
            return Value::Var(vars[self.rng.below(vars.len())].clone());
        }
        match goal {
            FType::Int => Value::Int(self.rng.below(50) as i64),
            FType::Unit => Value::Unit,
            FType::Arrow(a, e, b) => {
                let x = self.fresh("x");
                let body = self.comp(b, e, &with(env, &x, a), d - 2);
                Value::lam(e.clone(), x, (**a).clone(), body)
            }
            other => unreachable!("no values generated at {other:?}"),
        }
    }

    fn comp(&mut self, goal: &FType, e: &Row, env: &Env, d: usize) -> Comp {
        let need = need(goal);
        debug_assert!(d >= need);
        if d <= need || self.rng.coin(0.15) {
            return Comp::Return(self.value(goal, env, d));
        }
        loop {
            match self.rng.below(12) {
                0 => {
                    let a = if d >= 4 && self.rng.coin(0.3) {
                        let (a, b) = (self.base(), self.base());
                        FType::arrow(a, e.clone(), b)
                    } else {
                        self.base()
                    };
                    let x = self.fresh("x");
                    let m = self.comp(&a, e, env, d - 1);
                    return Comp::let_(x.clone(), m, self.comp(goal, e, &with(env, &x, &a), d - 1));
                }
                1 => {
                    let m = self.comp(&FType::Unit, e, env, d - 1);
                    return Comp::seq(m, self.comp(goal, e, env, d - 1));
                }
                2 if *goal == FType::Int => {
                    let m = self.comp(&FType::Int, e, env, d - 1);
                    return Comp::add(m, self.comp(&FType::Int, e, env, d - 1));
                }
                3 => {
                    let ops: Vec<(String, FSig)> = self
                        .sigs
                        .iter()
                        .filter(|(l, s)| s.res == *goal && e.contains_label(l))
                        .map(|(l, s)| (l.clone(), s.clone()))
                        .collect();
                    if ops.is_empty() {
                        continue;
                    }
                    let (l, s) = self.rng.pick(&ops).clone();
                    return Comp::Do(l, self.value(&s.arg, env, d - 1));
                }
                4 | 5 if d >= need + 2 => {
                    // Apply a function at the current row.
                    let a = self.base();
                    let fty = FType::arrow(a.clone(), e.clone(), goal.clone());
                    let f = self.value(&fty, env, d);
                    return Comp::App(f, self.value(&a, env, d));
                }
                6 | 7 if d >= need + 3 => {
                    let l = self.rng.pick(&["yield", "ask"]).to_string();
                    let body = self.comp(goal, &plus(&l, e), env, d - 1);
                    let clause = self.clause(&l, goal, e, env, d - 1);
                    return Comp::handle(e.clone(), body, clause);
                }
                8 | 9 if d >= need + 3 => {
                    // Apply a handler value to a thunk.
                    let l = self.rng.pick(&["yield", "ask"]).to_string();
                    let handled = plus(&l, e);
                    let clause = self.clause(&l, goal, e, env, d - 2);
                    let h = Value::Handler { row: e.clone(), result: goal.clone(), clause: Box::new(clause) };
                    let u = self.fresh("u");
                    let thunk = Value::lam(handled.clone(), u, FType::Unit, self.comp(goal, &handled, env, d - 2));
                    return Comp::App(h, thunk);
                }
                10 if d >= need + 4 => {
                    // Instantiate an effect-polymorphic function at `e`.
                    let (a, alpha) = (self.base(), self.fresh("$e"));
                    let x = self.fresh("x");
                    let inner = Row(vec![Atom::var(&alpha)]);
                    let body = self.comp(goal, &inner, &with(env, &x, &a), d - 4);
                    let poly = Value::TyLam(alpha, FKind::Effect, Box::new(Value::lam(inner, x, a.clone(), body)));
                    let f = self.fresh("f");
                    let call = Comp::App(Value::Var(f.clone()), self.value(&a, env, 1));
                    return Comp::let_(f, Comp::TyApp(poly, FType::Row(e.clone())), call);
                }
                11 if d >= need + 4 && need == 1 => {
                    // Instantiate a value-polymorphic identity at the goal.
                    let (t, x, f) = (self.fresh("t"), self.fresh("x"), self.fresh("f"));
                    let id = Value::lam(e.clone(), x.clone(), FType::Var(t.clone()), Comp::Return(Value::Var(x)));
                    let poly = Value::TyLam(t, FKind::Value, Box::new(id));
                    let arg = self.value(goal, env, 1);
                    return Comp::let_(f.clone(), Comp::TyApp(poly, goal.clone()), Comp::App(Value::Var(f), arg));
                }
                _ => return Comp::Return(self.value(goal, env, d)),
            }
        }
    }

    /// `{ l p r -> N }` resuming at `e` with result `goal`.
    fn clause(&mut self, l: &str, goal: &FType, e: &Row, env: &Env, d: usize) -> Clause {
        let sig = self.sigs[l].clone();
        let (p, r) = (self.fresh("p"), self.fresh("r"));
        let env = with(&with(env, &p, &sig.arg), &r, &FType::arrow(sig.res.clone(), e.clone(), goal.clone()));
        let resume = |g: &mut FepsGen| Comp::App(Value::Var(r.clone()), g.value(&sig.res, &env, 1));
        let body = match self.rng.below(4) {
            0 => resume(self),
            1 if *goal == FType::Int && d >= 3 => {
                let m = self.comp(&FType::Int, e, &env, d - 1);
                Comp::add(m, resume(self))
            }
            2 if d > need(goal) && d >= 3 => {
                let z = self.fresh("z");
                let rest = self.comp(goal, e, &with(&env, &z, goal), d - 1);
                Comp::let_(z, resume(self), rest)
            }
            _ => self.comp(goal, e, &env, d - 1),
        };
        Clause { label: l.to_string(), param: p, resume: r, body }
    }
}

/// Render a generated program as `.fe` source.
pub fn render(p: &FProgram) -> String {
    use crate::feps::print;
    let mut s = String::new();
    if !p.effects.is_empty() {
        s.push_str(&format!("#effects {}\n", crate::met::print::row(&p.effects)));
    }
    for (l, sig) in &p.sigs {
        s.push_str(&format!("effect {l} : {} =>> {}\n", print::ty(&sig.arg), print::ty(&sig.res)));
    }
    s.push_str(&print::comp(&p.term));
    s
}

/// `count` generated programs from `seed`.
pub fn gen_programs(seed: u64, max_depth: usize, count: usize) -> Vec<FProgram> {
    let mut g = FepsGen::new(seed, max_depth);
    (0..count).map(|_| g.program()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feps::{check_program, parse_program};

    #[test]
    fn generated_programs_typecheck_and_round_trip() {
        for seed in 0..3 {
            for p in gen_programs(seed, 7, 200) {
                assert!(depth(&p.term) <= 7, "{}", render(&p));
                if let Err(e) = check_program(&p, &p.effects) {
                    panic!("{}\n{e}", render(&p));
                }
                assert_eq!(parse_program(&render(&p)).unwrap(), p);
            }
        }
    }
}
