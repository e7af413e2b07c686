//! Generation of closed capability-based programs. Every capability is
//! introduced by a `try` around its uses, so programs check at `{}`.

use super::Rng;
use crate::systemc::{Block, BlockType, CClause, CProgram, CTerm, CType, CValue, Comp};

/// Nesting depth of a computation.
pub fn depth(m: &Comp) -> usize {
    1 + match m {
        Comp::Return(v) => value_depth(v),
        Comp::Call(p, vs, qs) => {
            let v = vs.iter().map(value_depth).max().unwrap_or(0);
            let q = qs.iter().map(block_depth).max().unwrap_or(0);
            block_depth(p).max(v).max(q)
        }
        Comp::Let(_, m, n) | Comp::Add(m, n) => depth(m).max(depth(n)),
        Comp::Def(_, p, n) => block_depth(p).max(depth(n)),
        Comp::Try { body, clause, .. } | Comp::TryRt { body, clause, .. } => depth(body).max(depth(&clause.body)),
    }
}

fn value_depth(v: &CValue) -> usize {
    match v {
        CValue::Unit | CValue::Int(_) | CValue::Var(_) => 0,
        CValue::Box(p, _) => 1 + block_depth(p),
    }
}

fn block_depth(p: &Block) -> usize {
    match p {
        Block::Var(_) | Block::Cap(_) => 0,
        Block::Lit { body, .. } => 1 + depth(body),
        Block::Unbox(v) => 1 + value_depth(v),
    }
}

#[derive(Clone, Default)]
struct Env {
    vals: Vec<(String, CType)>,
    /// Callable blocks of simple type `(A) => B`.
    blocks: Vec<(String, CType, CType)>,
}

impl Env {
    fn val(&self, x: &str, a: &CType) -> Env {
        let mut e = self.clone();
        e.vals.push((x.to_string(), a.clone()));
        e
    }

    fn block(&self, f: &str, a: &CType, b: &CType) -> Env {
        let mut e = self.clone();
        e.blocks.push((f.to_string(), a.clone(), b.clone()));
        e
    }
}

pub struct CGen {
    rng: Rng,
    max_depth: usize,
    next: usize,
}

impl CGen {
    pub fn new(seed: u64, max_depth: usize) -> CGen {
        CGen { rng: super::rng(seed), max_depth, next: 0 }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.next += 1;
        format!("{base}{}", self.next)
    }

    fn base(&mut self) -> CType {
        if self.rng.coin(0.5) {
            CType::Int
        } else {
            CType::Unit
        }
    }

    /// A closed program computing an `Int` or `1`.
    pub fn program(&mut self) -> CProgram {
        let goal = self.base();
        let m = self.comp(&goal, &Env::default(), self.max_depth);
        CProgram { decls: Vec::new(), term: CTerm::Comp(m) }
    }

    fn value(&mut self, goal: &CType, env: &Env) -> CValue {
        let vars: Vec<&String> = env.vals.iter().filter(|(_, t)| t == goal).map(|(x, _)| x).collect();
        if !vars.is_empty() && self.rng.coin(0.5) {
            return CValue::Var(self.rng.pick(&vars).to_string());
        }
        match goal {
            CType::Int => CValue::Int(self.rng.below(50) as i64),
            _ => CValue::Unit,
        }
    }

    /// A call of a block in scope returning `goal`, if there is one.
    fn call(&mut self, goal: &CType, env: &Env) -> Option<Comp> {
        let fs: Vec<(String, CType)> =
            env.blocks.iter().filter(|(_, _, b)| b == goal).map(|(f, a, _)| (f.clone(), a.clone())).collect();
        if fs.is_empty() {
            return None;
        }
        let (f, a) = self.rng.pick(&fs).clone();
        Some(Comp::Call(Block::Var(f), vec![self.value(&a, env)], Vec::new()))
    }

    /// A block literal `{ (x: A) => M }` of depth at most `d`.
    fn literal(&mut self, a: &CType, b: &CType, env: &Env, d: usize) -> Block {
        let x = self.fresh("x");
        let body = self.comp(b, &env.val(&x, a), d - 1);
        Block::lit(vec![(x, a.clone())], Vec::new(), body)
    }

    fn comp(&mut self, goal: &CType, env: &Env, d: usize) -> Comp {
        if d <= 1 || self.rng.coin(0.15) {
            if self.rng.coin(0.6) {
                if let Some(c) = self.call(goal, env) {
                    return c;
                }
            }
            return Comp::Return(self.value(goal, env));
        }
        loop {
            match self.rng.below(12) {
                0 => {
                    let (a, x) = (self.base(), self.fresh("x"));
                    let m = self.comp(&a, env, d - 1);
                    return Comp::let_(x.clone(), m, self.comp(goal, &env.val(&x, &a), d - 1));
                }
                1 => {
                    let m = self.comp(&CType::Unit, env, d - 1);
                    return Comp::seq(m, self.comp(goal, env, d - 1));
                }
                2 if *goal == CType::Int => {
                    let m = self.comp(&CType::Int, env, d - 1);
                    return Comp::add(m, self.comp(&CType::Int, env, d - 1));
                }
                3 | 4 => {
                    if let Some(c) = self.call(goal, env) {
                        return c;
                    }
                }
                5 | 6 => {
                    // `try { f: (A) => B => M } with { p r => N }`
                    let (a, b) = (self.base(), self.base());
                    let f = self.fresh("f");
                    let body = self.comp(goal, &env.block(&f, &a, &b), d - 1);
                    let (p, r) = (self.fresh("p"), self.fresh("r"));
                    let cenv = env.val(&p, &a).block(&r, &b, goal);
                    let resume = Comp::Call(Block::Var(r.clone()), vec![self.value(&b, &cenv)], Vec::new());
                    let clause_body = match self.rng.below(3) {
                        0 => resume,
                        1 if *goal == CType::Int && d >= 3 => {
                            let m = self.comp(&CType::Int, &cenv, d - 2);
                            Comp::add(m, resume)
                        }
                        _ => self.comp(goal, &cenv, d - 1),
                    };
                    return Comp::try_(
                        f,
                        BlockType::simple(a, b),
                        body,
                        CClause { param: p, resume: r, body: clause_body },
                    );
                }
                7 | 8 if d >= 3 => {
                    // `def g = { (x: A) => M } in N`
                    let (a, b) = (self.base(), self.base());
                    let g = self.fresh("g");
                    let p = self.literal(&a, &b, env, d - 1);
                    return Comp::def(g.clone(), p, self.comp(goal, &env.block(&g, &a, &b), d - 1));
                }
                9 | 10 if d >= 4 => {
                    // A higher-order block applied to a block argument.
                    let a = self.base();
                    let (h, x, k) = (self.fresh("h"), self.fresh("x"), self.fresh("k"));
                    let body = self.comp(goal, &env.val(&x, &a).block(&k, &a, goal), d - 2);
                    let kty = BlockType::simple(a.clone(), goal.clone());
                    let lit = Block::lit(vec![(x, a.clone())], vec![(k, kty)], body);
                    let candidates: Vec<String> = env
                        .blocks
                        .iter()
                        .filter(|(_, pa, pb)| *pa == a && pb == goal)
                        .map(|(f, _, _)| f.clone())
                        .collect();
                    let arg = if !candidates.is_empty() && self.rng.coin(0.5) {
                        Block::Var(self.rng.pick(&candidates).clone())
                    } else {
                        self.literal(&a, goal, env, d - 2)
                    };
                    let call = Comp::Call(Block::Var(h.clone()), vec![self.value(&a, env)], vec![arg]);
                    return Comp::def(h, lit, call);
                }
                11 if d >= 5 => {
                    // Box a block into a value and unbox it to call it.
                    let a = self.base();
                    let b = self.fresh("b");
                    let lit = self.literal(&a, goal, env, d - 3);
                    let boxed = Comp::Return(CValue::Box(Box::new(lit), None));
                    let call = Comp::Call(Block::Unbox(CValue::Var(b.clone())), vec![self.value(&a, env)], Vec::new());
                    return Comp::let_(b, boxed, call);
                }
                _ => return Comp::Return(self.value(goal, env)),
            }
        }
    }
}

/// Render a generated program as `.sc` source.
pub fn render(p: &CProgram) -> String {
    match &p.term {
        CTerm::Comp(m) => crate::systemc::print::comp(m),
        CTerm::Block(q) => crate::systemc::print::block(q),
    }
}

/// `count` generated programs from `seed`.
pub fn gen_programs(seed: u64, max_depth: usize, count: usize) -> Vec<CProgram> {
    let mut g = CGen::new(seed, max_depth);
    (0..count).map(|_| g.program()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systemc::{check_program, parse_program, CLabels};

    #[test]
    fn generated_programs_typecheck_at_no_capabilities() {
        for seed in 0..3 {
            for p in gen_programs(seed, 7, 200) {
                let CTerm::Comp(m) = &p.term else { unreachable!() };
                assert!(depth(m) <= 7, "{}", render(&p));
                match check_program(&p, &CLabels::default()) {
                    Ok(t) => assert!(t.caps.is_empty(), "{}", render(&p)),
                    Err(e) => panic!("{}\n{e}", render(&p)),
                }
                assert_eq!(parse_program(&render(&p)).unwrap(), p);
            }
        }
    }
}
