//! Substitution of values for value variables and of blocks for block
//! variables. A block variable also names a capability at the type
//! level, so block substitution rewrites capability sets as well.
//!
//! The substituted terms are closed at runtime; renaming substitutes a
//! name fresh for the whole term. Neither can capture.

use super::{Block, BlockType, CClause, CType, CValue, CapSet, Comp};
use std::collections::{BTreeMap, BTreeSet};

/// A simultaneous substitution of capability sets for block variables.
pub type SetSubst = BTreeMap<String, CapSet>;

pub fn single(f: &str, with: &CapSet) -> SetSubst {
    std::iter::once((f.to_string(), with.clone())).collect()
}

/// `C[C̅/f̅]`.
pub fn subst_set_map(c: &CapSet, s: &SetSubst) -> CapSet {
    c.iter()
        .flat_map(|n| match s.get(n) {
            Some(with) => with.iter().cloned().collect::<Vec<_>>(),
            None => vec![n.clone()],
        })
        .collect()
}

pub fn subst_vtype_map(a: &CType, s: &SetSubst) -> CType {
    match a {
        CType::Unit | CType::Int => a.clone(),
        CType::Boxed(t, c) => CType::Boxed(Box::new(subst_btype_map(t, s)), subst_set_map(c, s)),
    }
}

pub fn subst_btype_map(t: &BlockType, s: &SetSubst) -> BlockType {
    let vals = t.vals.iter().map(|a| subst_vtype_map(a, s)).collect();
    let blocks = t.blocks.iter().map(|(g, u)| (g.clone(), subst_btype_map(u, s))).collect();
    let mut inner = s.clone();
    for (g, _) in &t.blocks {
        inner.remove(g);
    }
    BlockType::new(vals, blocks, subst_vtype_map(&t.result, &inner))
}

/// `C[C′/f]`.
pub fn subst_set(c: &CapSet, f: &str, with: &CapSet) -> CapSet {
    subst_set_map(c, &single(f, with))
}

pub fn subst_vtype(a: &CType, f: &str, with: &CapSet) -> CType {
    subst_vtype_map(a, &single(f, with))
}

pub fn subst_btype(t: &BlockType, f: &str, with: &CapSet) -> BlockType {
    subst_btype_map(t, &single(f, with))
}

/// What is substituted for a name.
#[derive(Clone, Copy)]
enum What<'a> {
    Value(&'a CValue),
    /// A block, and the capability set replacing the name in types.
    Block(&'a Block, Option<&'a CapSet>),
}

struct S<'a> {
    name: &'a str,
    what: What<'a>,
}

impl S<'_> {
    fn set(&self, c: &CapSet) -> CapSet {
        match self.what {
            What::Block(_, Some(with)) => subst_set(c, self.name, with),
            _ => c.clone(),
        }
    }

    fn vtype(&self, a: &CType) -> CType {
        match self.what {
            What::Block(_, Some(with)) => subst_vtype(a, self.name, with),
            _ => a.clone(),
        }
    }

    fn btype(&self, t: &BlockType) -> BlockType {
        match self.what {
            What::Block(_, Some(with)) => subst_btype(t, self.name, with),
            _ => t.clone(),
        }
    }

    fn value(&self, v: &CValue) -> CValue {
        match v {
            CValue::Var(x) if x == self.name => match self.what {
                What::Value(w) => w.clone(),
                What::Block(..) => v.clone(),
            },
            CValue::Unit | CValue::Int(_) | CValue::Var(_) => v.clone(),
            CValue::Box(p, ann) => CValue::Box(Box::new(self.block(p)), ann.as_ref().map(|c| self.set(c))),
        }
    }

    fn block(&self, p: &Block) -> Block {
        match p {
            Block::Var(f) if f == self.name => match self.what {
                What::Block(q, _) => q.clone(),
                What::Value(_) => p.clone(),
            },
            Block::Var(_) | Block::Cap(_) => p.clone(),
            Block::Unbox(v) => Block::Unbox(self.value(v)),
            Block::Lit { vals, blocks, body } => {
                let shadowed = vals.iter().any(|(x, _)| x == self.name) || blocks.iter().any(|(f, _)| f == self.name);
                Block::Lit {
                    vals: vals.iter().map(|(x, a)| (x.clone(), self.vtype(a))).collect(),
                    blocks: blocks.iter().map(|(f, t)| (f.clone(), self.btype(t))).collect(),
                    body: Box::new(if shadowed { (**body).clone() } else { self.comp(body) }),
                }
            }
        }
    }

    fn under(&self, binder: &str, m: &Comp) -> Comp {
        if binder == self.name {
            m.clone()
        } else {
            self.comp(m)
        }
    }

    fn clause(&self, c: &CClause) -> CClause {
        let body = if c.param == self.name || c.resume == self.name { c.body.clone() } else { self.comp(&c.body) };
        CClause { body, ..c.clone() }
    }

    fn comp(&self, m: &Comp) -> Comp {
        match m {
            Comp::Return(v) => Comp::Return(self.value(v)),
            Comp::Call(p, vs, qs) => Comp::Call(
                self.block(p),
                vs.iter().map(|v| self.value(v)).collect(),
                qs.iter().map(|q| self.block(q)).collect(),
            ),
            Comp::Let(x, a, b) => Comp::let_(x.clone(), self.comp(a), self.under(x, b)),
            Comp::Def(f, p, n) => Comp::def(f.clone(), self.block(p), self.under(f, n)),
            Comp::Try { cap, sig, body, clause, caps } => Comp::Try {
                cap: cap.clone(),
                sig: self.btype(sig),
                body: Box::new(self.under(cap, body)),
                clause: Box::new(self.clause(clause)),
                caps: caps.as_ref().map(|c| self.set(c)),
            },
            Comp::TryRt { label, caps, body, clause } => Comp::TryRt {
                label: label.clone(),
                caps: self.set(caps),
                body: Box::new(self.comp(body)),
                clause: Box::new(self.clause(clause)),
            },
            Comp::Add(a, b) => Comp::add(self.comp(a), self.comp(b)),
        }
    }
}

/// `M[V/x]`.
pub fn subst_value(m: &Comp, x: &str, v: &CValue) -> Comp {
    S { name: x, what: What::Value(v) }.comp(m)
}

/// `M[Q/f, C/f]`; with no set, only the term level is rewritten.
pub fn subst_block(m: &Comp, f: &str, q: &Block, c: Option<&CapSet>) -> Comp {
    S { name: f, what: What::Block(q, c) }.comp(m)
}

/// Rename the block variable `f` to `g`, at both levels.
pub fn rename_block(m: &Comp, f: &str, g: &str) -> Comp {
    let set: CapSet = std::iter::once(g.to_string()).collect();
    subst_block(m, f, &Block::Var(g.into()), Some(&set))
}

pub fn names_vtype(a: &CType, out: &mut BTreeSet<String>) {
    if let CType::Boxed(t, c) = a {
        names_btype(t, out);
        out.extend(c.iter().cloned());
    }
}

pub fn names_btype(t: &BlockType, out: &mut BTreeSet<String>) {
    t.vals.iter().for_each(|a| names_vtype(a, out));
    for (f, u) in &t.blocks {
        out.insert(f.clone());
        names_btype(u, out);
    }
    names_vtype(&t.result, out);
}

fn names_value(v: &CValue, out: &mut BTreeSet<String>) {
    match v {
        CValue::Var(x) => {
            out.insert(x.clone());
        }
        CValue::Box(p, ann) => {
            names_block(p, out);
            if let Some(c) = ann {
                out.extend(c.iter().cloned());
            }
        }
        CValue::Unit | CValue::Int(_) => {}
    }
}

fn names_block(p: &Block, out: &mut BTreeSet<String>) {
    match p {
        Block::Var(f) | Block::Cap(f) => {
            out.insert(f.clone());
        }
        Block::Unbox(v) => names_value(v, out),
        Block::Lit { vals, blocks, body } => {
            for (x, a) in vals {
                out.insert(x.clone());
                names_vtype(a, out);
            }
            for (f, t) in blocks {
                out.insert(f.clone());
                names_btype(t, out);
            }
            all_names(body, out);
        }
    }
}

/// Every name occurring in `m`, bound or free, at either level.
pub fn all_names(m: &Comp, out: &mut BTreeSet<String>) {
    let clause = |c: &CClause, out: &mut BTreeSet<String>| {
        out.insert(c.param.clone());
        out.insert(c.resume.clone());
        all_names(&c.body, out);
    };
    match m {
        Comp::Return(v) => names_value(v, out),
        Comp::Call(p, vs, qs) => {
            names_block(p, out);
            vs.iter().for_each(|v| names_value(v, out));
            qs.iter().for_each(|q| names_block(q, out));
        }
        Comp::Let(x, a, b) => {
            out.insert(x.clone());
            all_names(a, out);
            all_names(b, out);
        }
        Comp::Def(f, p, n) => {
            out.insert(f.clone());
            names_block(p, out);
            all_names(n, out);
        }
        Comp::Try { cap, sig, body, clause: c, caps } => {
            out.insert(cap.clone());
            names_btype(sig, out);
            all_names(body, out);
            clause(c, out);
            if let Some(cs) = caps {
                out.extend(cs.iter().cloned());
            }
        }
        Comp::TryRt { label, caps, body, clause: c } => {
            out.insert(label.clone());
            out.extend(caps.iter().cloned());
            all_names(body, out);
            clause(c, out);
        }
        Comp::Add(a, b) => {
            all_names(a, out);
            all_names(b, out);
        }
    }
}

/// Names in a block, as `all_names`.
pub fn block_names(p: &Block, out: &mut BTreeSet<String>) {
    names_block(p, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systemc::caps;

    #[test]
    fn sets_substitute_under_unshadowed_binders() {
        let t = BlockType::new(
            vec![],
            vec![("g".into(), BlockType::simple(CType::Int, CType::Unit))],
            CType::Boxed(Box::new(BlockType::simple(CType::Int, CType::Unit)), caps(&["f", "g"])),
        );
        let out = subst_btype(&t, "f", &caps(&["%0"]));
        assert_eq!(out.to_string(), "(g: (Int) => 1) => (Int) => 1 at {%0,g}");
        let same = subst_btype(&t, "g", &caps(&["%0"]));
        assert_eq!(same, t);
    }
}
