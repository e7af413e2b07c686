//! A capability-based calculus with second-class blocks, boxes and named
//! handlers: syntax, a checker that synthesises least capability sets,
//! a generative small-step interpreter and the type-directed translation
//! into the core calculus over sets.

pub mod check;
pub mod eval;
pub mod parse;
pub mod print;
pub mod subst;

use std::collections::BTreeSet;

pub use check::{check_program, translate_set, CChecker, CError, CTyped, Sort};
pub use eval::{c_run, c_step, COutcome, CRule, CStep};
pub use parse::{parse_comp, parse_program};

/// A set of block variables and runtime labels.
pub type CapSet = BTreeSet<String>;

pub fn caps<S: AsRef<str>>(names: &[S]) -> CapSet {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

/// Value types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CType {
    Unit,
    Int,
    /// `T at C`.
    Boxed(Box<BlockType>, CapSet),
}

/// `(A̅, f̅:T̅) => B`; the block parameter names bind in `result`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockType {
    pub vals: Vec<CType>,
    pub blocks: Vec<(String, BlockType)>,
    pub result: Box<CType>,
}

impl BlockType {
    pub fn new(vals: Vec<CType>, blocks: Vec<(String, BlockType)>, result: CType) -> BlockType {
        BlockType { vals, blocks, result: Box::new(result) }
    }

    /// `(A) => B`, the shape of capabilities.
    pub fn simple(a: CType, b: CType) -> BlockType {
        BlockType::new(vec![a], Vec::new(), b)
    }

    /// The single value parameter and result of a capability type.
    pub fn as_simple(&self) -> Option<(&CType, &CType)> {
        match (self.vals.as_slice(), self.blocks.is_empty()) {
            ([a], true) => Some((a, &self.result)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CValue {
    Unit,
    Int(i64),
    Var(String),
    /// `box P`; the checker fills in the capability set it is boxed at.
    Box(Box<Block>, Option<CapSet>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    Var(String),
    /// `{ (x̅: A̅, f̅: T̅) => M }`.
    Lit {
        vals: Vec<(String, CType)>,
        blocks: Vec<(String, BlockType)>,
        body: Box<Comp>,
    },
    Unbox(CValue),
    /// Runtime capability `cap %n`.
    Cap(String),
}

/// The handler clause `{ p r => N }`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CClause {
    pub param: String,
    pub resume: String,
    pub body: Comp,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Comp {
    Return(CValue),
    Call(Block, Vec<CValue>, Vec<Block>),
    /// `let x = M in N`; the binder `_` renders as `M; N`.
    Let(String, Box<Comp>, Box<Comp>),
    Def(String, Block, Box<Comp>),
    /// `try { f: (A) => B => M } with { p r => N }`; the checker fills in
    /// the capability set of the whole handler.
    Try {
        cap: String,
        sig: BlockType,
        body: Box<Comp>,
        clause: Box<CClause>,
        caps: Option<CapSet>,
    },
    /// Runtime `try<%n; C> { M } with { p r => N }`.
    TryRt {
        label: String,
        caps: CapSet,
        body: Box<Comp>,
        clause: Box<CClause>,
    },
    Add(Box<Comp>, Box<Comp>),
}

/// Binder name used by sequencing.
pub const SEQ_VAR: &str = "_";

impl Comp {
    pub fn let_(x: impl Into<String>, m: Comp, n: Comp) -> Comp {
        Comp::Let(x.into(), Box::new(m), Box::new(n))
    }

    pub fn seq(m: Comp, n: Comp) -> Comp {
        Comp::let_(SEQ_VAR, m, n)
    }

    pub fn add(m: Comp, n: Comp) -> Comp {
        Comp::Add(Box::new(m), Box::new(n))
    }

    pub fn def(f: impl Into<String>, p: Block, n: Comp) -> Comp {
        Comp::Def(f.into(), p, Box::new(n))
    }

    pub fn try_(cap: impl Into<String>, sig: BlockType, body: Comp, clause: CClause) -> Comp {
        Comp::Try { cap: cap.into(), sig, body: Box::new(body), clause: Box::new(clause), caps: None }
    }

    pub fn size(&self) -> usize {
        match self {
            Comp::Return(v) => 1 + v.size(),
            Comp::Call(p, vs, qs) => {
                1 + p.size() + vs.iter().map(CValue::size).sum::<usize>() + qs.iter().map(Block::size).sum::<usize>()
            }
            Comp::Let(_, m, n) | Comp::Add(m, n) => 1 + m.size() + n.size(),
            Comp::Def(_, p, n) => 1 + p.size() + n.size(),
            Comp::Try { body, clause, .. } | Comp::TryRt { body, clause, .. } => 1 + body.size() + clause.body.size(),
        }
    }
}

impl CValue {
    pub fn size(&self) -> usize {
        match self {
            CValue::Unit | CValue::Int(_) | CValue::Var(_) => 1,
            CValue::Box(p, _) => 1 + p.size(),
        }
    }
}

impl Block {
    pub fn lit(vals: Vec<(String, CType)>, blocks: Vec<(String, BlockType)>, body: Comp) -> Block {
        Block::Lit { vals, blocks, body: Box::new(body) }
    }

    pub fn size(&self) -> usize {
        match self {
            Block::Var(_) | Block::Cap(_) => 1,
            Block::Lit { body, .. } => 1 + body.size(),
            Block::Unbox(v) => 1 + v.size(),
        }
    }
}

/// Runtime labels generated by handlers, each with its capability type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CLabels {
    pub entries: Vec<(String, BlockType)>,
}

impl CLabels {
    pub fn get(&self, name: &str) -> Option<&BlockType> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Allocate the next `%n` label.
    pub fn fresh(&mut self, ty: BlockType) -> String {
        let name = format!("%{}", self.entries.len());
        self.entries.push((name.clone(), ty));
        name
    }
}

/// Context declarations in a program header.
#[derive(Clone, Debug, PartialEq)]
pub enum CDecl {
    Var(String, CType),
    /// A tracked capability `block f : T`.
    Tracked(String, BlockType),
}

/// The program body: a block or a computation.
#[derive(Clone, Debug, PartialEq)]
pub enum CTerm {
    Block(Block),
    Comp(Comp),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CProgram {
    pub decls: Vec<CDecl>,
    pub term: CTerm,
}
