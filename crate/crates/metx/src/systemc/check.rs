//! Checking with elaboration. Every judgement synthesises the least
//! capability set, fills in the set annotations on boxes and handlers,
//! and produces the translated core term over the theory of sets.
//!
//! A tracked block variable `f` becomes the effect variable `$f`, the
//! core variable `f : [[$f]]T` and its unboxed alias `f'` carrying the
//! modality `[$f]`. A transparent block bound at `C` becomes
//! `f : [[C]]T` and `f'` carrying `[C]`.

use super::subst::{all_names, names_vtype, rename_block, subst_btype_map, subst_vtype_map, SetSubst};
use super::{Block, BlockType, CClause, CDecl, CLabels, CProgram, CTerm, CType, CValue, CapSet, Comp};
use crate::effect::{Atom, Row};
use crate::met::types::fresh_name;
use crate::met::{Context, Entry, Handler, Kind, Modality, RuntimeLabels, Sig, Term, Type};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CError {
    #[error("unbound variable `{0}`")]
    UnboundVar(String),
    #[error("not fully applied: {0}")]
    NotFullyApplied(String),
    #[error("capability escape: {0}")]
    CapabilityEscape(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

impl CError {
    pub fn kind_name(&self) -> &'static str {
        match self {
            CError::UnboundVar(_) => "UnboundVar",
            CError::NotFullyApplied(_) => "NotFullyApplied",
            CError::CapabilityEscape(_) => "CapabilityEscape",
            CError::TypeMismatch(_) => "TypeMismatch",
        }
    }
}

/// The type of a checked program body.
#[derive(Clone, Debug, PartialEq)]
pub enum Sort {
    /// A computation returning a value of this type.
    Comp(CType),
    Block(BlockType),
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Comp(a) => write!(f, "{a}"),
            Sort::Block(t) => write!(f, "{t}"),
        }
    }
}

/// A checked program: type, least capability set, elaborated source
/// and translated core term.
#[derive(Clone, Debug, PartialEq)]
pub struct CTyped {
    pub sort: Sort,
    pub caps: CapSet,
    pub elab: CTerm,
    pub term: Term,
}

impl CTyped {
    /// `T | C`, the rendered judgement.
    pub fn judgement(&self) -> String {
        format!("{} | {}", self.sort, super::print::set(&self.caps))
    }

    pub fn met_type(&self) -> Type {
        match &self.sort {
            Sort::Comp(a) => translate_vtype(a),
            Sort::Block(t) => translate_btype(t),
        }
    }

    /// The effect context the translation is checked at.
    pub fn ambient(&self) -> Row {
        translate_set(&self.caps)
    }
}

/// `⟦C⟧`: block variables become effect variables, runtime labels stay.
pub fn translate_set(c: &CapSet) -> Row {
    Row(c.iter().map(|n| if n.starts_with('%') { Atom::label(n) } else { Atom::var(tyvar(n)) }).collect())
}

fn tyvar(f: &str) -> String {
    format!("${f}")
}

fn prime(f: &str) -> String {
    format!("{f}'")
}

fn single(n: &str) -> CapSet {
    std::iter::once(n.to_string()).collect()
}

pub fn translate_vtype(a: &CType) -> Type {
    match a {
        CType::Unit => Type::Unit,
        CType::Int => Type::Int,
        CType::Boxed(t, c) => Type::boxed(Modality::Absolute(translate_set(c)), translate_btype(t)),
    }
}

/// Block types become curried functions; block parameters are passed
/// boxed at their own effect variable, quantified outside a relative
/// modality that extends the context with all of them.
pub fn translate_btype(t: &BlockType) -> Type {
    let mut params: Vec<Type> = t.vals.iter().map(translate_vtype).collect();
    params.extend(
        t.blocks.iter().map(|(f, u)| Type::boxed(Modality::Absolute(translate_set(&single(f))), translate_btype(u))),
    );
    if params.is_empty() {
        params.push(Type::Unit);
    }
    let body = params.into_iter().rev().fold(translate_vtype(&t.result), |acc, p| Type::arrow(p, acc));
    if t.blocks.is_empty() {
        return body;
    }
    let vars = Row(t.blocks.iter().map(|(f, _)| Atom::var(tyvar(f))).collect());
    let inner = Type::boxed(Modality::Relative(vars), body);
    t.blocks.iter().rev().fold(inner, |acc, (f, _)| Type::forall(tyvar(f), Kind::Effect, acc))
}

/// The capability signatures of runtime labels, translated.
pub fn translate_labels(omega: &CLabels) -> RuntimeLabels {
    RuntimeLabels {
        entries: omega
            .entries
            .iter()
            .map(|(l, t)| {
                let (a, b) = t.as_simple().expect("capabilities have simple types");
                (l.clone(), Sig { arg: translate_vtype(a), res: translate_vtype(b) })
            })
            .collect(),
    }
}

/// `letmod<<>;[E]> x = v in body`.
fn unbox(e: Row, x: &str, v: Term, body: Term) -> Term {
    Term::letmod(Modality::identity(), Modality::Absolute(e), x, v, body)
}

/// Structural equality up to renaming of bound block parameters.
pub fn vtype_eq(a: &CType, b: &CType) -> bool {
    match (a, b) {
        (CType::Unit, CType::Unit) | (CType::Int, CType::Int) => true,
        (CType::Boxed(t, c), CType::Boxed(u, d)) => c == d && btype_eq(t, u),
        _ => false,
    }
}

pub fn btype_eq(t: &BlockType, u: &BlockType) -> bool {
    if t.vals.len() != u.vals.len() || t.blocks.len() != u.blocks.len() {
        return false;
    }
    if !t.vals.iter().zip(&u.vals).all(|(a, b)| vtype_eq(a, b)) {
        return false;
    }
    if !t.blocks.iter().zip(&u.blocks).all(|((_, a), (_, b))| btype_eq(a, b)) {
        return false;
    }
    // `#n` cannot be written in source, so the shared names never capture.
    let canon = |bs: &[(String, BlockType)]| -> SetSubst {
        bs.iter().enumerate().map(|(i, (f, _))| (f.clone(), single(&format!("#{i}")))).collect()
    };
    vtype_eq(&subst_vtype_map(&t.result, &canon(&t.blocks)), &subst_vtype_map(&u.result, &canon(&u.blocks)))
}

#[derive(Clone, Debug)]
enum Binding {
    Val(CType),
    Tracked(BlockType),
    /// A block bound by `def` or a resumption, at a fixed set.
    Transparent(BlockType, CapSet),
}

#[derive(Clone, Debug, Default)]
struct Env {
    entries: Vec<(String, Binding)>,
}

impl Env {
    fn lookup(&self, x: &str) -> Option<&Binding> {
        self.entries.iter().rev().find(|(n, _)| n == x).map(|(_, b)| b)
    }

    fn bound(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }
}

/// A value judgement.
struct V {
    ty: CType,
    elab: CValue,
    term: Term,
}

/// A block judgement.
struct B {
    ty: BlockType,
    caps: CapSet,
    elab: Block,
    term: Term,
}

/// A computation judgement.
struct M {
    ty: CType,
    caps: CapSet,
    elab: Comp,
    term: Term,
}

/// Checking environment: the runtime labels in scope.
pub struct CChecker<'a> {
    pub omega: &'a CLabels,
}

fn show_set(c: &CapSet) -> String {
    super::print::set(c)
}

fn mentions_vtype(a: &CType, n: &str) -> bool {
    let mut out = BTreeSet::new();
    names_vtype(a, &mut out);
    out.contains(n)
}

impl<'a> CChecker<'a> {
    pub fn new(omega: &'a CLabels) -> CChecker<'a> {
        CChecker { omega }
    }

    fn with<T>(env: &mut Env, items: Vec<(String, Binding)>, f: impl FnOnce(&mut Env) -> T) -> T {
        let n = env.entries.len();
        env.entries.extend(items);
        let r = f(env);
        env.entries.truncate(n);
        r
    }

    fn wf_set(&self, env: &Env, c: &CapSet) -> Result<(), CError> {
        for n in c {
            if n.starts_with('%') {
                if self.omega.get(n).is_none() {
                    return Err(CError::UnboundVar(n.clone()));
                }
                continue;
            }
            match env.lookup(n) {
                Some(Binding::Tracked(_)) => {}
                Some(_) => return Err(CError::TypeMismatch(format!("`{n}` is not a tracked capability"))),
                None => return Err(CError::UnboundVar(n.clone())),
            }
        }
        Ok(())
    }

    fn wf_vtype(&self, env: &mut Env, a: &CType) -> Result<(), CError> {
        match a {
            CType::Unit | CType::Int => Ok(()),
            CType::Boxed(t, c) => {
                self.wf_set(env, c)?;
                self.wf_btype(env, t)
            }
        }
    }

    fn wf_btype(&self, env: &mut Env, t: &BlockType) -> Result<(), CError> {
        for a in &t.vals {
            self.wf_vtype(env, a)?;
        }
        for (_, u) in &t.blocks {
            self.wf_btype(env, u)?;
        }
        distinct(t.blocks.iter().map(|(f, _)| f.as_str()))?;
        let items = t.blocks.iter().map(|(f, u)| (f.clone(), Binding::Tracked(u.clone()))).collect();
        Self::with(env, items, |env| self.wf_vtype(env, &t.result))
    }

    /// A name for a block binder that shadows nothing in scope.
    fn unshadow(&self, env: &Env, f: &str, avoid: &BTreeSet<String>) -> Option<String> {
        if !env.bound(f) {
            return None;
        }
        Some(fresh_name(f, |c| env.bound(c) || avoid.contains(c)))
    }

    fn value(&self, env: &mut Env, v: &CValue) -> Result<V, CError> {
        match v {
            CValue::Unit => Ok(V { ty: CType::Unit, elab: CValue::Unit, term: Term::Unit }),
            CValue::Int(n) => Ok(V { ty: CType::Int, elab: CValue::Int(*n), term: Term::Int(*n) }),
            CValue::Var(x) => match env.lookup(x) {
                Some(Binding::Val(a)) => Ok(V { ty: a.clone(), elab: v.clone(), term: Term::var(x) }),
                Some(_) => Err(CError::TypeMismatch(format!("`{x}` is a block, not a value"))),
                None => Err(CError::UnboundVar(x.clone())),
            },
            CValue::Box(p, ann) => {
                let b = self.block(env, p)?;
                let c = match ann {
                    Some(c) => {
                        self.wf_set(env, c)?;
                        self.boxed_within(&b, c, p)?;
                        c.clone()
                    }
                    None => b.caps.clone(),
                };
                Ok(self.boxed(b, c))
            }
        }
    }

    fn boxed_within(&self, b: &B, c: &CapSet, p: &Block) -> Result<(), CError> {
        if b.caps.is_subset(c) {
            Ok(())
        } else {
            Err(CError::CapabilityEscape(format!("`{p}` uses {} but is boxed at {}", show_set(&b.caps), show_set(c))))
        }
    }

    fn boxed(&self, b: B, c: CapSet) -> V {
        V {
            ty: CType::Boxed(Box::new(b.ty), c.clone()),
            term: Term::modal(Modality::Absolute(translate_set(&c)), b.term),
            elab: CValue::Box(Box::new(b.elab), Some(c)),
        }
    }

    /// Check a value against an expected type; unannotated boxes take
    /// the expected set.
    fn value_against(&self, env: &mut Env, v: &CValue, expected: &CType, what: &str) -> Result<V, CError> {
        if let (CValue::Box(p, None), CType::Boxed(t, c)) = (v, expected) {
            let b = self.block(env, p)?;
            if !btype_eq(&b.ty, t) {
                return Err(CError::TypeMismatch(format!("{what}: expected {expected}, found {} at _", b.ty)));
            }
            self.boxed_within(&b, c, p)?;
            return Ok(self.boxed(b, c.clone()));
        }
        let got = self.value(env, v)?;
        if vtype_eq(&got.ty, expected) {
            Ok(got)
        } else {
            Err(CError::TypeMismatch(format!("{what}: expected {expected}, found {}", got.ty)))
        }
    }

    fn block(&self, env: &mut Env, p: &Block) -> Result<B, CError> {
        match p {
            Block::Var(f) => {
                let (ty, caps) = match env.lookup(f) {
                    Some(Binding::Tracked(t)) => (t.clone(), single(f)),
                    Some(Binding::Transparent(t, c)) => (t.clone(), c.clone()),
                    Some(Binding::Val(_)) => {
                        return Err(CError::TypeMismatch(format!("`{f}` is a value, not a block")))
                    }
                    None => return Err(CError::UnboundVar(f.clone())),
                };
                Ok(B { ty, caps, elab: p.clone(), term: Term::var(prime(f)) })
            }
            Block::Cap(l) => {
                let t = self.omega.get(l).ok_or_else(|| CError::UnboundVar(l.clone()))?.clone();
                let (a, _) = t
                    .as_simple()
                    .ok_or_else(|| CError::TypeMismatch(format!("capability `{l}` has non-simple type {t}")))?;
                let term = Term::lam("x", translate_vtype(a), Term::do_(l, Term::var("x")));
                Ok(B { ty: t, caps: single(l), elab: p.clone(), term })
            }
            Block::Unbox(v) => {
                let got = self.value(env, v)?;
                match got.ty {
                    CType::Boxed(t, c) => Ok(B {
                        ty: *t,
                        term: unbox(translate_set(&c), "x''", got.term, Term::var("x''")),
                        caps: c,
                        elab: Block::Unbox(got.elab),
                    }),
                    other => Err(CError::TypeMismatch(format!("unbox expects a boxed block, found {other}"))),
                }
            }
            Block::Lit { vals, blocks, body } => self.literal(env, vals, blocks, body),
        }
    }

    fn literal(
        &self,
        env: &mut Env,
        vals: &[(String, CType)],
        blocks: &[(String, BlockType)],
        body: &Comp,
    ) -> Result<B, CError> {
        distinct(vals.iter().map(|(x, _)| x.as_str()).chain(blocks.iter().map(|(f, _)| f.as_str())))?;
        for (_, a) in vals {
            self.wf_vtype(env, a)?;
        }
        for (_, t) in blocks {
            self.wf_btype(env, t)?;
        }
        let mut body = body.clone();
        let mut avoid = BTreeSet::new();
        all_names(&body, &mut avoid);
        avoid.extend(vals.iter().map(|(x, _)| x.clone()));
        avoid.extend(blocks.iter().map(|(f, _)| f.clone()));
        let mut blocks = blocks.to_vec();
        for (f, _) in blocks.iter_mut() {
            if let Some(g) = self.unshadow(env, f, &avoid) {
                body = rename_block(&body, f, &g);
                avoid.insert(g.clone());
                *f = g;
            }
        }
        let items = vals
            .iter()
            .map(|(x, a)| (x.clone(), Binding::Val(a.clone())))
            .chain(blocks.iter().map(|(f, t)| (f.clone(), Binding::Tracked(t.clone()))))
            .collect();
        let m = Self::with(env, items, |env| self.comp(env, &body))?;
        let mut caps = m.caps.clone();
        for (f, _) in &blocks {
            caps.remove(f);
        }
        let ty = BlockType::new(vals.iter().map(|(_, a)| a.clone()).collect(), blocks.clone(), m.ty);

        let mut term = m.term;
        for (f, _) in blocks.iter().rev() {
            term = unbox(translate_set(&single(f)), &prime(f), Term::var(f), term);
        }
        for (f, t) in blocks.iter().rev() {
            let a = Type::boxed(Modality::Absolute(translate_set(&single(f))), translate_btype(t));
            term = Term::lam(f, a, term);
        }
        for (x, a) in vals.iter().rev() {
            term = Term::lam(x, translate_vtype(a), term);
        }
        if vals.is_empty() && blocks.is_empty() {
            term = Term::lam(crate::met::SEQ_VAR, Type::Unit, term);
        }
        if !blocks.is_empty() {
            let vars = Row(blocks.iter().map(|(f, _)| Atom::var(tyvar(f))).collect());
            term = Term::modal(Modality::Relative(vars), term);
            for (f, _) in blocks.iter().rev() {
                term = Term::tylam(tyvar(f), Kind::Effect, term);
            }
        }
        let elab = Block::lit(vals.to_vec(), blocks, m.elab);
        Ok(B { ty, caps, elab, term })
    }

    fn comp(&self, env: &mut Env, m: &Comp) -> Result<M, CError> {
        match m {
            Comp::Return(v) => {
                let got = self.value(env, v)?;
                Ok(M { ty: got.ty, caps: CapSet::new(), elab: Comp::Return(got.elab), term: got.term })
            }
            Comp::Call(p, vs, qs) => self.call(env, p, vs, qs),
            Comp::Let(x, a, b) => {
                let ma = self.comp(env, a)?;
                let mb = Self::with(env, vec![(x.clone(), Binding::Val(ma.ty.clone()))], |env| self.comp(env, b))?;
                Ok(M {
                    ty: mb.ty,
                    caps: &ma.caps | &mb.caps,
                    elab: Comp::let_(x.clone(), ma.elab, mb.elab),
                    term: Term::let_(x, ma.term, mb.term),
                })
            }
            Comp::Add(a, b) => {
                let ma = self.comp(env, a)?;
                let mb = self.comp(env, b)?;
                for (side, got) in [("left", &ma.ty), ("right", &mb.ty)] {
                    if *got != CType::Int {
                        return Err(CError::TypeMismatch(format!("{side} operand of +: expected Int, found {got}")));
                    }
                }
                Ok(M {
                    ty: CType::Int,
                    caps: &ma.caps | &mb.caps,
                    elab: Comp::add(ma.elab, mb.elab),
                    term: Term::add(ma.term, mb.term),
                })
            }
            Comp::Def(f, p, n) => {
                let b = self.block(env, p)?;
                let mut n = (**n).clone();
                let mut f = f.clone();
                let mut avoid = BTreeSet::new();
                all_names(&n, &mut avoid);
                if let Some(g) = self.unshadow(env, &f, &avoid) {
                    n = rename_block(&n, &f, &g);
                    f = g;
                }
                let bind = Binding::Transparent(b.ty.clone(), b.caps.clone());
                let mn = Self::with(env, vec![(f.clone(), bind)], |env| self.comp(env, &n))?;
                let row = translate_set(&b.caps);
                let term = Term::let_(
                    &f,
                    Term::modal(Modality::Absolute(row.clone()), b.term),
                    unbox(row, &prime(&f), Term::var(&f), mn.term),
                );
                Ok(M { ty: mn.ty, caps: mn.caps, elab: Comp::def(f, b.elab, mn.elab), term })
            }
            Comp::Try { cap, sig, body, clause, caps } => self.try_(env, cap, sig, body, clause, caps.as_ref()),
            Comp::TryRt { label, caps, body, clause } => {
                let sig = self.omega.get(label).ok_or_else(|| CError::UnboundVar(label.clone()))?.clone();
                let (a1, b1) = simple(&sig)?;
                self.wf_set(env, caps)?;
                let mb = self.comp(env, body)?;
                let mut allowed = caps.clone();
                allowed.insert(label.clone());
                if !mb.caps.is_subset(&allowed) {
                    return Err(CError::CapabilityEscape(format!(
                        "handled computation uses {} beyond {}",
                        show_set(&mb.caps),
                        show_set(&allowed)
                    )));
                }
                if mentions_vtype(&mb.ty, label) {
                    return Err(CError::CapabilityEscape(format!("`{label}` escapes in the result type {}", mb.ty)));
                }
                let mn = self.clause(env, clause, &a1, &b1, &mb.ty, caps)?;
                self.within(&mn.caps, caps, "operation clause")?;
                let h = handler(label, caps, clause, mn.term);
                let term = Term::handle(Modality::Absolute(translate_set(caps)), mb.term, h);
                let elab = Comp::TryRt {
                    label: label.clone(),
                    caps: caps.clone(),
                    body: Box::new(mb.elab),
                    clause: Box::new(CClause { body: mn.elab, ..(**clause).clone() }),
                };
                Ok(M { ty: mb.ty, caps: caps.clone(), elab, term })
            }
        }
    }

    fn within(&self, used: &CapSet, allowed: &CapSet, what: &str) -> Result<(), CError> {
        if used.is_subset(allowed) {
            Ok(())
        } else {
            Err(CError::CapabilityEscape(format!("{what} uses {} beyond {}", show_set(used), show_set(allowed))))
        }
    }

    fn call(&self, env: &mut Env, p: &Block, vs: &[CValue], qs: &[Block]) -> Result<M, CError> {
        let b = self.block(env, p)?;
        let t = &b.ty;
        if vs.len() != t.vals.len() || qs.len() != t.blocks.len() {
            return Err(CError::NotFullyApplied(format!(
                "`{p}` takes {} value and {} block arguments, given {} and {}",
                t.vals.len(),
                t.blocks.len(),
                vs.len(),
                qs.len()
            )));
        }
        let mut args = Vec::new();
        for q in qs {
            args.push(self.block(env, q)?);
        }
        let s: SetSubst = t.blocks.iter().zip(&args).map(|((f, _), a)| (f.clone(), a.caps.clone())).collect();
        for (i, ((f, u), a)) in t.blocks.iter().zip(&args).enumerate() {
            let expected = subst_btype_map(u, &s);
            if !btype_eq(&expected, &a.ty) {
                return Err(CError::TypeMismatch(format!(
                    "block argument {} for `{f}`: expected {expected}, found {}",
                    i + 1,
                    a.ty
                )));
            }
        }
        let mut vals = Vec::new();
        for (i, (v, a)) in vs.iter().zip(&t.vals).enumerate() {
            vals.push(self.value_against(env, v, &subst_vtype_map(a, &s), &format!("argument {}", i + 1))?);
        }
        let ty = subst_vtype_map(&t.result, &s);
        let mut caps = b.caps.clone();
        for a in &args {
            caps.extend(a.caps.iter().cloned());
        }
        let elab = Comp::Call(
            b.elab,
            vals.iter().map(|v| v.elab.clone()).collect(),
            args.iter().map(|a| a.elab.clone()).collect(),
        );
        let term = if args.is_empty() {
            if vals.is_empty() {
                Term::app(b.term, Term::Unit)
            } else {
                vals.into_iter().fold(b.term, |f, v| Term::app(f, v.term))
            }
        } else {
            let ext = args.iter().fold(Row::empty(), |r, a| r.concat(&translate_set(&a.caps)));
            let inst = args.iter().fold(b.term, |f, a| Term::tyapp(f, Type::Row(translate_set(&a.caps))));
            let applied = vals.into_iter().fold(Term::var("x''"), |f, v| Term::app(f, v.term));
            let applied = args
                .into_iter()
                .fold(applied, |f, a| Term::app(f, Term::modal(Modality::Absolute(translate_set(&a.caps)), a.term)));
            Term::letmod(Modality::identity(), Modality::Relative(ext), "x''", inst, applied)
        };
        Ok(M { ty, caps, elab, term })
    }

    /// The operation clause `{ p r => N }` for a handler at `C` whose
    /// body returns `A`.
    fn clause(
        &self,
        env: &mut Env,
        c: &CClause,
        a1: &CType,
        b1: &CType,
        a: &CType,
        caps: &CapSet,
    ) -> Result<M, CError> {
        distinct([c.param.as_str(), c.resume.as_str()].into_iter())?;
        let resume = BlockType::simple(b1.clone(), a.clone());
        let items = vec![
            (c.param.clone(), Binding::Val(a1.clone())),
            (c.resume.clone(), Binding::Transparent(resume, caps.clone())),
        ];
        let mn = Self::with(env, items, |env| self.comp(env, &c.body))?;
        if !vtype_eq(&mn.ty, a) {
            return Err(CError::TypeMismatch(format!("operation clause: expected {a}, found {}", mn.ty)));
        }
        Ok(mn)
    }

    fn try_(
        &self,
        env: &mut Env,
        cap: &str,
        sig: &BlockType,
        body: &Comp,
        clause: &CClause,
        ann: Option<&CapSet>,
    ) -> Result<M, CError> {
        let (a1, b1) = simple(sig)?;
        self.wf_btype(env, sig)?;
        let mut body = body.clone();
        let mut f = cap.to_string();
        let mut avoid = BTreeSet::new();
        all_names(&body, &mut avoid);
        all_names(&clause.body, &mut avoid);
        if let Some(g) = self.unshadow(env, &f, &avoid) {
            body = rename_block(&body, &f, &g);
            f = g;
        }
        let mb = Self::with(env, vec![(f.clone(), Binding::Tracked(sig.clone()))], |env| self.comp(env, &body))?;
        if mentions_vtype(&mb.ty, &f) {
            return Err(CError::CapabilityEscape(format!("`{f}` escapes in the result type {}", mb.ty)));
        }
        let mut own = mb.caps.clone();
        own.remove(&f);
        let (caps, mn) = match ann {
            Some(c) => {
                self.wf_set(env, c)?;
                self.within(&own, c, "handled computation")?;
                let mn = self.clause(env, clause, &a1, &b1, &mb.ty, c)?;
                self.within(&mn.caps, c, "operation clause")?;
                (c.clone(), mn)
            }
            None => {
                let mut c = own;
                loop {
                    let mn = self.clause(env, clause, &a1, &b1, &mb.ty, &c)?;
                    if mn.caps.is_subset(&c) {
                        break (c, mn);
                    }
                    c.extend(mn.caps.iter().cloned());
                }
            }
        };

        let ta = translate_vtype(&a1);
        let tb = translate_vtype(&b1);
        let label_row = Row(vec![Atom::label(&f)]);
        let var_row = translate_set(&single(&f));
        let cap_ty = Type::arrow(ta.clone(), tb.clone());
        let abs = Term::tylam(
            tyvar(&f),
            Kind::Effect,
            Term::modal(
                Modality::Relative(var_row.clone()),
                Term::lam(
                    &f,
                    Type::boxed(Modality::Absolute(var_row.clone()), cap_ty),
                    unbox(var_row, &prime(&f), Term::var(&f), mb.term),
                ),
            ),
        );
        let op = Term::modal(
            Modality::Absolute(label_row.clone()),
            Term::lam("x", ta.clone(), Term::do_(&f, Term::var("x"))),
        );
        let scrutinee = Term::letmod(
            Modality::identity(),
            Modality::Relative(label_row.clone()),
            "g",
            Term::tyapp(abs, Type::Row(label_row)),
            Term::app(Term::var("g"), op),
        );
        let h = handler(&f, &caps, clause, mn.term);
        let term = Term::Local(
            f.clone(),
            Sig { arg: ta, res: tb },
            Box::new(Term::handle(Modality::Absolute(translate_set(&caps)), scrutinee, h)),
        );
        let elab = Comp::Try {
            cap: f,
            sig: sig.clone(),
            body: Box::new(mb.elab),
            clause: Box::new(CClause { body: mn.elab, ..clause.clone() }),
            caps: Some(caps.clone()),
        };
        Ok(M { ty: mb.ty, caps, elab, term })
    }

    /// The least capability set of a closed block.
    pub fn block_caps(&self, p: &Block) -> Result<CapSet, CError> {
        Ok(self.block(&mut Env::default(), p)?.caps)
    }
}

/// The translated handler for label `l` at set `C`.
fn handler(l: &str, caps: &CapSet, c: &CClause, op_body: Term) -> Handler {
    let mut with_l = Row(vec![Atom::label(l)]);
    with_l = with_l.concat(&translate_set(caps));
    let r = &c.resume;
    Handler {
        ret_var: "x".into(),
        ret_body: unbox(with_l, "x'", Term::var("x"), Term::var("x'")),
        label: l.to_string(),
        param: c.param.clone(),
        resume: r.clone(),
        op_body: unbox(translate_set(caps), &prime(r), Term::var(r), op_body),
    }
}

fn simple(t: &BlockType) -> Result<(CType, CType), CError> {
    t.as_simple()
        .map(|(a, b)| (a.clone(), b.clone()))
        .ok_or_else(|| CError::TypeMismatch(format!("capability type {t} must have the form (A) => B")))
}

fn distinct<'s>(names: impl Iterator<Item = &'s str>) -> Result<(), CError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(CError::TypeMismatch(format!("parameter `{n}` is bound twice")));
        }
    }
    Ok(())
}

/// Check a program in its header context.
pub fn check_program(p: &CProgram, omega: &CLabels) -> Result<CTyped, CError> {
    let chk = CChecker::new(omega);
    let mut env = Env::default();
    for d in &p.decls {
        match d {
            CDecl::Var(x, a) => {
                chk.wf_vtype(&mut env, a)?;
                env.entries.push((x.clone(), Binding::Val(a.clone())));
            }
            CDecl::Tracked(f, t) => {
                chk.wf_btype(&mut env, t)?;
                env.entries.push((f.clone(), Binding::Tracked(t.clone())));
            }
        }
    }
    match &p.term {
        CTerm::Block(q) => {
            let b = chk.block(&mut env, q)?;
            Ok(CTyped { sort: Sort::Block(b.ty), caps: b.caps, elab: CTerm::Block(b.elab), term: b.term })
        }
        CTerm::Comp(m) => {
            let r = chk.comp(&mut env, m)?;
            Ok(CTyped { sort: Sort::Comp(r.ty), caps: r.caps, elab: CTerm::Comp(r.elab), term: r.term })
        }
    }
}

/// The translated header context, with every entry indexed by the
/// ambient effect context the program is checked at.
pub fn met_context(p: &CProgram, ambient: &Row) -> Context {
    let mut ctx = Context::new();
    let var = |name: String, modality: Modality, ty: Type| Entry::Var { name, modality, index: ambient.clone(), ty };
    for d in &p.decls {
        match d {
            CDecl::Var(x, a) => ctx.push(var(x.clone(), Modality::identity(), translate_vtype(a))),
            CDecl::Tracked(f, t) => {
                let row = translate_set(&single(f));
                ctx.push(Entry::TyVar { name: tyvar(f), kind: Kind::Effect });
                ctx.push(var(
                    f.clone(),
                    Modality::identity(),
                    Type::boxed(Modality::Absolute(row.clone()), translate_btype(t)),
                ));
                ctx.push(var(prime(f), Modality::Absolute(row), translate_btype(t)));
            }
        }
    }
    ctx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effect::Theory;
    use crate::met::{typecheck, types::type_equiv, Signatures};
    use crate::systemc::parse_program;

    fn check(src: &str) -> Result<(CProgram, CTyped), CError> {
        let p = parse_program(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let t = check_program(&p, &CLabels::default())?;
        Ok((p, t))
    }

    fn retypes(p: &CProgram, t: &CTyped) {
        let ctx = met_context(p, &t.ambient());
        let got = typecheck(Theory::Sets, &Signatures::new(), &RuntimeLabels::default(), &ctx, &t.term, &t.ambient())
            .unwrap_or_else(|e| panic!("{}: {e}", t.term));
        assert!(type_equiv(Theory::Sets, &got, &t.met_type()), "{got} vs {}", t.met_type());
    }

    #[test]
    fn gen_is_tracked() {
        let (p, t) = check("block y : (Int) => 1\n{ (x: Int) => y(x) }").unwrap();
        assert_eq!(t.judgement(), "(Int) => 1 | {y}");
        assert_eq!(t.term.to_string(), "fun (x: Int) -> y' x");
        retypes(&p, &t);
    }

    #[test]
    fn app_is_capability_polymorphic() {
        let (p, t) = check("{ (x: Int, f: (Int) => 1) => f(x) }").unwrap();
        assert_eq!(t.judgement(), "(Int, f: (Int) => 1) => 1 | {}");
        assert_eq!(crate::met::print::ty(&t.met_type()), "forall $f . <$f> (Int -> [$f] (Int -> 1) -> 1)");
        retypes(&p, &t);
    }

    #[test]
    fn boxing_records_the_set() {
        let (p, t) = check(
            "block y : (Int) => 1\n\
             { (x: Int, f: (Int) => 1) => return box { (z: Int) => f(z) } }(1, { (w: Int) => y(w) })",
        )
        .unwrap();
        assert_eq!(t.judgement(), "(Int) => 1 at {y} | {y}");
        retypes(&p, &t);
    }

    #[test]
    fn sum_checks_and_retypes() {
        let (p, t) = check("try { y: (Int) => 1 => y(42); y(37); 0 } with { p r => p + r(()) }").unwrap();
        assert_eq!(t.judgement(), "Int | {}");
        retypes(&p, &t);
    }

    #[test]
    fn escapes_are_rejected() {
        let e = check("try { y: (Int) => 1 => return box { (x: Int) => y(x) } } with { p r => r(()) }").unwrap_err();
        assert_eq!(e.kind_name(), "CapabilityEscape");
        let e = check("block y : (Int) => 1\nreturn box<{}> { (x: Int) => y(x) }").unwrap_err();
        assert_eq!(e.kind_name(), "CapabilityEscape");
        let e = check("{ (x: Int) => x }(1, 2)").unwrap_err();
        assert_eq!(e.kind_name(), "NotFullyApplied");
    }

    #[test]
    fn shadowed_binders_are_renamed() {
        let (p, t) = check("block f : (Int) => 1\n{ (g: (Int) => 1) => f(1); g(2) }({ (f: Int) => () })").unwrap();
        assert_eq!(t.judgement(), "1 | {f}");
        retypes(&p, &t);
        let (p, t) = check("block f : (Int) => 1\ntry { f: (Int) => 1 => f(1) } with { p r => r(()) }").unwrap();
        assert_eq!(t.judgement(), "1 | {}");
        retypes(&p, &t);
    }
}
