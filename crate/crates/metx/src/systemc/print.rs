//! Rendering of `.sc` types and terms. The output parses back to the
//! same tree.

use super::{Block, BlockType, CClause, CType, CValue, CapSet, Comp, SEQ_VAR};
use std::fmt;

pub fn set(c: &CapSet) -> String {
    format!("{{{}}}", c.iter().cloned().collect::<Vec<_>>().join(","))
}

pub fn vtype(a: &CType) -> String {
    match a {
        CType::Unit => "1".into(),
        CType::Int => "Int".into(),
        CType::Boxed(t, c) => format!("{} at {}", btype(t), set(c)),
    }
}

pub fn btype(t: &BlockType) -> String {
    let items: Vec<String> =
        t.vals.iter().map(vtype).chain(t.blocks.iter().map(|(f, u)| format!("{f}: {}", btype(u)))).collect();
    format!("({}) => {}", items.join(", "), vtype(&t.result))
}

pub fn comp(m: &Comp) -> String {
    let mut s = String::new();
    comp_at(m, 0, &mut s);
    s
}

pub fn value(v: &CValue) -> String {
    let mut s = String::new();
    value_at(v, 0, &mut s);
    s
}

pub fn block(p: &Block) -> String {
    let mut s = String::new();
    block_at(p, 0, &mut s);
    s
}

/// Precedence levels: 0 sequence, 1 binders, 2 sums, 3 prefix forms,
/// 4 calls, 5 atoms.
fn comp_level(m: &Comp) -> u8 {
    match m {
        Comp::Let(x, ..) if x == SEQ_VAR => 0,
        Comp::Let(..) | Comp::Def(..) | Comp::Try { .. } | Comp::TryRt { .. } => 1,
        Comp::Add(..) => 2,
        Comp::Call(..) => 4,
        Comp::Return(v) => value_level(v),
    }
}

fn value_level(v: &CValue) -> u8 {
    match v {
        CValue::Box(..) => 3,
        _ => 5,
    }
}

fn block_level(p: &Block) -> u8 {
    match p {
        Block::Unbox(_) => 3,
        _ => 5,
    }
}

fn wrap(paren: bool, out: &mut String, body: impl FnOnce(&mut String)) {
    if paren {
        out.push('(');
    }
    body(out);
    if paren {
        out.push(')');
    }
}

fn value_at(v: &CValue, lvl: u8, out: &mut String) {
    wrap(value_level(v) < lvl, out, |out| match v {
        CValue::Unit => out.push_str("()"),
        CValue::Int(n) => out.push_str(&n.to_string()),
        CValue::Var(x) => out.push_str(x),
        CValue::Box(p, ann) => {
            out.push_str("box");
            if let Some(c) = ann {
                out.push_str(&format!("<{}>", set(c)));
            }
            out.push(' ');
            block_at(p, 3, out);
        }
    })
}

fn block_at(p: &Block, lvl: u8, out: &mut String) {
    wrap(block_level(p) < lvl, out, |out| match p {
        Block::Var(f) => out.push_str(f),
        Block::Cap(l) => out.push_str(&format!("cap {l}")),
        Block::Unbox(v) => {
            out.push_str("unbox ");
            value_at(v, 3, out);
        }
        Block::Lit { vals, blocks, body } => {
            let items: Vec<String> = vals
                .iter()
                .map(|(x, a)| format!("{x}: {}", vtype(a)))
                .chain(blocks.iter().map(|(f, t)| format!("{f}: {}", btype(t))))
                .collect();
            out.push_str(&format!("{{ ({}) => ", items.join(", ")));
            comp_at(body, 0, out);
            out.push_str(" }");
        }
    })
}

fn clause(c: &CClause, out: &mut String) {
    out.push_str(&format!("{{ {} {} => ", c.param, c.resume));
    comp_at(&c.body, 0, out);
    out.push_str(" }");
}

fn comp_at(m: &Comp, lvl: u8, out: &mut String) {
    if let Comp::Return(v) = m {
        return value_at(v, lvl, out);
    }
    wrap(comp_level(m) < lvl, out, |out| match m {
        Comp::Return(_) => unreachable!(),
        Comp::Call(p, vs, qs) => {
            block_at(p, 5, out);
            out.push('(');
            let mut first = true;
            for v in vs {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                value_at(v, 3, out);
            }
            for q in qs {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                block_at(q, 3, out);
            }
            out.push(')');
        }
        Comp::Let(x, a, b) if x == SEQ_VAR => {
            comp_at(a, 2, out);
            out.push_str("; ");
            comp_at(b, 0, out);
        }
        Comp::Let(x, a, b) => {
            out.push_str(&format!("let {x} = "));
            comp_at(a, 0, out);
            out.push_str(" in ");
            comp_at(b, 0, out);
        }
        Comp::Def(f, p, n) => {
            out.push_str(&format!("def {f} = "));
            block_at(p, 0, out);
            out.push_str(" in ");
            comp_at(n, 0, out);
        }
        Comp::Try { cap, sig, body, clause: c, caps } => {
            out.push_str("try");
            if let Some(cs) = caps {
                out.push_str(&format!("<{}>", set(cs)));
            }
            out.push_str(&format!(" {{ {cap}: {} => ", btype(sig)));
            comp_at(body, 0, out);
            out.push_str(" } with ");
            clause(c, out);
        }
        Comp::TryRt { label, caps, body, clause: c } => {
            out.push_str(&format!("try<{label}; {}> {{ ", set(caps)));
            comp_at(body, 0, out);
            out.push_str(" } with ");
            clause(c, out);
        }
        Comp::Add(a, b) => {
            comp_at(a, 2, out);
            out.push_str(" + ");
            comp_at(b, 3, out);
        }
    })
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&vtype(self))
    }
}

impl fmt::Display for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&btype(self))
    }
}

impl fmt::Display for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&comp(self))
    }
}

impl fmt::Display for CValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&value(self))
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&block(self))
    }
}
