//! Parser for `.sc` programs.
//!
//! ```text
//! program ::= decl* term
//! decl    ::= block f : btype | var x : vtype
//! vtype   ::= 1 | Int | btype at set | (vtype)
//! btype   ::= (param, ...) => vtype        param ::= vtype | f : btype
//! set     ::= {name, ...}                  name  ::= f | %n
//! value   ::= () | n | x | box<set>? block | (value)
//! block   ::= f | { (binder, ...) => comp } | unbox value | cap %n | (block)
//! comp    ::= value | return value | block(arg, ...) | comp; comp | comp + comp
//!           | let x = comp in comp | def f = block in comp
//!           | try<set>? { f : btype => comp } with { p r => comp }
//!           | try<%n; set> { comp } with { p r => comp }
//! ```
//!
//! Whether a name denotes a value or a block is decided by the binder in
//! scope; names with no binder are read as values.

use super::{Block, BlockType, CClause, CDecl, CProgram, CTerm, CType, CValue, CapSet, Comp};
use crate::syntax::{ParseError, Parser, Tok};

pub const RESERVED: &[&str] =
    &["return", "let", "in", "def", "try", "with", "box", "unbox", "cap", "at", "Int", "block", "var"];

/// A parsed phrase of any sort.
enum Any {
    Value(CValue),
    Block(Block),
    Comp(Comp),
}

struct P {
    p: Parser,
    /// Names in scope, innermost last, with whether each is a block.
    scope: Vec<(String, bool)>,
}

pub fn parse_program(src: &str) -> Result<CProgram, ParseError> {
    let mut p = P::new(src)?;
    let mut decls = Vec::new();
    loop {
        if let Some((_, _, line)) = p.p.pragmas().into_iter().next() {
            return Err(ParseError { line, col: 1, msg: "`.sc` programs take no pragmas".into() });
        }
        if p.p.eat_kw("block") {
            let f = p.p.ident(RESERVED)?;
            p.p.expect_sym(":")?;
            let t = p.btype()?;
            p.scope.push((f.clone(), true));
            decls.push(CDecl::Tracked(f, t));
        } else if p.p.eat_kw("var") {
            let x = p.p.ident(RESERVED)?;
            p.p.expect_sym(":")?;
            let a = p.vtype()?;
            p.scope.push((x.clone(), false));
            decls.push(CDecl::Var(x, a));
        } else {
            break;
        }
    }
    let term = match p.any_seq()? {
        Any::Block(b) => CTerm::Block(b),
        Any::Value(v) => CTerm::Comp(Comp::Return(v)),
        Any::Comp(m) => CTerm::Comp(m),
    };
    p.p.expect_eof()?;
    Ok(CProgram { decls, term })
}

/// Parse a closed computation.
pub fn parse_comp(src: &str) -> Result<Comp, ParseError> {
    let mut p = P::new(src)?;
    let m = p.comp()?;
    p.p.expect_eof()?;
    Ok(m)
}

pub fn parse_vtype(src: &str) -> Result<CType, ParseError> {
    let mut p = P::new(src)?;
    let a = p.vtype()?;
    p.p.expect_eof()?;
    Ok(a)
}

pub fn parse_btype(src: &str) -> Result<BlockType, ParseError> {
    let mut p = P::new(src)?;
    let t = p.btype()?;
    p.p.expect_eof()?;
    Ok(t)
}

/// A type in either sort.
enum AnyType {
    V(CType),
    B(BlockType),
}

impl P {
    fn new(src: &str) -> Result<P, ParseError> {
        let mut p = Parser::new(src)?;
        p.allow_primes = false;
        Ok(P { p, scope: Vec::new() })
    }

    fn is_block(&self, x: &str) -> bool {
        self.scope.iter().rev().find(|(n, _)| n == x).is_some_and(|(_, b)| *b)
    }

    fn scoped<T>(&mut self, names: &[(String, bool)], f: impl FnOnce(&mut P) -> T) -> T {
        let n = self.scope.len();
        self.scope.extend(names.iter().cloned());
        let r = f(self);
        self.scope.truncate(n);
        r
    }

    fn set(&mut self) -> Result<CapSet, ParseError> {
        self.p.expect_sym("{")?;
        let mut c = CapSet::new();
        if !self.p.eat_sym("}") {
            loop {
                c.insert(self.p.label(RESERVED)?);
                if !self.p.eat_sym(",") {
                    break;
                }
            }
            self.p.expect_sym("}")?;
        }
        Ok(c)
    }

    fn any_type(&mut self) -> Result<AnyType, ParseError> {
        match self.p.peek().clone() {
            Tok::Int(1) => {
                self.p.bump();
                Ok(AnyType::V(CType::Unit))
            }
            Tok::Ident(s) if s == "Int" => {
                self.p.bump();
                Ok(AnyType::V(CType::Int))
            }
            Tok::Sym("(") => {
                self.p.bump();
                let mut vals = Vec::new();
                let mut blocks = Vec::new();
                if !self.p.is_sym(")") {
                    loop {
                        let named = matches!(self.p.peek(), Tok::Ident(s) if !RESERVED.contains(&s.as_str()))
                            && self.p.peek_at(1) == &Tok::Sym(":");
                        if named {
                            let f = self.p.ident(RESERVED)?;
                            self.p.bump();
                            blocks.push((f, self.btype()?));
                        } else {
                            if !blocks.is_empty() {
                                return Err(self.p.error("value parameters must precede block parameters"));
                            }
                            vals.push(self.vtype()?);
                        }
                        if !self.p.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.p.expect_sym(")")?;
                if !self.p.eat_sym("=>") {
                    return match (vals.len(), blocks.is_empty()) {
                        (1, true) => Ok(AnyType::V(vals.pop().expect("one value type"))),
                        _ => Err(self.p.unexpected("`=>`")),
                    };
                }
                let t = BlockType::new(vals, blocks, self.vtype()?);
                if self.p.eat_kw("at") {
                    Ok(AnyType::V(CType::Boxed(Box::new(t), self.set()?)))
                } else {
                    Ok(AnyType::B(t))
                }
            }
            _ => Err(self.p.unexpected("a type")),
        }
    }

    fn vtype(&mut self) -> Result<CType, ParseError> {
        match self.any_type()? {
            AnyType::V(a) => Ok(a),
            AnyType::B(_) => Err(self.p.error("a block type must be boxed with `at` to be a value type")),
        }
    }

    fn btype(&mut self) -> Result<BlockType, ParseError> {
        match self.any_type()? {
            AnyType::B(t) => Ok(t),
            AnyType::V(_) => Err(self.p.error("expected a block type")),
        }
    }

    fn to_comp(&self, a: Any) -> Result<Comp, ParseError> {
        match a {
            Any::Comp(m) => Ok(m),
            Any::Value(v) => Ok(Comp::Return(v)),
            Any::Block(_) => Err(self.p.error("a block must be called with its arguments")),
        }
    }

    fn to_value(&self, a: Any) -> Result<CValue, ParseError> {
        match a {
            Any::Value(v) => Ok(v),
            _ => Err(self.p.error("expected a value")),
        }
    }

    fn to_block(&self, a: Any) -> Result<Block, ParseError> {
        match a {
            Any::Block(b) => Ok(b),
            _ => Err(self.p.error("expected a block")),
        }
    }

    fn comp(&mut self) -> Result<Comp, ParseError> {
        let a = self.any_seq()?;
        self.to_comp(a)
    }

    fn any_seq(&mut self) -> Result<Any, ParseError> {
        let a = self.any_binder()?;
        if self.p.eat_sym(";") {
            let m = self.to_comp(a)?;
            Ok(Any::Comp(Comp::seq(m, self.comp()?)))
        } else {
            Ok(a)
        }
    }

    fn clause(&mut self) -> Result<CClause, ParseError> {
        self.p.expect_sym("{")?;
        let param = self.p.ident(RESERVED)?;
        let resume = self.p.ident(RESERVED)?;
        self.p.expect_sym("=>")?;
        let body = self.scoped(&[(param.clone(), false), (resume.clone(), true)], |p| p.comp())?;
        self.p.expect_sym("}")?;
        Ok(CClause { param, resume, body })
    }

    fn any_binder(&mut self) -> Result<Any, ParseError> {
        if self.p.eat_kw("let") {
            let x = self.p.ident(RESERVED)?;
            self.p.expect_sym("=")?;
            let m = self.comp()?;
            self.p.expect_kw("in")?;
            let n = self.scoped(&[(x.clone(), false)], |p| p.comp())?;
            return Ok(Any::Comp(Comp::let_(x, m, n)));
        }
        if self.p.eat_kw("def") {
            let f = self.p.ident(RESERVED)?;
            self.p.expect_sym("=")?;
            let a = self.any_seq()?;
            let q = self.to_block(a)?;
            self.p.expect_kw("in")?;
            let n = self.scoped(&[(f.clone(), true)], |p| p.comp())?;
            return Ok(Any::Comp(Comp::def(f, q, n)));
        }
        if self.p.eat_kw("try") {
            return self.try_rest().map(Any::Comp);
        }
        self.any_sum()
    }

    fn try_rest(&mut self) -> Result<Comp, ParseError> {
        let mut caps = None;
        if self.p.eat_sym("<") {
            if let Tok::RtLabel(l) = self.p.peek().clone() {
                self.p.bump();
                self.p.expect_sym(";")?;
                let c = self.set()?;
                self.p.expect_sym(">")?;
                self.p.expect_sym("{")?;
                let body = self.comp()?;
                self.p.expect_sym("}")?;
                self.p.expect_kw("with")?;
                let clause = self.clause()?;
                return Ok(Comp::TryRt { label: l, caps: c, body: Box::new(body), clause: Box::new(clause) });
            }
            caps = Some(self.set()?);
            self.p.expect_sym(">")?;
        }
        self.p.expect_sym("{")?;
        let f = self.p.ident(RESERVED)?;
        self.p.expect_sym(":")?;
        let sig = self.btype()?;
        self.p.expect_sym("=>")?;
        let body = self.scoped(&[(f.clone(), true)], |p| p.comp())?;
        self.p.expect_sym("}")?;
        self.p.expect_kw("with")?;
        let clause = self.clause()?;
        Ok(Comp::Try { cap: f, sig, body: Box::new(body), clause: Box::new(clause), caps })
    }

    fn any_sum(&mut self) -> Result<Any, ParseError> {
        let mut a = self.any_unary()?;
        while self.p.eat_sym("+") {
            let m = self.to_comp(a)?;
            let b = self.any_unary()?;
            a = Any::Comp(Comp::add(m, self.to_comp(b)?));
        }
        Ok(a)
    }

    fn any_unary(&mut self) -> Result<Any, ParseError> {
        if self.p.eat_kw("return") {
            let a = self.any_unary()?;
            return Ok(Any::Comp(Comp::Return(self.to_value(a)?)));
        }
        if self.p.eat_kw("box") {
            let ann = if self.p.eat_sym("<") {
                let c = self.set()?;
                self.p.expect_sym(">")?;
                Some(c)
            } else {
                None
            };
            let a = self.any_unary()?;
            return Ok(Any::Value(CValue::Box(Box::new(self.to_block(a)?), ann)));
        }
        if self.p.eat_kw("unbox") {
            let a = self.any_unary()?;
            return Ok(Any::Block(Block::Unbox(self.to_value(a)?)));
        }
        self.any_app()
    }

    fn any_app(&mut self) -> Result<Any, ParseError> {
        let a = self.any_atom()?;
        match a {
            Any::Block(p) if self.p.is_sym("(") => {
                self.p.bump();
                let mut vs = Vec::new();
                let mut qs = Vec::new();
                if !self.p.is_sym(")") {
                    loop {
                        match self.any_unary()? {
                            Any::Value(v) if qs.is_empty() => vs.push(v),
                            Any::Value(_) => return Err(self.p.error("value arguments must precede block arguments")),
                            Any::Block(q) => qs.push(q),
                            Any::Comp(_) => return Err(self.p.error("arguments must be values or blocks")),
                        }
                        if !self.p.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.p.expect_sym(")")?;
                Ok(Any::Comp(Comp::Call(p, vs, qs)))
            }
            other => Ok(other),
        }
    }

    fn block_lit(&mut self) -> Result<Block, ParseError> {
        self.p.expect_sym("{")?;
        self.p.expect_sym("(")?;
        let mut vals = Vec::new();
        let mut blocks = Vec::new();
        if !self.p.is_sym(")") {
            loop {
                let x = self.p.ident(RESERVED)?;
                self.p.expect_sym(":")?;
                match self.any_type()? {
                    AnyType::V(a) if blocks.is_empty() => vals.push((x, a)),
                    AnyType::V(_) => return Err(self.p.error("value parameters must precede block parameters")),
                    AnyType::B(t) => blocks.push((x, t)),
                }
                if !self.p.eat_sym(",") {
                    break;
                }
            }
        }
        self.p.expect_sym(")")?;
        self.p.expect_sym("=>")?;
        let names: Vec<(String, bool)> =
            vals.iter().map(|(x, _)| (x.clone(), false)).chain(blocks.iter().map(|(f, _)| (f.clone(), true))).collect();
        let body = self.scoped(&names, |p| p.comp())?;
        self.p.expect_sym("}")?;
        Ok(Block::lit(vals, blocks, body))
    }

    fn any_atom(&mut self) -> Result<Any, ParseError> {
        match self.p.peek().clone() {
            Tok::Int(n) => {
                self.p.bump();
                Ok(Any::Value(CValue::Int(n)))
            }
            Tok::Sym("(") => {
                self.p.bump();
                if self.p.eat_sym(")") {
                    return Ok(Any::Value(CValue::Unit));
                }
                let a = self.any_seq()?;
                self.p.expect_sym(")")?;
                Ok(a)
            }
            Tok::Sym("{") => Ok(Any::Block(self.block_lit()?)),
            Tok::Ident(s) if s == "cap" => {
                self.p.bump();
                match self.p.peek().clone() {
                    Tok::RtLabel(l) => {
                        self.p.bump();
                        Ok(Any::Block(Block::Cap(l)))
                    }
                    _ => Err(self.p.unexpected("a runtime label")),
                }
            }
            Tok::Ident(x) if x != super::SEQ_VAR && !RESERVED.contains(&x.as_str()) => {
                let x = self.p.ident(RESERVED)?;
                if self.is_block(&x) {
                    Ok(Any::Block(Block::Var(x)))
                } else {
                    Ok(Any::Value(CValue::Var(x)))
                }
            }
            _ => Err(self.p.unexpected("a term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for src in [
            "()",
            "try { y: (Int) => 1 => y(42); y(37); 0 } with { p r => p + r(()) }",
            "def f = { (x: Int) => x } in f(3)",
            "{ (x: Int, f: (Int) => 1) => f(x) }(42, { (z: Int) => () })",
            "let b = box { (x: Int) => x + 1 } in (unbox b)(2)",
            "try<{}> { y: (Int) => 1 => y(1) } with { p r => r(()) }",
            "try<%0; {}> { cap %0(1) } with { p r => r(()) }",
            "let x = box<{}> { () => 1 } in x",
        ] {
            let m = parse_comp(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            assert_eq!(m.to_string(), src);
        }
    }

    #[test]
    fn types_round_trip() {
        for src in ["(Int, f: (Int) => 1) => 1", "(f: (Int) => 1) => (Int) => 1 at {f}", "() => (Int) => 1 at {%0,f}"] {
            assert_eq!(parse_btype(src).unwrap().to_string(), src);
        }
        assert_eq!(parse_vtype("((Int) => 1 at {y})").unwrap().to_string(), "(Int) => 1 at {y}");
    }

    #[test]
    fn header_scopes_block_names() {
        let p = parse_program("block y : (Int) => 1\n{ (x: Int) => y(x) }").unwrap();
        assert!(matches!(p.term, CTerm::Block(_)));
        assert!(parse_program("var y : Int\ny(1)").is_err());
        assert!(parse_comp("{ (x: Int) => x }").is_err());
    }
}
