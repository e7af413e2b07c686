//! Parser for `.fe` programs.
//!
//! ```text
//! program ::= pragma* decl* comp
//! pragma  ::= #effects row
//! decl    ::= effect l : A =>> B | var x : A | tyvar a (:: kind)?
//! type    ::= forall a (:: kind)? . type | atom -> type | atom ->{row} type | atom
//! value   ::= () | n | x | fun<row>? (x: A) -> comp | tfun (a) -> value
//!           | handler<row; A> { l p r -> comp } | (value)
//! comp    ::= value | return value | value value | value @A | do l value
//!           | let x = comp in comp | comp; comp | comp + comp
//!           | handle<row> comp with { l p r -> comp }
//! ```

use super::print::default_kind;
use super::{Clause, Comp, FDecl, FKind, FProgram, FSig, FSignatures, FType, Value};
use crate::effect::Row;
use crate::met::SEQ_VAR;
use crate::syntax::{ParseError, Parser, Tok};

pub const RESERVED: &[&str] = &[
    "fun", "tfun", "let", "in", "do", "handle", "handler", "with", "return", "forall", "Int", "effect", "value", "var",
    "tyvar",
];

fn parser(src: &str) -> Result<Parser, ParseError> {
    let mut p = Parser::new(src)?;
    p.allow_primes = false;
    Ok(p)
}

pub fn parse_program(src: &str) -> Result<FProgram, ParseError> {
    let mut p = parser(src)?;
    let mut effects = Row::empty();
    let mut sigs = FSignatures::new();
    let mut decls = Vec::new();
    loop {
        for (k, v, line) in p.pragmas() {
            match k.as_str() {
                "effects" => effects = Parser::pragma_row(&v)?,
                _ => return Err(ParseError { line, col: 1, msg: format!("unknown pragma `#{k}`") }),
            }
        }
        if p.eat_kw("effect") {
            let l = p.ident(RESERVED)?;
            p.expect_sym(":")?;
            let arg = ty(&mut p)?;
            p.expect_sym("=>>")?;
            let res = ty(&mut p)?;
            sigs.insert(l, FSig { arg, res });
        } else if p.eat_kw("var") {
            let x = p.ident(RESERVED)?;
            p.expect_sym(":")?;
            decls.push(FDecl::Var(x, ty(&mut p)?));
        } else if p.eat_kw("tyvar") {
            let (a, k) = tybinder(&mut p)?;
            decls.push(FDecl::TyVar(a, k));
        } else {
            break;
        }
    }
    let term = comp(&mut p)?;
    p.expect_eof()?;
    Ok(FProgram { sigs, effects, decls, term })
}

pub fn parse_comp(src: &str) -> Result<Comp, ParseError> {
    let mut p = parser(src)?;
    let m = comp(&mut p)?;
    p.expect_eof()?;
    Ok(m)
}

pub fn parse_type(src: &str) -> Result<FType, ParseError> {
    let mut p = parser(src)?;
    let t = ty(&mut p)?;
    p.expect_eof()?;
    Ok(t)
}

fn kind(p: &mut Parser) -> Result<FKind, ParseError> {
    if p.eat_kw("value") {
        Ok(FKind::Value)
    } else if p.eat_kw("effect") {
        Ok(FKind::Effect)
    } else {
        Err(p.unexpected("a kind"))
    }
}

fn tyvar_name(p: &mut Parser) -> Result<String, ParseError> {
    if let Tok::EffVar(v) = p.peek().clone() {
        p.bump();
        return Ok(v);
    }
    p.ident(RESERVED)
}

fn tybinder(p: &mut Parser) -> Result<(String, FKind), ParseError> {
    let a = tyvar_name(p)?;
    let k = if p.eat_sym("::") { kind(p)? } else { default_kind(&a) };
    Ok((a, k))
}

fn braced_row(p: &mut Parser) -> Result<Row, ParseError> {
    p.expect_sym("{")?;
    let r = p.row_until("}", RESERVED)?;
    p.expect_sym("}")?;
    Ok(r)
}

fn angled_row(p: &mut Parser, close: &str) -> Result<Row, ParseError> {
    let r = p.row_until(close, RESERVED)?;
    p.expect_sym(close)?;
    Ok(r)
}

pub fn ty(p: &mut Parser) -> Result<FType, ParseError> {
    if p.eat_kw("forall") {
        let (a, k) = tybinder(p)?;
        p.expect_sym(".")?;
        return Ok(FType::Forall(a, k, Box::new(ty(p)?)));
    }
    let a = ty_atom(p)?;
    if p.eat_sym("->") {
        let e = if p.is_sym("{") { braced_row(p)? } else { Row::empty() };
        Ok(FType::arrow(a, e, ty(p)?))
    } else {
        Ok(a)
    }
}

fn ty_atom(p: &mut Parser) -> Result<FType, ParseError> {
    match p.peek().clone() {
        Tok::Int(1) => {
            p.bump();
            Ok(FType::Unit)
        }
        Tok::Ident(s) if s == "Int" => {
            p.bump();
            Ok(FType::Int)
        }
        Tok::Sym("(") => {
            p.bump();
            let t = ty(p)?;
            p.expect_sym(")")?;
            Ok(t)
        }
        Tok::Sym("{") => Ok(FType::Row(braced_row(p)?)),
        Tok::EffVar(_) | Tok::Ident(_) => Ok(FType::Var(tyvar_name(p)?)),
        _ => Err(p.unexpected("a type")),
    }
}

fn into_value(p: &Parser, m: Comp) -> Result<Value, ParseError> {
    match m {
        Comp::Return(v) => Ok(v),
        _ => Err(p.error("expected a value, found a computation")),
    }
}

pub fn comp(p: &mut Parser) -> Result<Comp, ParseError> {
    let m = comp_binder(p)?;
    if p.eat_sym(";") {
        Ok(Comp::seq(m, comp(p)?))
    } else {
        Ok(m)
    }
}

fn clause(p: &mut Parser) -> Result<Clause, ParseError> {
    p.expect_sym("{")?;
    let label = p.ident(RESERVED)?;
    let param = p.ident(RESERVED)?;
    let resume = p.ident(RESERVED)?;
    p.expect_sym("->")?;
    let body = comp(p)?;
    p.expect_sym("}")?;
    Ok(Clause { label, param, resume, body })
}

fn comp_binder(p: &mut Parser) -> Result<Comp, ParseError> {
    if p.is_kw("fun") || p.is_kw("tfun") {
        return Ok(Comp::Return(value_binder(p)?));
    }
    if p.eat_kw("let") {
        let x = p.ident(RESERVED)?;
        p.expect_sym("=")?;
        let m = comp(p)?;
        p.expect_kw("in")?;
        return Ok(Comp::let_(x, m, comp(p)?));
    }
    if p.eat_kw("handle") {
        p.expect_sym("<")?;
        let e = angled_row(p, ">")?;
        let m = comp(p)?;
        p.expect_kw("with")?;
        return Ok(Comp::handle(e, m, clause(p)?));
    }
    comp_sum(p)
}

fn value_binder(p: &mut Parser) -> Result<Value, ParseError> {
    if p.eat_kw("fun") {
        let e = if p.eat_sym("<") { angled_row(p, ">")? } else { Row::empty() };
        p.expect_sym("(")?;
        let x = p.ident(RESERVED)?;
        p.expect_sym(":")?;
        let a = ty(p)?;
        p.expect_sym(")")?;
        p.expect_sym("->")?;
        return Ok(Value::lam(e, x, a, comp(p)?));
    }
    p.expect_kw("tfun")?;
    p.expect_sym("(")?;
    let (a, k) = tybinder(p)?;
    p.expect_sym(")")?;
    p.expect_sym("->")?;
    let body = comp(p)?;
    Ok(Value::TyLam(a, k, Box::new(into_value(p, body)?)))
}

fn comp_sum(p: &mut Parser) -> Result<Comp, ParseError> {
    let mut m = comp_prefix(p)?;
    while p.eat_sym("+") {
        m = Comp::add(m, comp_prefix(p)?);
    }
    Ok(m)
}

fn comp_prefix(p: &mut Parser) -> Result<Comp, ParseError> {
    if p.eat_kw("do") {
        let l = p.ident(RESERVED)?;
        return Ok(Comp::Do(l, atom_value(p)?));
    }
    if p.eat_kw("return") {
        let m = comp_prefix(p)?;
        return Ok(Comp::Return(into_value(p, m)?));
    }
    comp_app(p)
}

fn starts_atom(p: &Parser) -> bool {
    match p.peek() {
        Tok::Sym("(") | Tok::Int(_) => true,
        Tok::Ident(s) => s == "handler" || !RESERVED.contains(&s.as_str()),
        _ => false,
    }
}

fn comp_app(p: &mut Parser) -> Result<Comp, ParseError> {
    let head = atom(p)?;
    if p.eat_sym("@") {
        let v = into_value(p, head)?;
        return Ok(Comp::TyApp(v, ty_atom(p)?));
    }
    if starts_atom(p) {
        let v = into_value(p, head)?;
        return Ok(Comp::App(v, atom_value(p)?));
    }
    Ok(head)
}

fn atom_value(p: &mut Parser) -> Result<Value, ParseError> {
    let m = atom(p)?;
    into_value(p, m)
}

fn atom(p: &mut Parser) -> Result<Comp, ParseError> {
    match p.peek().clone() {
        Tok::Int(n) => {
            p.bump();
            Ok(Comp::Return(Value::Int(n)))
        }
        Tok::Sym("(") => {
            p.bump();
            if p.eat_sym(")") {
                return Ok(Comp::Return(Value::Unit));
            }
            let m = comp(p)?;
            p.expect_sym(")")?;
            Ok(m)
        }
        Tok::Ident(s) if s == "handler" => {
            p.bump();
            p.expect_sym("<")?;
            let e = angled_row(p, ";")?;
            let a = ty(p)?;
            p.expect_sym(">")?;
            let c = clause(p)?;
            Ok(Comp::Return(Value::Handler { row: e, result: a, clause: Box::new(c) }))
        }
        Tok::Ident(x) if x != SEQ_VAR => Ok(Comp::Return(Value::Var(p.ident(RESERVED)?))),
        _ => Err(p.unexpected("a term")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for src in [
            "()",
            "fun<yield> (x: Int) -> do yield x",
            "tfun ($e) -> fun (f: Int ->{$e} 1) -> fun<$e> (x: Int) -> f x",
            "tfun ($e) -> handler<$e; Int> { yield p r -> p + r () }",
            "let s = sum @{} in s (fun<yield> (x: 1) -> do yield 42; do yield 37; 0)",
            "handle<> (do yield 1; 2) with { yield p r -> r () }",
            "(let x = 1 in x); 2",
            "(fun (x: Int) -> x) 5",
        ] {
            let m = parse_comp(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            assert_eq!(m.to_string(), src);
        }
    }

    #[test]
    fn types_round_trip() {
        for src in ["forall $e . (Int ->{$e} 1) -> Int ->{$e} 1", "(1 ->{yield,$e} Int) ->{$e} Int"] {
            assert_eq!(parse_type(src).unwrap().to_string(), src);
        }
    }

    #[test]
    fn application_needs_values() {
        assert!(parse_comp("(do yield 1) 2").is_err());
        assert!(parse_comp("x'").is_err());
    }
}
