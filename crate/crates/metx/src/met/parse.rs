//! Parser for `.mex` programs, terms and types.
//!
//! ```text
//! program ::= pragma* decl* term
//! pragma  ::= #theory sets|simple|scoped | #ambient row
//! decl    ::= effect l : A =>> B | var x : A | var<μ> x : A
//!           | lock <μ> | tyvar a (:: kind)?
//! ```

use super::print::default_kind;
use super::{Decl, Handler, Kind, Modality, Program, Sig, Signatures, Term, Type, SEQ_VAR};
use crate::effect::{Atom, Row, Theory};
use crate::syntax::{ParseError, Parser, Tok};

pub const RESERVED: &[&str] = &[
    "fun", "tfun", "mod", "letmod", "let", "in", "do", "local", "handle", "with", "return", "forall", "Int", "effect",
    "abs", "any", "var", "lock", "tyvar",
];

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src)?;
    let mut theory = Theory::ScopedRows;
    let mut ambient = Row::empty();
    let mut sigs = Signatures::new();
    let mut decls = Vec::new();
    loop {
        for (k, v, line) in p.pragmas() {
            match k.as_str() {
                "theory" => {
                    theory = Theory::from_name(&v).ok_or_else(|| ParseError {
                        line,
                        col: 1,
                        msg: format!("unknown theory `{v}`"),
                    })?
                }
                "ambient" => ambient = Parser::pragma_row(&v)?,
                _ => return Err(ParseError { line, col: 1, msg: format!("unknown pragma `#{k}`") }),
            }
        }
        if p.eat_kw("effect") {
            let l = p.label(RESERVED)?;
            p.expect_sym(":")?;
            let arg = ty(&mut p)?;
            p.expect_sym("=>>")?;
            let res = ty(&mut p)?;
            sigs.insert(l, Sig { arg, res });
        } else if p.eat_kw("var") {
            let modality = if p.eat_sym("<") {
                let m = modality(&mut p)?;
                p.expect_sym(">")?;
                m
            } else {
                Modality::identity()
            };
            let name = p.ident(RESERVED)?;
            p.expect_sym(":")?;
            decls.push(Decl::Var { name, modality, ty: ty(&mut p)? });
        } else if p.eat_kw("lock") {
            p.expect_sym("<")?;
            let m = modality(&mut p)?;
            p.expect_sym(">")?;
            decls.push(Decl::Lock(m));
        } else if p.eat_kw("tyvar") {
            let (a, k) = tybinder(&mut p)?;
            decls.push(Decl::TyVar(a, k));
        } else {
            break;
        }
    }
    let term = term(&mut p)?;
    p.expect_eof()?;
    Ok(Program { theory, sigs, ambient, decls, term })
}

/// Parse a closed term on its own.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = term(&mut p)?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?;
    let t = ty(&mut p)?;
    p.expect_eof()?;
    Ok(t)
}

pub fn modality(p: &mut Parser) -> Result<Modality, ParseError> {
    if p.eat_sym("[") {
        let r = p.row_until("]", RESERVED)?;
        p.expect_sym("]")?;
        Ok(Modality::Absolute(r))
    } else if p.eat_sym("<") {
        let r = p.row_until(">", RESERVED)?;
        p.expect_sym(">")?;
        Ok(Modality::Relative(r))
    } else {
        Err(p.unexpected("a modality `[E]` or `<D>`"))
    }
}

fn kind(p: &mut Parser) -> Result<Kind, ParseError> {
    for (kw, k) in [("abs", Kind::Abs), ("any", Kind::Any), ("effect", Kind::Effect)] {
        if p.eat_kw(kw) {
            return Ok(k);
        }
    }
    Err(p.unexpected("a kind"))
}

fn tyvar_name(p: &mut Parser) -> Result<String, ParseError> {
    if let Tok::EffVar(v) = p.peek().clone() {
        p.bump();
        return Ok(v);
    }
    p.ident(RESERVED)
}

fn tybinder(p: &mut Parser) -> Result<(String, Kind), ParseError> {
    let a = tyvar_name(p)?;
    let k = if p.eat_sym("::") { kind(p)? } else { default_kind(&a) };
    Ok((a, k))
}

pub fn ty(p: &mut Parser) -> Result<Type, ParseError> {
    if p.eat_kw("forall") {
        let (a, k) = tybinder(p)?;
        p.expect_sym(".")?;
        return Ok(Type::forall(a, k, ty(p)?));
    }
    let a = ty_box(p)?;
    if p.eat_sym("->") {
        Ok(Type::arrow(a, ty(p)?))
    } else {
        Ok(a)
    }
}

fn ty_box(p: &mut Parser) -> Result<Type, ParseError> {
    if p.is_sym("[") || p.is_sym("<") {
        let m = modality(p)?;
        return Ok(Type::boxed(m, ty_box(p)?));
    }
    ty_atom(p)
}

fn ty_atom(p: &mut Parser) -> Result<Type, ParseError> {
    match p.peek().clone() {
        Tok::Int(1) => {
            p.bump();
            Ok(Type::Unit)
        }
        Tok::Ident(s) if s == "Int" => {
            p.bump();
            Ok(Type::Int)
        }
        Tok::Sym("(") => {
            p.bump();
            let t = ty(p)?;
            p.expect_sym(")")?;
            Ok(t)
        }
        Tok::Sym("{") => {
            p.bump();
            let r = p.row_until("}", RESERVED)?;
            p.expect_sym("}")?;
            Ok(Type::Row(r))
        }
        Tok::EffVar(_) | Tok::Ident(_) => Ok(Type::Var(tyvar_name(p)?)),
        _ => Err(p.unexpected("a type")),
    }
}

pub fn term(p: &mut Parser) -> Result<Term, ParseError> {
    let m = term_binder(p)?;
    if p.eat_sym(";") {
        Ok(Term::seq(m, term(p)?))
    } else {
        Ok(m)
    }
}

fn term_binder(p: &mut Parser) -> Result<Term, ParseError> {
    if p.eat_kw("fun") {
        p.expect_sym("(")?;
        let x = p.ident(RESERVED)?;
        p.expect_sym(":")?;
        let a = ty(p)?;
        p.expect_sym(")")?;
        p.expect_sym("->")?;
        return Ok(Term::lam(x, a, term(p)?));
    }
    if p.eat_kw("tfun") {
        p.expect_sym("(")?;
        let (a, k) = tybinder(p)?;
        p.expect_sym(")")?;
        p.expect_sym("->")?;
        return Ok(Term::tylam(a, k, term(p)?));
    }
    if p.eat_kw("let") {
        let x = p.ident(RESERVED)?;
        p.expect_sym("=")?;
        let m = term(p)?;
        p.expect_kw("in")?;
        return Ok(Term::let_(x, m, term(p)?));
    }
    if p.eat_kw("letmod") {
        p.expect_sym("<")?;
        let first = modality(p)?;
        let (outer, inner) = if p.eat_sym(";") { (first, modality(p)?) } else { (Modality::identity(), first) };
        p.expect_sym(">")?;
        let x = p.ident(RESERVED)?;
        p.expect_sym("=")?;
        let v = term(p)?;
        p.expect_kw("in")?;
        return Ok(Term::letmod(outer, inner, x, v, term(p)?));
    }
    if p.eat_kw("local") {
        let l = p.label(RESERVED)?;
        p.expect_sym(":")?;
        let arg = ty(p)?;
        p.expect_sym("=>>")?;
        let res = ty(p)?;
        p.expect_kw("in")?;
        return Ok(Term::Local(l, Sig { arg, res }, Box::new(term(p)?)));
    }
    if p.eat_kw("handle") {
        let annotated = if p.eat_sym("<") {
            let m = modality(p)?;
            p.expect_sym(">")?;
            Some(m)
        } else {
            None
        };
        let m = term(p)?;
        p.expect_kw("with")?;
        return handler(p, annotated, m);
    }
    term_sum(p)
}

/// Parse the clauses, applying the sugar for an omitted modality and an
/// omitted return clause.
fn handler(p: &mut Parser, annotated: Option<Modality>, m: Term) -> Result<Term, ParseError> {
    p.expect_sym("{")?;
    let ret = if p.eat_kw("return") {
        let x = p.ident(RESERVED)?;
        p.expect_sym("->")?;
        let n = term(p)?;
        p.expect_sym(",")?;
        Some((x, n))
    } else {
        None
    };
    let label = p.label(RESERVED)?;
    let param = p.ident(RESERVED)?;
    let resume = p.ident(RESERVED)?;
    p.expect_sym("->")?;
    let mut op_body = term(p)?;
    p.expect_sym("}")?;
    let mu = annotated.clone().unwrap_or_else(Modality::identity);
    if annotated.is_none() {
        op_body = Term::letmod(Modality::identity(), Modality::identity(), resume.clone(), Term::var(&resume), op_body);
    }
    let (ret_var, ret_body) = ret.unwrap_or_else(|| {
        let ell = Modality::Relative(Row(vec![Atom::label(label.clone())]));
        let inner = mu.compose(&ell);
        ("x".into(), Term::letmod(Modality::identity(), inner, "x'", Term::var("x"), Term::var("x'")))
    });
    Ok(Term::handle(mu, m, Handler { ret_var, ret_body, label, param, resume, op_body }))
}

fn term_sum(p: &mut Parser) -> Result<Term, ParseError> {
    let mut m = term_prefix(p)?;
    while p.eat_sym("+") {
        m = Term::add(m, term_prefix(p)?);
    }
    Ok(m)
}

fn term_prefix(p: &mut Parser) -> Result<Term, ParseError> {
    if p.eat_kw("do") {
        let l = p.label(RESERVED)?;
        return Ok(Term::do_(l, term_prefix(p)?));
    }
    if p.eat_kw("mod") {
        p.expect_sym("<")?;
        let mu = modality(p)?;
        p.expect_sym(">")?;
        return Ok(Term::modal(mu, term_prefix(p)?));
    }
    term_app(p)
}

fn starts_atom(p: &Parser) -> bool {
    match p.peek() {
        Tok::Sym("(") | Tok::Int(_) => true,
        Tok::Ident(s) => !RESERVED.contains(&s.as_str()),
        _ => false,
    }
}

fn term_app(p: &mut Parser) -> Result<Term, ParseError> {
    let mut m = term_atom(p)?;
    loop {
        if p.eat_sym("@") {
            m = Term::tyapp(m, ty_atom(p)?);
        } else if starts_atom(p) {
            m = Term::app(m, term_atom(p)?);
        } else {
            return Ok(m);
        }
    }
}

fn term_atom(p: &mut Parser) -> Result<Term, ParseError> {
    match p.peek().clone() {
        Tok::Int(n) => {
            p.bump();
            Ok(Term::Int(n))
        }
        Tok::Sym("(") => {
            p.bump();
            if p.eat_sym(")") {
                return Ok(Term::Unit);
            }
            let m = term(p)?;
            p.expect_sym(")")?;
            Ok(m)
        }
        Tok::Ident(x) if x != SEQ_VAR => Ok(Term::Var(p.ident(RESERVED)?)),
        _ => Err(p.unexpected("a term")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::met::print;

    #[test]
    fn round_trips() {
        for src in [
            "mod<[yield]> (fun (x: Int) -> do yield x)",
            "()",
            "handle<[]> (do yield 42; do yield 37; 0) with { return x -> letmod<<>; [yield]> x' = x in x', yield p r -> letmod<<>; []> r' = r in p + r' () }",
            "tfun ($e) -> mod<[]> (fun (f: [$e] (Int -> 1)) -> mod<[$e]> (fun (x: Int) -> letmod<<>; [$e]> f' = f in f' x))",
            "(fun (x: Int) -> x) 1 @Int @{yield,$e}",
            "(let x = 1 in x); 2 + 3 + (4 + 5)",
            "local l : Int =>> 1 in do l 3",
        ] {
            let t = parse_term(src).unwrap();
            assert_eq!(print::term(&t), src);
            assert_eq!(parse_term(&print::term(&t)).unwrap(), t);
        }
    }

    #[test]
    fn types_round_trip() {
        for src in [
            "forall $e . [$e] ([yield,$e] (1 -> Int) -> Int)",
            "[yield] (Int -> 1)",
            "<f'> (Int -> [f'] (Int -> 1) -> 1)",
            "forall a :: abs . a -> a",
        ] {
            let t = parse_type(src).unwrap();
            assert_eq!(print::ty(&t), src);
        }
    }
}
