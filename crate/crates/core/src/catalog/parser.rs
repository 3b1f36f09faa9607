//! Line-oriented system files.
//!
//! A statement starts on a line whose first character is not whitespace;
//! indented lines continue the previous statement. `#` starts a comment.
//!
//! ```text
//! system NAME
//! param NAME+
//! generator NAME = EXPR
//! bracketname NAME = {NAME, NAME}
//! function NAME = GENPOLY
//! vanish NAME NAME
//! structure NAME^2 = 2*(GENPOLY)
//! relation ["label"]: FORMAL = FORMAL (= FORMAL)*
//! variant NAME "label" [param NAME+] = EXPR
//! ```
//!
//! A relation chain `a = b = c` is stored as `a = c` and `b = c`.

use super::error::CatalogError;
use super::formal::{end_position, parse_formal, ExprParser, Formal};
use super::lexer::{tokenize, Spanned, Tok};
use super::system::{SystemBuilder, SystemDefinition};

/// Upper bound on input size, to keep hostile inputs cheap to reject.
pub const MAX_SOURCE_BYTES: usize = 4 << 20;

/// Parse a formal expression (names are not resolved).
pub fn parse_expression(text: &str) -> Result<Formal, CatalogError> {
    if text.len() > MAX_SOURCE_BYTES {
        return Err(CatalogError::syntax(1, 1, "input too large"));
    }
    parse_formal(text)
}

struct Statement {
    line: usize,
    toks: Vec<Spanned>,
    end: (usize, usize),
}

fn statements(src: &str) -> Result<Vec<Statement>, CatalogError> {
    let mut out: Vec<Statement> = Vec::new();
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let toks = tokenize(raw, line, 1)?;
        if toks.is_empty() {
            continue;
        }
        let end = (line, raw.chars().count() + 1);
        let continues = raw.starts_with(|c: char| c.is_whitespace());
        match out.last_mut() {
            Some(st) if continues => {
                st.toks.extend(toks);
                st.end = end;
            }
            _ if continues => {
                return Err(CatalogError::syntax(
                    line,
                    toks[0].col,
                    "continuation line without a statement",
                ))
            }
            _ => out.push(Statement { line, toks, end }),
        }
    }
    Ok(out)
}

/// Parse a complete system file.
pub fn parse_system(src: &str) -> Result<SystemDefinition, CatalogError> {
    if src.len() > MAX_SOURCE_BYTES {
        return Err(CatalogError::syntax(1, 1, "input too large"));
    }
    let stmts = statements(src)?;
    let Some(first) = stmts.first() else {
        return Err(CatalogError::syntax(
            end_position(src).0,
            1,
            "expected `system NAME`",
        ));
    };
    let mut p = ExprParser::new(&first.toks, first.end);
    keyword(&mut p, "system")?;
    let name = p.ident()?;
    done(&p)?;
    let mut b = SystemBuilder::new(name);
    for st in &stmts[1..] {
        statement(&mut b, st)?;
    }
    b.finish()
}

fn keyword(p: &mut ExprParser<'_>, kw: &str) -> Result<(), CatalogError> {
    match p.peek() {
        Some(Tok::Ident(s)) if s == kw => {
            p.next();
            Ok(())
        }
        _ => Err(p.unexpected(&format!("`{kw}`"))),
    }
}

fn done(p: &ExprParser<'_>) -> Result<(), CatalogError> {
    if p.at_end() {
        Ok(())
    } else {
        Err(p.unexpected("end of statement"))
    }
}

fn names(p: &mut ExprParser<'_>) -> Result<Vec<String>, CatalogError> {
    let mut v = vec![p.ident()?];
    while let Some(Tok::Ident(_)) = p.peek() {
        v.push(p.ident()?);
    }
    Ok(v)
}

fn statement(b: &mut SystemBuilder, st: &Statement) -> Result<(), CatalogError> {
    let mut p = ExprParser::new(&st.toks, st.end);
    let line = st.line;
    let kw = p.ident()?;
    match kw.as_str() {
        "param" => {
            let ns = names(&mut p)?;
            done(&p)?;
            b.params(ns, line)
        }
        "generator" => {
            let name = p.ident()?;
            p.expect(&Tok::Eq)?;
            let e = p.sum()?;
            done(&p)?;
            if e.contains_bracket() {
                return Err(CatalogError::invalid(line, "brackets are not allowed in generators"));
            }
            b.generator(name, &e, line)
        }
        "bracketname" => {
            let name = p.ident()?;
            p.expect(&Tok::Eq)?;
            p.expect(&Tok::LBrace)?;
            let l = p.ident()?;
            p.expect(&Tok::Comma)?;
            let r = p.ident()?;
            p.expect(&Tok::RBrace)?;
            done(&p)?;
            b.bracket_name(name, l, r, line)
        }
        "function" => {
            let name = p.ident()?;
            p.expect(&Tok::Eq)?;
            let e = p.sum()?;
            done(&p)?;
            b.function(name, e, line)
        }
        "vanish" => {
            let a = p.ident()?;
            let c = p.ident()?;
            done(&p)?;
            b.vanish(a, c, line)
        }
        "structure" => {
            let name = p.ident()?;
            p.expect(&Tok::Caret)?;
            match p.peek() {
                Some(Tok::Int(s)) if s == "2" => {
                    p.next();
                }
                _ => return Err(p.unexpected("`2`")),
            }
            p.expect(&Tok::Eq)?;
            match p.peek() {
                Some(Tok::Int(s)) if s == "2" => {
                    p.next();
                }
                _ => return Err(p.unexpected("`2`")),
            }
            p.expect(&Tok::Star)?;
            p.expect(&Tok::LParen)?;
            let e = p.sum()?;
            p.expect(&Tok::RParen)?;
            done(&p)?;
            b.structure(name, e, line)
        }
        "relation" => {
            let label = match p.peek() {
                Some(Tok::Str(s)) => {
                    p.next();
                    Some(s.clone())
                }
                _ => None,
            };
            p.expect(&Tok::Colon)?;
            let mut sides = vec![p.sum()?];
            while p.eat(&Tok::Eq) {
                sides.push(p.sum()?);
            }
            done(&p)?;
            if sides.len() < 2 {
                return Err(p.unexpected("`=`"));
            }
            b.relation(label, sides, line)
        }
        "variant" => {
            let gen = p.ident()?;
            let label = match p.next() {
                Some(Tok::Str(s)) => s.clone(),
                _ => return Err(CatalogError::syntax(line, 1, "expected a variant label string")),
            };
            let extra = match p.peek() {
                Some(Tok::Ident(s)) if s == "param" => {
                    p.next();
                    names(&mut p)?
                }
                _ => Vec::new(),
            };
            p.expect(&Tok::Eq)?;
            let e = p.sum()?;
            done(&p)?;
            if e.contains_bracket() {
                return Err(CatalogError::invalid(line, "brackets are not allowed in generators"));
            }
            b.variant(gen, label, extra, &e, line)
        }
        "system" => Err(CatalogError::invalid(line, "only one `system` header is allowed")),
        other => Err(CatalogError::syntax(
            line,
            st.toks[0].col,
            format!("unknown statement `{other}`"),
        )),
    }
}
