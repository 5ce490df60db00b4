//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := "ALL" var formula | "EX" var formula
//!          | "ALL2" REL ":" NAT formula | "EX2" REL ":" NAT formula | iff
//! iff     := imp ("<->" imp)*        left associative
//! imp     := or ("->" imp)?          right associative
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | "(" formula ")" | quantified formula | atom
//! atom    := REL "(" var ("," var)* ")" | var "=" var | var "!=" var
//! ```
//!
//! First-order variables start with a lowercase letter. Relation names may be
//! any identifier that is not a keyword.

use std::collections::HashMap;

use super::Formula;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(usize),
    All,
    Ex,
    All2,
    Ex2,
    LParen,
    RParen,
    Comma,
    Colon,
    Amp,
    Bar,
    Tilde,
    Arrow,
    DArrow,
    Equals,
    NotEquals,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Nat(n) => format!("number `{n}`"),
            Tok::All => "`ALL`".into(),
            Tok::Ex => "`EX`".into(),
            Tok::All2 => "`ALL2`".into(),
            Tok::Ex2 => "`EX2`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DArrow => "`<->`".into(),
            Tok::Equals => "`=`".into(),
            Tok::NotEquals => "`!=`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            let tok = match word.as_str() {
                "ALL" => Tok::All,
                "EX" => Tok::Ex,
                "ALL2" => Tok::All2,
                "EX2" => Tok::Ex2,
                _ => Tok::Ident(word),
            };
            (tok, j - start)
        } else if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[start..j].iter().collect();
            let n = digits
                .parse()
                .map_err(|_| syntax(pos, format!("number `{digits}` out of range")))?;
            (Tok::Nat(n), j - start)
        } else {
            let rest = |s: &str| chars[i..].iter().take(s.len()).copied().eq(s.chars());
            if rest("<->") {
                (Tok::DArrow, 3)
            } else if rest("->") {
                (Tok::Arrow, 2)
            } else if rest("!=") {
                (Tok::NotEquals, 2)
            } else {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '&' => Tok::Amp,
                    '|' => Tok::Bar,
                    '~' => Tok::Tilde,
                    '=' => Tok::Equals,
                    _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
                };
                (tok, 1)
            }
        };
        out.push((tok, pos));
        i += len;
        column += len;
    }
    out.push((Tok::End, Pos { line, column }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

fn is_fo_var(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase())
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.pos(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn var(&mut self) -> Result<String> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(s) if is_fo_var(&s) => Ok(s),
            Tok::Ident(s) => Err(syntax(pos, format!("`{s}` is not a first-order variable (must start lowercase)"))),
            t => Err(syntax(pos, format!("expected variable, found {}", t.describe()))),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::All | Tok::Ex => {
                let universal = *self.peek() == Tok::All;
                self.bump();
                let v = self.var()?;
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            Tok::All2 | Tok::Ex2 => {
                let universal = *self.peek() == Tok::All2;
                self.bump();
                let pos = self.pos();
                let var = match self.bump() {
                    Tok::Ident(s) => s,
                    t => return Err(syntax(pos, format!("expected relation variable, found {}", t.describe()))),
                };
                self.expect(Tok::Colon)?;
                let pos = self.pos();
                let arity = match self.bump() {
                    Tok::Nat(n) if n >= 1 => n,
                    Tok::Nat(_) => return Err(syntax(pos, "relation arity must be at least 1")),
                    t => return Err(syntax(pos, format!("expected arity, found {}", t.describe()))),
                };
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall_so(var, arity, body)
                } else {
                    Formula::exists_so(var, arity, body)
                })
            }
            _ => self.iff(),
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut left = self.imp()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let right = self.imp()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    fn imp(&mut self) -> Result<Formula> {
        let left = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.imp()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut left = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let right = self.and()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::All | Tok::Ex | Tok::All2 | Tok::Ex2 => self.formula(),
            Tok::Ident(name) => {
                let pos = self.pos();
                self.bump();
                match self.peek() {
                    Tok::LParen => {
                        self.bump();
                        let mut args = vec![self.var()?];
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.var()?);
                        }
                        self.expect(Tok::RParen)?;
                        Ok(Formula::Atom { rel: name, args })
                    }
                    Tok::Equals | Tok::NotEquals => {
                        if !is_fo_var(&name) {
                            return Err(syntax(pos, format!("`{name}` is not a first-order variable")));
                        }
                        let negated = *self.peek() == Tok::NotEquals;
                        self.bump();
                        let right = self.var()?;
                        Ok(if negated {
                            Formula::neq(name, right)
                        } else {
                            Formula::eq(name, right)
                        })
                    }
                    t => Err(syntax(
                        self.pos(),
                        format!("expected `(`, `=` or `!=` after `{name}`, found {}", t.describe()),
                    )),
                }
            }
            t => Err(syntax(self.pos(), format!("expected formula, found {}", t.describe()))),
        }
    }
}

/// Parses a formula and checks that every relation name is applied with a
/// consistent number of arguments within each binder scope.
pub fn parse(text: &str) -> Result<Formula> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), format!("unexpected {}", p.peek().describe())));
    }
    check_arities(&f, &mut Vec::new(), &mut HashMap::new())?;
    Ok(f)
}

fn check_arities(f: &Formula, scope: &mut Vec<(String, usize)>, free: &mut HashMap<String, usize>) -> Result<()> {
    match f {
        Formula::Atom { rel, args } => {
            let expected = match scope.iter().rev().find(|(n, _)| n == rel) {
                Some((_, k)) => *k,
                None => *free.entry(rel.clone()).or_insert(args.len()),
            };
            if expected != args.len() {
                return Err(Error::ArityMismatch {
                    symbol: rel.clone(),
                    expected,
                    found: args.len(),
                });
            }
            Ok(())
        }
        Formula::Eq(..) => Ok(()),
        Formula::Not(s) | Formula::ExistsFo(_, s) | Formula::ForallFo(_, s) => check_arities(s, scope, free),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
            check_arities(l, scope, free)?;
            check_arities(r, scope, free)
        }
        Formula::ExistsSo { var, arity, body } | Formula::ForallSo { var, arity, body } => {
            scope.push((var.clone(), *arity));
            let r = check_arities(body, scope, free);
            scope.pop();
            r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_first_order_quantifiers() {
        let f = parse("EX x EX y edge(x,y)").unwrap();
        assert_eq!(
            f,
            Formula::exists("x", Formula::exists("y", Formula::atom("edge", ["x", "y"])))
        );
    }

    #[test]
    fn second_order_binder_with_arity() {
        let f = parse("EX2 R:2 (ALL x EX y R(x,y))").unwrap();
        let body = Formula::forall("x", Formula::exists("y", Formula::atom("R", ["x", "y"])));
        assert_eq!(f, Formula::exists_so("R", 2, body));
    }

    #[test]
    fn unbalanced_parenthesis_is_a_syntax_error() {
        match parse("EX x R(x,x") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 11)),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn error_positions_track_lines() {
        match parse("EX x\n  (R(x) & )") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 11)),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn inconsistent_free_arity_is_rejected() {
        assert!(matches!(
            parse("edge(x,y) & edge(x)"),
            Err(Error::ArityMismatch { ref symbol, expected: 2, found: 1 }) if symbol == "edge"
        ));
    }

    #[test]
    fn bound_arity_is_checked_against_binder() {
        assert!(matches!(parse("EX2 R:1 R(x,y)"), Err(Error::ArityMismatch { .. })));
        // a binder opens a new scope for the name
        assert!(parse("edge(x,y) & EX2 edge:1 edge(x)").is_ok());
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse("a(x) | b(x) & c(x) -> d(x) -> e(x) <-> g(x)").unwrap();
        let a = || Formula::atom("a", ["x"]);
        let b = || Formula::atom("b", ["x"]);
        let c = || Formula::atom("c", ["x"]);
        let d = || Formula::atom("d", ["x"]);
        let e = || Formula::atom("e", ["x"]);
        let g = || Formula::atom("g", ["x"]);
        let expected = Formula::iff(
            Formula::implies(
                Formula::or(a(), Formula::and(b(), c())),
                Formula::implies(d(), e()),
            ),
            g(),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn quantifier_scope_extends_right() {
        let f = parse("EX x p(x) & q(x)").unwrap();
        assert_eq!(
            f,
            Formula::exists("x", Formula::and(Formula::atom("p", ["x"]), Formula::atom("q", ["x"])))
        );
    }

    #[test]
    fn disequality_sugar() {
        assert_eq!(parse("x != y").unwrap(), Formula::not(Formula::eq("x", "y")));
        assert_eq!(parse("~x = y").unwrap(), Formula::not(Formula::eq("x", "y")));
    }

    #[test]
    fn rejects_bad_tokens() {
        assert!(matches!(parse("EX X p(X)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("EX2 R:0 R(x)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p(x) $ q(x)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("p(x) q(x)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
    }

    #[test]
    fn printer_output_reparses() {
        for text in [
            "EX x EX y edge(x,y)",
            "EX2 R:2 ALL x EX y R(x,y)",
            "~(EX x p(x)) & (ALL y q(y))",
            "(a(x) -> b(x)) -> c(x)",
            "a(x) <-> (b(x) <-> c(x))",
            "~~x != y",
        ] {
            let f = parse(text).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{text} printed as {f}");
        }
    }
}
