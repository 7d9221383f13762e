//! Text form of a graph.
//!
//! ```text
//! STATEMENT := REF " << " TERM ((" + " | " - ") TERM)*
//! TERM      := "(" REF ")" | "(" REF ") * (" REF ")" | COEFF " * (" REF ")"
//! COEFF     := ["-"] INT ["/" INT]
//! REF       := ("ADP" | "BDP" | "CDP") "[" INT "]" | ("T" | "S" | "P") INT
//! ```
//!
//! A leading line `alpha = COEFF` appears only when the graph scale is not 1.

use std::fmt::Write as _;

use super::{BufferRef, GraphIR, Statement, TempKind, Term, TermKind};
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};

pub fn pretty_print(g: &GraphIR) -> String {
    let mut out = String::new();
    if !g.alpha().is_one() {
        let _ = writeln!(out, "alpha = {}", g.alpha());
    }
    for st in g.statements() {
        let _ = writeln!(out, "{}", render_statement(st));
    }
    out
}

impl std::fmt::Display for Statement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render_statement(self))
    }
}

fn render_statement(st: &Statement) -> String {
    let mut line = format!("{} << ", st.target);
    for (idx, term) in st.terms.iter().enumerate() {
        let coeff = if idx == 0 {
            term.coeff
        } else {
            line.push_str(if term.coeff.is_negative() { " - " } else { " + " });
            term.coeff.abs()
        };
        if !coeff.is_one() {
            let _ = write!(line, "{coeff} * ");
        }
        match term.kind {
            TermKind::Ref(r) => {
                let _ = write!(line, "({r})");
            }
            TermKind::Product(a, b) => {
                let _ = write!(line, "({a}) * ({b})");
            }
        }
    }
    line
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    LParen,
    RParen,
    Star,
    Plus,
    Minus,
    Slash,
    Assign,
    Equals,
    Number(i64),
    Ref(BufferRef),
    Word(String),
}

fn lex(line: &str, lineno: usize) -> Result<Vec<Token>> {
    let err = |msg: String| Error::parse(format!("line {lineno}"), msg);
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '=' => {
                tokens.push(Token::Equals);
                i += 1;
            }
            '<' if chars.get(i + 1) == Some(&'<') => {
                tokens.push(Token::Assign);
                i += 2;
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse().map_err(|_| err(format!("number `{s}` out of range")))?;
                tokens.push(Token::Number(v));
            }
            a if a.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let index = if chars.get(i) == Some(&'[') {
                    let close = chars[i..]
                        .iter()
                        .position(|&c| c == ']')
                        .ok_or_else(|| err(format!("unclosed `[` after {word}")))?;
                    let s: String = chars[i + 1..i + close].iter().collect();
                    i += close + 1;
                    Some(
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| err(format!("bad index `{s}`")))?,
                    )
                } else {
                    None
                };
                tokens.push(word_token(&word, index).map_err(err)?);
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(tokens)
}

fn word_token(word: &str, index: Option<usize>) -> std::result::Result<Token, String> {
    match (word, index) {
        ("ADP", Some(i)) => return Ok(Token::Ref(BufferRef::A(i))),
        ("BDP", Some(i)) => return Ok(Token::Ref(BufferRef::B(i))),
        ("CDP", Some(i)) => return Ok(Token::Ref(BufferRef::C(i))),
        (_, Some(_)) => return Err(format!("unknown partition `{word}`")),
        _ => {}
    }
    let kind = match word.chars().next() {
        Some('T') => Some(TempKind::T),
        Some('S') => Some(TempKind::S),
        Some('P') => Some(TempKind::P),
        _ => None,
    };
    if let Some(kind) = kind {
        if let Ok(j) = word[1..].parse::<usize>() {
            return Ok(Token::Ref(BufferRef::Temp(kind, j)));
        }
    }
    Ok(Token::Word(word.to_string()))
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    lineno: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(format!("line {} token {}", self.lineno, self.pos + 1), msg)
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            got => Err(self.err(format!("expected {want:?}, found {got:?}"))),
        }
    }

    fn reference(&mut self) -> Result<BufferRef> {
        match self.next() {
            Some(Token::Ref(r)) => Ok(r),
            got => Err(self.err(format!("expected a buffer reference, found {got:?}"))),
        }
    }

    fn paren_ref(&mut self) -> Result<BufferRef> {
        self.expect(Token::LParen)?;
        let r = self.reference()?;
        self.expect(Token::RParen)?;
        Ok(r)
    }

    fn coefficient(&mut self, negative: bool) -> Result<Coefficient> {
        let num = match self.next() {
            Some(Token::Number(n)) => n,
            got => return Err(self.err(format!("expected a number, found {got:?}"))),
        };
        let den = if self.peek() == Some(&Token::Slash) {
            self.next();
            match self.next() {
                Some(Token::Number(d)) => d,
                got => return Err(self.err(format!("expected a denominator, found {got:?}"))),
            }
        } else {
            1
        };
        let num = if negative { -num } else { num };
        Coefficient::new(num, den).map_err(|_| self.err("zero denominator"))
    }

    fn term(&mut self, negative: bool) -> Result<Term> {
        let mut negative = negative;
        if self.peek() == Some(&Token::Minus) {
            self.next();
            negative = !negative;
        }
        let coeff = if matches!(self.peek(), Some(Token::Number(_))) {
            let c = self.coefficient(negative)?;
            self.expect(Token::Star)?;
            c
        } else if negative {
            Coefficient::MINUS_ONE
        } else {
            Coefficient::ONE
        };
        let left = self.paren_ref()?;
        if self.peek() == Some(&Token::Star) {
            self.next();
            let right = self.paren_ref()?;
            Ok(Term::product(coeff, left, right))
        } else {
            Ok(Term::reference(coeff, left))
        }
    }
}

/// Parses the text produced by [`pretty_print`]. Blank lines and `#` comments are ignored.
/// The split factor is inferred from the highest output index.
pub fn parse_graph(text: &str) -> Result<GraphIR> {
    let mut statements = Vec::new();
    let mut alpha = Coefficient::ONE;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens = lex(line, lineno)?;
        let mut cur = Cursor {
            tokens: &tokens,
            pos: 0,
            lineno,
        };
        if let Some(Token::Word(w)) = cur.peek() {
            if w == "alpha" {
                cur.next();
                cur.expect(Token::Equals)?;
                let negative = cur.peek() == Some(&Token::Minus);
                if negative {
                    cur.next();
                }
                alpha = cur.coefficient(negative)?;
                if cur.peek().is_some() {
                    return Err(cur.err("trailing tokens after alpha"));
                }
                continue;
            }
        }
        let target = cur.reference()?;
        cur.expect(Token::Assign)?;
        let mut terms = vec![cur.term(false)?];
        while let Some(tok) = cur.next() {
            let negative = match tok {
                Token::Plus => false,
                Token::Minus => true,
                other => return Err(cur.err(format!("expected `+` or `-`, found {other:?}"))),
            };
            terms.push(cur.term(negative)?);
        }
        statements.push(Statement::new(target, terms));
    }
    let max_output = statements
        .iter()
        .flat_map(|s| std::iter::once(s.target).chain(s.reads().collect::<Vec<_>>()))
        .filter_map(|r| match r {
            BufferRef::C(i) => Some(i),
            _ => None,
        })
        .max()
        .ok_or_else(|| Error::parse("graph", "no output statements"))?;
    let blocks = max_output + 1;
    let p = (blocks as f64).sqrt().round() as usize;
    if p * p != blocks {
        return Err(Error::parse(
            "graph",
            format!("highest output index {max_output} does not correspond to a square split"),
        ));
    }
    Ok(GraphIR::new(p, statements)?.with_alpha(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin, BUILTIN_NAMES};
    use crate::graph::{build_bilinear_graph, build_classical_graph, schedule, Strategy};

    const CLASSICAL_P2: &str = "\
CDP[0] << (ADP[0]) * (BDP[0]) + (ADP[1]) * (BDP[2])
CDP[1] << (ADP[0]) * (BDP[1]) + (ADP[1]) * (BDP[3])
CDP[2] << (ADP[2]) * (BDP[0]) + (ADP[3]) * (BDP[2])
CDP[3] << (ADP[2]) * (BDP[1]) + (ADP[3]) * (BDP[3])
";

    #[test]
    fn classical_golden() {
        assert_eq!(pretty_print(&build_classical_graph(2).unwrap()), CLASSICAL_P2);
        assert_eq!(
            pretty_print(&build_classical_graph(1).unwrap()),
            "CDP[0] << (ADP[0]) * (BDP[0])\n"
        );
    }

    #[test]
    fn strassen_text() {
        let text = pretty_print(&build_bilinear_graph(&builtin("strassen-p2").unwrap()).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "T0 << (ADP[2]) - (ADP[3])");
        assert!(lines.contains(&"P5 << (ADP[0]) * (BDP[0])"));
        assert!(lines.contains(&"CDP[0] << (P3) + (P5)"));
        assert!(lines.contains(&"CDP[1] << -1 * (P0) + (P1) - (P2) - (P3)"));
        assert!(lines.contains(&"CDP[3] << (P0) + (P6)"));
        assert_eq!(lines.iter().filter(|l| l.contains(" * (")).count(), 7 + 2);
        assert_eq!(lines.iter().filter(|l| l.starts_with('P')).count(), 7);
    }

    #[test]
    fn non_unit_coefficients_render() {
        let t = builtin("strassen-p2")
            .unwrap()
            .with_entry(crate::catalog::Factor::W, 0, 3, Coefficient::new(-3, 2).unwrap())
            .unwrap();
        let g = build_bilinear_graph(&t).unwrap();
        let text = pretty_print(&g);
        assert!(text.contains("CDP[0] << -3/2 * (P3) + (P5)"), "{text}");
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn alpha_line_round_trips() {
        let g = build_classical_graph(2)
            .unwrap()
            .with_alpha(Coefficient::new(-1, 2).unwrap());
        let text = pretty_print(&g);
        assert!(text.starts_with("alpha = -1/2\n"));
        assert_eq!(parse_graph(&text).unwrap(), g);
    }

    #[test]
    fn print_parse_print_is_stable() {
        for name in BUILTIN_NAMES {
            let base = build_bilinear_graph(&builtin(name).unwrap()).unwrap();
            for g in [
                base.clone(),
                schedule(&base, Strategy::Fused).unwrap(),
                schedule(&base, Strategy::ProductMajor).unwrap(),
            ] {
                let text = pretty_print(&g);
                let parsed = parse_graph(&text).unwrap();
                assert_eq!(pretty_print(&parsed), text, "{name}");
            }
        }
        for p in 1..=4 {
            let text = pretty_print(&build_classical_graph(p).unwrap());
            assert_eq!(pretty_print(&parse_graph(&text).unwrap()), text);
        }
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_graph("CDP[0] << (ADP[0]) *\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        let err = parse_graph("CDP[0] << (ADP[0])\nCDP[1] << (XDP[0])\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_graph("CDP[1] << (ADP[0])\n").is_err());
        assert!(parse_graph("").is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let g = parse_graph("# classical\n\nCDP[0] << (ADP[0]) * (BDP[0])  # only line\n").unwrap();
        assert_eq!(g, build_classical_graph(1).unwrap());
    }
}
