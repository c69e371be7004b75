//! The `.mu` text format:
//!
//! ```text
//! term := (var NAME) | (prod term*) | (sum term*) | (mu NAME term) | (nu NAME term)
//! ```
//!
//! `;` starts a comment running to the end of the line. The canonical
//! rendering is a single line with one space between items.

use thiserror::Error;

use super::syntax::{barendregt, FixKind, MuTerm, TermNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A parsed term together with the binder renamings the parser applied.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub term: MuTerm,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '(' | ')' => {
                chars.next();
                column += 1;
                out.push(Spanned {
                    tok: if c == '(' { Tok::Open } else { Tok::Close },
                    line: l,
                    column: col,
                });
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    column += 1;
                }
                out.push(Spanned {
                    tok: Tok::Atom(s),
                    line: l,
                    column: col,
                });
            }
        }
    }
    Ok(out)
}

pub fn is_valid_name(s: &str) -> bool {
    let mut cs = s.chars();
    match cs.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn err_at(&self, at: Option<&Spanned>, message: impl Into<String>) -> ParseError {
        let (line, column) = at.map(|s| (s.line, s.column)).unwrap_or(self.end);
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Close, ..
            }) => Ok(()),
            Some(other) => Err(self.err_at(Some(&other), "expected ')'")),
            None => Err(self.err_at(None, "unbalanced parentheses: missing ')'")),
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Spanned {
                tok: Tok::Atom(s), ..
            }) if is_valid_name(&s) => Ok(s),
            Some(other) => Err(self.err_at(Some(&other), "expected a variable name")),
            None => Err(self.err_at(None, "unbalanced parentheses: expected a name")),
        }
    }

    fn term(&mut self) -> Result<MuTerm, ParseError> {
        let open = self.next();
        match &open {
            Some(Spanned { tok: Tok::Open, .. }) => {}
            Some(other) => return Err(self.err_at(Some(other), "expected '('")),
            None => return Err(self.err_at(None, "unexpected end of input")),
        }
        let head = match self.next() {
            Some(Spanned {
                tok: Tok::Atom(s), ..
            }) => s,
            Some(other) => return Err(self.err_at(Some(&other), "expected a keyword")),
            None => return Err(self.err_at(None, "unbalanced parentheses: expected a keyword")),
        };
        let t = match head.as_str() {
            "var" => MuTerm::var(self.name()?),
            "prod" | "sum" => {
                let mut children = Vec::new();
                loop {
                    match self.peek() {
                        Some(Spanned {
                            tok: Tok::Close, ..
                        }) => break,
                        None => {
                            return Err(self.err_at(None, "unbalanced parentheses: missing ')'"))
                        }
                        _ => children.push(self.term()?),
                    }
                }
                if head == "prod" {
                    MuTerm::prod(children)
                } else {
                    MuTerm::coprod(children)
                }
            }
            "mu" | "nu" => {
                let x = self.name()?;
                let body = self.term()?;
                let kind = if head == "mu" {
                    FixKind::Mu
                } else {
                    FixKind::Nu
                };
                MuTerm::fix(kind, x, body)
            }
            other => {
                return Err(self.err_at(open.as_ref(), format!("unknown keyword '{other}'")));
            }
        };
        self.expect_close()?;
        Ok(t)
    }
}

/// Parses one term. Shadowing binders are renamed, each renaming reported as
/// a warning.
pub fn parse_with_warnings(text: &str) -> Result<Parsed, ParseError> {
    let toks = lex(text)?;
    let end = {
        let lines: Vec<&str> = text.split('\n').collect();
        (
            lines.len(),
            lines.last().map(|l| l.chars().count() + 1).unwrap_or(1),
        )
    };
    let mut p = Parser { toks, pos: 0, end };
    let t = p.term()?;
    if let Some(extra) = p.peek() {
        let msg = match extra.tok {
            Tok::Close => "unbalanced parentheses: unexpected ')'",
            _ => "trailing input after term",
        };
        return Err(p.err_at(Some(extra), msg));
    }
    let (term, renames) = barendregt(&t);
    let warnings: Vec<String> = renames
        .into_iter()
        .map(|(from, to)| format!("binder '{from}' renamed to '{to}'"))
        .collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Parsed { term, warnings })
}

pub fn parse(text: &str) -> Result<MuTerm, ParseError> {
    parse_with_warnings(text).map(|p| p.term)
}

/// Canonical single-line rendering.
pub fn print(t: &MuTerm) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &MuTerm, out: &mut String) {
    match t.node() {
        TermNode::Var(x) => {
            out.push_str("(var ");
            out.push_str(x);
            out.push(')');
        }
        TermNode::Prod(ts) | TermNode::Coprod(ts) => {
            out.push_str(if matches!(t.node(), TermNode::Prod(_)) {
                "(prod"
            } else {
                "(sum"
            });
            for c in ts {
                out.push(' ');
                write_term(c, out);
            }
            out.push(')');
        }
        TermNode::Fix(k, x, b) => {
            out.push('(');
            out.push_str(k.keyword());
            out.push(' ');
            out.push_str(x);
            out.push(' ');
            write_term(b, out);
            out.push(')');
        }
    }
}

/// Contents of a canonical `.mu` file.
pub fn to_file(t: &MuTerm) -> String {
    let mut s = print(t);
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::alpha_eq;

    #[test]
    fn grammar_directed() {
        let t = parse("(mu X (sum (prod) (var X)))").unwrap();
        let expected = MuTerm::mu("X", MuTerm::coprod(vec![MuTerm::one(), MuTerm::var("X")]));
        assert_eq!(t, expected);
        assert_eq!(parse("(prod)").unwrap(), MuTerm::one());
        assert_eq!(parse("  ; the empty sum\n(sum)\n").unwrap(), MuTerm::zero());
    }

    #[test]
    fn unbalanced_input() {
        let e = parse("(sum").unwrap_err();
        assert!(e.message.contains("unbalanced"), "{e}");
        let e = parse("(prod))").unwrap_err();
        assert!(e.message.contains("unbalanced"), "{e}");
        assert_eq!((e.line, e.column), (1, 7));
    }

    #[test]
    fn error_positions() {
        let e = parse("(prod\n  (var 3x))").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
        let e = parse("(pair (var X))").unwrap_err();
        assert!(e.message.contains("unknown keyword"));
    }

    #[test]
    fn shadowing_is_freshened_with_warning() {
        let p = parse_with_warnings("(mu X (nu X (var X)))").unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert!(alpha_eq(
            &p.term,
            &MuTerm::mu("A", MuTerm::nu("B", MuTerm::var("B")))
        ));
        assert_eq!(print(&p.term), "(mu X (nu X1 (var X1)))");
    }

    #[test]
    fn canonical_text_reprints() {
        let text = "(nu X (prod (mu Y (sum (var X) (var Y))) (var Z)))\n";
        assert_eq!(to_file(&parse(text).unwrap()), text);
    }
}
