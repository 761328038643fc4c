//! Reader for the pure surface subset.
//!
//! Grammar: clauses `Head.` and `Head :- Body.`; operators `:-` (1200 xfx),
//! `;` (1100 xfy), `,` (1000 xfy), `=` (700 xfx), `-` (500 yfx); lists
//! `[a,b|T]`; `%` comments. Cut, negation and arithmetic tokens are
//! rejected. Variables are numbered from 0 within each clause or query.

use std::collections::HashMap;

use crate::term::{Term, VarId};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "syntax error at {}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug)]
pub struct ParsedClause {
    pub head: Term,
    pub body: Term,
    pub n_vars: usize,
    pub var_names: Vec<Option<String>>,
}

#[derive(Clone, Debug)]
pub struct ParsedQuery {
    pub body: Term,
    pub n_vars: usize,
    /// Indexed by local variable id; `None` for anonymous variables.
    pub var_names: Vec<Option<String>>,
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    /// Atom text plus whether a `(` follows with no space (functor notation).
    Atom(String, bool),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    /// Clause-terminating period.
    Dot,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'%') => {
                    while let Some(c) = self.bump() {
                        if c == b'\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, col) = (self.line, self.col);
            let Some(c) = self.peek() else { break };
            let tok = match c {
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'[' => {
                    self.bump();
                    Tok::LBracket
                }
                b']' => {
                    self.bump();
                    Tok::RBracket
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'|' => {
                    self.bump();
                    Tok::Bar
                }
                b'.' => {
                    self.bump();
                    match self.peek() {
                        None | Some(b'%') => Tok::Dot,
                        Some(c) if c.is_ascii_whitespace() => Tok::Dot,
                        _ => return Err(self.err("'.' is only valid as a clause terminator")),
                    }
                }
                b'0'..=b'9' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let value: i64 = text
                        .parse()
                        .map_err(|_| self.err(format!("integer out of range: {text}")))?;
                    Tok::Int(value)
                }
                b'a'..=b'z' => {
                    let name = self.take_ident();
                    Tok::Atom(name, self.peek() == Some(b'('))
                }
                b'A'..=b'Z' | b'_' => Tok::Var(self.take_ident()),
                b'\'' => {
                    let name = self.quoted_atom()?;
                    Tok::Atom(name, self.peek() == Some(b'('))
                }
                b':' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        Tok::Atom(":-".to_string(), false)
                    } else {
                        return Err(self.err("expected ':-'"));
                    }
                }
                b'=' => {
                    self.bump();
                    Tok::Atom("=".to_string(), self.peek() == Some(b'('))
                }
                b'-' => {
                    self.bump();
                    Tok::Atom("-".to_string(), self.peek() == Some(b'('))
                }
                b';' => {
                    self.bump();
                    Tok::Atom(";".to_string(), self.peek() == Some(b'('))
                }
                other => {
                    return Err(self.err(format!(
                        "unexpected character '{}'",
                        char::from(other)
                    )))
                }
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }

    fn take_ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn quoted_atom(&mut self) -> Result<String, ParseError> {
        self.bump(); // opening quote
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated quoted atom")),
                Some(b'\'') => return Ok(s),
                Some(b'\\') => match self.bump() {
                    Some(b'\\') => s.push('\\'),
                    Some(b'\'') => s.push('\''),
                    Some(b'n') => s.push('\n'),
                    _ => return Err(self.err("unknown escape in quoted atom")),
                },
                Some(c) => s.push(char::from(c)),
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum OpKind {
    Xfx,
    Xfy,
    Yfx,
}

/// Fixed operator table; no user-defined operators.
fn op_info(name: &str) -> Option<(u32, OpKind)> {
    match name {
        ":-" => Some((1200, OpKind::Xfx)),
        ";" => Some((1100, OpKind::Xfy)),
        "=" => Some((700, OpKind::Xfx)),
        "-" => Some((500, OpKind::Yfx)),
        _ => None,
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: HashMap<String, usize>,
    var_names: Vec<Option<String>>,
}

impl Parser {
    fn new(toks: Vec<Spanned>) -> Self {
        Parser { toks, pos: 0, vars: HashMap::new(), var_names: Vec::new() }
    }

    fn reset_scope(&mut self) {
        self.vars.clear();
        self.var_names.clear();
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(s) => ParseError { line: s.line, col: s.col, msg: msg.into() },
            None => ParseError { line: 1, col: 1, msg: msg.into() },
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!("expected {what}")))
        }
    }

    fn var(&mut self, name: String) -> Term {
        if name == "_" {
            let id = self.var_names.len();
            self.var_names.push(None);
            return Term::Var(VarId(id));
        }
        let id = match self.vars.get(&name) {
            Some(id) => *id,
            None => {
                let id = self.var_names.len();
                self.vars.insert(name.clone(), id);
                self.var_names.push(Some(name));
                id
            }
        };
        Term::Var(VarId(id))
    }

    /// Operator-precedence parse; returns the term and its priority.
    fn term(&mut self, max_prec: u32) -> Result<(Term, u32), ParseError> {
        let (mut left, mut left_prec) = self.primary()?;
        loop {
            let (name, prec, kind) = match self.peek() {
                Some(Tok::Comma) if max_prec >= 1000 => (",".to_string(), 1000, OpKind::Xfy),
                Some(Tok::Atom(name, _)) => match op_info(name) {
                    Some((prec, kind)) if prec <= max_prec => (name.clone(), prec, kind),
                    _ => break,
                },
                _ => break,
            };
            let left_max = match kind {
                OpKind::Yfx => prec,
                OpKind::Xfx | OpKind::Xfy => prec - 1,
            };
            if left_prec > left_max {
                break;
            }
            self.bump();
            let right_max = match kind {
                OpKind::Xfy => prec,
                OpKind::Xfx | OpKind::Yfx => prec - 1,
            };
            let (right, _) = self.term(right_max)?;
            left = Term::compound(&name, vec![left, right]);
            left_prec = prec;
        }
        Ok((left, left_prec))
    }

    fn primary(&mut self) -> Result<(Term, u32), ParseError> {
        match self.bump() {
            Some(Tok::Int(i)) => Ok((Term::Int(i), 0)),
            Some(Tok::Var(name)) => Ok((self.var(name), 0)),
            Some(Tok::Atom(name, functor)) => {
                if functor && self.peek() == Some(&Tok::LParen) {
                    self.bump();
                    let mut args = vec![self.term(999)?.0];
                    while self.peek() == Some(&Tok::Comma) {
                        self.bump();
                        args.push(self.term(999)?.0);
                    }
                    self.expect(&Tok::RParen, "')'")?;
                    Ok((Term::compound(&name, args), 0))
                } else {
                    Ok((Term::atom(&name), 0))
                }
            }
            Some(Tok::LParen) => {
                let (t, _) = self.term(1200)?;
                self.expect(&Tok::RParen, "')'")?;
                Ok((t, 0))
            }
            Some(Tok::LBracket) => {
                if self.peek() == Some(&Tok::RBracket) {
                    self.bump();
                    return Ok((Term::nil(), 0));
                }
                let mut items = vec![self.term(999)?.0];
                while self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    items.push(self.term(999)?.0);
                }
                let tail = if self.peek() == Some(&Tok::Bar) {
                    self.bump();
                    self.term(999)?.0
                } else {
                    Term::nil()
                };
                self.expect(&Tok::RBracket, "']'")?;
                Ok((Term::list_with_tail(items, tail), 0))
            }
            _ => Err(self.err_here("expected a term")),
        }
    }

    fn clause(&mut self) -> Result<ParsedClause, ParseError> {
        self.reset_scope();
        let (t, _) = self.term(1200)?;
        self.expect(&Tok::Dot, "'.' at end of clause")?;
        let (head, body) = split_clause(t);
        match &head {
            Term::Atom(_) => {}
            Term::Compound(_) => {}
            _ => return Err(self.err_here("clause head must be an atom or compound")),
        }
        Ok(ParsedClause {
            head,
            body,
            n_vars: self.var_names.len(),
            var_names: std::mem::take(&mut self.var_names),
        })
    }
}

fn split_clause(t: Term) -> (Term, Term) {
    if let Term::Compound(c) = &t {
        if &*c.functor == ":-" && c.args.len() == 2 {
            return (c.args[0].clone(), c.args[1].clone());
        }
    }
    (t, Term::atom("true"))
}

pub fn parse_program(src: &str) -> Result<Vec<ParsedClause>, ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let mut p = Parser::new(toks);
    let mut clauses = Vec::new();
    while p.peek().is_some() {
        clauses.push(p.clause()?);
    }
    Ok(clauses)
}

/// Parse one goal terminated by `.`; an optional leading `?-` is accepted.
pub fn parse_query(src: &str) -> Result<ParsedQuery, ParseError> {
    let src = src.trim_start();
    let src = src.strip_prefix("?-").unwrap_or(src);
    let toks = Lexer::new(src).tokenize()?;
    let mut p = Parser::new(toks);
    let (body, _) = p.term(1200)?;
    p.expect(&Tok::Dot, "'.' at end of query")?;
    if p.peek().is_some() {
        return Err(p.err_here("trailing input after query"));
    }
    Ok(ParsedQuery {
        body,
        n_vars: p.var_names.len(),
        var_names: p.var_names,
    })
}

/// Parse a single term; a trailing `.` is optional.
pub fn parse_term_str(src: &str) -> Result<(Term, Vec<Option<String>>), ParseError> {
    let toks = Lexer::new(src).tokenize()?;
    let mut p = Parser::new(toks);
    let (t, _) = p.term(1200)?;
    if p.peek() == Some(&Tok::Dot) {
        p.bump();
    }
    if p.peek().is_some() {
        return Err(p.err_here("trailing input after term"));
    }
    Ok((t, p.var_names))
}
