//! Display of terms and answers.
//!
//! Lists print without inner spaces (`[1,2,3]`), pairs infix (`k-1`),
//! other compound arguments separated by `", "`, the style the
//! golden outputs are pinned to. Every printed term parses back to an
//! equal term through [`crate::parser::parse_term_str`].

use std::collections::HashMap;

use crate::machine::Answer;
use crate::term::{Term, VarId};

/// Assigns display names to variables: query variables keep their source
/// names, fresh variables get `_A`, `_B`, ... in order of appearance.
#[derive(Default)]
pub struct Namer {
    names: HashMap<VarId, String>,
    fresh: usize,
}

impl Namer {
    pub fn new() -> Namer {
        Namer::default()
    }

    pub fn preassign(&mut self, v: VarId, name: &str) {
        self.names.entry(v).or_insert_with(|| name.to_string());
    }

    fn name_of(&mut self, v: VarId) -> String {
        if let Some(n) = self.names.get(&v) {
            return n.clone();
        }
        let n = fresh_name(self.fresh);
        self.fresh += 1;
        self.names.insert(v, n.clone());
        n
    }
}

fn fresh_name(i: usize) -> String {
    let letter = char::from(b'A' + (i % 26) as u8);
    if i < 26 {
        format!("_{letter}")
    } else {
        format!("_{letter}{}", i / 26)
    }
}

pub fn format_term(t: &Term) -> String {
    let mut namer = Namer::new();
    format_term_with(t, &mut namer)
}

pub fn format_term_with(t: &Term, namer: &mut Namer) -> String {
    let mut out = String::new();
    write_term(t, namer, &mut out);
    out
}

fn write_term(t: &Term, namer: &mut Namer, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&namer.name_of(*v)),
        Term::Int(i) => out.push_str(&i.to_string()),
        Term::Atom(a) => write_atom(a, out),
        Term::Compound(c) => match (&*c.functor, c.args.len()) {
            (".", 2) => write_list(t, namer, out),
            ("-", 2) => {
                write_pair_side(&c.args[0], false, namer, out);
                out.push('-');
                write_pair_side(&c.args[1], true, namer, out);
            }
            _ => {
                write_atom(&c.functor, out);
                out.push('(');
                for (i, a) in c.args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_term(a, namer, out);
                }
                out.push(')');
            }
        },
    }
}

/// `-` is yfx, so a right-nested pair needs parentheses to round-trip.
fn write_pair_side(t: &Term, is_right: bool, namer: &mut Namer, out: &mut String) {
    let needs_parens = match t {
        Term::Compound(c) => {
            let f = &*c.functor;
            (f == "-" && c.args.len() == 2 && is_right)
                || ((f == "=" || f == ";" || f == "," || f == ":-") && c.args.len() == 2)
        }
        _ => false,
    };
    if needs_parens {
        out.push('(');
        write_term(t, namer, out);
        out.push(')');
    } else {
        write_term(t, namer, out);
    }
}

fn write_list(t: &Term, namer: &mut Namer, out: &mut String) {
    out.push('[');
    let mut cur = t;
    let mut first = true;
    loop {
        match cur {
            Term::Compound(c) if &*c.functor == "." && c.args.len() == 2 => {
                if !first {
                    out.push(',');
                }
                write_term(&c.args[0], namer, out);
                first = false;
                cur = &c.args[1];
            }
            t if t.is_nil() => break,
            tail => {
                out.push('|');
                write_term(tail, namer, out);
                break;
            }
        }
    }
    out.push(']');
}

fn write_atom(name: &str, out: &mut String) {
    if atom_needs_quotes(name) {
        out.push('\'');
        for ch in name.chars() {
            match ch {
                '\\' => out.push_str("\\\\"),
                '\'' => out.push_str("\\'"),
                '\n' => out.push_str("\\n"),
                c => out.push(c),
            }
        }
        out.push('\'');
    } else {
        out.push_str(name);
    }
}

fn atom_needs_quotes(name: &str) -> bool {
    if name == "[]" || name == "_" {
        return false;
    }
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {
            chars.any(|c| !(c.is_ascii_alphanumeric() || c == '_'))
        }
        _ => !matches!(name, "=" | "-" | ";" | ":-"),
    }
}

/// Render the binding-and-residual part of an answer; empty renders as
/// `true`. The prefix (`   ` / `;  `) and terminator are the caller's.
pub fn format_answer(a: &Answer) -> String {
    let mut namer = Namer::new();
    for (name, v) in &a.query_vars {
        namer.preassign(*v, name);
    }
    let mut parts = Vec::new();
    for (name, t) in &a.bindings {
        parts.push(format!("{name} = {}", format_term_with(t, &mut namer)));
    }
    for (x, y) in &a.residuals {
        parts.push(format!(
            "dif({}, {})",
            format_term_with(x, &mut namer),
            format_term_with(y, &mut namer)
        ));
    }
    if parts.is_empty() {
        "true".to_string()
    } else {
        parts.join(", ")
    }
}
