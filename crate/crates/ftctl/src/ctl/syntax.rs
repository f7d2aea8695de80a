//! Concrete syntax: `true | false | a | !f | f & f | f | f | E X f | A X f | E F f
//! | A F f | E G f | A G f | E[f U f] | A[f U f] | E[f R f] | A[f R f]`.
//!
//! `!` and the prefix operators bind tightest, then `&`, then `|`.

use super::*;
use crate::error::{Error, Result};

const RESERVED: &[&str] = &[
    "true", "false", "E", "A", "X", "F", "G", "U", "R", "EX", "AX", "EF", "AF", "EG", "AG",
];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Bang,
    Amp,
    Bar,
    LParen,
    RParen,
    LBrack,
    RBrack,
    End,
}

fn lex(text: &str, line: usize) -> Result<Vec<(Tok, usize, usize)>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, line, 1);
    while i < chars.len() {
        let c = chars[i];
        let at = (line, col);
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Bar,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                toks.push((Tok::Ident(chars[start..i].iter().collect()), at.0, at.1));
                continue;
            }
            other => {
                return Err(Error::syntax(
                    at.0,
                    at.1,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        toks.push((tok, at.0, at.1));
        i += 1;
        col += 1;
    }
    toks.push((Tok::End, line, col));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (_, l, c) = &self.toks[self.pos];
        Error::syntax(*l, *c, msg)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn disj(&mut self) -> Result<Ctl> {
        let mut f = self.conj()?;
        while self.eat(&Tok::Bar) {
            f = or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Ctl> {
        let mut f = self.unary()?;
        while self.eat(&Tok::Amp) {
            f = and(f, self.unary()?);
        }
        Ok(f)
    }

    fn word(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(w) => Some(w),
            _ => None,
        }
    }

    fn unary(&mut self) -> Result<Ctl> {
        match self.peek().clone() {
            Tok::Bang => {
                self.pos += 1;
                Ok(not(self.unary()?))
            }
            Tok::LParen => {
                self.pos += 1;
                let f = self.disj()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(w) => {
                self.pos += 1;
                match w.as_str() {
                    "true" => Ok(True),
                    "false" => Ok(False),
                    "E" | "A" => {
                        let exist = w == "E";
                        if self.eat(&Tok::LBrack) {
                            return self.binary(exist);
                        }
                        let op = match self.word() {
                            Some(op @ ("X" | "F" | "G")) => op.to_string(),
                            _ => return Err(self.err("expected `X`, `F`, `G` or `[`")),
                        };
                        self.pos += 1;
                        let f = self.unary()?;
                        Ok(temporal(exist, &op, f))
                    }
                    "EX" | "AX" | "EF" | "AF" | "EG" | "AG" => {
                        let f = self.unary()?;
                        Ok(temporal(w.starts_with('E'), &w[1..], f))
                    }
                    w if RESERVED.contains(&w) => {
                        self.pos -= 1;
                        Err(self.err(format!("unexpected `{w}`")))
                    }
                    w => Ok(atom(w)),
                }
            }
            _ => Err(self.err("expected a formula")),
        }
    }

    fn binary(&mut self, exist: bool) -> Result<Ctl> {
        let f = self.disj()?;
        let op = match self.word() {
            Some(op @ ("U" | "R")) => op.to_string(),
            _ => return Err(self.err("expected `U` or `R`")),
        };
        self.pos += 1;
        let g = self.disj()?;
        self.expect(Tok::RBrack, "`]`")?;
        Ok(match (exist, op.as_str()) {
            (true, "U") => eu(f, g),
            (false, "U") => au(f, g),
            (true, _) => er(f, g),
            (false, _) => ar(f, g),
        })
    }
}

fn temporal(exist: bool, op: &str, f: Ctl) -> Ctl {
    match (exist, op) {
        (true, "X") => ex(f),
        (false, "X") => ax(f),
        (true, "F") => ef(f),
        (false, "F") => af(f),
        (true, _) => eg(f),
        (false, _) => ag(f),
    }
}

fn parse_at(text: &str, line: usize) -> Result<Ctl> {
    let mut p = Parser {
        toks: lex(text, line)?,
        pos: 0,
    };
    let f = p.disj()?;
    if *p.peek() != Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

pub fn parse_ctl(text: &str) -> Result<Ctl> {
    parse_at(text, 1)
}

/// One formula per nonblank line; `#` starts a comment.
pub fn parse_ctl_file(text: &str) -> Result<Vec<Ctl>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        out.push(parse_at(body, i + 1)?);
    }
    Ok(out)
}

// Binding strength: 1 for `|`, 2 for `&`, 3 for everything else.
fn level(f: &Ctl) -> u8 {
    match f {
        Or(..) => 1,
        And(..) => 2,
        _ => 3,
    }
}

fn wrap(f: &Ctl, min: u8) -> String {
    let s = print_ctl(f);
    if level(f) < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn print_ctl(f: &Ctl) -> String {
    match f {
        True => "true".into(),
        False => "false".into(),
        Atom(a) => a.clone(),
        Not(g) => format!("!{}", wrap(g, 3)),
        And(g, h) => format!("{} & {}", wrap(g, 2), wrap(h, 3)),
        Or(g, h) => format!("{} | {}", wrap(g, 1), wrap(h, 2)),
        EX(g) => format!("E X {}", wrap(g, 3)),
        AX(g) => format!("A X {}", wrap(g, 3)),
        EF(g) => format!("E F {}", wrap(g, 3)),
        AF(g) => format!("A F {}", wrap(g, 3)),
        EG(g) => format!("E G {}", wrap(g, 3)),
        AG(g) => format!("A G {}", wrap(g, 3)),
        EU(g, h) => format!("E[{} U {}]", print_ctl(g), print_ctl(h)),
        AU(g, h) => format!("A[{} U {}]", print_ctl(g), print_ctl(h)),
        ER(g, h) => format!("E[{} R {}]", print_ctl(g), print_ctl(h)),
        AR(g, h) => format!("A[{} R {}]", print_ctl(g), print_ctl(h)),
    }
}
