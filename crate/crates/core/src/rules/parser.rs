//! Line-oriented recursive-descent parser for the rule language.
//!
//! ```text
//! rule := "IF" expr "THEN" subject "IS" term
//! expr := atom (("AND" | "OR") atom)*      left-associative, equal precedence
//! atom := subject "IS" term | "(" expr ")"
//! term := "poor" | "average" | "good"
//! ```
//!
//! A subject is one identifier (`[a-z_][a-z0-9_]*`) or a multi-word phrase
//! listed in the alias table, so `eye movement IS poor` and `eye IS poor`
//! parse to the same leaf. Keywords, identifiers and terms are
//! case-insensitive; `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::ast::{Antecedent, Condition, Connective, RuleBase};
use crate::fuzzy::{LinguisticTerm, EYE, MOUTH, QUALITY};

const KEYWORDS: [&str; 5] = ["if", "then", "is", "and", "or"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    Expected { expected: &'static str, found: String },
    UnknownTerm(String),
    UnknownPhrase(String),
    InvalidIdentifier(String),
    DuplicateAntecedent { first: usize },
    Empty,
    InvalidUtf8,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::Expected { expected, found } => {
                write!(f, "expected {expected}, found {found}")
            }
            ParseErrorKind::UnknownTerm(t) => {
                write!(f, "unknown term `{t}` (expected poor, average or good)")
            }
            ParseErrorKind::UnknownPhrase(p) => write!(f, "unknown variable phrase `{p}`"),
            ParseErrorKind::InvalidIdentifier(s) => write!(f, "`{s}` is not a valid identifier"),
            ParseErrorKind::DuplicateAntecedent { first } => {
                write!(f, "antecedent duplicates rule {first}")
            }
            ParseErrorKind::Empty => f.write_str("rule text contains no rules"),
            ParseErrorKind::InvalidUtf8 => f.write_str("invalid UTF-8"),
        }
    }
}

/// Multi-word phrases accepted for the three inputs.
pub fn default_aliases() -> BTreeMap<String, String> {
    [
        ("eye movement", EYE),
        ("mouth movement", MOUTH),
        ("image quality", QUALITY),
        ("face texture", QUALITY),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of line".into(),
        }
    }
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = line.chars().enumerate().peekable();
    let mut last_col = 1;
    while let Some((i, ch)) = chars.next() {
        let col = i + 1;
        last_col = col + 1;
        match ch {
            '#' => {
                last_col = col;
                break;
            }
            '(' => toks.push((Tok::LParen, col)),
            ')' => toks.push((Tok::RParen, col)),
            c if c.is_whitespace() => {}
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut word = String::new();
                word.push(c.to_ascii_lowercase());
                while let Some(&(j, n)) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        word.push(n.to_ascii_lowercase());
                        last_col = j + 2;
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Word(word), col));
            }
            other => {
                return Err(ParseError {
                    line: line_no,
                    column: col,
                    kind: ParseErrorKind::UnexpectedChar(other),
                })
            }
        }
    }
    toks.push((Tok::End, last_col));
    Ok(toks)
}

fn is_identifier(word: &str) -> bool {
    let mut chars = word.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

struct LineParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    aliases: &'a BTreeMap<String, String>,
}

impl LineParser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column,
            kind,
        }
    }

    fn expected(&self, expected: &'static str) -> ParseError {
        self.error(
            self.col(),
            ParseErrorKind::Expected {
                expected,
                found: self.peek().describe(),
            },
        )
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w == kw)
    }

    fn keyword(&mut self, kw: &str, expected: &'static str) -> Result<(), ParseError> {
        if self.is_word(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.expected(expected))
        }
    }

    fn rule(&mut self) -> Result<(Antecedent, Condition), ParseError> {
        self.keyword("if", "`IF`")?;
        let antecedent = self.expr()?;
        self.keyword("then", "`AND`, `OR` or `THEN`")?;
        let consequent = self.condition()?;
        if *self.peek() != Tok::End {
            return Err(self.expected("end of line"));
        }
        Ok((antecedent, consequent))
    }

    fn expr(&mut self) -> Result<Antecedent, ParseError> {
        let mut left = self.atom()?;
        loop {
            let op = if self.is_word("and") {
                Connective::And
            } else if self.is_word("or") {
                Connective::Or
            } else {
                break;
            };
            self.bump();
            let right = self.atom()?;
            left = Antecedent::node(op, left, right);
        }
        Ok(left)
    }

    fn atom(&mut self) -> Result<Antecedent, ParseError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let mut inner = self.expr()?;
            if *self.peek() != Tok::RParen {
                return Err(self.expected("`)`, `AND` or `OR`"));
            }
            self.bump();
            if let Antecedent::Node { parenthesized, .. } = &mut inner {
                *parenthesized = true;
            }
            Ok(inner)
        } else {
            Ok(Antecedent::Leaf(self.condition()?))
        }
    }

    fn condition(&mut self) -> Result<Condition, ParseError> {
        let start = self.col();
        let mut words = Vec::new();
        while let Tok::Word(w) = self.peek() {
            if KEYWORDS.contains(&w.as_str()) {
                break;
            }
            words.push(w.clone());
            self.bump();
        }
        if words.is_empty() {
            return Err(self.expected("a variable name"));
        }
        let variable = self.resolve(&words, start)?;
        self.keyword("is", "`IS`")?;
        let term_col = self.col();
        let term = match self.bump() {
            (Tok::Word(w), _) if !KEYWORDS.contains(&w.as_str()) => w
                .parse::<LinguisticTerm>()
                .map_err(|_| self.error(term_col, ParseErrorKind::UnknownTerm(w.clone())))?,
            (tok, col) => {
                return Err(self.error(
                    col,
                    ParseErrorKind::Expected {
                        expected: "a term",
                        found: tok.describe(),
                    },
                ))
            }
        };
        Ok(Condition { variable, term })
    }

    fn resolve(&self, words: &[String], col: usize) -> Result<String, ParseError> {
        let phrase = words.join(" ");
        if let Some(target) = self.aliases.get(&phrase) {
            return Ok(target.clone());
        }
        match words {
            [single] if is_identifier(single) => Ok(single.clone()),
            [single] => Err(self.error(col, ParseErrorKind::InvalidIdentifier(single.clone()))),
            _ => Err(self.error(col, ParseErrorKind::UnknownPhrase(phrase))),
        }
    }
}

/// Parser configured with a phrase-to-identifier alias table.
#[derive(Debug, Clone)]
pub struct RuleParser {
    aliases: BTreeMap<String, String>,
}

impl Default for RuleParser {
    fn default() -> Self {
        RuleParser {
            aliases: default_aliases(),
        }
    }
}

impl RuleParser {
    /// Alias keys are matched case-insensitively with whitespace collapsed.
    pub fn with_aliases(aliases: &BTreeMap<String, String>) -> Self {
        let aliases = aliases
            .iter()
            .map(|(k, v)| {
                let key = k.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
                (key, v.to_lowercase())
            })
            .collect();
        RuleParser { aliases }
    }

    pub fn parse(&self, text: &str) -> Result<RuleBase, ParseError> {
        let mut parsed: Vec<(Antecedent, Condition)> = Vec::new();
        for (idx, raw) in text.split('\n').enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let toks = lex_line(line, line_no)?;
            if toks.len() == 1 {
                continue;
            }
            let mut p = LineParser {
                toks,
                pos: 0,
                line: line_no,
                aliases: &self.aliases,
            };
            let (antecedent, consequent) = p.rule()?;
            if let Some(first) = parsed.iter().position(|(a, _)| *a == antecedent) {
                return Err(ParseError {
                    line: line_no,
                    column: 1,
                    kind: ParseErrorKind::DuplicateAntecedent { first: first + 1 },
                });
            }
            parsed.push((antecedent, consequent));
        }
        if parsed.is_empty() {
            return Err(ParseError {
                line: 1,
                column: 1,
                kind: ParseErrorKind::Empty,
            });
        }
        Ok(RuleBase::new(parsed))
    }

    pub fn parse_bytes(&self, bytes: &[u8]) -> Result<RuleBase, ParseError> {
        match std::str::from_utf8(bytes) {
            Ok(text) => self.parse(text),
            Err(e) => {
                let valid = &bytes[..e.valid_up_to()];
                let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
                let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
                // prefix is valid UTF-8 by construction
                let column = std::str::from_utf8(&valid[line_start..])
                    .map_or(1, |s| s.chars().count() + 1);
                Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::InvalidUtf8,
                })
            }
        }
    }
}

/// Parses rule text with the default alias table.
pub fn parse_rules(text: &str) -> Result<RuleBase, ParseError> {
    RuleParser::default().parse(text)
}

pub fn parse_rules_bytes(bytes: &[u8]) -> Result<RuleBase, ParseError> {
    RuleParser::default().parse_bytes(bytes)
}
