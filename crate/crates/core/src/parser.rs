//! Problem files: a line-oriented sectioned text format.
//!
//! ```text
//! # comment
//! [generators]
//! A0 selfadjoint
//! [relations]
//! A0^2 = 1
//! [commute]
//! {A0, A1} with {B0, B1}
//! [objective]
//! maximize A0*B0 + A1*B1
//! [constraints]
//! A0 <= 0.5
//! [positive]
//! 1 - A0
//! [options]
//! normalization = true
//! level = 2
//! basis = 1, A0, A0*B0
//! ```
//!
//! Polynomials are sums of signed terms; `*` multiplies (concatenates),
//! `'` is the adjoint, `^k` repeats, `1` is the unit and a number suffixed
//! with `i` is imaginary (`2.5i`). A `[commute]` line may also be a single
//! `{LIST}` (all pairs inside commute) or the word `all`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Generator, Polynomial, Presentation, Word};

/// Tolerance for the selfadjointness check on parsed polynomials.
const SELFADJOINT_TOL: f64 = 1e-10;

/// Default cap on the number of basis words.
pub const DEFAULT_BASIS_CAP: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub poly: Polynomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConstraint {
    pub poly: Polynomial,
    pub relation: Relation,
    pub bound: f64,
}

/// A fully resolved problem. Every polynomial is in normal form.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub presentation: Presentation,
    pub objective: Objective,
    pub constraints: Vec<ProblemConstraint>,
    pub positives: Vec<Polynomial>,
    pub normalization: bool,
    pub level: usize,
    /// Explicit basis words from `basis = ...`, replacing the level basis.
    pub basis: Option<Vec<Word>>,
    pub basis_cap: usize,
}

impl ProblemFile {
    pub fn names(&self) -> Vec<String> {
        self.presentation.names()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("unknown section `[{0}]`")]
    UnknownSection(String),
    #[error("unknown option `{0}`")]
    UnknownOption(String),
    #[error("{0} is not selfadjoint after normal form")]
    NotSelfAdjoint(String),
    #[error("level must be a positive integer, got {0}")]
    NonPositiveLevel(String),
    #[error("missing [objective] section")]
    MissingObjective,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl ParseError {
    fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { line, column, kind }
    }

    fn syntax(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Self::new(line, column, ParseErrorKind::Syntax(msg.into()))
    }
}

// ---------------------------------------------------------------------------
// Tokens

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Real(f64),
    Imag(f64),
    Plus,
    Minus,
    Star,
    Quote,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Assign,
    Le,
    Ge,
    EqEq,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    column: usize,
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let value: f64 = literal
                .parse()
                .map_err(|_| ParseError::syntax(line, column, format!("bad number `{literal}`")))?;
            let imaginary = chars.get(i) == Some(&'i')
                && !chars
                    .get(i + 1)
                    .is_some_and(|d| d.is_ascii_alphanumeric() || *d == '_');
            if imaginary {
                i += 1;
                out.push(Token {
                    tok: Tok::Imag(value),
                    column,
                });
            } else {
                out.push(Token {
                    tok: Tok::Real(value),
                    column,
                });
            }
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, width) = match two.as_str() {
            "<=" => (Tok::Le, 2),
            ">=" => (Tok::Ge, 2),
            "==" => (Tok::EqEq, 2),
            _ => match c {
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                '*' => (Tok::Star, 1),
                '\'' => (Tok::Quote, 1),
                '^' => (Tok::Caret, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                ',' => (Tok::Comma, 1),
                '=' => (Tok::Assign, 1),
                other => {
                    return Err(ParseError::syntax(
                        line,
                        column,
                        format!("unexpected character `{other}`"),
                    ))
                }
            },
        };
        out.push(Token { tok, column });
        i += width;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Polynomial expressions

struct ExprParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    line: usize,
    end_column: usize,
    pres: &'a Presentation,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map_or(self.end_column, |t| t.column)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::syntax(self.line, self.column(), msg)
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -&self.term()?
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ParseError> {
        let mut base = self.primary()?;
        loop {
            match self.peek() {
                Some(Tok::Quote) => {
                    self.pos += 1;
                    base = base.adjoint();
                }
                Some(Tok::Caret) => {
                    self.pos += 1;
                    match self.peek() {
                        Some(Tok::Real(k)) if *k >= 0.0 && k.fract() == 0.0 && *k <= 64.0 => {
                            let k = *k as u32;
                            self.pos += 1;
                            base = base.pow(k);
                        }
                        _ => return Err(self.error("expected a non-negative integer exponent")),
                    }
                }
                _ => return Ok(base),
            }
        }
    }

    fn primary(&mut self) -> Result<Polynomial, ParseError> {
        let column = self.column();
        match self.peek().cloned() {
            Some(Tok::Real(v)) => {
                self.pos += 1;
                Ok(Polynomial::real(v))
            }
            Some(Tok::Imag(v)) => {
                self.pos += 1;
                Ok(Polynomial::constant(Complex64::new(0.0, v)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match self.pres.generator_index(&name) {
                    Some(g) => Ok(Polynomial::word(Word::from_generators(&[g]))),
                    None => Err(ParseError::new(
                        self.line,
                        column,
                        ParseErrorKind::UnknownGenerator(name),
                    )),
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(other) => Err(self.error(format!("unexpected token {other:?}"))),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}

fn parse_expr_tokens(
    tokens: &[Token],
    line: usize,
    end_column: usize,
    pres: &Presentation,
) -> Result<Polynomial, ParseError> {
    let mut p = ExprParser {
        tokens,
        pos: 0,
        line,
        end_column,
        pres,
    };
    let poly = p.expr()?;
    if p.pos != tokens.len() {
        return Err(p.error("trailing input"));
    }
    Ok(poly)
}

/// Parses a polynomial without rewriting it.
pub fn parse_polynomial_raw(text: &str, pres: &Presentation) -> Result<Polynomial, ParseError> {
    let tokens = tokenize(text, 1, 1)?;
    parse_expr_tokens(&tokens, 1, text.chars().count() + 1, pres)
}

/// Parses a polynomial and returns its normal form under `pres`.
pub fn parse_polynomial(text: &str, pres: &Presentation) -> Result<Polynomial, ParseError> {
    let raw = parse_polynomial_raw(text, pres)?;
    pres.normal_form(&raw)
        .map_err(|e| ParseError::new(1, 1, ParseErrorKind::Algebra(e)))
}

// ---------------------------------------------------------------------------
// Files

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Section {
    Generators,
    Relations,
    Commute,
    Objective,
    Constraints,
    Positive,
    Options,
}

impl Section {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "generators" => Section::Generators,
            "relations" => Section::Relations,
            "commute" => Section::Commute,
            "objective" => Section::Objective,
            "constraints" => Section::Constraints,
            "positive" => Section::Positive,
            "options" => Section::Options,
            _ => return None,
        })
    }
}

struct Line<'a> {
    number: usize,
    /// Column of the first character of `text`.
    column: usize,
    text: &'a str,
}

impl Line<'_> {
    fn tokens(&self) -> Result<Vec<Token>, ParseError> {
        tokenize(self.text, self.number, self.column)
    }

    fn end_column(&self) -> usize {
        self.column + self.text.chars().count()
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let mut sections: Vec<(Section, Vec<Line<'_>>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let column = content.chars().take_while(|c| c.is_whitespace()).count() + 1;
        if let Some(name) = trimmed.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                ParseError::syntax(number, column, "section header must end with `]`")
            })?;
            let section = Section::from_name(name.trim()).ok_or_else(|| {
                ParseError::new(
                    number,
                    column,
                    ParseErrorKind::UnknownSection(name.trim().to_string()),
                )
            })?;
            sections.push((section, Vec::new()));
            continue;
        }
        match sections.last_mut() {
            Some((_, lines)) => lines.push(Line {
                number,
                column,
                text: trimmed,
            }),
            None => {
                return Err(ParseError::syntax(
                    number,
                    column,
                    "content before the first section header",
                ))
            }
        }
    }
    let lines_of = |s: Section| {
        sections
            .iter()
            .filter(move |(k, _)| *k == s)
            .flat_map(|(_, ls)| ls.iter())
    };

    let mut generators = Vec::new();
    for line in lines_of(Section::Generators) {
        let tokens = line.tokens()?;
        let (name, rest) = match tokens.split_first() {
            Some((
                Token {
                    tok: Tok::Ident(n), ..
                },
                rest,
            )) => (n.clone(), rest),
            _ => {
                return Err(ParseError::syntax(
                    line.number,
                    line.column,
                    "expected a generator name",
                ))
            }
        };
        let selfadjoint = match rest {
            [] => false,
            [Token {
                tok: Tok::Ident(flag),
                ..
            }] if flag == "selfadjoint" => true,
            [t, ..] => {
                return Err(ParseError::syntax(
                    line.number,
                    t.column,
                    "expected `selfadjoint` or end of line",
                ))
            }
        };
        if generators.iter().any(|g: &Generator| g.name == name) {
            return Err(ParseError::new(
                line.number,
                line.column,
                ParseErrorKind::Algebra(AlgebraError::DuplicateGenerator(name)),
            ));
        }
        generators.push(Generator::new(name, selfadjoint));
    }
    let mut pres = Presentation::new(generators)
        .map_err(|e| ParseError::new(1, 1, ParseErrorKind::Algebra(e)))?;

    for line in lines_of(Section::Commute) {
        parse_commute_line(line, &mut pres)?;
    }

    for line in lines_of(Section::Relations) {
        let tokens = line.tokens()?;
        let split = tokens
            .iter()
            .position(|t| t.tok == Tok::Assign)
            .ok_or_else(|| ParseError::syntax(line.number, line.column, "expected `WORD = POLY`"))?;
        let lhs = parse_expr_tokens(&tokens[..split], line.number, tokens[split].column, &pres)?;
        let lhs_word = lhs.as_word().cloned().ok_or_else(|| {
            ParseError::syntax(
                line.number,
                line.column,
                "left-hand side of a relation must be a single word",
            )
        })?;
        let rhs = parse_expr_tokens(&tokens[split + 1..], line.number, line.end_column(), &pres)?;
        pres.add_rule(lhs_word, rhs)
            .map_err(|e| ParseError::new(line.number, line.column, e.into()))?;
    }

    let nf = |p: &Polynomial, line: &Line<'_>| {
        pres.normal_form(p)
            .map_err(|e| ParseError::new(line.number, line.column, e.into()))
    };
    let check_selfadjoint = |p: &Polynomial, line: &Line<'_>, what: &str| {
        let ok = pres
            .is_selfadjoint(p, SELFADJOINT_TOL)
            .map_err(|e| ParseError::new(line.number, line.column, e.into()))?;
        if ok {
            Ok(())
        } else {
            Err(ParseError::new(
                line.number,
                line.column,
                ParseErrorKind::NotSelfAdjoint(what.to_string()),
            ))
        }
    };

    let mut objective = None;
    for line in lines_of(Section::Objective) {
        if objective.is_some() {
            return Err(ParseError::syntax(
                line.number,
                line.column,
                "only one objective line is allowed",
            ));
        }
        let tokens = line.tokens()?;
        let sense = match tokens.first().map(|t| &t.tok) {
            Some(Tok::Ident(s)) if s == "minimize" => ObjectiveSense::Minimize,
            Some(Tok::Ident(s)) if s == "maximize" => ObjectiveSense::Maximize,
            _ => {
                return Err(ParseError::syntax(
                    line.number,
                    line.column,
                    "expected `minimize POLY` or `maximize POLY`",
                ))
            }
        };
        let poly = parse_expr_tokens(&tokens[1..], line.number, line.end_column(), &pres)?;
        let poly = nf(&poly, line)?;
        check_selfadjoint(&poly, line, "objective")?;
        objective = Some(Objective { sense, poly });
    }
    let objective = objective.ok_or(ParseError::new(1, 1, ParseErrorKind::MissingObjective))?;

    let mut constraints = Vec::new();
    for line in lines_of(Section::Constraints) {
        let tokens = line.tokens()?;
        let (split, relation) = tokens
            .iter()
            .enumerate()
            .find_map(|(k, t)| match t.tok {
                Tok::Le => Some((k, Relation::Le)),
                Tok::Ge => Some((k, Relation::Ge)),
                Tok::EqEq => Some((k, Relation::Eq)),
                _ => None,
            })
            .ok_or_else(|| {
                ParseError::syntax(line.number, line.column, "expected `<=`, `>=` or `==`")
            })?;
        let poly = parse_expr_tokens(&tokens[..split], line.number, tokens[split].column, &pres)?;
        let bound = parse_real(&tokens[split + 1..], line)?;
        let poly = nf(&poly, line)?;
        check_selfadjoint(&poly, line, "constraint")?;
        constraints.push(ProblemConstraint {
            poly,
            relation,
            bound,
        });
    }

    let mut positives = Vec::new();
    for line in lines_of(Section::Positive) {
        let tokens = line.tokens()?;
        let poly = parse_expr_tokens(&tokens, line.number, line.end_column(), &pres)?;
        let poly = nf(&poly, line)?;
        check_selfadjoint(&poly, line, "positive element")?;
        positives.push(poly);
    }

    let mut normalization = true;
    let mut level = 1usize;
    let mut basis = None;
    let mut basis_cap = DEFAULT_BASIS_CAP;
    for line in lines_of(Section::Options) {
        let tokens = line.tokens()?;
        let (key, value) = match tokens.as_slice() {
            [Token {
                tok: Tok::Ident(k), ..
            }, Token {
                tok: Tok::Assign, ..
            }, rest @ ..] => (k.as_str(), rest),
            _ => {
                return Err(ParseError::syntax(
                    line.number,
                    line.column,
                    "expected `key = value`",
                ))
            }
        };
        match key {
            "normalization" => {
                normalization = match value {
                    [Token {
                        tok: Tok::Ident(v), ..
                    }] if v == "true" => true,
                    [Token {
                        tok: Tok::Ident(v), ..
                    }] if v == "false" => false,
                    _ => {
                        return Err(ParseError::syntax(
                            line.number,
                            line.column,
                            "normalization must be `true` or `false`",
                        ))
                    }
                }
            }
            "level" => level = parse_positive_int(value, line)?,
            "basis_cap" => basis_cap = parse_positive_int(value, line)?,
            "basis" => {
                let mut words = Vec::new();
                for chunk in value.split(|t| t.tok == Tok::Comma) {
                    let column = chunk.first().map_or(line.end_column(), |t| t.column);
                    let p = parse_expr_tokens(chunk, line.number, line.end_column(), &pres)?;
                    let word = p.as_word().cloned().ok_or_else(|| {
                        ParseError::syntax(line.number, column, "basis entries must be words")
                    })?;
                    words.push(word);
                }
                basis = Some(words);
            }
            other => {
                return Err(ParseError::new(
                    line.number,
                    line.column,
                    ParseErrorKind::UnknownOption(other.to_string()),
                ))
            }
        }
    }

    Ok(ProblemFile {
        presentation: pres,
        objective,
        constraints,
        positives,
        normalization,
        level,
        basis,
        basis_cap,
    })
}

fn parse_commute_line(line: &Line<'_>, pres: &mut Presentation) -> Result<(), ParseError> {
    let tokens = line.tokens()?;
    if let [Token {
        tok: Tok::Ident(all), ..
    }] = tokens.as_slice()
    {
        if all == "all" {
            let n = pres.generators().len();
            for a in 0..n {
                for b in a + 1..n {
                    pres.add_commuting(a, b)
                        .map_err(|e| ParseError::new(line.number, line.column, e.into()))?;
                }
            }
            return Ok(());
        }
    }
    let mut pos = 0;
    let left = parse_name_set(&tokens, &mut pos, line, pres)?;
    let right = match tokens.get(pos) {
        None => None,
        Some(Token {
            tok: Tok::Ident(w), ..
        }) if w == "with" => {
            pos += 1;
            let set = parse_name_set(&tokens, &mut pos, line, pres)?;
            if let Some(t) = tokens.get(pos) {
                return Err(ParseError::syntax(line.number, t.column, "trailing input"));
            }
            Some(set)
        }
        Some(t) => {
            return Err(ParseError::syntax(
                line.number,
                t.column,
                "expected `with` or end of line",
            ))
        }
    };
    let right = right.as_ref().unwrap_or(&left);
    for &a in &left {
        for &b in right {
            pres.add_commuting(a, b)
                .map_err(|e| ParseError::new(line.number, line.column, e.into()))?;
        }
    }
    Ok(())
}

fn parse_name_set(
    tokens: &[Token],
    pos: &mut usize,
    line: &Line<'_>,
    pres: &Presentation,
) -> Result<Vec<usize>, ParseError> {
    let expect = |pos: usize, what: &str| {
        let column = tokens.get(pos).map_or(line.end_column(), |t| t.column);
        ParseError::syntax(line.number, column, format!("expected {what}"))
    };
    if tokens.get(*pos).map(|t| &t.tok) != Some(&Tok::LBrace) {
        return Err(expect(*pos, "`{`"));
    }
    *pos += 1;
    let mut out = Vec::new();
    loop {
        match tokens.get(*pos) {
            Some(Token {
                tok: Tok::Ident(name),
                column,
            }) => {
                let g = pres.generator_index(name).ok_or_else(|| {
                    ParseError::new(
                        line.number,
                        *column,
                        ParseErrorKind::UnknownGenerator(name.clone()),
                    )
                })?;
                out.push(g);
                *pos += 1;
            }
            _ => return Err(expect(*pos, "a generator name")),
        }
        match tokens.get(*pos).map(|t| &t.tok) {
            Some(Tok::Comma) => *pos += 1,
            Some(Tok::RBrace) => {
                *pos += 1;
                return Ok(out);
            }
            _ => return Err(expect(*pos, "`,` or `}`")),
        }
    }
}

fn parse_real(tokens: &[Token], line: &Line<'_>) -> Result<f64, ParseError> {
    let column = tokens.first().map_or(line.end_column(), |t| t.column);
    match tokens {
        [Token {
            tok: Tok::Real(v), ..
        }] => Ok(*v),
        [Token {
            tok: Tok::Minus, ..
        }, Token {
            tok: Tok::Real(v), ..
        }] => Ok(-*v),
        [Token { tok: Tok::Plus, .. }, Token {
            tok: Tok::Real(v), ..
        }] => Ok(*v),
        _ => Err(ParseError::syntax(line.number, column, "expected a real number")),
    }
}

fn parse_positive_int(tokens: &[Token], line: &Line<'_>) -> Result<usize, ParseError> {
    let column = tokens.first().map_or(line.end_column(), |t| t.column);
    let text = match tokens {
        [Token {
            tok: Tok::Real(v), ..
        }] => {
            if v.fract() == 0.0 && *v >= 1.0 && *v < 1e9 {
                return Ok(*v as usize);
            }
            format!("{v}")
        }
        [Token {
            tok: Tok::Minus, ..
        }, Token {
            tok: Tok::Real(v), ..
        }] => format!("-{v}"),
        _ => return Err(ParseError::syntax(line.number, column, "expected an integer")),
    };
    Err(ParseError::new(
        line.number,
        column,
        ParseErrorKind::NonPositiveLevel(text),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHSH: &str = "\
[generators]
A0 selfadjoint
A1 selfadjoint
B0 selfadjoint
B1 selfadjoint
[relations]
A0^2 = 1
A1^2 = 1
B0^2 = 1
B1^2 = 1
[commute]
{A0, A1} with {B0, B1}
[objective]
maximize A0*B0 + A0*B1 + A1*B0 - A1*B1
[options]
normalization = true
";

    #[test]
    fn chsh_file() {
        let p = parse_problem(CHSH).unwrap();
        assert_eq!(p.presentation.generators().len(), 4);
        assert_eq!(p.presentation.rules().len(), 4);
        assert_eq!(p.presentation.commuting_pairs().len(), 4);
        assert_eq!(p.objective.sense, ObjectiveSense::Maximize);
        assert_eq!(p.objective.poly.len(), 4);
        assert!(p.normalization);
    }

    #[test]
    fn minimal_file() {
        let p = parse_problem("[generators]\nx\n[objective]\nminimize x + x'\n").unwrap();
        assert_eq!(p.presentation.generators().len(), 1);
        assert_eq!(p.level, 1);
        let p = parse_problem("[generators]\nx selfadjoint\n[objective]\nminimize x\n").unwrap();
        assert!(p.constraints.is_empty());
    }

    #[test]
    fn unknown_generator_in_objective() {
        let err = parse_problem("[generators]\nx selfadjoint\n[objective]\nmaximize A0\n")
            .unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownGenerator("A0".into()));
        assert_eq!((err.line, err.column), (4, 10));
    }

    #[test]
    fn non_selfadjoint_objective_rejected() {
        let err = parse_problem("[generators]\nx\n[objective]\nminimize x\n").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NotSelfAdjoint(_)));
    }

    #[test]
    fn non_positive_level_rejected() {
        let err = parse_problem(
            "[generators]\nx selfadjoint\n[objective]\nminimize x\n[options]\nlevel = 0\n",
        )
        .unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NonPositiveLevel(_)));
        assert_eq!(err.line, 6);
    }

    #[test]
    fn duplicate_generator_rejected() {
        let err = parse_problem("[generators]\nx\nx\n[objective]\nminimize 1\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn polynomial_grammar() {
        let p = parse_problem(CHSH).unwrap();
        let pres = &p.presentation;
        let poly = parse_polynomial("2*A0*B1 - 1", pres).unwrap();
        let expected = &Polynomial::word(Word::from_generators(&[0, 3]))
            .scale(Complex64::new(2.0, 0.0))
            - &Polynomial::one();
        assert_eq!(poly, expected);
        assert_eq!(
            parse_polynomial("A0'", pres).unwrap(),
            Polynomial::word(Word::from_generators(&[0]))
        );
        let x = Presentation::new(vec![Generator::new("x", true)]).unwrap();
        assert_eq!(
            parse_polynomial("x^3", &x).unwrap(),
            Polynomial::word(Word::from_generators(&[0, 0, 0]))
        );
        assert_eq!(
            parse_polynomial("2.5i*x", &x).unwrap(),
            Polynomial::monomial(Word::from_generators(&[0]), Complex64::new(0.0, 2.5))
        );
    }

    #[test]
    fn syntax_errors_are_located() {
        let x = Presentation::new(vec![Generator::new("x", true)]).unwrap();
        let err = parse_polynomial("x + * x", &x).unwrap_err();
        assert_eq!(err.column, 5);
        let err = parse_polynomial("(x + 1", &x).unwrap_err();
        assert_eq!(err.column, 7);
        let err = parse_polynomial("x $", &x).unwrap_err();
        assert_eq!(err.column, 3);
    }

    #[test]
    fn options_and_basis() {
        let text = format!("{CHSH}level = 2\nbasis = 1, A0, A0*B1\n");
        let p = parse_problem(&text).unwrap();
        assert_eq!(p.level, 2);
        assert_eq!(p.basis.as_ref().map(Vec::len), Some(3));
    }

    #[test]
    fn commute_shorthands() {
        let p = parse_problem("[generators]\nx selfadjoint\ny selfadjoint\nz selfadjoint\n[commute]\nall\n[objective]\nminimize x\n").unwrap();
        assert!(p.presentation.is_commutative());
        let p = parse_problem("[generators]\nx selfadjoint\ny selfadjoint\n[commute]\n{x, y}\n[objective]\nminimize x\n").unwrap();
        assert!(p.presentation.is_commutative());
    }
}
