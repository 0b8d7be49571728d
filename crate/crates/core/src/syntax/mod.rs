//! Text formats: formulas, rule files, appraisal theories, scenarios (`.tom`)
//! and event scripts (`.evt`).

mod files;
mod lexer;
mod parser;
mod print;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::logic::Formula;
use crate::pattern::{instantiate, Bindings, EvalCtx, Pattern};

pub use files::{parse_rule_file, parse_scenario, parse_script, parse_theory};
pub use print::{
    serialize_effect, serialize_formula, serialize_pattern, serialize_premise, serialize_rule,
};

/// 1-based position of a token in its source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{span}: {message}")]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

impl Diagnostic {
    pub fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
        }
    }

    /// `file:line:col: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {}", self.span.line, self.span.col, self.message)
    }
}

fn parse_with<T>(
    text: &str,
    mode: parser::Mode,
    f: impl FnOnce(&mut parser::Parser<'_>) -> parser::PResult<T>,
) -> Result<T, Diagnostic> {
    let (toks, diags) = lexer::lex(text);
    if let Some(d) = diags.into_iter().next() {
        return Err(d);
    }
    let mut p = parser::Parser::new(&toks, mode);
    let out = f(&mut p)?;
    if !p.at_eof() {
        return p.error(format!("unexpected {}", p.peek().describe()));
    }
    Ok(out)
}

pub(crate) fn literal_formula(p: &Pattern, span: SourceSpan) -> Result<Formula, Diagnostic> {
    instantiate(p, &Bindings::new(), &EvalCtx::detached())
        .map_err(|e| Diagnostic::new(span, e.to_string()))
}

/// Parses a concrete formula and returns its canonical form.
pub fn parse_formula(text: &str) -> Result<Formula, Diagnostic> {
    let start = SourceSpan {
        line: 1,
        col: 1,
        len: 0,
    };
    let p = parse_with(text, parser::Mode::Formula, |p| p.formula())?;
    literal_formula(&p, start)
}

/// Parses a formula pattern (variables, `self`, degree expressions allowed).
pub fn parse_pattern(text: &str) -> Result<Pattern, Diagnostic> {
    parse_with(text, parser::Mode::Pattern, |p| p.formula())
}

/// Parses a single `rule ...` declaration.
pub fn parse_rule(text: &str) -> Result<crate::rules::Rule, Diagnostic> {
    let start = SourceSpan {
        line: 1,
        col: 1,
        len: 0,
    };
    let r = parse_with(text, parser::Mode::Pattern, |p| p.rule())?;
    r.validate().map_err(|e| Diagnostic::new(start, e.to_string()))?;
    Ok(r)
}
