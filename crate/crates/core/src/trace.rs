//! Step-by-step derivation listings.
//!
//! A step at the root renders as `RuleName: Before → After`; a step inside
//! the formula renders as `RuleName: SubBefore → SubAfter within Parent`.
//! Expressions use pretty (minimal-parenthesis) printing.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explore::DerivationPath;
use crate::formula::Formula;
use crate::parser::{parse_formula, ParseError};
use crate::rewrite::Rewrite;

pub const ARROW: &str = " → ";
const WITHIN: &str = " within ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineKind {
    WholeFormula,
    Subformula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    pub text: String,
    pub kind: LineKind,
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub fn format_step(r: &Rewrite) -> TraceLine {
    if r.position.is_root() {
        TraceLine {
            text: format!(
                "{}: {}{ARROW}{}",
                r.rule_name,
                r.before.pretty(),
                r.after.pretty()
            ),
            kind: LineKind::WholeFormula,
        }
    } else {
        TraceLine {
            text: format!(
                "{}: {}{ARROW}{}{WITHIN}{}",
                r.rule_name,
                r.sub_before.pretty(),
                r.sub_after.pretty(),
                r.before.pretty()
            ),
            kind: LineKind::Subformula,
        }
    }
}

/// Header, numbered steps and footer, newline-terminated.
///
/// ```
/// use logaug_core::{builtin_rules, parse_formula, prove, SearchConfig};
/// use logaug_core::trace::format_path;
///
/// let start = parse_formula("(a -> b) & a").unwrap();
/// let b = parse_formula("b").unwrap();
/// let path = prove(&start, &b, &builtin_rules(), &SearchConfig::prove(b.clone(), 2)).unwrap();
/// assert_eq!(
///     format_path(&path),
///     "PREMISE: (a -> b) & a\n1. ModusPonens: (a -> b) & a → b\nCONCLUSION: b [label=1]\n"
/// );
/// ```
pub fn format_path(p: &DerivationPath) -> String {
    let mut out = format!("PREMISE: {}\n", p.start.pretty());
    for (i, step) in p.steps.iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, format_step(step)));
    }
    out.push_str(&format!(
        "CONCLUSION: {} [label={}]\n",
        p.end().pretty(),
        p.label
    ));
    out
}

/// The pieces of a rendered step, recovered by [`parse_step`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedStep {
    pub rule_name: String,
    pub from: Formula,
    pub to: Formula,
    /// The enclosing formula for subformula steps.
    pub within: Option<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceParseError {
    #[error("trace line has no rule name: {0:?}")]
    MissingRule(String),
    #[error("trace line has no arrow: {0:?}")]
    MissingArrow(String),
    #[error("bad expression in trace line: {0}")]
    Expression(#[from] ParseError),
}

/// Parses one step line (without its `N. ` prefix) back into formulas.
pub fn parse_step(line: &str) -> Result<ParsedStep, TraceParseError> {
    let (rule_name, body) = line
        .split_once(": ")
        .ok_or_else(|| TraceParseError::MissingRule(line.to_string()))?;
    let (from, rest) = body
        .split_once(ARROW)
        .ok_or_else(|| TraceParseError::MissingArrow(line.to_string()))?;
    let from = parse_formula(from)?;
    // an atom could itself be spelled `within`; take the first split where
    // both halves parse
    for (i, _) in rest.match_indices(WITHIN) {
        if let (Ok(to), Ok(parent)) = (
            parse_formula(&rest[..i]),
            parse_formula(&rest[i + WITHIN.len()..]),
        ) {
            return Ok(ParsedStep {
                rule_name: rule_name.to_string(),
                from,
                to,
                within: Some(parent),
            });
        }
    }
    Ok(ParsedStep {
        rule_name: rule_name.to_string(),
        from,
        to: parse_formula(rest)?,
        within: None,
    })
}
