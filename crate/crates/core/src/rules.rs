//! Labeled rewrite rules and the rule base.
//!
//! Rule files are line oriented. Each non-blank line that does not start
//! with `#` holds one rule as six `;`-separated fields:
//!
//! ```text
//! id; name; kind; label; lhs; rhs
//! E8; MaterialImplication; equivalence; 1; X -> Y; ~X | Y
//! ```
//!
//! `kind` is `equivalence` or `implication`, `label` is `1` (sound) or `0`
//! (deliberately unsound). Uppercase single-letter atoms in `lhs`/`rhs` are
//! metavariables; any other atom matches only itself.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Node, Symbol};
use crate::oracle::{self, OracleError};
use crate::parser::{parse_formula, ParseError};

const BUILTIN_RULES: &str = include_str!("builtin.rules");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Equivalence,
    Implication,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Equivalence => "equivalence",
            RuleKind::Implication => "implication",
        })
    }
}

/// Validity label: 1 for sound rules and paths, 0 for unsound ones.
pub type Label = u8;

/// A formula whose uppercase single-letter atoms act as metavariables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern(pub Formula);

impl Pattern {
    pub fn is_metavar(name: &str) -> bool {
        let b = name.as_bytes();
        b.len() == 1 && b[0].is_ascii_uppercase()
    }

    pub fn formula(&self) -> &Formula {
        &self.0
    }

    pub fn metavars(&self) -> BTreeSet<Symbol> {
        self.0
            .atoms()
            .into_iter()
            .filter(|a| Self::is_metavar(a))
            .collect()
    }

    /// Metavariable name when the whole pattern is a single metavariable.
    pub fn as_metavar(&self) -> Option<&Symbol> {
        match self.0.node() {
            Node::Atom(name) if Self::is_metavar(name) => Some(name),
            _ => None,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub id: Arc<str>,
    pub name: Arc<str>,
    pub kind: RuleKind,
    pub label: Label,
    pub lhs: Pattern,
    pub rhs: Pattern,
}

impl RewriteRule {
    /// Whether right-to-left application is well defined, i.e. every
    /// metavariable of the lhs is bound by matching the rhs.
    pub fn reversible(&self) -> bool {
        self.kind == RuleKind::Equivalence && self.lhs.metavars().is_subset(&self.rhs.metavars())
    }

    /// Whether applying the rule right to left is the same rewrite as left
    /// to right up to renaming metavariables (e.g. `X & Y <=> Y & X`).
    pub fn symmetric(&self) -> bool {
        let Some(renaming) = crate::rewrite::match_pattern(&self.lhs, self.rhs.formula()) else {
            return false;
        };
        let targets: BTreeSet<&Symbol> = renaming.iter().filter_map(|(_, f)| f.as_atom()).collect();
        let injective =
            targets.len() == renaming.len() && targets.iter().all(|t| Pattern::is_metavar(t));
        injective
            && crate::rewrite::instantiate(&self.rhs, &renaming).as_ref() == Ok(self.lhs.formula())
    }

    /// Whether the enumerator should try the rule right to left: a
    /// reversible rule that is not [`RewriteRule::symmetric`].
    pub fn applies_backward(&self) -> bool {
        self.reversible() && !self.symmetric()
    }

    /// Checks the rule schema against the truth-table oracle, treating each
    /// metavariable as a fresh atom. Returns whether the rule is sound for
    /// its kind.
    pub fn oracle_valid(&self) -> Result<bool, OracleError> {
        let (l, r) = (self.lhs.formula(), self.rhs.formula());
        match self.kind {
            RuleKind::Equivalence => oracle::equivalent(l, r),
            RuleKind::Implication => oracle::entails(l, r),
        }
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.kind {
            RuleKind::Equivalence => "<=>",
            RuleKind::Implication => "|-",
        };
        write!(
            f,
            "{} {}: {} {arrow} {} [label={}]",
            self.id, self.name, self.lhs, self.rhs, self.label
        )
    }
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("line {line}: expected 6 `;`-separated fields (id; name; kind; label; lhs; rhs), found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: empty {field}")]
    EmptyField { line: usize, field: &'static str },
    #[error("line {line}: unknown rule kind `{kind}`")]
    Kind { line: usize, kind: String },
    #[error("line {line}: label must be 0 or 1, found `{label}`")]
    Label { line: usize, label: String },
    #[error("line {line}: bad {field} pattern: {source}")]
    Pattern {
        line: usize,
        field: &'static str,
        source: ParseError,
    },
    #[error("line {line}: duplicate rule id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: free metavariable {var} in rhs of rule `{id}`")]
    FreeMetavariable {
        line: usize,
        id: String,
        var: Symbol,
    },
    #[error("unknown rule id `{0}`")]
    UnknownId(String),
    #[error("cannot read rule file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// An ordered, immutable rule library with an enable mask.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleBase {
    rules: Vec<RewriteRule>,
    enabled: Vec<bool>,
    backward: Vec<bool>,
}

impl RuleBase {
    pub fn new(rules: Vec<RewriteRule>) -> Result<Self, RuleError> {
        let mut seen = HashSet::new();
        for (i, rule) in rules.iter().enumerate() {
            if !seen.insert(rule.id.clone()) {
                return Err(RuleError::DuplicateId {
                    line: i + 1,
                    id: rule.id.to_string(),
                });
            }
            check_free_metavars(rule, i + 1)?;
        }
        Ok(Self::from_checked(rules))
    }

    fn from_checked(rules: Vec<RewriteRule>) -> Self {
        let enabled = vec![true; rules.len()];
        let backward = rules.iter().map(RewriteRule::applies_backward).collect();
        RuleBase {
            rules,
            enabled,
            backward,
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// All rules in declaration order, enabled or not.
    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    /// Enabled rules with their declaration index.
    pub fn enabled(&self) -> impl Iterator<Item = (usize, &RewriteRule)> {
        self.rules
            .iter()
            .enumerate()
            .filter(|(i, _)| self.enabled[*i])
    }

    /// Enabled rules paired with [`RewriteRule::applies_backward`].
    pub(crate) fn enabled_with_backward(&self) -> impl Iterator<Item = (&RewriteRule, bool)> {
        self.enabled().map(|(i, r)| (r, self.backward[i]))
    }

    pub fn is_enabled(&self, id: &str) -> bool {
        self.index_of(id).is_some_and(|i| self.enabled[i])
    }

    pub fn lookup(&self, id: &str) -> Option<&RewriteRule> {
        self.index_of(id).map(|i| &self.rules[i])
    }

    fn index_of(&self, id: &str) -> Option<usize> {
        self.rules.iter().position(|r| &*r.id == id)
    }

    /// Copy of this base with the given ids disabled.
    pub fn without<S: AsRef<str>>(&self, ids: &[S]) -> Result<RuleBase, RuleError> {
        let mut out = self.clone();
        for id in ids {
            let i = self
                .index_of(id.as_ref())
                .ok_or_else(|| RuleError::UnknownId(id.as_ref().to_string()))?;
            out.enabled[i] = false;
        }
        Ok(out)
    }

    /// New base holding only the given ids, in the order they are listed.
    pub fn subset<S: AsRef<str>>(&self, ids: &[S]) -> Result<RuleBase, RuleError> {
        let rules = ids
            .iter()
            .map(|id| {
                self.lookup(id.as_ref())
                    .cloned()
                    .ok_or_else(|| RuleError::UnknownId(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        RuleBase::new(rules)
    }

    /// Copy of this base with every label-0 rule disabled.
    pub fn sound_only(&self) -> RuleBase {
        let mut out = self.clone();
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.label == 0 {
                out.enabled[i] = false;
            }
        }
        out
    }
}

fn check_free_metavars(rule: &RewriteRule, line: usize) -> Result<(), RuleError> {
    let bound = rule.lhs.metavars();
    if let Some(var) = rule.rhs.metavars().into_iter().find(|v| !bound.contains(v)) {
        return Err(RuleError::FreeMetavariable {
            line,
            id: rule.id.to_string(),
            var,
        });
    }
    Ok(())
}

/// The builtin rule library: 20 equivalences, 6 sound implications and 4
/// error rules, in that order.
pub fn builtin_rules() -> RuleBase {
    parse_rules(BUILTIN_RULES).expect("builtin rule table is well formed")
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleBase, RuleError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| RuleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_rules(&text)
}

pub fn parse_rules(text: &str) -> Result<RuleBase, RuleError> {
    let mut rules = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(';').map(str::trim).collect();
        let [id, name, kind, label, lhs, rhs] = fields[..] else {
            return Err(RuleError::FieldCount {
                line,
                found: fields.len(),
            });
        };
        for (value, field) in [(id, "id"), (name, "name")] {
            if value.is_empty() {
                return Err(RuleError::EmptyField { line, field });
            }
        }
        let kind = match kind {
            "equivalence" => RuleKind::Equivalence,
            "implication" => RuleKind::Implication,
            other => {
                return Err(RuleError::Kind {
                    line,
                    kind: other.to_string(),
                })
            }
        };
        let label = match label {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(RuleError::Label {
                    line,
                    label: other.to_string(),
                })
            }
        };
        let pattern = |text: &str, field| {
            parse_formula(text)
                .map(Pattern)
                .map_err(|source| RuleError::Pattern {
                    line,
                    field,
                    source,
                })
        };
        let rule = RewriteRule {
            id: id.into(),
            name: name.into(),
            kind,
            label,
            lhs: pattern(lhs, "lhs")?,
            rhs: pattern(rhs, "rhs")?,
        };
        if !seen.insert(rule.id.clone()) {
            return Err(RuleError::DuplicateId {
                line,
                id: id.to_string(),
            });
        }
        check_free_metavars(&rule, line)?;
        rules.push(rule);
    }
    Ok(RuleBase::from_checked(rules))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleVerdict {
    pub id: String,
    pub name: String,
    pub kind: RuleKind,
    pub declared_label: Label,
    /// `Some(true)` when the oracle finds the schema sound for its kind;
    /// `None` when the schema exceeds the oracle's variable cap.
    pub oracle_valid: Option<bool>,
    pub agree: bool,
}

impl fmt::Display for RuleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.oracle_valid {
            Some(true) => "valid",
            Some(false) => "invalid",
            None => "unchecked",
        };
        write!(
            f,
            "{} {} {} declared={} oracle={} {}",
            self.id,
            self.name,
            self.kind,
            self.declared_label,
            verdict,
            if self.agree { "ok" } else { "MISMATCH" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub records: Vec<RuleVerdict>,
    pub ok: bool,
}

/// Audits every declared label against the oracle. Disagreements are
/// reported, never corrected.
pub fn validate_rules(rb: &RuleBase) -> ValidationReport {
    let records: Vec<RuleVerdict> = rb
        .rules()
        .iter()
        .map(|rule| {
            let oracle_valid = rule.oracle_valid().ok();
            let agree = oracle_valid == Some(rule.label == 1);
            RuleVerdict {
                id: rule.id.to_string(),
                name: rule.name.to_string(),
                kind: rule.kind,
                declared_label: rule.label,
                oracle_valid,
                agree,
            }
        })
        .collect();
    let ok = records.iter().all(|r| r.agree);
    ValidationReport { records, ok }
}
