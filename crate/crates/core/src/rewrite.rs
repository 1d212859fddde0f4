//! Pattern matching and single-step rewriting.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Node, Position, Symbol};
use crate::rules::{Label, Pattern, RewriteRule, RuleBase, RuleKind};

/// Largest formula (in nodes) a rewrite may produce by default.
pub const DEFAULT_NODE_CAP: usize = 64;

/// Metavariable bindings produced by [`match_pattern`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings(Vec<(Symbol, Formula)>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Formula> {
        self.0.iter().find(|(v, _)| &**v == var).map(|(_, f)| f)
    }

    /// Binds `var` to `value`, or checks that an existing binding is
    /// structurally equal. Returns false on conflict.
    pub fn bind(&mut self, var: &Symbol, value: &Formula) -> bool {
        match self.get(var) {
            Some(prev) => prev == value,
            None => {
                self.0.push((var.clone(), value.clone()));
                true
            }
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Formula)> {
        self.0.iter().map(|(v, f)| (v, f))
    }
}

impl<S: Into<Symbol>> FromIterator<(S, Formula)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (S, Formula)>>(iter: I) -> Self {
        let mut b = Bindings::new();
        for (v, f) in iter {
            b.bind(&v.into(), &f);
        }
        b
    }
}

/// Non-linear first-order matching: a repeated metavariable must bind
/// structurally equal subtrees.
pub fn match_pattern(p: &Pattern, f: &Formula) -> Option<Bindings> {
    let mut b = Bindings::new();
    match_into(p.formula(), f, &mut b).then_some(b)
}

fn match_into(p: &Formula, f: &Formula, b: &mut Bindings) -> bool {
    match (p.node(), f.node()) {
        (Node::Atom(name), _) if Pattern::is_metavar(name) => b.bind(name, f),
        (Node::Atom(x), Node::Atom(y)) => x == y,
        (Node::Top, Node::Top) | (Node::Bot, Node::Bot) => true,
        (Node::Not(p), Node::Not(f)) => match_into(p, f, b),
        (Node::Binary(pop, pl, pr), Node::Binary(fop, fl, fr)) => {
            pop == fop && match_into(pl, fl, b) && match_into(pr, fr, b)
        }
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("metavariable {0} is unbound")]
pub struct UnboundMetavariable(pub Symbol);

pub fn instantiate(p: &Pattern, b: &Bindings) -> Result<Formula, UnboundMetavariable> {
    subst(p.formula(), b)
}

fn subst(p: &Formula, b: &Bindings) -> Result<Formula, UnboundMetavariable> {
    Ok(match p.node() {
        Node::Atom(name) if Pattern::is_metavar(name) => b
            .get(name)
            .cloned()
            .ok_or_else(|| UnboundMetavariable(name.clone()))?,
        Node::Atom(_) | Node::Top | Node::Bot => p.clone(),
        Node::Not(inner) => Formula::not(subst(inner, b)?),
        Node::Binary(op, l, r) => Formula::binary(*op, subst(l, b)?, subst(r, b)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// lhs ⇒ rhs
    Forward,
    /// rhs ⇒ lhs (equivalence rules only)
    Backward,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Forward => "forward",
            Orientation::Backward => "backward",
        })
    }
}

/// One applied rewrite step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub rule_id: Arc<str>,
    pub rule_name: Arc<str>,
    pub kind: RuleKind,
    pub orientation: Orientation,
    pub position: Position,
    pub before: Formula,
    pub after: Formula,
    pub sub_before: Formula,
    pub sub_after: Formula,
    pub step_label: Label,
}

impl Rewrite {
    /// Applies `rule` at `position` of `before` in the given orientation,
    /// if it matches there.
    pub fn try_apply(
        rule: &RewriteRule,
        orientation: Orientation,
        before: &Formula,
        position: &Position,
    ) -> Option<Rewrite> {
        let sub_before = before.subformula_at(position).ok()?;
        let (from, to) = match orientation {
            Orientation::Forward => (&rule.lhs, &rule.rhs),
            Orientation::Backward => (&rule.rhs, &rule.lhs),
        };
        let bindings = match_pattern(from, sub_before)?;
        let sub_after = instantiate(to, &bindings).ok()?;
        let after = before.replace_at(position, sub_after.clone()).ok()?;
        Some(Rewrite {
            rule_id: rule.id.clone(),
            rule_name: rule.name.clone(),
            kind: rule.kind,
            orientation,
            position: position.clone(),
            before: before.clone(),
            after,
            sub_before: sub_before.clone(),
            sub_after,
            step_label: rule.label,
        })
    }
}

/// Every single-step rewrite of `f` under the enabled rules of `rb`, with
/// the default node cap. See [`applicable_rewrites_capped`].
pub fn applicable_rewrites(f: &Formula, rb: &RuleBase) -> Vec<Rewrite> {
    applicable_rewrites_capped(f, rb, DEFAULT_NODE_CAP)
}

/// Every single-step rewrite of `f`, ordered by preorder position, then
/// rule declaration order, then forward before backward.
///
/// Equivalence rules apply at every position in both orientations. The
/// backward one is skipped when it cannot bind every lhs metavariable or
/// when it would repeat the forward rewrite (symmetric rules). Implication
/// rules apply at the root, forward only. Results larger than `node_cap`
/// nodes are suppressed. Duplicate results are kept.
pub fn applicable_rewrites_capped(f: &Formula, rb: &RuleBase, node_cap: usize) -> Vec<Rewrite> {
    let rules: Vec<(&RewriteRule, bool)> = rb.enabled_with_backward().collect();
    let size = f.size();
    let mut out = Vec::new();
    let mut path = Vec::new();
    f.walk_preorder(&mut path, &mut |p, sub| {
        let at_root = p.is_empty();
        let sub_size = sub.size();
        for &(rule, backward) in &rules {
            if rule.kind == RuleKind::Implication && !at_root {
                continue;
            }
            for (orientation, allowed) in [
                (Orientation::Forward, true),
                (Orientation::Backward, backward),
            ] {
                if !allowed {
                    continue;
                }
                let (from, to) = match orientation {
                    Orientation::Forward => (&rule.lhs, &rule.rhs),
                    Orientation::Backward => (&rule.rhs, &rule.lhs),
                };
                let Some(bindings) = match_pattern(from, sub) else {
                    continue;
                };
                let Ok(sub_after) = instantiate(to, &bindings) else {
                    continue;
                };
                if size - sub_size + sub_after.size() > node_cap {
                    continue;
                }
                let position = Position(p.to_vec());
                let after = f
                    .replace_at(&position, sub_after.clone())
                    .expect("position from traversal");
                out.push(Rewrite {
                    rule_id: rule.id.clone(),
                    rule_name: rule.name.clone(),
                    kind: rule.kind,
                    orientation,
                    position,
                    before: f.clone(),
                    after,
                    sub_before: sub.clone(),
                    sub_after,
                    step_label: rule.label,
                });
            }
        }
    });
    out
}
