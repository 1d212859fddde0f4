//! Immutable propositional syntax trees.
//!
//! A [`Formula`] is a cheap-to-clone handle onto a shared node. Nothing
//! ever mutates a node after construction; [`Formula::replace_at`] rebuilds
//! the spine from the root down to the replaced position and shares every
//! untouched subtree with the original.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of a propositional atom (or of a metavariable, inside a rule pattern).
pub type Symbol = Arc<str>;

/// Binary connectives, in increasing binding strength order of their
/// [`Connective::precedence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Connective {
    And,
    Or,
    Implies,
    Iff,
}

impl Connective {
    /// ASCII operator token.
    pub fn token(self) -> &'static str {
        match self {
            Connective::And => "&",
            Connective::Or => "|",
            Connective::Implies => "->",
            Connective::Iff => "<->",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Connective::And => "∧",
            Connective::Or => "∨",
            Connective::Implies => "→",
            Connective::Iff => "↔",
        }
    }

    /// Binding strength; negation binds at [`NOT_PRECEDENCE`].
    pub fn precedence(self) -> u8 {
        match self {
            Connective::And => 4,
            Connective::Or => 3,
            Connective::Implies => 2,
            Connective::Iff => 1,
        }
    }

    pub fn is_right_assoc(self) -> bool {
        matches!(self, Connective::Implies | Connective::Iff)
    }
}

pub(crate) const NOT_PRECEDENCE: u8 = 5;

/// One node of a formula tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Atom(Symbol),
    Top,
    Bot,
    Not(Formula),
    Binary(Connective, Formula, Formula),
}

/// A propositional formula.
///
/// Equality, ordering and hashing are structural. Two formulas are equal
/// exactly when their canonical prints are byte-identical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula(Arc<Node>);

impl Formula {
    pub fn atom(name: impl Into<Symbol>) -> Formula {
        Formula(Arc::new(Node::Atom(name.into())))
    }

    pub fn top() -> Formula {
        Formula(Arc::new(Node::Top))
    }

    pub fn bot() -> Formula {
        Formula(Arc::new(Node::Bot))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Formula) -> Formula {
        Formula(Arc::new(Node::Not(inner)))
    }

    pub fn binary(op: Connective, left: Formula, right: Formula) -> Formula {
        Formula(Arc::new(Node::Binary(op, left, right)))
    }

    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::binary(Connective::And, left, right)
    }

    pub fn or(left: Formula, right: Formula) -> Formula {
        Formula::binary(Connective::Or, left, right)
    }

    pub fn implies(left: Formula, right: Formula) -> Formula {
        Formula::binary(Connective::Implies, left, right)
    }

    pub fn iff(left: Formula, right: Formula) -> Formula {
        Formula::binary(Connective::Iff, left, right)
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// True when both handles point at the same allocation.
    pub fn ptr_eq(&self, other: &Formula) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Children in left-to-right order.
    pub fn children(&self) -> Children<'_> {
        match self.node() {
            Node::Atom(_) | Node::Top | Node::Bot => Children::Zero,
            Node::Not(inner) => Children::One(Some(inner)),
            Node::Binary(_, l, r) => Children::Two(Some(l), Some(r)),
        }
    }

    pub fn child(&self, index: u8) -> Option<&Formula> {
        match (self.node(), index) {
            (Node::Not(inner), 0) => Some(inner),
            (Node::Binary(_, l, _), 0) => Some(l),
            (Node::Binary(_, _, r), 1) => Some(r),
            _ => None,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Atom(_) | Node::Top | Node::Bot => 1,
            Node::Not(inner) => 1 + inner.size(),
            Node::Binary(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self.node() {
            Node::Atom(_) | Node::Top | Node::Bot => 0,
            Node::Not(inner) => 1 + inner.depth(),
            Node::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn as_atom(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Atom(name) => Some(name),
            _ => None,
        }
    }

    /// Distinct atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Atom(name) => {
                out.insert(name.clone());
            }
            Node::Top | Node::Bot => {}
            Node::Not(inner) => inner.collect_atoms(out),
            Node::Binary(_, l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    pub fn subformula_at(&self, pos: &Position) -> Result<&Formula, PositionError> {
        let mut cur = self;
        for (depth, &index) in pos.0.iter().enumerate() {
            cur = cur.child(index).ok_or_else(|| PositionError {
                position: pos.clone(),
                depth,
            })?;
        }
        Ok(cur)
    }

    /// Returns a new tree equal to `self` except that the subtree at `pos`
    /// is `replacement`. `self` is left untouched.
    pub fn replace_at(
        &self,
        pos: &Position,
        replacement: Formula,
    ) -> Result<Formula, PositionError> {
        self.replace_from(pos, 0, replacement)
    }

    fn replace_from(
        &self,
        pos: &Position,
        depth: usize,
        replacement: Formula,
    ) -> Result<Formula, PositionError> {
        let Some(&index) = pos.0.get(depth) else {
            return Ok(replacement);
        };
        let err = || PositionError {
            position: pos.clone(),
            depth,
        };
        match (self.node(), index) {
            (Node::Not(inner), 0) => Ok(Formula::not(inner.replace_from(
                pos,
                depth + 1,
                replacement,
            )?)),
            (Node::Binary(op, l, r), 0) => Ok(Formula::binary(
                *op,
                l.replace_from(pos, depth + 1, replacement)?,
                r.clone(),
            )),
            (Node::Binary(op, l, r), 1) => Ok(Formula::binary(
                *op,
                l.clone(),
                r.replace_from(pos, depth + 1, replacement)?,
            )),
            _ => Err(err()),
        }
    }

    /// All positions in root-left-right order.
    pub fn preorder_positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.size());
        let mut path = Vec::new();
        self.walk_preorder(&mut path, &mut |p, _| out.push(Position(p.to_vec())));
        out
    }

    /// Calls `visit` with each (path, subformula) in root-left-right order.
    pub fn walk_preorder<'a>(
        &'a self,
        path: &mut Vec<u8>,
        visit: &mut impl FnMut(&[u8], &'a Formula),
    ) {
        visit(path, self);
        match self.node() {
            Node::Atom(_) | Node::Top | Node::Bot => {}
            Node::Not(inner) => {
                path.push(0);
                inner.walk_preorder(path, visit);
                path.pop();
            }
            Node::Binary(_, l, r) => {
                path.push(0);
                l.walk_preorder(path, visit);
                path.pop();
                path.push(1);
                r.walk_preorder(path, visit);
                path.pop();
            }
        }
    }

    /// Fully parenthesized form; the dedup key for states.
    pub fn canonical(&self) -> String {
        crate::print::canonical(self)
    }

    /// Minimal-parenthesis form used in traces.
    pub fn pretty(&self) -> String {
        crate::print::pretty(self)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl std::str::FromStr for Formula {
    type Err = crate::parser::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::parser::parse_formula(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.canonical())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        crate::parser::parse_formula(&text).map_err(serde::de::Error::custom)
    }
}

pub enum Children<'a> {
    Zero,
    One(Option<&'a Formula>),
    Two(Option<&'a Formula>, Option<&'a Formula>),
}

impl<'a> Iterator for Children<'a> {
    type Item = &'a Formula;

    fn next(&mut self) -> Option<&'a Formula> {
        match self {
            Children::Zero => None,
            Children::One(c) => c.take(),
            Children::Two(l, r) => l.take().or_else(|| r.take()),
        }
    }
}

/// Path from the root: 0 selects the left (or only) child, 1 the right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub Vec<u8>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<&[u8]> for Position {
    fn from(p: &[u8]) -> Self {
        Position(p.to_vec())
    }
}

impl<const N: usize> From<[u8; N]> for Position {
    fn from(p: [u8; N]) -> Self {
        Position(p.to_vec())
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{step}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid position {position}: no child at step {depth}")]
pub struct PositionError {
    pub position: Position,
    pub depth: usize,
}
