//! Truth-table semantics.
//!
//! Entailment and equivalence are decided by enumerating every assignment
//! over the joint atom set. Rows are evaluated 64 at a time as bit lanes;
//! there is no clever pruning, so the answer is only as trustworthy as
//! `evaluate` itself.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::formula::{Connective, Formula, Node, Symbol};

/// Largest joint atom count the oracle will enumerate (2^20 rows).
pub const MAX_VARIABLES: usize = 20;

pub type Assignment = BTreeMap<Symbol, bool>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("assignment has no value for atom `{0}`")]
    MissingVariable(Symbol),
    #[error("{count} distinct atoms exceed the truth-table cap of {MAX_VARIABLES}")]
    TooManyVariables { count: usize },
}

pub fn evaluate(f: &Formula, assignment: &Assignment) -> Result<bool, OracleError> {
    Ok(match f.node() {
        Node::Atom(name) => *assignment
            .get(name)
            .ok_or_else(|| OracleError::MissingVariable(name.clone()))?,
        Node::Top => true,
        Node::Bot => false,
        Node::Not(inner) => !evaluate(inner, assignment)?,
        Node::Binary(op, l, r) => {
            let (l, r) = (evaluate(l, assignment)?, evaluate(r, assignment)?);
            match op {
                Connective::And => l && r,
                Connective::Or => l || r,
                Connective::Implies => !l || r,
                Connective::Iff => l == r,
            }
        }
    })
}

/// True iff every assignment satisfying `premise` satisfies `conclusion`.
pub fn entails(premise: &Formula, conclusion: &Formula) -> Result<bool, OracleError> {
    let table = Table::new([premise, conclusion])?;
    Ok(table.all_blocks(|lanes| lanes[0] & !lanes[1] == 0))
}

pub fn equivalent(f: &Formula, g: &Formula) -> Result<bool, OracleError> {
    let table = Table::new([f, g])?;
    Ok(table.all_blocks(|lanes| lanes[0] == lanes[1]))
}

/// True iff `f` holds under every assignment.
pub fn valid(f: &Formula) -> Result<bool, OracleError> {
    let table = Table::new([f])?;
    Ok(table.all_blocks(|lanes| lanes[0] == u64::MAX))
}

/// Lane masks for the first six variables: bit `row` of `LOW_MASKS[i]` is
/// bit `i` of `row`.
const LOW_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

struct Table<'a, const N: usize> {
    formulas: [&'a Formula; N],
    index: BTreeMap<Symbol, usize>,
}

impl<'a, const N: usize> Table<'a, N> {
    fn new(formulas: [&'a Formula; N]) -> Result<Self, OracleError> {
        let mut index = BTreeMap::new();
        for f in formulas {
            for atom in f.atoms() {
                let next = index.len();
                index.entry(atom).or_insert(next);
            }
        }
        if index.len() > MAX_VARIABLES {
            return Err(OracleError::TooManyVariables { count: index.len() });
        }
        Ok(Table { formulas, index })
    }

    /// Runs `check` over each block of 64 rows; stops at the first failure.
    fn all_blocks(&self, check: impl Fn(&[u64; N]) -> bool) -> bool {
        let high_vars = self.index.len().saturating_sub(6);
        for block in 0..(1u64 << high_vars) {
            let lanes = self.formulas.map(|f| self.eval_block(f, block));
            if !check(&lanes) {
                return false;
            }
        }
        true
    }

    fn eval_block(&self, f: &Formula, block: u64) -> u64 {
        match f.node() {
            Node::Atom(name) => {
                let i = self.index[name];
                if i < 6 {
                    LOW_MASKS[i]
                } else if (block >> (i - 6)) & 1 == 1 {
                    u64::MAX
                } else {
                    0
                }
            }
            Node::Top => u64::MAX,
            Node::Bot => 0,
            Node::Not(inner) => !self.eval_block(inner, block),
            Node::Binary(op, l, r) => {
                let (l, r) = (self.eval_block(l, block), self.eval_block(r, block));
                match op {
                    Connective::And => l & r,
                    Connective::Or => l | r,
                    Connective::Implies => !l | r,
                    Connective::Iff => !(l ^ r),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn assign(pairs: &[(&str, bool)]) -> Assignment {
        pairs.iter().map(|(k, v)| (Symbol::from(*k), *v)).collect()
    }

    #[test]
    fn evaluate_examples() {
        let mp = f("(a -> b) & a");
        assert!(evaluate(&mp, &assign(&[("a", true), ("b", true)])).unwrap());
        assert!(!evaluate(&mp, &assign(&[("a", true), ("b", false)])).unwrap());
        assert!(evaluate(&f("a | ~a"), &assign(&[("a", false)])).unwrap());
        assert_eq!(
            evaluate(&mp, &assign(&[("a", true)])),
            Err(OracleError::MissingVariable("b".into()))
        );
    }

    #[test]
    fn entailment_examples() {
        assert!(entails(&f("(a -> b) & a"), &f("b")).unwrap());
        assert!(!entails(&f("a -> b"), &f("b -> a")).unwrap());
        assert!(entails(&f("F"), &f("a")).unwrap());
        assert!(entails(&f("a"), &f("T")).unwrap());
        assert!(!entails(&f("T"), &f("a")).unwrap());
    }

    #[test]
    fn equivalence_examples() {
        assert!(equivalent(&f("~(a & b)"), &f("~a | ~b")).unwrap());
        assert!(equivalent(&f("a -> b"), &f("~b -> ~a")).unwrap());
        assert!(!equivalent(&f("a -> b"), &f("b -> a")).unwrap());
        assert!(valid(&f("a | ~a")).unwrap());
    }

    #[test]
    fn high_variables_use_block_bits() {
        // atoms beyond the sixth live in the block counter
        let big = f("a & b & c & d & e & g & h & i");
        assert!(entails(&big, &f("i")).unwrap());
        assert!(!entails(&f("a & b & c & d & e & g & h"), &f("i")).unwrap());
        assert!(entails(&f("(h -> i) & h & a & b & c & d & e & g"), &f("i")).unwrap());
    }

    #[test]
    fn variable_cap() {
        let names: Vec<String> = (0..21).map(|i| format!("v{i}")).collect();
        let wide = f(&names.join(" & "));
        assert_eq!(
            entails(&wide, &f("v0")),
            Err(OracleError::TooManyVariables { count: 21 })
        );
        let ok = f(&names[..20].join(" | "));
        assert!(entails(&f("v3"), &ok).unwrap());
    }
}
