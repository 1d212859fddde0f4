//! Symbolic propositional rewriting and contrastive data augmentation.
//!
//! The pipeline formalizes simple sentences into formulas ([`nl`]), explores
//! their deductive neighbourhood under a labeled rule base ([`rules`],
//! [`rewrite`], [`explore`]), turns the reached states into labeled pairs
//! ([`pairs`]) and renders them back to text ([`verbalize`]). Every label is
//! checked against a brute-force truth-table [`oracle`].

pub mod explore;
pub mod formula;
pub mod nl;
pub mod oracle;
pub mod pairs;
mod parser;
pub mod pipeline;
mod print;
pub mod rewrite;
pub mod rules;
pub mod trace;
pub mod vars;
pub mod verbalize;

pub use explore::{
    explore, prove, prove_with_stats, DerivationPath, ExplorationResult, ProofSearch, Reached,
    SearchConfig, SearchStats,
};
pub use formula::{Connective, Formula, Node, Position, PositionError, Symbol};
pub use oracle::{entails, equivalent, evaluate, Assignment, OracleError};
pub use parser::{parse_formula, ParseError};
pub use print::{print_formula, symbolic, Style};
pub use rewrite::{
    applicable_rewrites, instantiate, match_pattern, Bindings, Orientation, Rewrite,
};
pub use rules::{
    builtin_rules, load_rules, validate_rules, Label, Pattern, RewriteRule, RuleBase, RuleKind,
};
pub use vars::{VarId, VarTable};
