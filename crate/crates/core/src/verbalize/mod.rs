//! Rendering formulas and pairs as English text.
//!
//! Template mode substitutes phrases into fixed surface forms, seven per
//! connective, and is fully deterministic. LLM mode ([`llm`]) asks an
//! OpenAI-compatible endpoint to phrase a pair, given a glossary that binds
//! every atom ([`prompt`]).

pub mod llm;
pub mod prompt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Connective, Formula, Node};
use crate::pairs::SamplePair;
use crate::trace::format_path;
use crate::vars::VarTable;

pub use llm::{llm_instantiate, llm_instantiate_all, LlmConfig, LlmError, TextPair};
pub use prompt::{emit_prompt, PromptSpec};

/// Number of templates per connective.
pub const TEMPLATE_COUNT: u8 = 7;

const IMPLIES: [&str; 7] = [
    "If {A}, then {B}.",
    "{A} implies {B}.",
    "Whenever {A}, {B}.",
    "{B}, provided that {A}.",
    "{A} is sufficient for {B}.",
    "{B} is necessary for {A}.",
    "Should {A}, {B}.",
];

const AND: [&str; 7] = [
    "{A} and {B}.",
    "Both {A} and {B}.",
    "{A}, and also {B}.",
    "Not only {A}, but also {B}.",
    "{A}; moreover, {B}.",
    "{A}, as well as {B}.",
    "It holds that {A} and that {B}.",
];

const OR: [&str; 7] = [
    "{A} or {B}.",
    "Either {A} or {B}.",
    "{A}, or else {B}.",
    "At least one holds: {A}, or {B}.",
    "{A}, or otherwise {B}.",
    "It is true that {A} or that {B}.",
    "{A}, alternatively {B}.",
];

const IFF: [&str; 7] = [
    "{A} if and only if {B}.",
    "{A} exactly when {B}.",
    "{A} just in case {B}.",
    "If {A}, then {B}, and conversely.",
    "{A} is equivalent to {B}.",
    "{A} is necessary and sufficient for {B}.",
    "Whenever {A}, {B}, and whenever {B}, {A}.",
];

const NOT: [&str; 7] = [
    "it is not the case that {A}",
    "it is false that {A}",
    "not {A}",
    "it does not hold that {A}",
    "{A} does not hold",
    "{A} is false",
    "it is untrue that {A}",
];

const TOP: &str = "a tautology holds";
const BOT: &str = "a contradiction holds";

/// The seven surface forms for a connective. Negation is `None`.
pub fn templates(op: Option<Connective>) -> &'static [&'static str; 7] {
    match op {
        None => &NOT,
        Some(Connective::And) => &AND,
        Some(Connective::Or) => &OR,
        Some(Connective::Implies) => &IMPLIES,
        Some(Connective::Iff) => &IFF,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerbalizeError {
    #[error("atom `{0}` has no phrase in the variable table")]
    UnboundAtom(String),
    #[error("template id {0} is outside 1..=7")]
    TemplateId(u8),
}

fn fill(template: &str, a: &str, b: &str) -> String {
    template.replace("{A}", a).replace("{B}", b)
}

fn lower_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

struct Renderer<'a> {
    vt: &'a VarTable,
    index: usize,
}

impl Renderer<'_> {
    fn render(&self, f: &Formula) -> Result<String, VerbalizeError> {
        Ok(match f.node() {
            Node::Atom(name) => self
                .vt
                .phrase_for_atom(name)
                .ok_or_else(|| VerbalizeError::UnboundAtom(name.to_string()))?
                .to_string(),
            Node::Top => TOP.to_string(),
            Node::Bot => BOT.to_string(),
            Node::Not(inner) => fill(NOT[self.index], &self.slot(inner)?, ""),
            Node::Binary(op, l, r) => fill(
                templates(Some(*op))[self.index],
                &self.slot(l)?,
                &self.slot(r)?,
            ),
        })
    }

    /// An operand: binary subformulas are bracketed as a clause.
    fn slot(&self, f: &Formula) -> Result<String, VerbalizeError> {
        let text = self.render(f)?;
        Ok(match f.node() {
            Node::Binary(..) => format!(
                "(it is the case that {})",
                lower_first(text.trim_end_matches('.'))
            ),
            _ => text,
        })
    }
}

/// Renders `f` with template `template_id` (1-based) applied to every
/// connective.
///
/// ```
/// use logaug_core::verbalize::verbalize_formula;
/// use logaug_core::{parse_formula, VarTable};
///
/// let mut vt = VarTable::new();
/// vt.map_phrase("rain");
/// vt.map_phrase_with_display("ground get wet", "ground wet");
/// let f = parse_formula("a -> b").unwrap();
/// assert_eq!(verbalize_formula(&f, &vt, 1).unwrap(), "If rain, then ground wet.");
/// ```
pub fn verbalize_formula(
    f: &Formula,
    vt: &VarTable,
    template_id: u8,
) -> Result<String, VerbalizeError> {
    if !(1..=TEMPLATE_COUNT).contains(&template_id) {
        return Err(VerbalizeError::TemplateId(template_id));
    }
    Renderer {
        vt,
        index: (template_id - 1) as usize,
    }
    .render(f)
}

/// Template ids for the two sides of a pair, drawn from a generator seeded
/// by `rng_seed` and the pair id.
pub fn pick_templates(rng_seed: u64, pair_id: &str) -> [u8; 2] {
    let stream = u64::from_str_radix(pair_id.get(..16).unwrap_or("0"), 16).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    [
        rng.gen_range(1..=TEMPLATE_COUNT),
        rng.gen_range(1..=TEMPLATE_COUNT),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Template,
    Llm,
}

/// A sample pair together with its text rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbalizedPair {
    pub pair: SamplePair,
    pub text_a: String,
    pub text_b: String,
    pub mode: Mode,
    /// Templates used for `text_a` and `text_b`; empty in LLM mode.
    pub template_ids: Vec<u8>,
}

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: String,
    pub seed_id: usize,
    pub relation: String,
    pub label: u8,
    pub formula_a: String,
    pub formula_b: String,
    pub text_a: String,
    pub text_b: String,
    pub template_ids: Vec<u8>,
    pub derivation_text: String,
    pub mode: Mode,
}

impl VerbalizedPair {
    pub fn record(&self) -> PairRecord {
        PairRecord {
            id: self.pair.id.clone(),
            seed_id: self.pair.seed_id,
            relation: self.pair.relation.to_string(),
            label: self.pair.label,
            formula_a: self.pair.formula_a.canonical(),
            formula_b: self.pair.formula_b.canonical(),
            text_a: self.text_a.clone(),
            text_b: self.text_b.clone(),
            template_ids: self.template_ids.clone(),
            derivation_text: format_path(&self.pair.derivation),
            mode: self.mode,
        }
    }
}

/// Template-mode rendering of a pair.
pub fn verbalize_pair(
    pair: &SamplePair,
    vt: &VarTable,
    rng_seed: u64,
) -> Result<VerbalizedPair, VerbalizeError> {
    let ids = pick_templates(rng_seed, &pair.id);
    Ok(VerbalizedPair {
        text_a: verbalize_formula(&pair.formula_a, vt, ids[0])?,
        text_b: verbalize_formula(&pair.formula_b, vt, ids[1])?,
        pair: pair.clone(),
        mode: Mode::Template,
        template_ids: ids.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn table() -> VarTable {
        let mut vt = VarTable::new();
        vt.map_phrase("rain");
        vt.map_phrase_with_display("ground get wet", "ground wet");
        vt.map_phrase("wind blow");
        vt
    }

    fn say(s: &str, id: u8) -> String {
        verbalize_formula(&parse_formula(s).unwrap(), &table(), id).unwrap()
    }

    #[test]
    fn base_cases() {
        assert_eq!(say("a -> b", 1), "If rain, then ground wet.");
        assert_eq!(say("a", 1), "rain");
        assert_eq!(say("~a", 1), "it is not the case that rain");
        assert_eq!(say("T", 3), "a tautology holds");
    }

    #[test]
    fn nesting_bridges_compound_operands() {
        assert_eq!(
            say("(a -> b) & a", 1),
            "(it is the case that if rain, then ground wet) and rain."
        );
        assert_eq!(
            say("~(a | c)", 1),
            "it is not the case that (it is the case that rain or wind blow)"
        );
        assert_eq!(
            say("~a -> b", 2),
            "it is false that rain implies ground wet."
        );
    }

    #[test]
    fn seven_distinct_templates_each() {
        for op in ["a & b", "a | b", "a -> b", "a <-> b", "~a"] {
            let outs: std::collections::BTreeSet<String> = (1..=7).map(|i| say(op, i)).collect();
            assert_eq!(outs.len(), 7, "{op}");
        }
        for t in [&AND, &OR, &IMPLIES, &IFF] {
            assert!(t.iter().all(|s| s.contains("{A}") && s.contains("{B}")));
        }
        assert!(NOT.iter().all(|s| s.contains("{A}") && !s.contains("{B}")));
    }

    #[test]
    fn errors() {
        let f = parse_formula("a & z").unwrap();
        assert_eq!(
            verbalize_formula(&f, &table(), 1),
            Err(VerbalizeError::UnboundAtom("z".into()))
        );
        assert_eq!(
            verbalize_formula(&f, &table(), 0),
            Err(VerbalizeError::TemplateId(0))
        );
        assert_eq!(
            verbalize_formula(&f, &table(), 8),
            Err(VerbalizeError::TemplateId(8))
        );
    }

    #[test]
    fn template_choice_is_seeded() {
        let id = "0123456789abcdef0123456789abcdef";
        assert_eq!(pick_templates(42, id), pick_templates(42, id));
        let spread: std::collections::BTreeSet<[u8; 2]> =
            (0..50).map(|s| pick_templates(s, id)).collect();
        assert!(spread.len() > 10);
        assert!(spread.iter().flatten().all(|t| (1..=7).contains(t)));
    }
}
