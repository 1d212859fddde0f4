//! Prompts asking a language model to phrase a formula pair.

use std::collections::BTreeMap;

use serde::Serialize;

use super::VerbalizeError;
use crate::pairs::SamplePair;
use crate::vars::VarTable;

pub const SYSTEM_PROMPT: &str = "You turn propositional formulas into fluent English sentences. \
Each atom stands for the phrase given in the glossary; use those phrases and invent no new facts. \
Keep the logical structure of each formula exactly: connectives, negations and grouping must survive. \
Phrase the two formulas independently; the stated relation only describes how they are connected. \
Answer with a single JSON object {\"text_a\": string, \"text_b\": string} and nothing else.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptSpec {
    pub system: String,
    /// JSON payload sent as the user message.
    pub user: String,
    /// Atom name to phrase, for every atom of either formula.
    pub glossary: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Payload<'a> {
    formula_a: String,
    formula_b: String,
    relation: &'a str,
    label: u8,
    meaning: &'static str,
    glossary: &'a BTreeMap<String, String>,
    output_schema: BTreeMap<&'static str, &'static str>,
}

/// Builds the prompt for `pair`. Formulas appear in pretty syntax (`~`, `&`,
/// `|`, `->`, `<->`); the payload serializes deterministically.
pub fn emit_prompt(pair: &SamplePair, vt: &VarTable) -> Result<PromptSpec, VerbalizeError> {
    let mut glossary = BTreeMap::new();
    for atom in pair
        .formula_a
        .atoms()
        .into_iter()
        .chain(pair.formula_b.atoms())
    {
        let phrase = vt
            .phrase_for_atom(&atom)
            .ok_or_else(|| VerbalizeError::UnboundAtom(atom.to_string()))?;
        glossary.insert(atom.to_string(), phrase.to_string());
    }
    let payload = Payload {
        formula_a: pair.formula_a.pretty(),
        formula_b: pair.formula_b.pretty(),
        relation: pair.relation.as_str(),
        label: pair.label,
        meaning: if pair.label == 1 {
            "formula_a logically entails formula_b"
        } else {
            "formula_a does not logically entail formula_b"
        },
        glossary: &glossary,
        output_schema: BTreeMap::from([("text_a", "string"), ("text_b", "string")]),
    };
    Ok(PromptSpec {
        system: SYSTEM_PROMPT.to_string(),
        user: serde_json::to_string(&payload).expect("payload serializes"),
        glossary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explore::DerivationPath;
    use crate::pairs::{pair_id, Relation};
    use crate::parser::parse_formula;

    fn pair(a: &str, b: &str) -> SamplePair {
        let (a, b) = (parse_formula(a).unwrap(), parse_formula(b).unwrap());
        SamplePair {
            id: pair_id(&a, &b, 1, Relation::Implication),
            seed_id: 0,
            derivation: DerivationPath::empty(a.clone()),
            formula_a: a,
            formula_b: b,
            label: 1,
            relation: Relation::Implication,
        }
    }

    fn table() -> VarTable {
        let mut vt = VarTable::new();
        vt.map_phrase("rain");
        vt.map_phrase_with_display("ground get wet", "ground wet");
        vt.map_phrase("wind blow");
        vt
    }

    #[test]
    fn modus_ponens_prompt() {
        let spec = emit_prompt(&pair("(a -> b) & a", "b"), &table()).unwrap();
        assert!(spec.user.contains("\"(a -> b) & a\""));
        assert!(spec.user.contains("\"formula_b\":\"b\""));
        assert_eq!(
            spec.glossary,
            BTreeMap::from([
                ("a".into(), "rain".into()),
                ("b".into(), "ground wet".into())
            ])
        );
        assert!(spec
            .user
            .contains("\"glossary\":{\"a\":\"rain\",\"b\":\"ground wet\"}"));
    }

    #[test]
    fn glossary_covers_both_sides() {
        let spec = emit_prompt(&pair("a & c", "b"), &table()).unwrap();
        assert_eq!(spec.glossary.len(), 3);
        assert_eq!(spec, emit_prompt(&pair("a & c", "b"), &table()).unwrap());
        assert_eq!(
            emit_prompt(&pair("a", "z"), &table()),
            Err(VerbalizeError::UnboundAtom("z".into()))
        );
    }
}
