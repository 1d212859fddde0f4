//! Trigger-based formalization of simple sentences.
//!
//! A sentence is matched against an ordered list of surface patterns ("if A,
//! B", "A unless B", "either A or B", …). The first pattern that matches
//! splits it into clause slots; each slot may carry a negation and is
//! otherwise a single proposition. Clauses are purified into phrase keys and
//! mapped to variables through a shared [`VarTable`], so the same phrase
//! always becomes the same atom.

use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::vars::{VarId, VarTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NlError {
    #[error("nothing left of {text:?} after removing function words")]
    EmptyPhrase { text: String },
}

/// Function words removed from either end of a clause.
const STOPWORDS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "it", "there", "then", "is", "are", "was",
    "were", "be", "been", "being", "am", "do", "does", "did", "will", "would", "shall", "should",
    "can", "could", "may", "might", "must", "has", "have", "had", "to",
];

/// Auxiliaries dropped from the display form of a phrase.
const DISPLAY_AUX: &[&str] = &["be", "get", "become", "do"];

const IRREGULAR: &[(&str, &str)] = &[
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("am", "be"),
    ("been", "be"),
    ("has", "have"),
    ("had", "have"),
    ("does", "do"),
    ("did", "do"),
    ("goes", "go"),
    ("went", "go"),
    ("got", "get"),
    ("gotten", "get"),
    ("made", "make"),
    ("came", "come"),
    ("became", "become"),
    ("ran", "run"),
    ("fell", "fall"),
    ("fallen", "fall"),
    ("froze", "freeze"),
    ("frozen", "freeze"),
    ("broke", "break"),
    ("broken", "break"),
    ("won", "win"),
    ("lost", "lose"),
    ("left", "leave"),
    ("children", "child"),
    ("people", "person"),
    ("men", "man"),
    ("women", "woman"),
    ("mice", "mouse"),
    ("feet", "foot"),
    ("teeth", "tooth"),
];

/// A purified clause: `key` identifies the proposition, `display` is the
/// human-facing form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Phrase {
    pub key: String,
    pub display: String,
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(is_vowel)
}

/// Repairs a stem left by removing `-ed` or `-ing`.
fn restore_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3
        && b[n - 1] == b[n - 2]
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'l' | b's' | b'z')
    {
        // stopped -> stop
        return stem[..n - 1].to_string();
    }
    let e_endings = ["v", "c", "rg", "dg", "as", "os", "az", "iz", "ak"];
    if e_endings.iter().any(|e| stem.ends_with(e)) && !stem.ends_with("ing") {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// Reduces an inflected word to a base form with a fixed suffix table.
pub fn lemmatize(word: &str) -> String {
    if let Some((_, base)) = IRREGULAR.iter().find(|(w, _)| *w == word) {
        return (*base).to_string();
    }
    let n = word.len();
    if n > 4 && word.ends_with("ies") {
        return format!("{}y", &word[..n - 3]);
    }
    if n > 4 && word.ends_with("ied") {
        return format!("{}y", &word[..n - 3]);
    }
    if n > 4 && word.ends_with("sses") {
        return word[..n - 2].to_string();
    }
    if n > 4
        && ["ches", "shes", "xes", "zes", "oes"]
            .iter()
            .any(|s| word.ends_with(s))
    {
        return word[..n - 2].to_string();
    }
    if n > 4 && word.ends_with("ing") && has_vowel(&word[..n - 3]) {
        return restore_stem(&word[..n - 3]);
    }
    if n > 3 && word.ends_with("ed") && !word.ends_with("eed") && has_vowel(&word[..n - 2]) {
        return restore_stem(&word[..n - 2]);
    }
    if n > 3 && word.ends_with('s') && !["ss", "us", "is", "ous"].iter().any(|s| word.ends_with(s))
    {
        return word[..n - 1].to_string();
    }
    word.to_string()
}

/// Lowercases, trims function words from both ends, collapses whitespace
/// and lemmatizes what remains.
///
/// ```
/// use logaug_core::nl::purify_phrase;
///
/// let p = purify_phrase("the ground gets wet").unwrap();
/// assert_eq!(p.key, "ground get wet");
/// assert_eq!(p.display, "ground wet");
/// assert_eq!(purify_phrase("it rains").unwrap().key, "rain");
/// ```
pub fn purify_phrase(text: &str) -> Result<Phrase, NlError> {
    let lowered = text.to_lowercase();
    let words: Vec<&str> = lowered
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|w| !w.is_empty())
        .collect();
    let is_stop = |w: &&str| STOPWORDS.contains(w);
    let first = words.iter().position(|w| !is_stop(w));
    let last = words.iter().rposition(|w| !is_stop(w));
    let (Some(first), Some(last)) = (first, last) else {
        return Err(NlError::EmptyPhrase {
            text: text.to_string(),
        });
    };
    let lemmas: Vec<String> = words[first..=last].iter().map(|w| lemmatize(w)).collect();
    let key = lemmas.join(" ");
    let shown: Vec<&str> = lemmas
        .iter()
        .map(String::as_str)
        .filter(|w| !DISPLAY_AUX.contains(w))
        .collect();
    let display = if shown.is_empty() {
        key.clone()
    } else {
        shown.join(" ")
    };
    Ok(Phrase { key, display })
}

/// Surface shape produced by a trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Skeleton {
    Iff,
    Implies,
    /// `A unless B`: ¬B → A
    Unless,
    Or,
    And,
}

struct Trigger {
    name: &'static str,
    pattern: Regex,
    skeleton: Skeleton,
}

fn trigger(name: &'static str, pattern: &str, skeleton: Skeleton) -> Trigger {
    Trigger {
        name,
        pattern: Regex::new(pattern).expect("trigger pattern compiles"),
        skeleton,
    }
}

/// Binary triggers in priority order. Slot `a` is the antecedent or left
/// operand, `b` the consequent or right operand.
static TRIGGERS: LazyLock<Vec<Trigger>> = LazyLock::new(|| {
    vec![
        trigger(
            "iff",
            r"^(?P<a>.+?),?\s+if and only if\s+(?P<b>.+)$",
            Skeleton::Iff,
        ),
        trigger(
            "if-then",
            r"^if\s+(?P<a>.+?),?\s+then\s+(?P<b>.+)$",
            Skeleton::Implies,
        ),
        trigger(
            "if-comma",
            r"^if\s+(?P<a>.+?),\s*(?P<b>.+)$",
            Skeleton::Implies,
        ),
        trigger(
            "unless-prefix",
            r"^unless\s+(?P<b>.+?),\s*(?P<a>.+)$",
            Skeleton::Unless,
        ),
        trigger(
            "unless",
            r"^(?P<a>.+?),?\s+unless\s+(?P<b>.+)$",
            Skeleton::Unless,
        ),
        trigger(
            "postfix-if",
            r"^(?P<b>.+?),?\s+if\s+(?P<a>.+)$",
            Skeleton::Implies,
        ),
        trigger(
            "either-or",
            r"^either\s+(?P<a>.+?),?\s+or\s+(?P<b>.+)$",
            Skeleton::Or,
        ),
        trigger("or", r"^(?P<a>.+?),?\s+or\s+(?P<b>.+)$", Skeleton::Or),
        trigger("and", r"^(?P<a>.+?),?\s+and\s+(?P<b>.+)$", Skeleton::And),
    ]
});

static NOT_PREFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:it is not the case that|it is false that|not)\s+(?P<a>.+)$").unwrap()
});

/// `A <aux> not B` and contracted forms. Do-support disappears in the
/// positive clause ("does not ring" / "rings"); other auxiliaries stay.
static INNER_NOT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^(?P<a>.+?)\s+(?:(?P<aux>is|are|was|were|will|can|could|would|should|has|have|had|do|does|did)\s+not|(?P<con>isn't|aren't|wasn't|weren't|won't|can't|cannot|couldn't|wouldn't|shouldn't|hasn't|haven't|hadn't|doesn't|don't|didn't))\s+(?P<b>.+)$",
    )
    .unwrap()
});

fn positive_aux(aux: &str) -> Option<&'static str> {
    Some(match aux {
        "is" | "isn't" => "is",
        "are" | "aren't" => "are",
        "was" | "wasn't" => "was",
        "were" | "weren't" => "were",
        "will" | "won't" => "will",
        "can" | "can't" | "cannot" => "can",
        "could" | "couldn't" => "could",
        "would" | "wouldn't" => "would",
        "should" | "shouldn't" => "should",
        "has" | "hasn't" => "has",
        "have" | "haven't" => "have",
        "had" | "hadn't" => "had",
        _ => return None,
    })
}

/// Byte range of one clause in the source sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    pub formula: Formula,
    /// Source clause of each variable, first occurrence.
    pub spans: BTreeMap<VarId, Span>,
    /// Name of the trigger that matched, if any.
    pub trigger: Option<&'static str>,
}

fn trim_range(src: &str, r: Range<usize>) -> Range<usize> {
    let is_junk = |c: char| c.is_whitespace() || matches!(c, ',' | '.' | ';' | '!' | '?' | ':');
    let s = &src[r.clone()];
    let start = r.start + (s.len() - s.trim_start_matches(is_junk).len());
    let end = r.end - (s.len() - s.trim_end_matches(is_junk).len());
    start..end.max(start)
}

struct Formalizer<'a> {
    /// ASCII-lowercased copy; byte offsets match the original.
    lower: String,
    original: &'a str,
    vt: &'a mut VarTable,
    spans: BTreeMap<VarId, Span>,
}

impl Formalizer<'_> {
    fn atom(&mut self, text: &str, span: Range<usize>) -> Result<Formula, NlError> {
        let phrase = purify_phrase(text)?;
        let id = self
            .vt
            .map_phrase_with_display(&phrase.key, &phrase.display);
        self.spans.entry(id).or_insert_with(|| Span {
            start: span.start,
            end: span.end,
            text: self.original[span].to_string(),
        });
        Ok(id.atom())
    }

    /// A single clause: an atom, possibly negated.
    fn clause(&mut self, r: Range<usize>) -> Result<Formula, NlError> {
        let r = trim_range(&self.lower, r);
        let text = self.lower[r.clone()].to_string();
        if let Some(c) = NOT_PREFIX.captures(&text) {
            let a = c.name("a").unwrap();
            let inner = self.clause(r.start + a.start()..r.start + a.end())?;
            return Ok(Formula::not(inner));
        }
        if let Some(c) = INNER_NOT.captures(&text) {
            let aux = c.name("aux").or_else(|| c.name("con")).unwrap().as_str();
            let a = &c["a"];
            let b = &c["b"];
            let positive = match positive_aux(aux) {
                Some(kept) => format!("{a} {kept} {b}"),
                None => format!("{a} {b}"),
            };
            return Ok(Formula::not(self.atom(&positive, r)?));
        }
        self.atom(&text, r)
    }

    fn sentence(&mut self, r: Range<usize>) -> Result<(Formula, Option<&'static str>), NlError> {
        let r = trim_range(&self.lower, r);
        let text = self.lower[r.clone()].to_string();
        for t in TRIGGERS.iter() {
            let Some(c) = t.pattern.captures(&text) else {
                continue;
            };
            let (a, b) = (c.name("a").unwrap(), c.name("b").unwrap());
            let (ra, rb) = (
                r.start + a.start()..r.start + a.end(),
                r.start + b.start()..r.start + b.end(),
            );
            // allocate variables in source order
            let (fa, fb) = if ra.start <= rb.start {
                let fa = self.clause(ra)?;
                (fa, self.clause(rb)?)
            } else {
                let fb = self.clause(rb)?;
                (self.clause(ra)?, fb)
            };
            let f = match t.skeleton {
                Skeleton::Iff => Formula::iff(fa, fb),
                Skeleton::Implies => Formula::implies(fa, fb),
                Skeleton::Unless => Formula::implies(Formula::not(fb), fa),
                Skeleton::Or => Formula::or(fa, fb),
                Skeleton::And => Formula::and(fa, fb),
            };
            return Ok((f, Some(t.name)));
        }
        Ok((self.clause(r)?, None))
    }
}

/// Formalizes one simple sentence, allocating variables in `vt`.
///
/// ```
/// use logaug_core::nl::formalize;
/// use logaug_core::VarTable;
///
/// let mut vt = VarTable::new();
/// let out = formalize("if it rains, the ground gets wet", &mut vt).unwrap();
/// assert_eq!(out.formula.to_string(), "a -> b");
/// assert_eq!(vt.phrase_for_atom("b"), Some("ground wet"));
/// ```
pub fn formalize(sentence: &str, vt: &mut VarTable) -> Result<ParseOutcome, NlError> {
    let mut fz = Formalizer {
        lower: sentence.to_ascii_lowercase(),
        original: sentence,
        vt,
        spans: BTreeMap::new(),
    };
    let (formula, trigger) = fz.sentence(0..sentence.len())?;
    Ok(ParseOutcome {
        formula,
        spans: fz.spans,
        trigger,
    })
}

static SENTENCE_BREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[.;!?](?:\s+|$)").unwrap());

/// Formalizes a statement of one or more sentences separated by `.`, `;`,
/// `!` or `?`. Several sentences become a left-nested conjunction.
pub fn formalize_statement(text: &str, vt: &mut VarTable) -> Result<ParseOutcome, NlError> {
    let mut pieces = Vec::new();
    let mut begin = 0;
    for m in SENTENCE_BREAK.find_iter(text) {
        pieces.push(begin..m.start());
        begin = m.end();
    }
    pieces.push(begin..text.len());
    pieces.retain(|r| !text[r.clone()].trim().is_empty());
    if pieces.len() <= 1 {
        return formalize(text, vt);
    }
    let mut spans = BTreeMap::new();
    let mut formula: Option<Formula> = None;
    for r in pieces {
        let out = formalize(&text[r.clone()], vt)?;
        for (id, s) in out.spans {
            spans.entry(id).or_insert(Span {
                start: s.start + r.start,
                end: s.end + r.start,
                text: s.text,
            });
        }
        formula = Some(match formula {
            None => out.formula,
            Some(acc) => Formula::and(acc, out.formula),
        });
    }
    Ok(ParseOutcome {
        formula: formula.expect("at least two sentences"),
        spans,
        trigger: None,
    })
}

/// One statement of a seed file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedStatement {
    pub line: usize,
    pub text: String,
}

/// Non-blank lines that are not `#` comments.
pub fn parse_seed_file(text: &str) -> Vec<SeedStatement> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('#')).then(|| SeedStatement {
                line: i + 1,
                text: t.to_string(),
            })
        })
        .collect()
}

/// The bundled seed statements, one classic argument form each.
pub const BUILTIN_SEEDS: &str = include_str!("seeds.txt");

#[cfg(test)]
mod tests {
    use super::*;

    fn key(s: &str) -> String {
        purify_phrase(s).unwrap().key
    }

    #[test]
    fn purification_examples() {
        assert_eq!(key("it rains"), "rain");
        let p = purify_phrase("the ground gets wet").unwrap();
        assert_eq!(
            (p.key.as_str(), p.display.as_str()),
            ("ground get wet", "ground wet")
        );
        assert_eq!(key("  The   WIND blows "), "wind blow");
        assert_eq!(key("it is raining."), "rain");
        assert_eq!(
            purify_phrase("it is the"),
            Err(NlError::EmptyPhrase {
                text: "it is the".into()
            })
        );
        assert!(purify_phrase("   ").is_err());
    }

    #[test]
    fn lemmas() {
        for (w, l) in [
            ("rains", "rain"),
            ("gets", "get"),
            ("flies", "fly"),
            ("watches", "watch"),
            ("passes", "pass"),
            ("stopped", "stop"),
            ("charged", "charge"),
            ("closing", "close"),
            ("raining", "rain"),
            ("watered", "water"),
            ("was", "be"),
            ("bus", "bus"),
            ("glass", "glass"),
            ("need", "need"),
            ("thing", "thing"),
            ("wet", "wet"),
        ] {
            assert_eq!(lemmatize(w), l, "{w}");
        }
    }

    fn run(sentences: &[&str]) -> (Vec<String>, VarTable) {
        let mut vt = VarTable::new();
        let out = sentences
            .iter()
            .map(|s| formalize(s, &mut vt).unwrap().formula.to_string())
            .collect();
        (out, vt)
    }

    #[test]
    fn formalize_examples() {
        let (out, vt) = run(&[
            "if it rains, the ground gets wet",
            "it rains and the wind blows",
            "the ground gets wet",
        ]);
        assert_eq!(out, ["a -> b", "a & c", "b"]);
        assert_eq!(vt.len(), 3);
        assert_eq!(vt.phrase_for_atom("a"), Some("rain"));
        assert_eq!(vt.phrase_for_atom("c"), Some("wind blow"));
    }

    #[test]
    fn trigger_order() {
        let (out, _) = run(&[
            "the door opens if and only if the key turns",
            "if the key turns then the door opens",
            "the plant dies unless the soil is watered",
            "unless the soil is watered, the plant dies",
            "the match is cancelled if it snows",
            "either it snows or the wind blows",
            "it snows or the plant dies",
            "not the key turns",
            "the key does not turn",
            "the soil isn't watered",
        ]);
        assert_eq!(
            out,
            [
                "a <-> b", "b -> a", "~d -> c", "~d -> c", "f -> e", "f | g", "f | c", "~b", "~b",
                "~d"
            ]
        );
    }

    #[test]
    fn spans_point_into_source() {
        let mut vt = VarTable::new();
        let s = "If it Rains, the ground gets wet.";
        let out = formalize(s, &mut vt).unwrap();
        assert_eq!(out.trigger, Some("if-comma"));
        let a = &out.spans[&VarId(0)];
        assert_eq!(a.text, "it Rains");
        assert_eq!(&s[a.start..a.end], "it Rains");
        assert_eq!(out.spans[&VarId(1)].text, "the ground gets wet");
    }

    #[test]
    fn statements_conjoin() {
        let mut vt = VarTable::new();
        let out =
            formalize_statement("if it rains, the ground gets wet. it rains.", &mut vt).unwrap();
        assert_eq!(out.formula.to_string(), "(a -> b) & a");
        assert_eq!(out.spans.len(), 2);
        let out = formalize_statement("rain; snow; wind", &mut VarTable::new()).unwrap();
        assert_eq!(out.formula.canonical(), "((a & b) & c)");
    }

    #[test]
    fn builtin_seeds_formalize() {
        let seeds = parse_seed_file(BUILTIN_SEEDS);
        assert_eq!(seeds.len(), 9);
        let mut vt = VarTable::new();
        let forms: Vec<String> = seeds
            .iter()
            .map(|s| {
                formalize_statement(&s.text, &mut vt)
                    .unwrap()
                    .formula
                    .to_string()
            })
            .collect();
        assert_eq!(
            forms,
            [
                "(a -> b) & a",
                "(c -> d) & ~d",
                "(e -> f) & (f -> g)",
                "(h | i) & ~h",
                "(j -> k) & (k -> l) & j",
                "(~n -> m) & ~n",
                "(o <-> p) & p",
                "(r -> q) & ~q",
                "(s | r) & ~s",
            ]
        );
    }

    #[test]
    fn seed_file_comments() {
        let seeds = parse_seed_file("# header\n\n  it rains \n#x\nit snows");
        assert_eq!(
            seeds,
            [
                SeedStatement {
                    line: 3,
                    text: "it rains".into()
                },
                SeedStatement {
                    line: 5,
                    text: "it snows".into()
                }
            ]
        );
    }
}
