//! Seed statements to verbalized, split pair datasets.

use std::collections::{BTreeSet, HashSet};
use std::thread;

use serde::Serialize;
use thiserror::Error;

use crate::explore::{explore, SearchConfig, SearchStats};
use crate::formula::Formula;
use crate::nl::{formalize_statement, NlError};
use crate::oracle::entails;
use crate::pairs::{
    build_pairs, split_dataset, DropStats, Ratio, SamplePair, SplitError, SplitSpec, Splits,
};
use crate::parser::parse_formula;
use crate::rules::RuleBase;
use crate::vars::VarTable;
use crate::verbalize::{
    emit_prompt, llm_instantiate_all, verbalize_pair, LlmConfig, LlmError, Mode, PairRecord,
    VerbalizeError, VerbalizedPair,
};

/// Exploration depth used for pair generation.
pub const DEFAULT_PAIR_DEPTH: usize = 3;
pub const DEFAULT_SPLIT_COUNTS: [usize; 3] = [8000, 3000, 3000];
pub const DEFAULT_RNG_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub d_max: usize,
    pub disabled_rules: BTreeSet<String>,
    pub ratio: Ratio,
    pub split: SplitSpec,
    /// With [`SplitSpec::Counts`], split proportionally when there are too
    /// few pairs for the exact sizes.
    pub proportional_fallback: bool,
    pub rng_seed: u64,
    pub mode: Mode,
    pub llm: Option<LlmConfig>,
    /// In LLM mode, render failed pairs with templates instead of failing.
    pub fallback_template: bool,
    /// Cap on recorded states per seed.
    pub max_states: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            d_max: DEFAULT_PAIR_DEPTH,
            disabled_rules: BTreeSet::new(),
            ratio: Ratio::default(),
            split: SplitSpec::Counts(DEFAULT_SPLIT_COUNTS),
            proportional_fallback: true,
            rng_seed: DEFAULT_RNG_SEED,
            mode: Mode::Template,
            llm: None,
            fallback_template: false,
            max_states: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("seed {seed_id} ({text:?}): {source}")]
    Seed {
        seed_id: usize,
        text: String,
        source: NlError,
    },
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Verbalize(#[from] VerbalizeError),
    #[error("pair {id}: {source}")]
    Llm { id: String, source: LlmError },
    #[error("LLM mode needs an endpoint configuration")]
    NoLlmConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedReport {
    pub seed_id: usize,
    pub text: String,
    pub formula: String,
    pub s1: usize,
    pub s2: usize,
    pub positives: usize,
    pub negatives: usize,
    pub stats: SearchStats,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub var_table: VarTable,
    pub seeds: Vec<SeedReport>,
    pub drops: DropStats,
    /// Pairs after balancing, before splitting.
    pub total_pairs: usize,
    /// The split actually applied.
    pub split: SplitSpec,
    pub train: Vec<VerbalizedPair>,
    pub dev: Vec<VerbalizedPair>,
    pub test: Vec<VerbalizedPair>,
    /// Pairs rendered by templates after an LLM failure.
    pub llm_fallbacks: usize,
}

impl PipelineOutput {
    pub fn parts(&self) -> [(&'static str, &[VerbalizedPair]); 3] {
        [
            ("train", &self.train),
            ("dev", &self.dev),
            ("test", &self.test),
        ]
    }
}

/// Formalizes every statement with one shared variable table, then
/// explores the seeds concurrently and merges their pairs in seed order.
pub fn run_pipeline(
    statements: &[String],
    rb: &RuleBase,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    let mut vt = VarTable::new();
    let mut starts = Vec::new();
    for (seed_id, text) in statements.iter().enumerate() {
        let out = formalize_statement(text, &mut vt).map_err(|source| PipelineError::Seed {
            seed_id,
            text: text.clone(),
            source,
        })?;
        starts.push(out.formula);
    }

    let search = SearchConfig {
        d_max: cfg.d_max,
        disabled_rules: cfg.disabled_rules.clone(),
        max_results: cfg.max_states,
        ..SearchConfig::default()
    };
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(starts.len().max(1));
    let per_seed: Vec<(SeedReport, Vec<SamplePair>, DropStats)> = thread::scope(|s| {
        let chunks: Vec<Vec<usize>> = (0..workers)
            .map(|w| (w..starts.len()).step_by(workers).collect())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|ids| {
                let (starts, search) = (&starts, &search);
                s.spawn(move || {
                    ids.into_iter()
                        .map(|i| {
                            let res = explore(&starts[i], rb, search);
                            let set = build_pairs(&res, &starts[i], i, cfg.rng_seed, cfg.ratio);
                            let report = SeedReport {
                                seed_id: i,
                                text: statements[i].clone(),
                                formula: starts[i].pretty(),
                                s1: res.s1.len(),
                                s2: res.s2.len(),
                                positives: set.positives(),
                                negatives: set.negatives(),
                                stats: res.stats,
                            };
                            (i, report, set.pairs, set.drops)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let mut all: Vec<_> = handles
            .into_iter()
            .flat_map(|h| h.join().expect("seed worker panicked"))
            .collect();
        all.sort_by_key(|x| x.0);
        all.into_iter().map(|(_, r, p, d)| (r, p, d)).collect()
    });

    let mut seeds = Vec::new();
    let mut drops = DropStats::default();
    let mut pairs = Vec::new();
    let mut ids = HashSet::new();
    for (report, seed_pairs, seed_drops) in per_seed {
        seeds.push(report);
        drops.absorb(&seed_drops);
        for p in seed_pairs {
            if ids.insert(p.id.clone()) {
                pairs.push(p);
            } else {
                drops.duplicates += 1;
            }
        }
    }
    let total_pairs = pairs.len();

    let split = match cfg.split {
        SplitSpec::Counts(c)
            if cfg.proportional_fallback && c.iter().sum::<usize>() > total_pairs =>
        {
            let sum = c.iter().sum::<usize>() as f64;
            SplitSpec::Fractions([c[0] as f64 / sum, c[1] as f64 / sum, c[2] as f64 / sum])
        }
        other => other,
    };
    let Splits { train, dev, test } = split_dataset(pairs, split, cfg.rng_seed)?;

    let mut llm_fallbacks = 0;
    let mut render = |part: Vec<SamplePair>| -> Result<Vec<VerbalizedPair>, PipelineError> {
        match cfg.mode {
            Mode::Template => part
                .iter()
                .map(|p| verbalize_pair(p, &vt, cfg.rng_seed).map_err(PipelineError::from))
                .collect(),
            Mode::Llm => {
                let llm = cfg.llm.as_ref().ok_or(PipelineError::NoLlmConfig)?;
                let specs = part
                    .iter()
                    .map(|p| emit_prompt(p, &vt))
                    .collect::<Result<Vec<_>, _>>()?;
                let answers = llm_instantiate_all(&specs, llm);
                part.iter()
                    .zip(answers)
                    .map(|(p, answer)| match answer {
                        Ok(t) => Ok(VerbalizedPair {
                            pair: p.clone(),
                            text_a: t.text_a,
                            text_b: t.text_b,
                            mode: Mode::Llm,
                            template_ids: Vec::new(),
                        }),
                        Err(_) if cfg.fallback_template => {
                            llm_fallbacks += 1;
                            Ok(verbalize_pair(p, &vt, cfg.rng_seed)?)
                        }
                        Err(source) => Err(PipelineError::Llm {
                            id: p.id.clone(),
                            source,
                        }),
                    })
                    .collect()
            }
        }
    };
    let (train, dev, test) = (render(train)?, render(dev)?, render(test)?);
    Ok(PipelineOutput {
        var_table: vt,
        seeds,
        drops,
        total_pairs,
        split,
        train,
        dev,
        test,
        llm_fallbacks,
    })
}

/// One JSON object per line.
pub fn to_jsonl(pairs: &[VerbalizedPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&serde_json::to_string(&p.record()).expect("record serializes"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub checked: usize,
    pub positives: usize,
    pub negatives: usize,
    /// Ids whose label disagrees with the oracle, or whose formulas do not
    /// parse or cannot be decided.
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks every record's label with the oracle.
pub fn audit_records<'a>(records: impl IntoIterator<Item = &'a PairRecord>) -> AuditReport {
    let mut report = AuditReport::default();
    for r in records {
        report.checked += 1;
        if r.label == 1 {
            report.positives += 1;
        } else {
            report.negatives += 1;
        }
        let verdict = (|| -> Option<bool> {
            let a: Formula = parse_formula(&r.formula_a).ok()?;
            let b: Formula = parse_formula(&r.formula_b).ok()?;
            entails(&a, &b).ok()
        })();
        if verdict != Some(r.label == 1) {
            report.violations.push(r.id.clone());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::builtin_rules;

    fn small() -> PipelineConfig {
        PipelineConfig {
            d_max: 2,
            split: SplitSpec::Fractions([0.6, 0.2, 0.2]),
            ..PipelineConfig::default()
        }
    }

    fn seeds() -> Vec<String> {
        vec![
            "if it rains, the ground gets wet. it rains.".into(),
            "either the light is on or the room is dark. the light is not on.".into(),
        ]
    }

    #[test]
    fn small_run_is_balanced_and_sound() {
        let out = run_pipeline(&seeds(), &builtin_rules(), &small()).unwrap();
        assert_eq!(out.seeds.len(), 2);
        let mut n = 0;
        for (name, part) in out.parts() {
            let pos = part.iter().filter(|p| p.pair.label == 1).count();
            assert!(part.len().abs_diff(2 * pos) <= 2, "{name}");
            n += part.len();
            let records: Vec<PairRecord> = part.iter().map(VerbalizedPair::record).collect();
            assert!(audit_records(&records).ok());
        }
        assert_eq!(n, out.total_pairs);
        assert_eq!(out.var_table.len(), 4);
    }

    #[test]
    fn deterministic_jsonl() {
        let a = run_pipeline(&seeds(), &builtin_rules(), &small()).unwrap();
        let b = run_pipeline(&seeds(), &builtin_rules(), &small()).unwrap();
        for ((_, x), (_, y)) in a.parts().into_iter().zip(b.parts()) {
            assert_eq!(to_jsonl(x), to_jsonl(y));
        }
    }

    #[test]
    fn counts_fall_back_to_proportions() {
        let cfg = PipelineConfig {
            d_max: 1,
            ..PipelineConfig::default()
        };
        let out = run_pipeline(&seeds()[..1], &builtin_rules(), &cfg).unwrap();
        assert!(matches!(out.split, SplitSpec::Fractions(_)));
        let strict = PipelineConfig {
            proportional_fallback: false,
            ..cfg
        };
        assert!(matches!(
            run_pipeline(&seeds()[..1], &builtin_rules(), &strict),
            Err(PipelineError::Split(SplitError::Insufficient { .. }))
        ));
    }

    #[test]
    fn audit_flags_wrong_labels() {
        let out = run_pipeline(&seeds()[..1], &builtin_rules(), &small()).unwrap();
        let mut records: Vec<PairRecord> = out.train.iter().map(VerbalizedPair::record).collect();
        records[0].label ^= 1;
        let report = audit_records(&records);
        assert_eq!(report.violations, [records[0].id.clone()]);
    }

    #[test]
    fn bad_seed_reports_its_index() {
        let err = run_pipeline(
            &["it rains".into(), "the".into()],
            &builtin_rules(),
            &small(),
        )
        .unwrap_err();
        assert!(matches!(err, PipelineError::Seed { seed_id: 1, .. }));
    }
}
