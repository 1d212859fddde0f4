//! Labeled formula pairs built from an exploration result.
//!
//! Positives are pairs whose first formula entails the second; negatives are
//! pairs where it does not. Every candidate is checked against the oracle
//! before it is kept, so a label never contradicts truth-table semantics.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::explore::{DerivationPath, ExplorationResult};
use crate::formula::Formula;
use crate::oracle::entails;
use crate::rules::{Label, RuleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// Start and a state reached by equivalence steps only, both orders.
    Equivalence,
    /// Start and a state reached through an implication step, plus the
    /// swapped negative.
    Implication,
    /// Two states on one derivation path, plus the swapped negative when
    /// the segment between them is not reversible.
    Chain,
    /// Start and a state reached through an error rule.
    Corrupted,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Equivalence => "equivalence",
            Relation::Implication => "implication",
            Relation::Chain => "chain",
            Relation::Corrupted => "corrupted",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePair {
    pub id: String,
    pub seed_id: usize,
    pub formula_a: Formula,
    pub formula_b: Formula,
    pub label: Label,
    pub relation: Relation,
    /// Derivation connecting the two formulas, in derivation direction. For
    /// swapped negatives it runs from `formula_b` to `formula_a`.
    pub derivation: DerivationPath,
}

/// Content hash of a pair: hex SHA-256 over the canonical formulas, label
/// and relation, truncated to 32 hex digits.
pub fn pair_id(a: &Formula, b: &Formula, label: Label, relation: Relation) -> String {
    let mut h = Sha256::new();
    for part in [
        a.canonical().as_str(),
        b.canonical().as_str(),
        &label.to_string(),
        relation.as_str(),
    ] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..16])
}

/// Requested positive:negative proportion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub positive: u32,
    pub negative: u32,
}

impl Default for Ratio {
    fn default() -> Self {
        Ratio {
            positive: 1,
            negative: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ratio must look like `P:N` with positive integers, got {0:?}")]
pub struct RatioError(String);

impl FromStr for Ratio {
    type Err = RatioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RatioError(s.to_string());
        let (p, n) = s.split_once(':').ok_or_else(err)?;
        let positive: u32 = p.trim().parse().map_err(|_| err())?;
        let negative: u32 = n.trim().parse().map_err(|_| err())?;
        if positive == 0 || negative == 0 {
            return Err(err());
        }
        Ok(Ratio { positive, negative })
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.positive, self.negative)
    }
}

/// Why candidates were not emitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DropStats {
    /// Positive candidates the oracle did not confirm.
    pub rejected_positive: u64,
    /// Negative candidates that turned out to be entailed.
    pub rejected_negative: u64,
    /// Candidates the oracle could not decide (too many atoms).
    pub undecided: u64,
    /// Candidates repeating an earlier pair id.
    pub duplicates: u64,
    pub downsampled_positive: u64,
    pub downsampled_negative: u64,
}

impl DropStats {
    pub fn absorb(&mut self, other: &DropStats) {
        self.rejected_positive += other.rejected_positive;
        self.rejected_negative += other.rejected_negative;
        self.undecided += other.undecided;
        self.duplicates += other.duplicates;
        self.downsampled_positive += other.downsampled_positive;
        self.downsampled_negative += other.downsampled_negative;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSet {
    pub pairs: Vec<SamplePair>,
    pub drops: DropStats,
}

impl PairSet {
    pub fn positives(&self) -> usize {
        self.pairs.iter().filter(|p| p.label == 1).count()
    }

    pub fn negatives(&self) -> usize {
        self.pairs.len() - self.positives()
    }
}

/// Where a candidate's derivation comes from.
#[derive(Debug, Clone, Copy)]
enum Source {
    /// The recorded path of `s1[i]`.
    S1(usize),
    /// The tail of `s1[i]`'s path from state `k`.
    Segment(usize, usize),
    /// The recorded path of `s2[i]`.
    S2(usize),
}

struct Candidate {
    a: Formula,
    b: Formula,
    label: Label,
    relation: Relation,
    source: Source,
}

/// Oracle-confirmed candidates that have not been given ids or paths yet.
struct Candidates<'a> {
    res: &'a ExplorationResult,
    seed_id: usize,
    seen: HashSet<(Formula, Formula, Label, Relation)>,
    items: Vec<Candidate>,
    drops: DropStats,
}

impl<'a> Candidates<'a> {
    fn collect(res: &'a ExplorationResult, start: &Formula, seed_id: usize) -> Self {
        let mut c = Candidates {
            res,
            seed_id,
            seen: HashSet::new(),
            items: Vec::new(),
            drops: DropStats::default(),
        };
        for (i, r) in res.s1.iter().enumerate() {
            let g = &r.formula;
            let src = Source::S1(i);
            if r.path.is_equivalence_only() {
                c.offer(start, g, 1, Relation::Equivalence, src);
                c.offer(g, start, 1, Relation::Equivalence, src);
            } else {
                c.offer(start, g, 1, Relation::Implication, src);
                c.offer(g, start, 0, Relation::Implication, src);
            }
        }
        for (i, r) in res.s1.iter().enumerate() {
            let h = &r.formula;
            let steps = &r.path.steps;
            for k in 1..steps.len() {
                let g = &steps[k].before;
                c.offer(g, h, 1, Relation::Chain, Source::Segment(i, k));
                if steps[k..].iter().any(|s| s.kind == RuleKind::Implication) {
                    c.offer(h, g, 0, Relation::Chain, Source::Segment(i, k));
                }
            }
        }
        for (i, r) in res.s2.iter().enumerate() {
            c.offer(start, &r.formula, 0, Relation::Corrupted, Source::S2(i));
        }
        c
    }

    fn offer(
        &mut self,
        a: &Formula,
        b: &Formula,
        label: Label,
        relation: Relation,
        source: Source,
    ) {
        let confirmed = match entails(a, b) {
            Ok(holds) => holds == (label == 1),
            Err(_) => {
                self.drops.undecided += 1;
                return;
            }
        };
        if !confirmed {
            if label == 1 {
                self.drops.rejected_positive += 1;
            } else {
                self.drops.rejected_negative += 1;
            }
            return;
        }
        if !self.seen.insert((a.clone(), b.clone(), label, relation)) {
            self.drops.duplicates += 1;
            return;
        }
        self.items.push(Candidate {
            a: a.clone(),
            b: b.clone(),
            label,
            relation,
            source,
        });
    }

    fn materialize(&self, c: &Candidate) -> SamplePair {
        let derivation = match c.source {
            Source::S1(i) => self.res.s1[i].path.clone(),
            Source::Segment(i, k) => self.res.s1[i].path.suffix_from(k),
            Source::S2(i) => self.res.s2[i].path.clone(),
        };
        SamplePair {
            id: pair_id(&c.a, &c.b, c.label, c.relation),
            seed_id: self.seed_id,
            formula_a: c.a.clone(),
            formula_b: c.b.clone(),
            label: c.label,
            relation: c.relation,
            derivation,
        }
    }
}

/// Every oracle-confirmed candidate pair of one exploration, before
/// balancing, in generation order: start-state pairs over S1, then chain
/// pairs over S1, then corrupted pairs over S2.
pub fn candidate_pairs(res: &ExplorationResult, start: &Formula, seed_id: usize) -> PairSet {
    let c = Candidates::collect(res, start, seed_id);
    PairSet {
        pairs: c.items.iter().map(|x| c.materialize(x)).collect(),
        drops: c.drops.clone(),
    }
}

fn rng_for(rng_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    rng
}

/// Keep-mask downsampling the larger label class to `ratio`.
fn balance_mask(
    labels: &[Label],
    ratio: Ratio,
    rng_seed: u64,
    stream: u64,
    drops: &mut DropStats,
) -> Vec<bool> {
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i] == 1);
    let (rp, rn) = (ratio.positive as u64, ratio.negative as u64);
    let (np, nn) = (pos.len() as u64, neg.len() as u64);
    let (keep_pos, keep_neg) = if np * rn > nn * rp {
        (nn * rp / rn, nn)
    } else {
        (np, np * rn / rp)
    };
    let mut rng = rng_for(rng_seed, stream);
    let mut keep = vec![false; labels.len()];
    for (class, n) in [(&pos, keep_pos), (&neg, keep_neg)] {
        for i in sample(&mut rng, class.len(), n as usize) {
            keep[class[i]] = true;
        }
    }
    drops.downsampled_positive += np - keep_pos;
    drops.downsampled_negative += nn - keep_neg;
    keep
}

/// Downsamples the larger label class to `ratio`, keeping the survivors in
/// their original order.
pub fn balance(set: PairSet, ratio: Ratio, rng_seed: u64, stream: u64) -> PairSet {
    let mut drops = set.drops;
    let labels: Vec<Label> = set.pairs.iter().map(|p| p.label).collect();
    let keep = balance_mask(&labels, ratio, rng_seed, stream, &mut drops);
    let pairs = set
        .pairs
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    PairSet { pairs, drops }
}

/// Candidate pairs of one seed, balanced to `ratio`. The downsampling is
/// seeded by `(rng_seed, seed_id)`. Equivalent to [`candidate_pairs`]
/// followed by [`balance`], without building the discarded pairs.
///
/// ```
/// use logaug_core::pairs::{build_pairs, Ratio};
/// use logaug_core::{builtin_rules, explore, parse_formula, SearchConfig};
///
/// let start = parse_formula("(a -> b) & a").unwrap();
/// let res = explore(&start, &builtin_rules(), &SearchConfig::enumerate(2));
/// let set = build_pairs(&res, &start, 0, 42, Ratio::default());
/// assert_eq!(set.positives(), set.negatives());
/// ```
pub fn build_pairs(
    res: &ExplorationResult,
    start: &Formula,
    seed_id: usize,
    rng_seed: u64,
    ratio: Ratio,
) -> PairSet {
    let c = Candidates::collect(res, start, seed_id);
    let mut drops = c.drops.clone();
    let labels: Vec<Label> = c.items.iter().map(|x| x.label).collect();
    let keep = balance_mask(&labels, ratio, rng_seed, seed_id as u64, &mut drops);
    let pairs = c
        .items
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(x, _)| c.materialize(x))
        .collect();
    PairSet { pairs, drops }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSpec {
    /// Train/dev/test shares of all pairs; must sum to 1.
    Fractions([f64; 3]),
    /// Exact train/dev/test sizes; surplus pairs are left out.
    Counts([usize; 3]),
}

pub const SPLIT_NAMES: [&str; 3] = ["train", "dev", "test"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("split fractions must be non-negative and sum to 1, got {0:?}")]
    Fractions([f64; 3]),
    #[error("{split} needs {needed} pairs with label {label} but only {available} remain")]
    Insufficient {
        split: &'static str,
        label: Label,
        needed: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<SamplePair>,
    pub dev: Vec<SamplePair>,
    pub test: Vec<SamplePair>,
}

impl Splits {
    pub fn parts(&self) -> [(&'static str, &[SamplePair]); 3] {
        [
            (SPLIT_NAMES[0], &self.train),
            (SPLIT_NAMES[1], &self.dev),
            (SPLIT_NAMES[2], &self.test),
        ]
    }

    fn part_mut(&mut self, i: usize) -> &mut Vec<SamplePair> {
        match i {
            0 => &mut self.train,
            1 => &mut self.dev,
            _ => &mut self.test,
        }
    }
}

/// Unordered formula pair; both orders of one pair share a split.
fn group_key(p: &SamplePair) -> (String, String) {
    let (a, b) = (p.formula_a.canonical(), p.formula_b.canonical());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Splits `pairs` into train/dev/test, keeping both orders of a formula
/// pair in the same split. Each split receives its share of positives and
/// negatives separately, so the input label ratio carries over to every
/// split. Groups are visited in a seeded shuffle; pairs keep their input
/// order within each split.
pub fn split_dataset(
    pairs: Vec<SamplePair>,
    spec: SplitSpec,
    rng_seed: u64,
) -> Result<Splits, SplitError> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: HashMap<(String, String), Vec<usize>> = HashMap::new();
    for (i, p) in pairs.iter().enumerate() {
        let key = group_key(p);
        groups
            .entry(key)
            .or_insert_with_key(|k| {
                order.push(k.clone());
                Vec::new()
            })
            .push(i);
    }
    order.shuffle(&mut rng_for(rng_seed, u64::MAX));

    let total = [
        pairs.iter().filter(|p| p.label == 0).count(),
        pairs.iter().filter(|p| p.label == 1).count(),
    ];
    // quota[split][label]
    let mut quota = [[0usize; 2]; 3];
    match spec {
        SplitSpec::Fractions(fr) => {
            if fr.iter().any(|f| *f < 0.0 || !f.is_finite())
                || (fr.iter().sum::<f64>() - 1.0).abs() > 1e-6
            {
                return Err(SplitError::Fractions(fr));
            }
            for label in 0..2 {
                let mut left = total[label];
                for s in 0..3 {
                    let n = if s == 2 {
                        left
                    } else {
                        ((total[label] as f64 * fr[s]).round() as usize).min(left)
                    };
                    quota[s][label] = n;
                    left -= n;
                }
            }
        }
        SplitSpec::Counts(counts) => {
            let share_pos = total[1] as f64 / (total[0] + total[1]).max(1) as f64;
            for s in 0..3 {
                let pos = (counts[s] as f64 * share_pos).round() as usize;
                quota[s] = [counts[s] - pos.min(counts[s]), pos.min(counts[s])];
            }
            for label in 0..2 {
                let needed: usize = quota.iter().map(|q| q[label]).sum();
                if needed > total[label] {
                    return Err(SplitError::Insufficient {
                        split: "all splits",
                        label: label as Label,
                        needed,
                        available: total[label],
                    });
                }
            }
        }
    }

    let mut assigned: Vec<Option<usize>> = vec![None; pairs.len()];
    let mut leftover = Vec::new();
    for key in &order {
        let members = &groups[key];
        let mut need = [0usize; 2];
        for &i in members {
            need[pairs[i].label as usize] += 1;
        }
        let target = (0..3).find(|&s| quota[s][0] >= need[0] && quota[s][1] >= need[1]);
        match target {
            Some(s) => {
                quota[s][0] -= need[0];
                quota[s][1] -= need[1];
                for &i in members {
                    assigned[i] = Some(s);
                }
            }
            None => leftover.push(key),
        }
    }
    match spec {
        SplitSpec::Counts(_) => {
            for (s, q) in quota.iter().enumerate() {
                for (label, &missing) in q.iter().enumerate() {
                    if missing > 0 {
                        return Err(SplitError::Insufficient {
                            split: SPLIT_NAMES[s],
                            label: label as Label,
                            needed: missing,
                            available: 0,
                        });
                    }
                }
            }
        }
        SplitSpec::Fractions(_) => {
            // groups too large for any remaining quota go where the
            // deficit is largest
            for key in leftover {
                let s = (0..3)
                    .max_by_key(|&s| (quota[s][0] + quota[s][1], std::cmp::Reverse(s)))
                    .unwrap();
                for &i in &groups[key] {
                    let label = pairs[i].label as usize;
                    quota[s][label] = quota[s][label].saturating_sub(1);
                    assigned[i] = Some(s);
                }
            }
        }
    }

    let mut out = Splits::default();
    for (p, s) in pairs.into_iter().zip(assigned) {
        if let Some(s) = s {
            out.part_mut(s).push(p);
        }
    }
    Ok(out)
}
