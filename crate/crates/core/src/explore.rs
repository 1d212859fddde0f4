//! Bounded depth-first exploration of the rewrite state space.
//!
//! `DFS(s, d, P, V)` expands the successors `R(s) \ V` of a state in
//! [`applicable_rewrites`](crate::rewrite::applicable_rewrites) order, each
//! recursive call receiving `d + 1`, the extended path and `V ∪ {s'}`. A
//! branch ends when `d ≥ d_max` or when every successor is already on the
//! current path. `V` is per path: it only prevents cycles. Result
//! uniqueness is enforced separately by a global seen-set consulted when a
//! state is recorded, so a state reached again on another path is still
//! expanded but not recorded twice.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::formula::{Formula, Position};
use crate::rewrite::{applicable_rewrites_capped, Orientation, Rewrite, DEFAULT_NODE_CAP};
use crate::rules::{Label, RuleBase, RuleKind};

pub const DEFAULT_ENUMERATION_DEPTH: usize = 4;
pub const DEFAULT_PROOF_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub d_max: usize,
    pub target: Option<Formula>,
    pub disabled_rules: BTreeSet<String>,
    /// Stop recording once this many states (S1 + S2) have been found.
    pub max_results: Option<usize>,
    pub node_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            d_max: DEFAULT_ENUMERATION_DEPTH,
            target: None,
            disabled_rules: BTreeSet::new(),
            max_results: None,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

impl SearchConfig {
    pub fn enumerate(d_max: usize) -> Self {
        SearchConfig {
            d_max,
            ..Default::default()
        }
    }

    pub fn prove(target: Formula, d_max: usize) -> Self {
        SearchConfig {
            d_max,
            target: Some(target),
            ..Default::default()
        }
    }

    pub fn disable<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.disabled_rules.extend(ids.into_iter().map(Into::into));
        self
    }

    fn rule_base(&self, rb: &RuleBase) -> RuleBase {
        // unknown ids are ignored here; callers validate user input
        let known: Vec<&String> = self
            .disabled_rules
            .iter()
            .filter(|id| rb.lookup(id).is_some())
            .collect();
        rb.without(&known).expect("filtered to known ids")
    }
}

/// A chain of rewrites from `start`. `label` is the minimum step label, 1
/// for the empty path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationPath {
    pub start: Formula,
    pub steps: Vec<Rewrite>,
    pub label: Label,
}

impl DerivationPath {
    pub fn empty(start: Formula) -> Self {
        DerivationPath {
            start,
            steps: Vec::new(),
            label: 1,
        }
    }

    pub fn from_steps(start: Formula, steps: Vec<Rewrite>) -> Self {
        let label = steps.iter().map(|s| s.step_label).min().unwrap_or(1);
        DerivationPath {
            start,
            steps,
            label,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Final formula of the path.
    pub fn end(&self) -> &Formula {
        self.steps.last().map_or(&self.start, |s| &s.after)
    }

    /// `start` followed by the result of each step.
    pub fn states(&self) -> impl Iterator<Item = &Formula> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.after))
    }

    pub fn is_equivalence_only(&self) -> bool {
        self.steps.iter().all(|s| s.kind == RuleKind::Equivalence)
    }

    pub fn has_implication_step(&self) -> bool {
        self.steps.iter().any(|s| s.kind == RuleKind::Implication)
    }

    /// The tail of the path starting at state `k` (0 = `start`).
    pub fn suffix_from(&self, k: usize) -> DerivationPath {
        let start = self
            .states()
            .nth(k)
            .expect("state index within path")
            .clone();
        DerivationPath::from_steps(start, self.steps[k..].to_vec())
    }

    /// Whether consecutive steps connect and the label is the step minimum.
    pub fn is_consistent(&self) -> bool {
        let chained = self
            .states()
            .zip(self.steps.iter())
            .all(|(state, step)| state == &step.before);
        let min = self.steps.iter().map(|s| s.step_label).min().unwrap_or(1);
        chained && self.label == min
    }
}

/// A state recorded by [`explore`] together with the path that first
/// reached it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reached {
    pub formula: Formula,
    pub path: DerivationPath,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// States whose successors were enumerated.
    pub nodes_expanded: u64,
    /// Successors skipped because they were already recorded for their
    /// label, or repeated a sibling's result.
    pub duplicate_prunes: u64,
    /// Branches cut by the depth bound.
    pub depth_prunes: u64,
    /// Branches with no successor outside the current path.
    pub exhaustion_prunes: u64,
    /// Successors skipped because they already lie on the current path.
    pub cycle_prunes: u64,
    /// Whether `max_results` stopped the search early.
    pub truncated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExplorationResult {
    /// Label-1 states in discovery order.
    pub s1: Vec<Reached>,
    /// Label-0 states in discovery order.
    pub s2: Vec<Reached>,
    pub stats: SearchStats,
}

#[derive(Serialize)]
struct StepRecord<'a> {
    rule_id: &'a str,
    orientation: Orientation,
    position: &'a Position,
    sub_before: String,
    sub_after: String,
}

#[derive(Serialize)]
struct StateRecord<'a> {
    formula: String,
    label: Label,
    depth: usize,
    path: Vec<StepRecord<'a>>,
}

impl ExplorationResult {
    /// S1 followed by S2.
    pub fn all(&self) -> impl Iterator<Item = &Reached> {
        self.s1.iter().chain(self.s2.iter())
    }

    /// One JSON object per recorded state: S1 first, then S2, each in
    /// discovery order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in self.all() {
            let record = StateRecord {
                formula: r.formula.canonical(),
                label: r.path.label,
                depth: r.path.len(),
                path: r
                    .path
                    .steps
                    .iter()
                    .map(|s| StepRecord {
                        rule_id: &s.rule_id,
                        orientation: s.orientation,
                        position: &s.position,
                        sub_before: s.sub_before.canonical(),
                        sub_after: s.sub_after.canonical(),
                    })
                    .collect(),
            };
            out.push_str(&serde_json::to_string(&record).expect("state record serializes"));
            out.push('\n');
        }
        out
    }
}

struct Explorer<'a> {
    rb: RuleBase,
    cfg: &'a SearchConfig,
    seen_s1: HashSet<Formula>,
    seen_s2: HashSet<Formula>,
    result: ExplorationResult,
    start: Formula,
}

impl Explorer<'_> {
    fn full(&self) -> bool {
        self.cfg
            .max_results
            .is_some_and(|cap| self.result.s1.len() + self.result.s2.len() >= cap)
    }

    fn dfs(
        &mut self,
        state: &Formula,
        depth: usize,
        label: Label,
        path: &mut Vec<Rewrite>,
        visited: &mut Vec<Formula>,
    ) {
        if self.result.stats.truncated {
            return;
        }
        if depth >= self.cfg.d_max {
            self.result.stats.depth_prunes += 1;
            return;
        }
        self.result.stats.nodes_expanded += 1;
        let successors = successors(
            state,
            &self.rb,
            self.cfg.node_cap,
            visited,
            &mut self.result.stats,
        );
        if successors.is_empty() {
            self.result.stats.exhaustion_prunes += 1;
            return;
        }
        for step in successors {
            if self.full() {
                self.result.stats.truncated = true;
                return;
            }
            let next = step.after.clone();
            let next_label = label.min(step.step_label);
            path.push(step);
            self.record(&next, next_label, path);
            visited.push(next.clone());
            self.dfs(&next, depth + 1, next_label, path, visited);
            visited.pop();
            path.pop();
        }
    }

    fn record(&mut self, formula: &Formula, label: Label, path: &[Rewrite]) {
        let (seen, out) = if label == 1 {
            (&mut self.seen_s1, &mut self.result.s1)
        } else {
            (&mut self.seen_s2, &mut self.result.s2)
        };
        if !seen.insert(formula.clone()) {
            self.result.stats.duplicate_prunes += 1;
            return;
        }
        out.push(Reached {
            formula: formula.clone(),
            path: DerivationPath {
                start: self.start.clone(),
                steps: path.to_vec(),
                label,
            },
        });
    }
}

/// `R(s) \ V`: distinct successor formulas not on the current path, each
/// with the first rewrite producing it.
fn successors(
    state: &Formula,
    rb: &RuleBase,
    node_cap: usize,
    visited: &[Formula],
    stats: &mut SearchStats,
) -> Vec<Rewrite> {
    let mut seen: HashSet<Formula> = HashSet::new();
    let mut out = Vec::new();
    for rw in applicable_rewrites_capped(state, rb, node_cap) {
        if visited.contains(&rw.after) {
            stats.cycle_prunes += 1;
        } else if !seen.insert(rw.after.clone()) {
            stats.duplicate_prunes += 1;
        } else {
            out.push(rw);
        }
    }
    out
}

/// Enumerates the states reachable from `start` within `cfg.d_max` steps,
/// split by propagated label into S1 (label 1) and S2 (label 0).
///
/// A state's label is the minimum of its parent's label and the applied
/// rule's label. Each formula is recorded at most once per label, with the
/// first path that reached it in DFS order. `cfg.target` is ignored; see
/// [`prove`].
pub fn explore(start: &Formula, rb: &RuleBase, cfg: &SearchConfig) -> ExplorationResult {
    let mut explorer = Explorer {
        rb: cfg.rule_base(rb),
        cfg,
        seen_s1: HashSet::new(),
        seen_s2: HashSet::new(),
        result: ExplorationResult::default(),
        start: start.clone(),
    };
    let mut visited = vec![start.clone()];
    explorer.dfs(start, 0, 1, &mut Vec::new(), &mut visited);
    explorer.result
}

/// Outcome of [`prove_with_stats`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofSearch {
    pub path: Option<DerivationPath>,
    /// Depth bound of the pass that found `path`, or the last bound tried.
    pub bound: usize,
    pub stats: SearchStats,
    /// The expansion budget ran out before the search space was exhausted.
    pub budget_exhausted: bool,
}

/// Finds a derivation of `target` from `start` using only label-1 rules,
/// within `cfg.d_max` steps. See [`prove_with_stats`].
pub fn prove(
    start: &Formula,
    target: &Formula,
    rb: &RuleBase,
    cfg: &SearchConfig,
) -> Option<DerivationPath> {
    prove_with_stats(start, target, rb, cfg, None).path
}

/// Runs the depth-first search with bounds 1, 2, … `cfg.d_max` and returns
/// the first path, in DFS order, of the first bound that reaches `target`.
/// The returned path is therefore also a shortest one.
///
/// Within one pass, a state whose subtree already failed with at least the
/// current remaining depth is not searched again. `max_expansions` caps the
/// total number of expanded states across all passes.
pub fn prove_with_stats(
    start: &Formula,
    target: &Formula,
    rb: &RuleBase,
    cfg: &SearchConfig,
    max_expansions: Option<u64>,
) -> ProofSearch {
    let rb = cfg.rule_base(rb).sound_only();
    let mut search = Prover {
        target,
        rb: &rb,
        node_cap: cfg.node_cap,
        failed: HashMap::new(),
        stats: SearchStats::default(),
        budget: max_expansions,
    };
    if start == target {
        return ProofSearch {
            path: Some(DerivationPath::empty(start.clone())),
            bound: 0,
            stats: search.stats,
            budget_exhausted: false,
        };
    }
    let mut bound = 0;
    for b in 1..=cfg.d_max {
        bound = b;
        search.failed.clear();
        let mut steps = Vec::new();
        let mut visited = vec![start.clone()];
        match search.dfs(start, b, &mut steps, &mut visited) {
            Some(true) => {
                return ProofSearch {
                    path: Some(DerivationPath::from_steps(start.clone(), steps)),
                    bound: b,
                    stats: search.stats,
                    budget_exhausted: false,
                }
            }
            Some(false) => {}
            None => {
                search.stats.truncated = true;
                return ProofSearch {
                    path: None,
                    bound: b,
                    stats: search.stats,
                    budget_exhausted: true,
                };
            }
        }
    }
    ProofSearch {
        path: None,
        bound,
        stats: search.stats,
        budget_exhausted: false,
    }
}

struct Prover<'a> {
    target: &'a Formula,
    rb: &'a RuleBase,
    node_cap: usize,
    /// Largest remaining depth at which a state's subtree failed.
    failed: HashMap<Formula, usize>,
    stats: SearchStats,
    budget: Option<u64>,
}

impl Prover<'_> {
    /// `Some(found)`, or `None` when the expansion budget ran out.
    fn dfs(
        &mut self,
        state: &Formula,
        remaining: usize,
        path: &mut Vec<Rewrite>,
        visited: &mut Vec<Formula>,
    ) -> Option<bool> {
        if state == self.target {
            return Some(true);
        }
        if remaining == 0 {
            self.stats.depth_prunes += 1;
            return Some(false);
        }
        if self.failed.get(state).is_some_and(|&r| r >= remaining) {
            self.stats.duplicate_prunes += 1;
            return Some(false);
        }
        if self.budget.is_some_and(|b| self.stats.nodes_expanded >= b) {
            return None;
        }
        self.stats.nodes_expanded += 1;
        let successors = successors(state, self.rb, self.node_cap, visited, &mut self.stats);
        if successors.is_empty() {
            self.stats.exhaustion_prunes += 1;
        }
        for step in successors {
            let next = step.after.clone();
            path.push(step);
            visited.push(next.clone());
            if self.dfs(&next, remaining - 1, path, visited)? {
                return Some(true);
            }
            visited.pop();
            path.pop();
        }
        let best = self.failed.entry(state.clone()).or_insert(0);
        *best = (*best).max(remaining);
        Some(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::entails;
    use crate::parse_formula;
    use crate::rules::builtin_rules;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn keys(v: &[Reached]) -> BTreeSet<String> {
        v.iter().map(|r| r.formula.canonical()).collect()
    }

    #[test]
    fn one_level_modus_ponens() {
        let rb = builtin_rules().subset(&["I1", "E2"]).unwrap();
        let res = explore(&f("(a -> b) & a"), &rb, &SearchConfig::enumerate(1));
        assert_eq!(
            keys(&res.s1),
            BTreeSet::from(["b".to_string(), "(a & (a -> b))".to_string()])
        );
        assert!(res.s2.is_empty());
        assert_eq!(res.s1[0].formula, f("b"));
    }

    #[test]
    fn converse_error_lands_in_s2() {
        let rb = builtin_rules().subset(&["F1"]).unwrap();
        let res = explore(&f("a -> b"), &rb, &SearchConfig::enumerate(1));
        assert!(res.s1.is_empty());
        assert_eq!(keys(&res.s2), BTreeSet::from(["(b -> a)".to_string()]));
        assert_eq!(res.s2[0].path.label, 0);
    }

    #[test]
    fn depth_zero_records_nothing() {
        let res = explore(
            &f("(a -> b) & a"),
            &builtin_rules(),
            &SearchConfig::enumerate(0),
        );
        assert!(res.s1.is_empty() && res.s2.is_empty());
        assert!(res.stats.depth_prunes >= 1);
        assert_eq!(res.stats.nodes_expanded, 0);
    }

    #[test]
    fn error_step_poisons_label() {
        // E8 (sound) then F1 (error) on a -> b
        let rb = builtin_rules().subset(&["E8", "F1"]).unwrap();
        let res = explore(&f("(a -> b) & c"), &rb, &SearchConfig::enumerate(2));
        let start = f("a -> b");
        let res2 = explore(
            &start,
            &builtin_rules().subset(&["E9", "F1"]).unwrap(),
            &SearchConfig::enumerate(2),
        );
        let mixed = res2
            .s2
            .iter()
            .find(|r| {
                r.path.len() == 2
                    && &*r.path.steps[0].rule_id == "E9"
                    && &*r.path.steps[1].rule_id == "F1"
            })
            .expect("E9 then F1 path");
        assert_eq!(mixed.path.label, 0);
        assert_eq!(mixed.formula, f("~a -> ~b"));
        for r in res.all().chain(res2.all()) {
            assert!(r.path.is_consistent());
            assert_eq!(
                r.path.label == 0,
                r.path.steps.iter().any(|s| s.step_label == 0)
            );
        }
    }

    #[test]
    fn max_results_truncates() {
        let cfg = SearchConfig {
            max_results: Some(10),
            ..SearchConfig::enumerate(3)
        };
        let res = explore(&f("(a -> b) & a"), &builtin_rules(), &cfg);
        assert_eq!(res.s1.len() + res.s2.len(), 10);
        assert!(res.stats.truncated);
    }

    #[test]
    fn disabled_rules_are_skipped() {
        let cfg = SearchConfig::enumerate(1).disable(["I1"]);
        let res = explore(&f("(a -> b) & a"), &builtin_rules(), &cfg);
        assert!(res
            .all()
            .all(|r| r.path.steps.iter().all(|s| &*s.rule_id != "I1")));
        assert!(!keys(&res.s1).contains("b"));
    }

    #[test]
    fn prove_modus_ponens() {
        let path = prove(
            &f("(a -> b) & a"),
            &f("b"),
            &builtin_rules(),
            &SearchConfig::prove(f("b"), 2),
        )
        .unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(&*path.steps[0].rule_id, "I1");
        assert_eq!(path.label, 1);
    }

    #[test]
    fn prove_trivial_target() {
        let start = f("a & b");
        let path = prove(
            &start,
            &start,
            &builtin_rules(),
            &SearchConfig::prove(start.clone(), 0),
        )
        .unwrap();
        assert!(path.is_empty());
        assert_eq!(path.label, 1);
    }

    #[test]
    fn prove_ignores_error_rules() {
        let rb = builtin_rules().subset(&["F1"]).unwrap();
        assert!(prove(
            &f("a -> b"),
            &f("b -> a"),
            &rb,
            &SearchConfig::prove(f("b -> a"), 3)
        )
        .is_none());
    }

    #[test]
    fn prove_without_modus_ponens() {
        let start = f("(a -> b) & a");
        let target = f("b");
        let cfg = SearchConfig::prove(target.clone(), DEFAULT_PROOF_DEPTH).disable(["I1"]);
        let path = prove(&start, &target, &builtin_rules(), &cfg).expect("alternative derivation");
        assert!(path.len() > 1);
        assert!(path.is_consistent());
        // shortest route: E8 inside, double negation on the right, then
        // disjunctive syllogism
        let ids: Vec<&str> = path.steps.iter().map(|s| &*s.rule_id).collect();
        assert_eq!(ids, ["E8", "E1", "I4"]);
        assert_eq!(path.end(), &target);
        for step in &path.steps {
            assert_ne!(&*step.rule_id, "I1");
            assert!(entails(&step.before, &step.after).unwrap());
        }
    }

    #[test]
    fn prove_reports_unreachable_and_budget() {
        let rb = builtin_rules();
        let start = f("a");
        let out = prove_with_stats(&start, &f("b"), &rb, &SearchConfig::prove(f("b"), 1), None);
        assert!(out.path.is_none());
        assert!(!out.budget_exhausted);
        assert_eq!(out.bound, 1);
        let out = prove_with_stats(
            &start,
            &f("b"),
            &rb,
            &SearchConfig::prove(f("b"), 6),
            Some(500),
        );
        assert!(out.path.is_none());
        assert!(out.budget_exhausted);
        assert!(out.stats.nodes_expanded <= 500);
    }

    #[test]
    fn suffix_paths() {
        let rb = builtin_rules().subset(&["E8", "E3"]).unwrap();
        let res = explore(&f("a -> b"), &rb, &SearchConfig::enumerate(2));
        let two = res.s1.iter().find(|r| r.path.len() == 2).unwrap();
        let tail = two.path.suffix_from(1);
        assert_eq!(tail.len(), 1);
        assert_eq!(tail.start, two.path.steps[0].after);
        assert_eq!(tail.end(), &two.formula);
    }

    #[test]
    fn jsonl_shape() {
        let rb = builtin_rules().subset(&["I1", "E2"]).unwrap();
        let res = explore(&f("(a -> b) & a"), &rb, &SearchConfig::enumerate(1));
        let jsonl = res.to_jsonl();
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            r#"{"formula":"b","label":1,"depth":1,"path":[{"rule_id":"I1","orientation":"forward","position":[],"sub_before":"((a -> b) & a)","sub_after":"b"}]}"#
        );
    }
}
