mod config;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use logaug_core::explore::{DEFAULT_ENUMERATION_DEPTH, DEFAULT_PROOF_DEPTH};
use logaug_core::nl::{formalize_statement, parse_seed_file, BUILTIN_SEEDS};
use logaug_core::pairs::{Ratio, SplitSpec};
use logaug_core::pipeline::{
    audit_records, run_pipeline, to_jsonl, PipelineConfig, PipelineError, DEFAULT_PAIR_DEPTH,
    DEFAULT_RNG_SEED, DEFAULT_SPLIT_COUNTS,
};
use logaug_core::trace::format_path;
use logaug_core::verbalize::{LlmConfig, Mode, PairRecord};
use logaug_core::{
    builtin_rules, explore, load_rules, parse_formula, prove_with_stats, symbolic, validate_rules,
    Formula, RuleBase, SearchConfig, VarId, VarTable,
};

use config::{FileConfig, LlmSection};

/// Propositional rewriting and contrastive pair generation.
#[derive(Debug, Parser)]
#[command(name = "logaug", version)]
struct Cli {
    /// Rule file, or comma-separated builtin rule ids (e.g. `I1,E2`).
    #[arg(long, global = true)]
    rules: Option<String>,
    /// Random seed for sampling and template choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Depth bound; each command has its own default.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Output file (explore) or directory (gen-pairs).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML configuration file for gen-pairs.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every rule's declared label against the truth-table oracle.
    VerifyRules,
    /// Formalize sentences and print the formulas and variable table.
    Parse {
        #[arg(required = true)]
        sentences: Vec<String>,
    },
    /// Enumerate the states reachable from a formula as JSON lines.
    Explore {
        #[arg(long)]
        formula: String,
        #[command(flatten)]
        disable: Disable,
        /// Stop after recording this many states.
        #[arg(long)]
        max_results: Option<usize>,
    },
    /// Search for a sound derivation and print its trace.
    Derive {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[command(flatten)]
        disable: Disable,
        /// Give up after expanding this many states.
        #[arg(long, default_value_t = 2_000_000)]
        max_expansions: u64,
    },
    /// Build train/dev/test JSONL files from seed statements.
    GenPairs(GenPairs),
}

#[derive(Debug, Args)]
struct Disable {
    /// Rule ids to leave out; repeatable or comma-separated.
    #[arg(long, value_delimiter = ',')]
    disable: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Template,
    Llm,
}

#[derive(Debug, Args)]
struct GenPairs {
    /// Seed file, one statement per line; defaults to the bundled seeds.
    #[arg(long)]
    seeds: Option<PathBuf>,
    #[arg(long)]
    train: Option<usize>,
    #[arg(long)]
    dev: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
    /// Split by proportions instead of counts, e.g. `0.8,0.1,0.1`.
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    /// Fail instead of splitting proportionally when the counts cannot be met.
    #[arg(long)]
    exact_counts: bool,
    /// Positive to negative ratio, e.g. `1:1`.
    #[arg(long)]
    ratio: Option<String>,
    #[command(flatten)]
    disable: Disable,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// In LLM mode, render pairs the endpoint fails on with templates.
    #[arg(long)]
    fallback_template: bool,
    /// Re-read the written files and re-check every label with the oracle.
    #[arg(long)]
    audit: bool,
    /// Cap on recorded states per seed.
    #[arg(long)]
    max_states: Option<usize>,
}

enum Failure {
    /// Exit 1.
    Domain(String),
    /// Exit 2.
    Usage(String),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(usage)?,
        None => FileConfig::default(),
    };
    let rules_arg = cli.rules.clone().or_else(|| file_cfg.rules.clone());
    let rb = resolve_rules(rules_arg.as_deref())?;
    match cli.command {
        Command::VerifyRules => verify_rules(&rb),
        Command::Parse { ref sentences } => parse_cmd(sentences),
        Command::Explore {
            ref formula,
            ref disable,
            max_results,
        } => explore_cmd(&cli, &rb, formula, &disable.disable, max_results),
        Command::Derive {
            ref from,
            ref to,
            ref disable,
            max_expansions,
        } => derive_cmd(&cli, &rb, from, to, &disable.disable, max_expansions),
        Command::GenPairs(ref args) => gen_pairs(&cli, file_cfg, &rb, args),
    }
}

fn is_rule_id_list(s: &str) -> bool {
    !s.is_empty() && s.split(',').all(|t| is_rule_id(t.trim()))
}

fn is_rule_id(t: &str) -> bool {
    let mut chars = t.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && t.len() > 1
        && chars.all(|c| c.is_ascii_digit())
}

fn resolve_rules(arg: Option<&str>) -> Result<RuleBase, Failure> {
    let Some(arg) = arg else {
        return Ok(builtin_rules());
    };
    if Path::new(arg).is_file() {
        return load_rules(arg).map_err(usage);
    }
    if is_rule_id_list(arg) {
        let ids: Vec<&str> = arg.split(',').map(str::trim).collect();
        return builtin_rules().subset(&ids).map_err(usage);
    }
    Err(usage(format!(
        "--rules {arg:?} is neither a readable file nor a list of rule ids"
    )))
}

fn check_disabled(rb: &RuleBase, ids: &[String]) -> Result<(), Failure> {
    rb.without(ids).map(|_| ()).map_err(usage)
}

fn parse_arg(text: &str, what: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(|e| domain(format!("{what}: {e}")))
}

fn verify_rules(rb: &RuleBase) -> CmdResult {
    let start = Instant::now();
    let report = validate_rules(rb);
    for r in &report.records {
        println!("{r}");
    }
    let sound = report
        .records
        .iter()
        .filter(|r| r.oracle_valid == Some(true))
        .count();
    let bad = report.records.iter().filter(|r| !r.agree).count();
    eprintln!(
        "{} rules, {} oracle-valid, {} oracle-invalid, {} disagreements ({:.0?})",
        report.records.len(),
        sound,
        report.records.len() - sound,
        bad,
        start.elapsed()
    );
    if report.ok {
        Ok(())
    } else {
        Err(domain(format!(
            "{bad} rule labels disagree with the oracle"
        )))
    }
}

fn parse_cmd(sentences: &[String]) -> CmdResult {
    let mut vt = VarTable::new();
    for s in sentences {
        let out = formalize_statement(s, &mut vt).map_err(domain)?;
        println!("{}", greek(&out.formula));
        println!("{}", out.formula.pretty());
    }
    for (id, entry) in vt.iter() {
        println!("{id}: {}", entry.display);
    }
    Ok(())
}

fn greek(f: &Formula) -> String {
    symbolic(f, &|name| {
        VarId::from_atom_name(name)
            .map(|id| id.display_name())
            .unwrap_or_else(|| name.to_string())
    })
}

fn explore_cmd(
    cli: &Cli,
    rb: &RuleBase,
    formula: &str,
    disable: &[String],
    max_results: Option<usize>,
) -> CmdResult {
    check_disabled(rb, disable)?;
    let start = parse_arg(formula, "--formula")?;
    let cfg = SearchConfig {
        max_results,
        ..SearchConfig::enumerate(cli.depth.unwrap_or(DEFAULT_ENUMERATION_DEPTH))
    }
    .disable(disable.iter().cloned());
    let t = Instant::now();
    let res = explore(&start, rb, &cfg);
    let jsonl = res.to_jsonl();
    match &cli.out {
        Some(path) => write_file(path, &jsonl)?,
        None => print!("{jsonl}"),
    }
    let s = &res.stats;
    eprintln!(
        "s1={} s2={} expanded={} duplicate_prunes={} depth_prunes={} cycle_prunes={} exhaustion_prunes={} truncated={} ({:.2?})",
        res.s1.len(),
        res.s2.len(),
        s.nodes_expanded,
        s.duplicate_prunes,
        s.depth_prunes,
        s.cycle_prunes,
        s.exhaustion_prunes,
        s.truncated,
        t.elapsed()
    );
    Ok(())
}

fn derive_cmd(
    cli: &Cli,
    rb: &RuleBase,
    from: &str,
    to: &str,
    disable: &[String],
    max_expansions: u64,
) -> CmdResult {
    check_disabled(rb, disable)?;
    let start = parse_arg(from, "--from")?;
    let target = parse_arg(to, "--to")?;
    let depth = cli.depth.unwrap_or(DEFAULT_PROOF_DEPTH);
    let cfg = SearchConfig::prove(target.clone(), depth).disable(disable.iter().cloned());
    let search = prove_with_stats(&start, &target, rb, &cfg, Some(max_expansions));
    match search.path {
        Some(path) => {
            print!("{}", format_path(&path));
            Ok(())
        }
        None => {
            let note = if search.budget_exhausted {
                format!(" (gave up after {max_expansions} expansions)")
            } else {
                String::new()
            };
            println!("NO DERIVATION within depth {depth}{note}");
            Err(domain(""))
        }
    }
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn llm_config(section: Option<&LlmSection>) -> Result<Option<LlmConfig>, Failure> {
    use logaug_core::verbalize::llm::{ENV_ENDPOINT, ENV_KEY, ENV_MODEL};
    let env = |name: &str| std::env::var(name).ok().filter(|v| !v.trim().is_empty());
    let section = section.cloned().unwrap_or_default();
    let endpoint = env(ENV_ENDPOINT).or(section.endpoint);
    let model = env(ENV_MODEL).or(section.model);
    let (Some(endpoint), Some(model)) = (endpoint, model) else {
        return Ok(None);
    };
    let mut cfg = LlmConfig::new(endpoint, model);
    cfg.api_key = env(ENV_KEY).or(section.key);
    if let Some(t) = section.temperature {
        cfg.temperature = t;
    }
    if let Some(r) = section.max_retries {
        cfg.max_retries = r;
    }
    if let Some(n) = section.max_in_flight {
        if n == 0 {
            return Err(usage("llm.max_in_flight must be at least 1"));
        }
        cfg.max_in_flight = n;
    }
    if let Some(s) = section.timeout_secs {
        cfg.timeout = Duration::from_secs(s);
    }
    if let Some(ms) = section.backoff_ms {
        cfg.backoff = Duration::from_millis(ms);
    }
    Ok(Some(cfg))
}

fn pipeline_config(
    cli: &Cli,
    file: &FileConfig,
    rb: &RuleBase,
    args: &GenPairs,
) -> Result<PipelineConfig, Failure> {
    let mut disabled: BTreeSet<String> = file.disable.iter().cloned().collect();
    disabled.extend(args.disable.disable.iter().cloned());
    let disabled_list: Vec<String> = disabled.iter().cloned().collect();
    check_disabled(rb, &disabled_list)?;

    let ratio = match args.ratio.as_ref().or(file.ratio.as_ref()) {
        Some(r) => r.parse::<Ratio>().map_err(usage)?,
        None => Ratio::default(),
    };
    let fractions = match &args.fractions {
        Some(f) => match f[..] {
            [tr, dv, te] => Some([tr, dv, te]),
            _ => return Err(usage("--fractions takes three comma-separated values")),
        },
        None if args.train.is_none() && args.dev.is_none() && args.test.is_none() => file.fractions,
        None => None,
    };
    let split = match fractions {
        Some(f) => {
            let sum: f64 = f.iter().sum();
            if f.iter().any(|x| *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(usage(format!(
                    "split fractions must be non-negative and sum to 1, got {f:?}"
                )));
            }
            SplitSpec::Fractions(f)
        }
        None => {
            let [tr, dv, te] = DEFAULT_SPLIT_COUNTS;
            SplitSpec::Counts([
                args.train.or(file.train).unwrap_or(tr),
                args.dev.or(file.dev).unwrap_or(dv),
                args.test.or(file.test).unwrap_or(te),
            ])
        }
    };
    let mode = match args.mode {
        Some(ModeArg::Template) => Mode::Template,
        Some(ModeArg::Llm) => Mode::Llm,
        None => match file.mode.as_deref() {
            None | Some("template") => Mode::Template,
            Some("llm") => Mode::Llm,
            Some(other) => return Err(usage(format!("unknown mode {other:?}"))),
        },
    };
    let llm = llm_config(file.llm.as_ref())?;
    if mode == Mode::Llm && llm.is_none() {
        return Err(usage(format!(
            "LLM mode needs an endpoint and a model (set {} and {}, or an [llm] table in the config)",
            logaug_core::verbalize::llm::ENV_ENDPOINT,
            logaug_core::verbalize::llm::ENV_MODEL
        )));
    }
    Ok(PipelineConfig {
        d_max: cli.depth.or(file.depth).unwrap_or(DEFAULT_PAIR_DEPTH),
        disabled_rules: disabled,
        ratio,
        split,
        proportional_fallback: !args.exact_counts,
        rng_seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_RNG_SEED),
        mode,
        llm,
        fallback_template: args.fallback_template || file.fallback_template.unwrap_or(false),
        max_states: args.max_states.or(file.max_states),
    })
}

fn gen_pairs(cli: &Cli, file: FileConfig, rb: &RuleBase, args: &GenPairs) -> CmdResult {
    let cfg = pipeline_config(cli, &file, rb, args)?;
    let seed_text = match args.seeds.as_ref().or(file.seeds.as_ref()) {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => BUILTIN_SEEDS.to_string(),
    };
    let statements: Vec<String> = parse_seed_file(&seed_text)
        .into_iter()
        .map(|s| s.text)
        .collect();
    if statements.is_empty() {
        return Err(usage("the seed file holds no statements"));
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let t = Instant::now();
    let out = run_pipeline(&statements, rb, &cfg).map_err(|e| match e {
        PipelineError::NoLlmConfig => usage(e),
        other => domain(other),
    })?;

    for s in &out.seeds {
        eprintln!(
            "seed {}: {} | s1={} s2={} positive={} negative={}",
            s.seed_id, s.formula, s.s1, s.s2, s.positives, s.negatives
        );
    }
    let d = &out.drops;
    eprintln!(
        "dropped: rejected_positive={} rejected_negative={} undecided={} duplicates={} downsampled_positive={} downsampled_negative={}",
        d.rejected_positive,
        d.rejected_negative,
        d.undecided,
        d.duplicates,
        d.downsampled_positive,
        d.downsampled_negative
    );
    if out.split != cfg.split {
        eprintln!(
            "only {} balanced pairs available; split proportionally instead",
            out.total_pairs
        );
    }
    if out.llm_fallbacks > 0 {
        eprintln!(
            "{} pairs rendered with templates after LLM failures",
            out.llm_fallbacks
        );
    }

    let mut paths = Vec::new();
    for (name, pairs) in out.parts() {
        let path = out_dir.join(format!("{name}.jsonl"));
        write_file(&path, &to_jsonl(pairs))?;
        let pos = pairs.iter().filter(|p| p.pair.label == 1).count();
        println!(
            "{name}: {} pairs ({pos} positive, {} negative) -> {}",
            pairs.len(),
            pairs.len() - pos,
            path.display()
        );
        paths.push((name, path));
    }
    eprintln!("done in {:.2?}", t.elapsed());

    if args.audit || file.audit.unwrap_or(false) {
        audit_files(&paths)?;
    }
    Ok(())
}

fn audit_files(paths: &[(&str, PathBuf)]) -> CmdResult {
    let mut failed = false;
    for (name, path) in paths {
        let text =
            std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let r: PairRecord = serde_json::from_str(line).map_err(|e| {
                domain(format!("{}:{}: invalid record: {e}", path.display(), i + 1))
            })?;
            records.push(r);
        }
        let report = audit_records(&records);
        let balanced = report.positives.abs_diff(report.negatives) <= 1;
        println!(
            "audit {name}: {} records, {} positive, {} negative, {} oracle violations{}",
            report.checked,
            report.positives,
            report.negatives,
            report.violations.len(),
            if balanced { "" } else { ", unbalanced" }
        );
        for id in &report.violations {
            eprintln!("  violation: {id}");
        }
        failed |= !report.ok();
    }
    if failed {
        Err(domain("audit found labels that disagree with the oracle"))
    } else {
        Ok(())
    }
}
