//! `remc`: command line front end for `remc-core`.
//!
//! Exit status is 0 on success, 1 when a verification verdict is false and 2
//! on usage or input errors (malformed family files report the line).

use std::error::Error as StdError;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use remc_core::audit::{audit_inequalities, scan_down};
use remc_core::concentration::{default_beta_grid, exact_eta_distribution, monte_carlo_eta};
use remc_core::constructions::{build_extremal, size_extremal, ExtremalKind};
use remc_core::emc::{verify_emc, EmcMode};
use remc_core::io::{read_family, to_text, write_family};
use remc_core::matchings::{find_rainbow, matching_number, sample_matching, Matching, MatchingSpace};
use remc_core::procedure::{attempt_rainbow_procedure, ThresholdConfig};
use remc_core::suites::{bt_suite, lemma4_suite, local_lym_suite, theorem3_suite, SuiteReport};
use remc_core::transforms::{lower_shadow, shift_closure, shift_ij, upper_shadow};
use remc_core::{FamilyTuple, Params, SetFamily, DEFAULT_SEED, REPORT_VERSION};
use serde::Serialize;
use serde_json::{json, Value};

type CliResult<T> = Result<T, Box<dyn StdError>>;

#[derive(Parser, Debug)]
#[command(name = "remc", version, about = "Exact and Monte Carlo checks for rainbow matchings of set families")]
struct Cli {
    /// Seed for every randomized command (decimal or 0x-prefixed hex, default 0x5EED).
    #[arg(long, global = true, default_value_t = DEFAULT_SEED, hide_default_value = true, value_parser = parse_seed)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an extremal family, or print its exact size.
    Construct {
        #[arg(long, value_parser = parse_kind)]
        kind: ExtremalKind,
        #[command(flatten)]
        nks: Nks,
        #[arg(long)]
        size_only: bool,
        /// Write the family file here (`.json` selects the JSON form).
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Apply one (i, j)-compression, or shift to a fixpoint.
    Shift {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, requires = "j")]
        i: Option<usize>,
        #[arg(long, requires = "i")]
        j: Option<usize>,
        /// Shift to a fixpoint (the default without --i/--j).
        #[arg(long, conflicts_with_all = ["i", "j"])]
        closure: bool,
    },
    /// Lower b-shadow or upper u-shadow of a family.
    Shadow {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1, conflicts_with = "upper")]
        depth: usize,
        #[arg(long)]
        upper: Option<usize>,
    },
    /// Matching number of a family.
    Nu {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Search for a rainbow matching of the given families.
    Rainbow {
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Draw a uniform t-matching of (k-1)-sets inside [s+2, n].
    SampleMatching {
        #[command(flatten)]
        nks: Nks,
        /// Defaults to floor((n-s-1)/k).
        #[arg(long)]
        t: Option<usize>,
    },
    /// Law of |G ∩ M| for a (k-1)-uniform G and a random t-matching M.
    Concentration {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        nks: Nks,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Comma separated β values; the default grid depends on s.
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// Enumerate every t-matching instead of sampling.
        #[arg(long)]
        exact: bool,
    },
    /// Run the rearrangement procedure on a tuple against a fixed matching.
    Procedure {
        /// Directory holding the s+1 family files, read in file name order.
        #[arg(long)]
        tuple: PathBuf,
        /// Family file of the matching blocks.
        #[arg(long)]
        matching: PathBuf,
        /// JSON object overriding threshold defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Audit the numeric inequalities at a given s and k.
    Audit {
        #[arg(long)]
        s: u64,
        #[arg(long, default_value_t = 2)]
        k: u64,
        /// Comma separated check names (all by default).
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Audit s, s-step, .. until a check fails, then bisect.
        #[arg(long)]
        scan_down: bool,
        #[arg(long, default_value_t = 2)]
        stop: u64,
        #[arg(long, default_value_t = 1000)]
        step: u64,
    },
    /// Property suites and exhaustive small-case checks.
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Args, Debug, Clone, Copy)]
struct Nks {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    s: usize,
}

#[derive(Args, Debug, Clone, Copy)]
struct Trials {
    #[arg(long, default_value_t = 1000)]
    trials: u64,
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// (3s+2)|∂F| >= |F| under the ℓ-condition.
    Lemma4 {
        #[command(flatten)]
        nks: Nks,
        #[command(flatten)]
        trials: Trials,
    },
    /// |∂^b F| >= β|F| under per-level thresholds a_b, .., a_k.
    Theorem3 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<usize>,
        #[command(flatten)]
        trials: Trials,
    },
    /// Maximum size of a shifted family with ν <= s.
    Emc(Grid),
    /// Maximum min-size of a cross-dependent shifted tuple.
    RainbowEmc(Grid),
    /// (n-k+1)|∂F| >= k|F|.
    LocalLym {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        trials: Trials,
    },
    /// The upper-shadow density inequality.
    Bt {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        u: usize,
        #[command(flatten)]
        trials: Trials,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Grid {
    #[arg(long)]
    n_max: usize,
    #[arg(long)]
    k_max: usize,
    #[arg(long)]
    s_max: usize,
}

fn parse_seed(text: &str) -> Result<u64, String> {
    let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => text.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{text}`: {e}"))
}

fn parse_kind(text: &str) -> Result<ExtremalKind, String> {
    text.parse().map_err(|e: remc_core::Error| e.to_string())
}

enum Body {
    Family(SetFamily),
    Scalar(Value),
    Report { json: Value, csv: Option<Vec<Vec<String>>> },
}

struct Output {
    command: &'static str,
    body: Body,
    passed: bool,
}

impl Output {
    fn family(command: &'static str, family: SetFamily) -> Self {
        Output { command, body: Body::Family(family), passed: true }
    }

    fn scalar(command: &'static str, value: Value) -> Self {
        Output { command, body: Body::Scalar(value), passed: true }
    }

    fn report<T: Serialize>(command: &'static str, report: &T, passed: bool) -> CliResult<Self> {
        Ok(Output { command, body: Body::Report { json: serde_json::to_value(report)?, csv: None }, passed })
    }

    fn with_csv(mut self, rows: Vec<Vec<String>>) -> Self {
        if let Body::Report { csv, .. } = &mut self.body {
            *csv = Some(rows);
        }
        self
    }
}

/// Adds `spec_version` and `command` to the top level of an object, or
/// wraps any other value as `value`.
fn envelope(command: &str, value: Value) -> Value {
    let mut object = match value {
        Value::Object(map) => map,
        other => {
            let mut map = serde_json::Map::new();
            map.insert("value".into(), other);
            map
        }
    };
    object.insert("spec_version".into(), json!(REPORT_VERSION));
    object.insert("command".into(), json!(command));
    Value::Object(object)
}

fn render(output: &Output, format: Format) -> CliResult<String> {
    let pretty = |v: Value| -> CliResult<String> { Ok(serde_json::to_string_pretty(&envelope(output.command, v))? + "\n") };
    match (&output.body, format) {
        (Body::Family(f), Format::Text) => Ok(to_text(f)),
        (Body::Family(f), Format::Json) => pretty(json!({ "family": f })),
        (Body::Scalar(v), Format::Text) => Ok(match v {
            Value::String(s) => format!("{s}\n"),
            other => format!("{other}\n"),
        }),
        (Body::Scalar(v), Format::Json) => pretty(v.clone()),
        (Body::Report { json, .. }, Format::Text | Format::Json) => pretty(json.clone()),
        (Body::Report { csv: Some(rows), .. }, Format::Csv) => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in rows {
                writer.write_record(row)?;
            }
            Ok(String::from_utf8(writer.into_inner()?)?)
        }
        _ => Err(format!("`{}` has no CSV output", output.command).into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    let Some(output) = execute(&cli.command, cli.seed)? else {
        return Ok(true);
    };
    let text = render(&output, cli.format)?;
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(output.passed)
}

fn params(nks: Nks) -> CliResult<Params> {
    Ok(Params::new(nks.n, nks.k, nks.s)?)
}

fn execute(command: &Command, seed: u64) -> CliResult<Option<Output>> {
    let output = match command {
        Command::Construct { kind, nks, size_only, emit } => {
            let p = params(*nks)?;
            if *size_only {
                let size: BigUint = size_extremal(&p, *kind)?;
                Output::scalar("construct", json!(size.to_string()))
            } else {
                let family = build_extremal(&p, *kind)?;
                if let Some(path) = emit {
                    write_family(path, &family)?;
                    return Ok(None);
                }
                Output::family("construct", family)
            }
        }
        Command::Shift { input, i, j, .. } => {
            let family = read_family(input)?;
            let shifted = match (i, j) {
                (Some(i), Some(j)) => shift_ij(&family, *i, *j)?,
                _ => shift_closure(&family).result,
            };
            Output::family("shift", shifted)
        }
        Command::Shadow { input, depth, upper } => {
            let family = read_family(input)?;
            let shadow = match upper {
                Some(u) => upper_shadow(&family, *u)?,
                None => lower_shadow(&family, *depth)?,
            };
            Output::family("shadow", shadow)
        }
        Command::Nu { input } => Output::scalar("nu", json!(matching_number(&read_family(input)?))),
        Command::Rainbow { inputs } => {
            let families = inputs.iter().map(read_family).collect::<Result<Vec<_>, _>>()?;
            let tuple = FamilyTuple::new(families)?;
            let witness = find_rainbow(&tuple);
            let valid = !witness.complete || witness.is_valid_for(tuple.families());
            Output::report("rainbow", &witness, valid)?
        }
        Command::SampleMatching { nks, t } => {
            let p = params(*nks)?;
            let space = MatchingSpace::for_params(&p, t.unwrap_or_else(|| p.t()))?;
            let m = sample_matching(&space, &mut ChaCha8Rng::seed_from_u64(seed));
            Output::family("sample-matching", m.to_family(p.n)?)
        }
        Command::Concentration { family, nks, t, trials, betas, exact } => {
            let p = params(*nks)?;
            let space = MatchingSpace::for_params(&p, t.unwrap_or_else(|| p.t()))?;
            let g = read_family(family)?;
            if *exact {
                let dist = exact_eta_distribution(&g, &space)?;
                let mut rows = vec![vec!["eta".to_string(), "probability".to_string()]];
                rows.extend(dist.probabilities.iter().map(|(eta, pr)| vec![eta.to_string(), pr.to_string()]));
                Output::report("concentration", &dist, dist.mean_is_alpha_t())?.with_csv(rows)
            } else {
                let grid = betas.clone().unwrap_or_else(|| default_beta_grid(p.s));
                let report = monte_carlo_eta(&g, &space, *trials, seed, &grid)?;
                let mut rows = vec![vec!["eta".to_string(), "count".to_string()]];
                rows.extend(report.eta_histogram.iter().map(|(eta, c)| vec![eta.to_string(), c.to_string()]));
                Output::report("concentration", &report, report.tails_within_bound())?.with_csv(rows)
            }
        }
        Command::Procedure { tuple, matching, config } => {
            let tuple = read_tuple(tuple)?;
            let m = Matching::from_family(&read_family(matching)?)?;
            let cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                    let value: Value = serde_json::from_str(&text)
                        .map_err(|e| format!("line {}: {}: {e}", e.line(), path.display()))?;
                    ThresholdConfig::with_overrides(tuple.s(), m.len(), &value)?
                }
                None => ThresholdConfig::defaults(tuple.s(), m.len()),
            };
            let trace = attempt_rainbow_procedure(&tuple, &m, &cfg)?;
            let consistent = trace.failure.as_ref().is_none_or(|f| f.invariant_holds);
            Output::report("procedure", &trace, consistent)?
        }
        Command::Audit { s, k, checks, scan_down: scan, stop, step } => {
            if *scan {
                // A scan is expected to run into a failure; that is its result.
                let report = scan_down(*k, *s, *stop, *step, checks.as_deref())?;
                Output::report("audit", &report, true)?
            } else {
                let report = audit_inequalities(*s, *k, checks.as_deref())?;
                let mut rows = vec![["name", "lhs", "relation", "rhs", "passed"].map(String::from).to_vec()];
                rows.extend(report.checks.iter().map(|c| {
                    vec![c.name.to_string(), c.lhs.clone(), c.relation.to_string(), c.rhs.clone(), c.passed.to_string()]
                }));
                Output::report("audit", &report, report.all_passed)?.with_csv(rows)
            }
        }
        Command::Verify(v) => verify(v, seed)?,
    };
    Ok(Some(output))
}

fn verify(command: &Verify, seed: u64) -> CliResult<Output> {
    let suite = |report: SuiteReport| -> CliResult<Output> {
        let mut rows = vec![["check", "n", "k", "trials", "seed", "failures", "min_slack"].map(String::from).to_vec()];
        rows.push(vec![
            report.check.to_string(),
            report.n.to_string(),
            report.k.to_string(),
            report.trials.to_string(),
            report.seed.to_string(),
            report.failures.len().to_string(),
            report.min_slack.to_string(),
        ]);
        Ok(Output::report("verify", &report, report.passed())?.with_csv(rows))
    };
    let emc = |grid: &Grid, mode: EmcMode| -> CliResult<Output> {
        let report = verify_emc(grid.n_max, grid.k_max, grid.s_max, mode)?;
        let mut rows = vec![["n", "k", "s", "expected", "best", "holds", "examined"].map(String::from).to_vec()];
        let opt = |v: Option<String>| v.unwrap_or_default();
        rows.extend(report.entries.iter().map(|e| {
            vec![
                e.n.to_string(),
                e.k.to_string(),
                e.s.to_string(),
                e.expected.to_string(),
                opt(e.best.map(|b| b.to_string())),
                opt(e.holds.map(|h| h.to_string())),
                e.examined.to_string(),
            ]
        }));
        Ok(Output::report("verify", &report, report.all_hold)?.with_csv(rows))
    };
    match command {
        Verify::Lemma4 { nks, trials } => suite(lemma4_suite(nks.n, nks.k, nks.s, trials.trials, seed)?),
        Verify::Theorem3 { n, k, b, thresholds, trials } => {
            suite(theorem3_suite(*n, *k, *b, thresholds, trials.trials, seed)?)
        }
        Verify::Emc(grid) => emc(grid, EmcMode::Classic),
        Verify::RainbowEmc(grid) => emc(grid, EmcMode::Rainbow),
        Verify::LocalLym { n, k, trials } => suite(local_lym_suite(*n, *k, trials.trials, seed)?),
        Verify::Bt { n, k, u, trials } => suite(bt_suite(*n, *k, *u, trials.trials, seed)?),
    }
}

/// Regular, non-hidden files of `dir` in file name order.
fn read_tuple(dir: &Path) -> CliResult<FamilyTuple> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format!("{}: no family files", dir.display()).into());
    }
    let families = paths.iter().map(read_family).collect::<Result<Vec<_>, _>>()?;
    Ok(FamilyTuple::new(families)?)
}
