use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tracelab::language::{enumerate_language, EnumOptions, Method, DEFAULT_BUDGET};
use tracelab::mahler::{build_constrained_prefix, render_diagram, search_csv, search_finite_columns, DiagramStyle};
use tracelab::numbers::{encode, format_rational, parse_rational};
use tracelab::representations::{companion_rows, compfrac_reconstruct};
use tracelab::sofic::{
    build_transitive_32, build_zpq, complexity_closed_form, count_csv, label_counts, transitive_32_formula,
    w2_count, CountRow, LabeledGraph, DEFAULT_FRONTIER_CAP,
};
use tracelab::verify::{run_suite, Suite};
use tracelab::{Ca, Configuration, Error, Params};

#[derive(Parser)]
#[command(name = "tracelab", version, about = "Fractional multiplication automata and their traces")]
struct Cli {
    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct PairArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    q: u32,
}

impl PairArgs {
    fn params(self) -> Result<Params, Failure> {
        Ok(Params::new(self.p, self.q)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the space-time diagram of a value or configuration.
    Simulate {
        #[command(flatten)]
        pair: PairArgs,
        /// Starting value as an integer or `a/b`.
        #[arg(long, conflicts_with = "config", allow_hyphen_values = true)]
        value: Option<String>,
        /// File holding a configuration `<left>|<core>|<right>`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        steps: usize,
        /// Positions `lo..hi`, both inclusive.
        #[arg(long, default_value = "-20..10", allow_hyphen_values = true)]
        window: String,
        #[arg(long, value_enum, default_value_t = Format::Ascii)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Count trace words per length and compare with the closed form.
    Language {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Sweep)]
        method: MethodArg,
    },
    /// Companion digits next to the trace image.
    Companion {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        value: String,
        /// Indices `from..to`, both inclusive.
        #[arg(long, default_value = "0..10")]
        range: String,
    },
    /// Distinct label counts of a labeled graph.
    Sofic {
        #[arg(long, value_enum)]
        graph: GraphArg,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        q: Option<u32>,
        /// Edge list, one `from to label` per line.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        n_max: usize,
    },
    /// Run the lemma checks.
    Verify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
    /// Rank values `num/(pq)^k` by how long their first fractional digit stays below p.
    MahlerSearch {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 100)]
        max_num: u64,
        #[arg(long, default_value_t = 4)]
        max_exp: u32,
        #[arg(long, default_value_t = 40)]
        steps: usize,
        /// Only print the best `top` rows.
        #[arg(long)]
        top: Option<usize>,
    },
    /// Extend the seed `p` leftwards so the column stays below p.
    ConstrainedPrefix {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Pgm,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Sweep,
    Windows,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphArg {
    Zpq,
    Trans32,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lemmas,
    All,
}

/// A failed run: the message for stderr and the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn mismatch(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => 3,
            Error::ConsistencyViolation(_)
            | Error::ShapeViolation { .. }
            | Error::CounterexampleFound(_)
            | Error::NonIntegral(_)
            | Error::CollisionFound(_)
            | Error::NoChoiceExists { .. } => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

fn budget() -> Result<u128, Failure> {
    match std::env::var("TRACELAB_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("TRACELAB_BUDGET must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn parse_range(s: &str) -> Result<(i64, i64), Failure> {
    let (a, b) = s.split_once("..").ok_or_else(|| Failure::usage(format!("expected lo..hi, got {s:?}")))?;
    let num = |t: &str| t.trim().parse::<i64>().map_err(|_| Failure::usage(format!("bad bound {t:?} in {s:?}")));
    let (lo, hi) = (num(a)?, num(b)?);
    if lo > hi {
        return Err(Failure::usage(format!("empty range {s:?}")));
    }
    Ok((lo, hi))
}

fn simulate(
    params: Params,
    value: Option<String>,
    config: Option<PathBuf>,
    steps: usize,
    window: &str,
    format: Format,
) -> Result<Vec<u8>, Failure> {
    let x = match (value, config) {
        (Some(v), None) => encode(&parse_rational(&v)?, params)?,
        (None, Some(path)) => Configuration::parse(&std::fs::read_to_string(path)?, params)?,
        _ => return Err(Failure::usage("give exactly one of --value or --config")),
    };
    let (lo, hi) = parse_range(window)?;
    let cells = (hi - lo + 1) as u128 * steps as u128;
    let budget = budget()?;
    if cells > budget {
        return Err(Error::BudgetExceeded { required: cells, budget }.into());
    }
    let style = match format {
        Format::Ascii => DiagramStyle::Ascii,
        Format::Pgm => DiagramStyle::Pgm,
    };
    Ok(render_diagram(&Ca::new(params)?, &x, steps, lo, hi, style)?)
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "MATCH"
    } else {
        "MISMATCH"
    }
}

fn language(params: Params, n_max: usize, method: MethodArg) -> Result<(String, bool), Failure> {
    let method = match method {
        MethodArg::Sweep => Method::Sweep,
        MethodArg::Windows => Method::Windows,
    };
    let opts = EnumOptions { budget: budget()?, method };
    let mut out = String::from("n,words,formula,w2,w2_formula,words_match,w2_match\n");
    let mut all_ok = true;
    let ordered = params.p() > params.q();
    for n in 1..=n_max {
        let level = enumerate_language(params, n, &opts)?;
        let (formula, w2f) = if ordered {
            (complexity_closed_form(n, params)?.to_string(), w2_count(n, params).to_string())
        } else {
            (String::new(), String::new())
        };
        let (m1, m2) = if ordered {
            let a = formula == level.words.len().to_string();
            let b = w2f == level.w2.len().to_string();
            all_ok &= a && b;
            (flag(a), flag(b))
        } else {
            ("", "")
        };
        let _ = writeln!(out, "{n},{},{formula},{},{w2f},{m1},{m2}", level.words.len(), level.w2.len());
    }
    Ok((out, all_ok))
}

fn companion(params: Params, value: &str, range: &str) -> Result<(String, bool), Failure> {
    let xi = parse_rational(value)?;
    let (lo, hi) = parse_range(range)?;
    if lo < 0 {
        return Err(Failure::usage("trace indices start at 0"));
    }
    let ca = Ca::new(params)?;
    let rows = companion_rows(&ca, &xi, lo as usize, hi as usize)?;
    let mut out = String::from("i,trace_i,trace_i_plus_1,Phi,phi,match,compfrac_sum,compfrac_error,within_bound\n");
    let mut all_ok = true;
    for r in &rows {
        let cf = compfrac_reconstruct(&xi, r.i, params)?;
        all_ok &= r.matches();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.i,
            r.trace_i,
            r.trace_next,
            r.big_phi,
            r.phi,
            flag(r.matches()),
            format_rational(&cf.partial_sum),
            format_rational(&cf.error),
            cf.within_bound()
        );
    }
    Ok((out, all_ok))
}

fn sofic(
    graph: GraphArg,
    p: Option<u32>,
    q: Option<u32>,
    file: Option<PathBuf>,
    n_max: usize,
) -> Result<(String, bool), Failure> {
    let (g, formula): (LabeledGraph, Option<Params>) = match graph {
        GraphArg::Trans32 => (build_transitive_32(), None),
        GraphArg::Zpq => {
            let (Some(p), Some(q)) = (p, q) else {
                return Err(Failure::usage("--graph zpq needs --p and --q"));
            };
            let params = Params::new(p, q)?;
            (build_zpq(params)?, Some(params))
        }
        GraphArg::File => {
            let path = file.ok_or_else(|| Failure::usage("--graph file needs --file"))?;
            (LabeledGraph::parse_edge_list(&std::fs::read_to_string(path)?)?, None)
        }
    };
    let counts = label_counts(&g, n_max, DEFAULT_FRONTIER_CAP)?;
    let mut rows = Vec::with_capacity(n_max);
    for (n, count) in counts.into_iter().enumerate().skip(1) {
        let formula = match (graph, formula) {
            (GraphArg::Trans32, _) => Some(transitive_32_formula(n)),
            (GraphArg::Zpq, Some(params)) => Some(complexity_closed_form(n, params)?),
            _ => None,
        };
        rows.push(CountRow { n, count, formula });
    }
    let ok = rows.iter().all(|r| r.matches() != Some(false));
    Ok((count_csv(&rows), ok))
}

fn verify(params: Params, suite: SuiteArg) -> Result<(String, bool), Failure> {
    let suite = match suite {
        SuiteArg::Lemmas => Suite::Lemmas,
        SuiteArg::All => Suite::All,
    };
    let report = run_suite(params, suite)?;
    let mut out = String::new();
    for o in &report.outcomes {
        let _ = writeln!(out, "{o}");
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "{verdict} {} checks for {params}", report.outcomes.len());
    Ok((out, report.passed()))
}

fn constrained_prefix(params: Params, steps: usize) -> Result<String, Failure> {
    let pre = build_constrained_prefix(&Ca::new(params)?, steps)?;
    let mut out = String::from("i,z_minus_i,trace_i,reachable\n");
    let _ = writeln!(out, "0,{},{},", params.p(), pre.trace[0]);
    for i in 1..=steps {
        let reach: Vec<String> = pre.reachable[i - 1].iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "{i},{},{},{}", pre.left_digits[i - 1], pre.trace[i], reach.join(" "));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let mut stdout = std::io::stdout().lock();
    let (text, ok) = match cli.command {
        Command::Simulate { pair, value, config, steps, window, format, output } => {
            let bytes = simulate(pair.params()?, value, config, steps, &window, format)?;
            match output {
                Some(path) => std::fs::write(path, bytes)?,
                None => stdout.write_all(&bytes)?,
            }
            return Ok(());
        }
        Command::Language { pair, n_max, method } => language(pair.params()?, n_max, method)?,
        Command::Companion { pair, value, range } => companion(pair.params()?, &value, &range)?,
        Command::Sofic { graph, p, q, file, n_max } => sofic(graph, p, q, file, n_max)?,
        Command::Verify { pair, suite } => verify(pair.params()?, suite)?,
        Command::MahlerSearch { pair, max_num, max_exp, steps, top } => {
            let params = pair.params()?;
            let mut rows = search_finite_columns(max_num, max_exp, steps, params, budget()?)?;
            if let Some(k) = top {
                rows.truncate(k);
            }
            (search_csv(&rows), true)
        }
        Command::ConstrainedPrefix { pair, steps } => (constrained_prefix(pair.params()?, steps)?, true),
    };
    stdout.write_all(text.as_bytes())?;
    if ok {
        Ok(())
    } else {
        Err(Failure::mismatch("mismatch against the expected values"))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tracelab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
