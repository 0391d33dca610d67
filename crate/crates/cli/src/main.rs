mod render;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use chromopt::graphs::{count_colorings_dc, g_alpha_clusters, turan_parts, CountResult};
use chromopt::{
    construct_counterexample, count_colorings_brute, count_colorings_multipartite,
    embed_counterexample, global_solve, scan_counterexamples, scan_counterexamples_numeric, ColoredGraph,
    SolveOptions,
};

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "chromopt", version, about = "Optimal proper-coloring densities, counterexamples and exact counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Compute OPT_q(s) and an optimal weight vector.
    Solve {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        s: f64,
        /// Also try near-partitions of every size.
        #[arg(long)]
        paranoid: bool,
        #[arg(long, value_enum, default_value = "text")]
        output: Output,
    },
    /// Build a vector that beats the balanced one.
    Counterexample(CounterexampleArgs),
    /// Count proper colorings of one graph.
    Count(CountArgs),
    /// Coloring growth rates of Turán graphs over a range of n (CSV).
    Sweep {
        /// Number of parts s of T_s(n).
        #[arg(long)]
        turan: usize,
        #[arg(long)]
        q: u32,
        /// Inclusive range `start:stop:step`.
        #[arg(long)]
        n: String,
    },
    /// Continuous relaxation with a floor on the weights.
    Relax {
        #[arg(long)]
        s: f64,
        #[arg(long, required_unless_present = "profile")]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Instead, print F(θ) on this many points of [0, π/3] (needs s <= 3).
        #[arg(long)]
        profile: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        output: Output,
    },
    /// Run a self-check suite.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: verify::Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        output: Output,
    },
}

#[derive(Args)]
struct CounterexampleArgs {
    #[arg(long)]
    s: u64,
    #[arg(long, requires = "r", conflicts_with_all = ["q", "scan"])]
    t: Option<u64>,
    #[arg(long)]
    r: Option<u64>,
    /// Embed the 13-color vector into the s-balanced vector for q.
    #[arg(long, conflicts_with = "scan")]
    q: Option<u32>,
    /// List q within distance s of --q0 covered by the (s, t, r) family.
    #[arg(long, requires = "q0")]
    scan: bool,
    #[arg(long)]
    q0: Option<u64>,
    /// With --scan, keep every q where the construction wins numerically.
    #[arg(long, requires = "scan")]
    numeric: bool,
    #[arg(long, value_enum, default_value = "json")]
    output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Brute,
    Dc,
    Multipartite,
}

#[derive(Args)]
struct CountArgs {
    /// Count colorings of T_s(n) with this many parts.
    #[arg(long, requires = "n", conflicts_with_all = ["file", "parts", "solve_s"])]
    turan: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Graph file: a line `n m`, then m lines `u v`.
    #[arg(long, conflicts_with_all = ["parts", "solve_s"])]
    file: Option<PathBuf>,
    /// Complete multipartite graph with these part sizes, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "solve_s")]
    parts: Option<Vec<usize>>,
    /// Count G_α(n) for the optimal α of OPT_q(s); needs --n.
    #[arg(long = "solve-s", requires = "n")]
    solve_s: Option<f64>,
    #[arg(long)]
    q: u32,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    #[arg(long, value_enum, default_value = "text")]
    output: Output,
}

/// Sorts failures into the exit codes.
fn exit_code(err: &anyhow::Error) -> u8 {
    use chromopt::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::InvalidParameter(_) | E::TooLarge(_) | E::BadColorSet(..) | E::Parse(_) | E::NegativeWeight { .. }) => {
            EXIT_USAGE
        }
        Some(E::NoSolution(_) | E::BudgetExhausted(_)) => EXIT_INTERNAL,
        None if err.downcast_ref::<UsageError>().is_some() => EXIT_USAGE,
        None => EXIT_INTERNAL,
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("CHROMOPT_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("CHROMOPT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn parse_range(range: &str) -> anyhow::Result<Vec<usize>> {
    let parts: Vec<&str> = range.split(':').collect();
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("bad range {range:?}: {e}")))?;
    let (start, stop, step) = match nums[..] {
        [a, b] => (a, b, 1),
        [a, b, c] => (a, b, c),
        _ => return Err(usage(format!("range must be start:stop[:step], got {range:?}"))),
    };
    if step == 0 || start > stop {
        return Err(usage(format!("empty or invalid range {range:?}")));
    }
    Ok((start..=stop).step_by(step).collect())
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: writing output: {e}");
            std::process::exit(EXIT_INTERNAL.into());
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Solve { q, s, paranoid, output } => {
            let rep = global_solve(q, s, SolveOptions { paranoid })?;
            emit(&render::solve(&rep, output));
        }
        Command::Counterexample(a) => counterexample(a)?,
        Command::Count(a) => count(a)?,
        Command::Sweep { turan, q, n } => {
            let ns = parse_range(&n)?;
            emit(&render::sweep(turan, q, &ns)?);
        }
        Command::Relax { s, k, delta, profile, output } => match profile {
            Some(grid) => {
                let p = chromopt::f_theta_profile(s, grid)?;
                emit(&render::profile(&p, output));
            }
            None => {
                let sol = chromopt::relaxed_solve(s, k.expect("clap enforces --k"), delta)?;
                let bound = chromopt::relaxed_bound(s, delta, sol.ell)?;
                emit(&render::relaxed(&sol, s, bound, output));
            }
        },
        Command::Verify { suite, seed, output } => {
            let results = verify::run(suite, seed);
            emit(&render::verify(&results, output));
            if results.iter().any(|r| !r.passed) {
                return Ok(EXIT_VERIFY);
            }
        }
    }
    Ok(0)
}

fn counterexample(a: CounterexampleArgs) -> anyhow::Result<()> {
    if a.scan {
        let q0 = a.q0.expect("clap enforces --q0");
        let list = if a.numeric { scan_counterexamples_numeric(a.s, q0) } else { scan_counterexamples(a.s, q0) };
        emit(&render::scan(a.s, q0, a.numeric, &list, a.output));
    } else if let (Some(t), Some(r)) = (a.t, a.r) {
        let rep = construct_counterexample(a.s, t, r)?;
        emit(&render::family(&rep, a.output));
    } else if let Some(q) = a.q {
        let s = u32::try_from(a.s).map_err(|_| usage("--s is too large for embedding"))?;
        let v = embed_counterexample(s, q)?;
        emit(&render::embed(s, q, v.as_ref(), a.output)?);
    } else {
        bail!(usage("give --t and --r, --q, or --scan with --q0"));
    }
    Ok(())
}

fn count(a: CountArgs) -> anyhow::Result<()> {
    // complete multipartite inputs keep their part sizes for the closed form
    let (graph, parts): (Option<ColoredGraph>, Option<Vec<usize>>) = if let Some(s) = a.turan {
        let n = a.n.expect("clap enforces --n");
        (None, Some(turan_parts(n, s)?))
    } else if let Some(p) = a.parts {
        (None, Some(p))
    } else if let Some(s) = a.solve_s {
        let n = a.n.expect("clap enforces --n");
        let rep = global_solve(a.q, s, SolveOptions::default())?;
        let v = rep.best.weight_vector();
        let clusters = g_alpha_clusters(&v, n)?;
        let is_partition = clusters.iter().enumerate().all(|(i, (x, _))| clusters[i + 1..].iter().all(|(y, _)| x.is_disjoint(y)));
        if is_partition {
            (None, Some(clusters.into_iter().map(|(_, c)| c).collect()))
        } else {
            (Some(chromopt::build_g_alpha(&v, n)?), None)
        }
    } else if let Some(path) = a.file {
        let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        (Some(ColoredGraph::parse(&text)?), None)
    } else {
        bail!(usage("give one of --turan, --parts, --solve-s or --file"));
    };
    let graph_of = |parts: &[usize]| ColoredGraph::complete_multipartite(parts);
    let result: CountResult = match (a.method, &parts) {
        (Method::Auto | Method::Multipartite, Some(p)) => count_colorings_multipartite(p, a.q)?,
        (Method::Multipartite, None) => bail!(usage("the multipartite counter needs --turan, --parts or a partition-supported optimum")),
        (Method::Brute, _) => count_colorings_brute(graph.as_ref().unwrap_or(&graph_of(parts.as_deref().unwrap_or(&[]))), a.q)?,
        (Method::Dc | Method::Auto, _) => {
            count_colorings_dc(graph.as_ref().unwrap_or(&graph_of(parts.as_deref().unwrap_or(&[]))), a.q)?
        }
    };
    let n = parts.as_ref().map(|p| p.iter().sum()).or(graph.as_ref().map(ColoredGraph::n)).unwrap_or(0);
    emit(&render::count(&result, n, a.output));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
