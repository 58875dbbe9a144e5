//! Command-line harness for locally private membership estimation.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use privmix_core::error::Error as CoreError;
use privmix_core::estimator::{estimate_from_graph, EstimatorConfig};
use privmix_core::evaluation::{self, permutation_loss};
use privmix_core::model::{audit_assumptions, gen_theta, make_planted_b, AuditConfig, DcmmParams, DegreeConvention};
use privmix_core::privacy::{symmetric_edge_flip, PrivacyParams};
use privmix_core::rng::RngStream;
use privmix_cli::bins::{alignment_bins_five, alignment_bins_two, FiveBinConfig, TwoBinConfig};
use privmix_cli::edgelist::{load_edge_list, write_edge_list, EdgeListGraph};
use privmix_cli::emit::{emit_results, Format};
use privmix_cli::pi_csv::{read_pi_csv, write_pi_csv};
use privmix_cli::sweep::{run_sweep, SweepSpec};
use privmix_cli::HarnessError;

#[derive(Parser)]
#[command(
    name = "privmix",
    version,
    about = "Locally private mixed-membership estimation on networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation sweep over degree scale and privacy budget.
    Simulate(SimulateArgs),
    /// Release an edge list under edge-level local differential privacy.
    Privatize(PrivatizeArgs),
    /// Estimate memberships from an edge-list graph.
    Estimate(EstimateArgs),
    /// Permutation-minimized loss between two membership CSV files.
    Evaluate(EvaluateArgs),
    /// Model audit and theory rates for a synthetic configuration.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 800)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Comma-separated degree-scale grid.
    #[arg(long = "b-n", value_delimiter = ',', default_value = "5,6,7,8,9,10,11,12")]
    b_n: Vec<f64>,
    /// Comma-separated privacy budgets; `inf` runs non-private.
    #[arg(long, value_delimiter = ',', default_value = "5,6,7,8,inf")]
    epsilon: Vec<String>,
    #[arg(long = "beta-n", default_value_t = 0.9)]
    beta_n: f64,
    #[arg(long = "theta-lo", default_value_t = 0.3)]
    theta_lo: f64,
    #[arg(long = "theta-hi", default_value_t = 5.0)]
    theta_hi: f64,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Base seed (required: sweeps are reproducible artifacts).
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 0.01)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long = "pure-fraction", default_value_t = 0.5)]
    pure_fraction: f64,
    /// Record wall-clock runtimes (makes the CSV non-reproducible).
    #[arg(long, default_value_t = false)]
    timing: bool,
    #[arg(long = "out-dir", default_value = "results")]
    out_dir: PathBuf,
    /// Output formats: csv, svg.
    #[arg(long, value_delimiter = ',', default_value = "csv")]
    formats: Vec<String>,
}

#[derive(Args)]
struct PrivatizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// Privacy budget; omit for a non-private run on the raw graph.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 0.01)]
    c: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long)]
    output: PathBuf,
    /// Also print two-bin alignment labels.
    #[arg(long, default_value_t = false)]
    bins: bool,
    /// Print five-bin likelihood labels for this column (0-based).
    #[arg(long = "five-bin-column")]
    five_bin_column: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Estimated membership CSV.
    #[arg(long)]
    estimate: PathBuf,
    /// Reference membership CSV.
    #[arg(long)]
    reference: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long, default_value_t = 800)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long = "b-n", default_value_t = 8.0)]
    b_n: f64,
    #[arg(long = "beta-n", default_value_t = 0.9)]
    beta_n: f64,
    #[arg(long = "theta-lo", default_value_t = 0.3)]
    theta_lo: f64,
    #[arg(long = "theta-hi", default_value_t = 5.0)]
    theta_hi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Privacy budget; `inf` for the non-private rate.
    #[arg(long, default_value = "inf")]
    epsilon: String,
    #[arg(long = "pure-fraction", default_value_t = 0.5)]
    pure_fraction: f64,
    /// Expected-degree convention: centered (default) or expected.
    #[arg(long, default_value = "centered")]
    convention: String,
}

fn main() -> ExitCode {
    // die quietly when stdout is a closed pipe (e.g. piped into head)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version output
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for data problems, 3 for numerical failures.
fn exit_code(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Core(
            CoreError::RegularizationFailure { .. }
            | CoreError::NumericalFailure { .. }
            | CoreError::DegenerateGeometry
            | CoreError::VertexHuntInfeasible,
        ) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> privmix_cli::Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Privatize(args) => privatize(args),
        Command::Estimate(args) => estimate(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Diagnose(args) => diagnose(args),
    }
}

fn parse_epsilon_entry(text: &str) -> privmix_cli::Result<Option<f64>> {
    if text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinity") {
        return Ok(None);
    }
    let v: f64 = text
        .parse()
        .map_err(|e| HarnessError::InvalidInput(format!("bad epsilon {text:?}: {e}")))?;
    Ok(Some(v))
}

fn simulate(args: SimulateArgs) -> privmix_cli::Result<()> {
    let mut epsilon_grid = Vec::new();
    for entry in &args.epsilon {
        epsilon_grid.push(parse_epsilon_entry(entry)?);
    }
    let mut formats = Vec::new();
    for f in &args.formats {
        match f.as_str() {
            "csv" => formats.push(Format::Csv),
            "svg" => formats.push(Format::Svg),
            other => {
                return Err(HarnessError::InvalidInput(format!(
                    "unknown format {other:?} (expected csv or svg)"
                )))
            }
        }
    }
    let spec = SweepSpec {
        n: args.n,
        k: args.k,
        b_n_grid: args.b_n,
        epsilon_grid,
        beta_n: args.beta_n,
        theta_lo: args.theta_lo,
        theta_hi: args.theta_hi,
        reps: args.reps,
        base_seed: args.seed,
        pure_fraction: args.pure_fraction,
        tau: args.tau,
        c: args.c,
        gamma: args.gamma,
        timing: args.timing,
    };
    let rows = run_sweep(&spec)?;
    let created = emit_results(&rows, &args.out_dir, &formats, &spec.metadata())?;
    for path in created {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn privatize(args: PrivatizeArgs) -> privmix_cli::Result<()> {
    let graph = load_edge_list(&args.input)?;
    let privacy = PrivacyParams::new(args.epsilon)?;
    let mut stream = RngStream::seed(args.seed);
    let released = symmetric_edge_flip(graph.adjacency(), privacy, &mut stream);
    let out = EdgeListGraph::from_adjacency_with_labels(released.to_adjacency(), graph.labels());
    write_edge_list(&out, &args.output)?;
    println!(
        "privatized {} nodes, {} edges -> {} edges at epsilon = {}",
        graph.n(),
        graph.edge_count(),
        out.edge_count(),
        args.epsilon
    );
    Ok(())
}

fn estimate(args: EstimateArgs) -> privmix_cli::Result<()> {
    let graph = load_edge_list(&args.input)?;
    let mut cfg = EstimatorConfig::new(args.k);
    cfg.tau = args.tau;
    cfg.c = args.c;
    cfg.gamma = args.gamma;
    match args.epsilon {
        Some(eps) if eps.is_infinite() => {} // non-private
        Some(eps) => cfg.privacy = Some(PrivacyParams::new(eps)?),
        None => {}
    }
    let mut stream = RngStream::seed(args.seed);
    let est = estimate_from_graph(graph.adjacency(), &cfg, &mut stream)?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    write_pi_csv(&est.pi_hat, Some(graph.labels()), &args.output)?;
    println!(
        "estimated {} nodes into {} communities ({} default rows); wrote {}",
        est.n(),
        est.k(),
        est.default_row.iter().filter(|&&d| d).count(),
        args.output.display()
    );
    if args.bins {
        let labels = alignment_bins_two(&est.pi_hat, TwoBinConfig::default());
        for (name, label) in graph.labels().iter().zip(labels.iter()) {
            println!("{name} {}", label.as_str());
        }
    }
    if let Some(col) = args.five_bin_column {
        if col >= est.k() {
            return Err(HarnessError::InvalidInput(format!(
                "five-bin column {col} out of range for K = {}",
                est.k()
            )));
        }
        let labels = alignment_bins_five(&est.pi_hat, col, FiveBinConfig::default());
        for (name, label) in graph.labels().iter().zip(labels.iter()) {
            println!("{name} {}", label.as_str());
        }
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> privmix_cli::Result<()> {
    let (_, pi_hat) = read_pi_csv(&args.estimate)?;
    let (_, pi) = read_pi_csv(&args.reference)?;
    let report = permutation_loss(&pi_hat, &pi)?;
    println!("loss {:.12}", report.loss);
    println!(
        "best_permutation {}",
        report
            .best_permutation
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> privmix_cli::Result<()> {
    let epsilon = parse_epsilon_entry(&args.epsilon)?.unwrap_or(f64::INFINITY);
    let convention = match args.convention.as_str() {
        "centered" => DegreeConvention::Centered,
        "expected" => DegreeConvention::Expected,
        other => {
            return Err(HarnessError::InvalidInput(format!(
                "unknown convention {other:?} (expected centered or expected)"
            )))
        }
    };
    let root = RngStream::seed(args.seed);
    let mut theta_stream = root.split(0);
    let theta = gen_theta(args.n, args.b_n, args.theta_lo, args.theta_hi, &mut theta_stream)?;
    let mut pi_stream = root.split(1);
    let pi = privmix_cli::sweep::generate_pi(args.n, args.k, args.pure_fraction, &mut pi_stream);
    let params = DcmmParams::new(theta, pi, make_planted_b(args.k, args.beta_n)?)?;

    let audit_cfg = AuditConfig {
        convention,
        ..AuditConfig::default()
    };
    let report = audit_assumptions(&params, &audit_cfg);
    println!("# assumption audit ({convention:?} convention)");
    if let Some(issue) = &report.g_issue {
        println!("note: {issue}");
    }
    for check in &report.checks {
        let status = match check.satisfied {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "n/a ",
        };
        println!("{status}  {:<28} margin {:+.6e}", check.name, check.margin);
    }

    println!("# theory rates");
    match (report.alpha_n, report.beta_n) {
        (Some(alpha), Some(beta)) => {
            let diag =
                evaluation::theory_diagnostics(params.theta(), args.k, epsilon, alpha, beta)?;
            for w in &diag.warnings {
                println!("note: {w}");
            }
            println!("alpha_n        {:.6}", diag.alpha_n);
            println!("beta_n         {:.6}", diag.beta_n);
            println!("delta_n        {:.6}", diag.delta_n);
            println!("coth_factor    {:.6}", diag.coth_factor);
            println!("err_n          {:.6}", diag.err_n);
            println!("risk_integral  {:.6}", diag.risk_integral);
            println!("lower_integral {:.6}", diag.lower_integral);
            println!("gap_ratio      {:.6}", diag.gap_ratio);
            println!("log(n)*err_n^2 {:.6}", diag.log_n_err_sq);
        }
        _ => {
            println!(
                "BG spectrum not computable under the {convention:?} convention; \
                 rerun with --convention expected"
            );
        }
    }
    Ok(())
}
