use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use peerselect::apportionment::{allocation_from_shares_traced, sample_allocation};
use peerselect::experiments::{run_sweep, write_records_csv, write_summary_csv, SweepGrid};
use peerselect::generation::generate_instance;
use peerselect::io::{
    read_assignment, read_clustering, read_profile, write_assignment, write_clustering,
    write_ground_truth, write_profile,
};
use peerselect::mechanisms::DollarPartitionPlan;
use peerselect::{
    run_mechanism, validate_instance, Error, ExactProfile, ExactShares, MechanismId, Rational,
    ReviewAssignment, Scalar, Seed, ValidationMode,
};

#[derive(Parser)]
#[command(name = "peerselect", version, about = "Impartial peer selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on a review profile and print the winners.
    Select(SelectArgs),
    /// Turn fractional quotas into a lottery over integer allocations.
    Apportion(ApportionArgs),
    /// Generate a synthetic instance.
    Gen(GenArgs),
    /// Run a parameter sweep and write result tables.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    mechanism: MechanismId,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Defaults to the reviews present in the profile.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print exact selection probabilities instead of winners (edp only).
    #[arg(long)]
    probabilities: bool,
    /// Reject any validation finding and require k <= n / ell.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["distribution", "sample"])))]
struct ApportionArgs {
    /// Comma-separated quotas summing to an integer.
    #[arg(long, allow_hyphen_values = true)]
    shares: String,
    #[arg(long)]
    distribution: bool,
    #[arg(long)]
    sample: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print every loop step, including zero-probability ones.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    phi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Files are written as <prefix>_profile.csv, _clusters.csv,
    /// _assignment.csv and _truth.txt.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 130)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [15, 20, 25, 30, 35])]
    k_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [5, 7, 9, 11, 13, 15])]
    m_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5, 6])]
    ell_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2, 0.35, 0.5])]
    phi_list: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for records.csv and summary.csv.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    let result = match cli.command {
        Command::Select(args) => select(args, &mut stdout),
        Command::Apportion(args) => apportion(args, &mut stdout),
        Command::Gen(args) => gen(args),
        Command::Simulate(args) => simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_parse_error() { 3 } else { 2 })
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn select(args: SelectArgs, out: &mut impl Write) -> Result<(), Error> {
    let clustering = args.clusters.as_deref().map(read).transpose()?;
    let clustering = clustering.as_deref().map(read_clustering).transpose()?;
    let profile_text = read(&args.profile)?;
    let n = clustering.as_ref().map(|c| c.n());
    let profile: ExactProfile = read_profile(&profile_text, n)?;
    let assignment = match &args.assignment {
        Some(path) => read_assignment(&read(path)?, Some(profile.n()))?,
        None => ReviewAssignment::from_profile(&profile),
    };

    if let Some(c) = &clustering {
        let mode = if args.strict {
            ValidationMode::Strict
        } else {
            ValidationMode::Lenient
        };
        let report = validate_instance(&profile, c, &assignment, args.k, mode);
        for v in &report.violations {
            eprintln!("{}: {v}", if v.is_fatal() { "invalid" } else { "warning" });
        }
        if report.has_fatal() || (args.strict && !report.is_ok()) {
            return Err(Error::InvalidInstance(report));
        }
    } else if args.mechanism.needs_clustering() {
        return Err(Error::InvalidParameter(format!(
            "mechanism {} needs --clusters",
            args.mechanism
        )));
    }

    if args.probabilities {
        if args.mechanism != MechanismId::ExactDollarPartition {
            return Err(Error::InvalidParameter(
                "--probabilities is only available for edp".into(),
            ));
        }
        let clustering = clustering.expect("checked above");
        let plan = DollarPartitionPlan::build(&profile, &clustering, &assignment, args.k)?;
        for (agent, p) in plan.selection_probabilities()? {
            writeln!(out, "{agent},{}", p.to_exact_string())?;
        }
        for (j, s) in plan.shares.shares().iter().enumerate() {
            writeln!(out, "# cluster {j} share {}", s.to_exact_string())?;
        }
        return Ok(());
    }

    let outcome = run_mechanism(
        args.mechanism,
        &profile,
        clustering.as_ref(),
        &assignment,
        args.k,
        Seed(args.seed),
    )?;
    for w in outcome.winners {
        writeln!(out, "{w}")?;
    }
    Ok(())
}

fn apportion(args: ApportionArgs, out: &mut impl Write) -> Result<(), Error> {
    let shares = ExactShares::parse(&args.shares)?;
    let (dist, trace) = allocation_from_shares_traced(&shares)?;
    if args.trace {
        for (i, step) in trace.iter().enumerate() {
            writeln!(out, "# step {}: {step}", i + 1)?;
        }
    }
    if args.distribution {
        for (allocation, p) in dist.support() {
            writeln!(out, "{allocation}\t{}", p.to_exact_string())?;
        }
    } else {
        writeln!(out, "{}", sample_allocation(&dist, Seed(args.seed)))?;
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Error> {
    let instance = generate_instance::<Rational>(args.n, args.m, args.ell, args.phi, Seed(args.seed))?;
    let files = [
        ("profile.csv", write_profile(&instance.profile)),
        ("clusters.csv", write_clustering(&instance.clustering)),
        ("assignment.csv", write_assignment(&instance.assignment)),
        ("truth.txt", write_ground_truth(&instance.ground_truth)),
    ];
    for (suffix, body) in files {
        fs::write(format!("{}_{suffix}", args.out_prefix), body)?;
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let grid = SweepGrid {
        n: args.n,
        trials: args.trials,
        ks: args.k_list,
        ms: args.m_list,
        ells: args.ell_list,
        phis: args.phi_list,
        seed: Seed(args.seed),
    };
    let result = run_sweep(&grid)?;
    for s in &result.skipped {
        match s.trial {
            Some(t) => eprintln!("skipped {} trial {t}: {}", s.cell, s.reason),
            None => eprintln!("skipped {}: {}", s.cell, s.reason),
        }
    }
    fs::create_dir_all(&args.out)?;
    let mut records = Vec::new();
    write_records_csv(&result.records, &mut records)?;
    fs::write(args.out.join("records.csv"), records)?;
    let mut summary = Vec::new();
    write_summary_csv(&result.summaries, &mut summary)?;
    fs::write(args.out.join("summary.csv"), summary)?;
    Ok(())
}
