use clap::{Args, Parser, Subcommand};
use rislab::analytic::corr_coeff;
use rislab::channel::{ChannelDims, PartitionPlan};
use rislab::dmt::{check_partition_condition, cutset_curve, cutset_summary, dmt_ar, dmt_fr_lower_bound, dmt_pr};
use rislab::experiment::{
    figure_preset, parse_spec, run_experiment, write_dmt_table, write_table, FigureOutput, Outcome, PresetOverrides,
};
use rislab::montecarlo::with_workers;
use rislab::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const OUT_DIR_VAR: &str = "RISLAB_OUT_DIR";

/// Outage experiments for partition-based RIS-aided MIMO channels.
#[derive(Parser)]
#[command(name = "rislab", version)]
struct Cli {
    /// Monte Carlo worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment description (flat TOML).
    Run {
        specfile: PathBuf,
        /// Output CSV path; overrides the description's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a figure dataset (fig3 .. fig8).
    Figure(FigureArgs),
    /// Print DMT curves and the asymptotic summary of a channel.
    Dmt {
        /// N,Q,L
        #[arg(long, value_parser = parse_dims)]
        dims: ChannelDims,
        /// Number of sub-surfaces.
        #[arg(long = "K", short = 'K', default_value_t = 1)]
        k: usize,
        /// Target rate for the SISO coding gain.
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
    },
    /// Print the slot-to-slot gain correlation for Q elements in K parts.
    Corr {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Args)]
struct FigureArgs {
    name: String,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dims(s: &str) -> Result<ChannelDims, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n, q, l] => ChannelDims::new(n, q, l).map_err(|e| e.to_string()),
        _ => Err(format!("expected N,Q,L, got {s:?}")),
    }
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_VAR).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Accuracy { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn finish_outcome(outcome: &Outcome, path: &Path) -> Result<(), Error> {
    report_written(&write_table(&outcome.table, path)?);
    match &outcome.failure {
        Some(e) => Err(e.clone()),
        None => Ok(()),
    }
}

fn run(specfile: &Path, out: Option<PathBuf>) -> Result<(), Error> {
    let text = std::fs::read_to_string(specfile).map_err(|e| Error::Io(format!("{}: {e}", specfile.display())))?;
    let stem = specfile.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    let spec = parse_spec(&text, stem)?;
    let path = out
        .or_else(|| spec.output.clone())
        .unwrap_or_else(|| out_dir().join(format!("{}.csv", spec.name)));
    let outcome = run_experiment(&spec)?;
    finish_outcome(&outcome, &path)
}

fn figure(args: FigureArgs) -> Result<(), Error> {
    let overrides = PresetOverrides {
        trials: args.trials,
        seed: args.seed,
    };
    let path = args.out.unwrap_or_else(|| out_dir().join(format!("{}.csv", args.name)));
    match figure_preset(&args.name, &overrides)? {
        FigureOutput::Outage(outcome) => finish_outcome(&outcome, &path),
        FigureOutput::Dmt(table) => {
            report_written(&write_dmt_table(&table, &path)?);
            Ok(())
        }
    }
}

fn dmt(dims: ChannelDims, k: usize, rate: f64) -> Result<(), Error> {
    let plan = PartitionPlan::contiguous(dims.q(), k)?;
    println!("{}", dmt_pr(dims));
    if k > 1 {
        println!("{}", dmt_ar(dims, &plan)?);
        println!("{}", dmt_fr_lower_bound(dims, &plan)?);
    }
    println!("{}", cutset_curve(dims));
    let s = cutset_summary(dims, rate);
    println!("d_max = {}, r_max = {}", s.d_max, s.r_max);
    if let Some(g) = s.coding_gain {
        println!("coding gain = {g}");
    }
    println!("partition window (m) = {:?}", s.partition_window);
    println!("m = {}: {}", plan.m(), check_partition_condition(dims, plan.m())?);
    Ok(())
}

fn corr(q: usize, k: usize) -> Result<(), Error> {
    if k == 0 || q % k != 0 {
        return Err(Error::Config(format!("K = {k} must divide Q = {q}")));
    }
    let model = corr_coeff(q, k, q / k)?;
    println!("zeta = {}", model.zeta);
    println!("limit (Q -> inf) = {}", model.limit);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = with_workers(workers, move || match cli.cmd {
        Command::Run { specfile, out } => run(&specfile, out),
        Command::Figure(args) => figure(args),
        Command::Dmt { dims, k, rate } => dmt(dims, k, rate),
        Command::Corr { q, k } => corr(q, k),
    })
    .and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rislab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let acc = Error::Accuracy {
            message: "m".into(),
            partial: 0.0,
            estimate: 1.0,
        };
        assert_eq!(exit_code(&acc), 3);
        assert_eq!(exit_code(&Error::Spec { line: 2, message: "m".into() }), 2);
        assert_eq!(exit_code(&Error::Config("m".into())), 2);
        assert_eq!(exit_code(&Error::Io("m".into())), 1);
    }

    #[test]
    fn dims_argument() {
        assert_eq!(parse_dims("2,3,2").unwrap(), ChannelDims::new(2, 3, 2).unwrap());
        assert!(parse_dims("2,3").is_err());
        assert!(parse_dims("2,x,2").is_err());
    }
}
