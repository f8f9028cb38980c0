use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use hilbert_bundle_verify::report::{render, Format, Report};
use hilbert_bundle_verify::spec::load_spec;
use hilbert_bundle_verify::{run_suites, select, THREADS_ENV};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Structured,
}

/// Run the identity suites against a bundle spec.
#[derive(Debug, Parser)]
#[command(name = "verify", version, after_help = format!("Set {THREADS_ENV} to fix the worker thread count."))]
struct Args {
    /// Path to a TOML bundle spec.
    #[arg(required_unless_present = "list_suites")]
    spec: Option<PathBuf>,
    /// Only run suites whose id matches this glob, e.g. "eq-2.2*".
    #[arg(long)]
    filter: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Override the spec's sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the suite ids and anchors, then exit.
    #[arg(long)]
    list_suites: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_suites {
        return match select(args.filter.as_deref()) {
            Ok(suites) => {
                for s in suites {
                    println!("{}\t{}", s.id, s.anchor);
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("verify: {e}");
                ExitCode::from(2)
            }
        };
    }
    let path = args.spec.expect("clap requires a spec unless listing");
    let mut spec = match load_spec(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("verify: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        spec = spec.with_seed(seed);
    }
    let reports = match run_suites(&spec, args.filter.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("verify: {e}");
            return ExitCode::from(2);
        }
    };
    let report = Report::new(&spec.name, spec.seed, reports);
    let format = match args.format {
        FormatArg::Text => Format::Text,
        FormatArg::Structured => Format::Structured,
    };
    let rendered = render(&report, format);
    match &args.out {
        Some(out) => {
            if let Err(e) = std::fs::write(out, &rendered) {
                eprintln!("verify: cannot write {}: {e}", out.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }
    if report.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
