use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use gcequiv::cli::{error_json, run, Options, Outcome};
use gcequiv::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Validate,
    Cohomology,
    Gclinear,
    Grading,
    Equivariant,
    Cartanmap,
    Kirwan,
    Dh,
    Ddbar,
    Extension,
}

/// Exact computations on invariant models of twisted generalized complex geometry.
#[derive(Parser, Debug)]
#[command(version, allow_negative_numbers = true)]
struct Args {
    command: Command,
    /// Model file
    file: std::path::PathBuf,
    /// Truncation degree for equivariant computations
    #[arg(long)]
    trunc: Option<u32>,
    /// Orientation sign for integration (+1 or -1)
    #[arg(long, allow_hyphen_values = true)]
    orientation: Option<i32>,
    #[arg(long)]
    structure: Option<String>,
    #[arg(long)]
    form: Option<String>,
    #[arg(long)]
    family: Option<String>,
    /// Compact JSON output (default)
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    #[arg(long)]
    pretty: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let name = args.command.to_possible_value().expect("named variant").get_name().to_string();
    let opts = Options {
        trunc: args.trunc,
        pretty: args.pretty,
        orientation: args.orientation,
        structure: args.structure,
        form: args.form,
        family: args.family,
    };
    let outcome = match std::fs::read_to_string(&args.file) {
        Ok(text) => run(&name, &text, &opts),
        Err(e) => {
            let err = Error::Usage(format!("cannot read {}: {e}", args.file.display()));
            Outcome { code: 2, json: error_json(&err) }
        }
    };
    println!("{}", outcome.render(opts.pretty));
    ExitCode::from(outcome.code as u8)
}
