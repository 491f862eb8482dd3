use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use fracwell::cli::{execute, Command, Format, Invocation, MethodChoice};

#[derive(Clone, Copy, ValueEnum)]
enum CommandArg {
    Ml,
    SolveIvp,
    SolveTvp,
    Sweep,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fredholm,
    Shooting,
    Both,
}

/// Solve Caputo fractional initial/terminal value problems and run perturbation sweeps.
#[derive(Parser)]
#[command(name = "fracwell", version)]
struct Args {
    #[arg(value_enum)]
    command: CommandArg,
    /// JSON config document
    #[arg(long)]
    config: PathBuf,
    /// Output path (defaults to the config's `output`)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// solve-tvp only
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

fn main() {
    let args = Args::parse();
    let inv = Invocation {
        command: match args.command {
            CommandArg::Ml => Command::Ml,
            CommandArg::SolveIvp => Command::SolveIvp,
            CommandArg::SolveTvp => Command::SolveTvp,
            CommandArg::Sweep => Command::Sweep,
        },
        config: args.config,
        out: args.out,
        format: args.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        }),
        method: args.method.map(|m| match m {
            MethodArg::Fredholm => MethodChoice::Fredholm,
            MethodArg::Shooting => MethodChoice::Shooting,
            MethodArg::Both => MethodChoice::Both,
        }),
    };
    std::process::exit(execute(&inv));
}
