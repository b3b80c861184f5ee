//! Command-line front end: parse a model file (or build n-queens), solve,
//! print solutions. Exit code 0 means solved (or a positive count), 1 means
//! no solution, 2 means a usage, parse, or I/O problem.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slotsolve::model::{build, nqueens, parse, BuildOptions, Scheme, Space};

#[derive(Parser)]
#[command(name = "slotsolve", version, about = "A component-oriented finite-domain constraint solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model file.
    Solve {
        /// Path to the model file.
        file: PathBuf,
        #[command(flatten)]
        args: SolveArgs,
    },
    /// Solve n-queens for the given board size.
    Nqueens {
        /// Board size (at least 1).
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[command(flatten)]
        args: SolveArgs,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Print every solution, then the count.
    #[arg(long, conflicts_with_all = ["count", "first"])]
    all: bool,
    /// Print only the number of solutions.
    #[arg(long, conflicts_with = "first")]
    count: bool,
    /// Print the first solution (the default).
    #[arg(long)]
    first: bool,
    /// Propagation scheme: re-queue constraints or re-queue variables.
    #[arg(long, value_enum, default_value_t = SchemeArg::Constraint)]
    scheme: SchemeArg,
    /// Propagate `!=` constraints with complete hyper-arc tables instead of
    /// instantiation-only pruning.
    #[arg(long)]
    complete: bool,
    /// Print scheduler statistics on stderr after solving.
    #[arg(long)]
    stats: bool,
    /// Write every event delivery, one line each, to this file.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Constraint,
    Variable,
}

impl SolveArgs {
    fn build_options(&self) -> BuildOptions {
        BuildOptions {
            scheme: match self.scheme {
                SchemeArg::Constraint => Scheme::Constraint,
                SchemeArg::Variable => Scheme::Variable,
            },
            complete: self.complete,
            ..BuildOptions::default()
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, Box<dyn std::error::Error>> {
    let (space, args) = match cli.command {
        Command::Solve { file, args } => {
            let text = fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            let model = parse(&text).map_err(|e| format!("{}: {e}", file.display()))?;
            (build(&model, &args.build_options())?, args)
        }
        Command::Nqueens { n, args } => (nqueens(n as usize, &args.build_options())?, args),
    };
    solve(space, &args)
}

fn solve(mut space: Space, args: &SolveArgs) -> Result<u8, Box<dyn std::error::Error>> {
    if let Some(path) = &args.trace {
        let sink = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        space.bus.set_trace(Some(Box::new(sink)));
    }

    let feasible = space.propagate()?;
    let code = if args.all {
        let solutions = if feasible { space.solve_all()? } else { Vec::new() };
        for s in &solutions {
            println!("{}", render(s));
        }
        println!("solutions: {}", solutions.len());
        u8::from(solutions.is_empty())
    } else if args.count {
        let k = if feasible { space.count_solutions()? } else { 0 };
        println!("solutions: {k}");
        u8::from(k == 0)
    } else if feasible && space.first_solution()? {
        println!("{}", render(&space.assignment()?));
        0
    } else {
        println!("UNSAT");
        1
    };

    if args.stats {
        let st = space.stats();
        eprintln!("pops={} invocations={} prunings={}", st.pops, st.invocations, st.prunings);
    }
    Ok(code)
}

fn render(solution: &[(String, slotsolve::Value)]) -> String {
    solution
        .iter()
        .map(|(name, v)| format!("{name}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}
