#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use chanres::EnumerationBudget;
use clap::Parser;

use args::{merge, Cli, Command, IdcodeAction, SimulateTarget};
use commands::Emitter;
use error::{CliError, Result};

fn run(cli: Cli) -> Result<()> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Input("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    }
    let budget = cli
        .max_states
        .map(EnumerationBudget::new)
        .unwrap_or_default();
    let sink: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            CliError::Input(format!("cannot create {}: {e}", path.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut out = Emitter::new(sink);
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Bounds(a) => commands::bounds(&merge(a, config)?, &budget, &mut out)?,
        Command::Exponents(a) => commands::exponents(&merge(a, config)?, &mut out)?,
        Command::Simulate { target } => match target {
            SimulateTarget::Resolvability(a) => {
                commands::simulate_resolvability(&merge(a, config)?, &budget, &mut out)?
            }
            SimulateTarget::Wiretap(a) => {
                commands::simulate_wiretap(&merge(a, config)?, &budget, &mut out)?
            }
        },
        Command::Idcode { action } => match action {
            IdcodeAction::Build(a) => {
                commands::idcode_build(&merge(a.as_ref(), config)?, &budget, &mut out)?
            }
            IdcodeAction::Eval(a) => commands::idcode_eval(&merge(a, config)?, &budget, &mut out)?,
        },
        Command::Capacity(a) => commands::capacity_report(&merge(a, config)?, &mut out)?,
        Command::WiretapBounds(a) => {
            commands::wiretap_bound_values(&merge(a, config)?, &budget, &mut out)?
        }
    }
    out.finish()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
