use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonlocal_cli::driver::{run, with_threads};
use nonlocal_cli::studies::{eoc_table, limit_table, run_eoc_study, run_singular_limit};
use nonlocal_cli::table::Table;
use nonlocal_cli::{CliError, Options, Result};

/// Finite-volume solver for non-local systems of conservation laws.
#[derive(Parser)]
#[command(name = "nonlocal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one model to `--tend`, writing snapshots and a step report.
    Run(Options),
    /// Experimental orders of convergence on nested meshes.
    Eoc(Options),
    /// Distance of the non-local KK system to its local limit.
    Limit(Options),
}

fn emit(table: &Table, out: Option<&Path>, name: &str) -> Result<()> {
    print!("{}", table.to_csv());
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        table.save(&dir.join(name))?;
    }
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(o) => {
            let mut cfg = o.with_config_file()?.run_config()?;
            if cfg.out.is_none() {
                cfg.out = Some("out".into());
            }
            let outcome = with_threads(cfg.threads, || run(&cfg))??;
            let last = outcome.report.last().expect("at least the initial record");
            println!(
                "t = {} after {} steps (dt = {:e}); min {:e}, L1 {:?}",
                last.t,
                last.step,
                outcome.dt,
                outcome.report.min_value(),
                last.l1
            );
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Eoc(o) => {
            let cfg = o.with_config_file()?.eoc_config()?;
            let columns = with_threads(cfg.base.threads, || {
                cfg.orders
                    .iter()
                    .map(|&order| Ok((order, run_eoc_study(&cfg, order)?)))
                    .collect::<Result<Vec<_>>>()
            })??;
            emit(&eoc_table(&columns), cfg.base.out.as_deref(), "eoc.csv")
        }
        Command::Limit(o) => {
            let cfg = o.with_config_file()?.limit_config()?;
            let rows = with_threads(cfg.base.threads, || run_singular_limit(&cfg))??;
            emit(
                &limit_table(&cfg.times, &rows),
                cfg.base.out.as_deref(),
                "limit.csv",
            )
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Info)
        .init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
