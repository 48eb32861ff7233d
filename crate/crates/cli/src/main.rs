mod args;
mod commands;

use args::{Cli, Command};
use clap::Parser;
use commands::{Check, Ctx};
use std::process::ExitCode;

#[derive(serde::Serialize)]
struct Failure<'a> {
    command: &'a str,
    error: Option<String>,
    failed_checks: Vec<&'a Check>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::KernelDump(_) => "kernel-dump",
        Command::FmmMatvec(_) => "fmm-matvec",
        Command::AccuracySweep(_) => "accuracy-sweep",
        Command::Bench(_) => "bench",
        Command::Solve(_) => "solve",
        Command::Collocate1d(_) => "collocate1d",
        Command::Tables(_) => "tables",
    }
}

fn run(cli: &Cli, ctx: &Ctx) -> bandfmm::Result<Vec<Check>> {
    match &cli.command {
        Command::KernelDump(a) => commands::kernel_dump_cmd(ctx, a),
        Command::FmmMatvec(a) => commands::fmm_matvec(ctx, a),
        Command::AccuracySweep(a) => commands::accuracy_sweep_cmd(ctx, a),
        Command::Bench(a) => commands::bench(ctx, a),
        Command::Solve(a) => commands::solve(ctx, a),
        Command::Collocate1d(a) => commands::collocate1d(ctx, a),
        Command::Tables(a) => commands::tables(ctx, a),
    }
}

fn report(f: &Failure) {
    eprintln!("{}", serde_json::to_string(f).unwrap_or_else(|_| "{\"error\":\"unserializable failure\"}".into()));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global() {
            report(&Failure { command: name, error: Some(e.to_string()), failed_checks: Vec::new() });
            return ExitCode::from(2);
        }
    }
    let ctx = Ctx { seed: cli.seed, command_line: std::env::args().collect::<Vec<_>>().join(" ") };
    match run(&cli, &ctx) {
        Ok(checks) => {
            for c in &checks {
                println!("{} {}: {:.4e} (limit {:.4e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
            }
            let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                report(&Failure { command: name, error: None, failed_checks: failed });
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            report(&Failure { command: name, error: Some(e.to_string()), failed_checks: Vec::new() });
            ExitCode::from(2)
        }
    }
}
