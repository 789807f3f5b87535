//! `rendezvous`: run scenarios, batch a directory of them, export reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use swarm_rendezvous::net::transport::{ENV_COMMAND_BASE_ADDR, ENV_DETECTION_ADDR, ENV_TRACKER_ADDR};
use swarm_rendezvous::net::TransportKind;
use swarm_rendezvous::sim::{self, ExportFormat, RunOptions, RunReport, Scenario, SimError};

#[derive(Parser)]
#[command(
    name = "rendezvous",
    version,
    about = "Multi-chaser rendezvous simulator with potential-field guidance",
    after_help = format!(
        "Transport addresses come from the scenario file and can be overridden with \
         {ENV_DETECTION_ADDR}, {ENV_TRACKER_ADDR} and {ENV_COMMAND_BASE_ADDR} (host:port; \
         chaser i listens on the command base port + i)."
    )
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportArg {
    Inproc,
    Udp,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Override the scenario seed.
    #[arg(long, env = "RDV_SEED")]
    seed: Option<u64>,
    /// Override the scenario transport.
    #[arg(long, value_enum)]
    transport: Option<TransportArg>,
    /// Write JSON reports and trajectory CSVs here.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            transport: self.transport.map(|t| match t {
                TransportArg::Inproc => TransportKind::InProcess,
                TransportArg::Udp => TransportKind::Udp,
            }),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Run every *.toml scenario in a directory and print the results table.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Re-export a saved JSON report.
    Export {
        report: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        /// Output directory; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_scenario(path: &Path) -> Result<Scenario, SimError> {
    let mut sc = Scenario::load(path)?;
    sc.transport.apply_env_overrides();
    Ok(sc)
}

fn save(report: &RunReport, out: &Path) -> Result<(), SimError> {
    for f in [ExportFormat::Json, ExportFormat::Csv] {
        let path = sim::export(report, f, out)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn print_run(r: &RunReport) {
    println!(
        "{} (seed {}, {:.2} s simulated)",
        r.scenario, r.seed, r.metrics.duration
    );
    for c in &r.chasers {
        match c.time_to_dock {
            Some(t) => println!("  {:<10} {} at {t:.2} s", c.id, c.cell()),
            None => println!("  {:<10} {}", c.id, c.cell()),
        }
    }
    let fmt = |v: Option<f64>| v.map(|d| format!("{d:.3} m")).unwrap_or_else(|| "n/a".into());
    println!(
        "  min inter-chaser distance {}",
        fmt(r.metrics.min_inter_chaser_distance)
    );
    println!("  min panel clearance       {}", fmt(r.metrics.min_panel_clearance));
}

fn real_main(cli: Cli) -> Result<(), SimError> {
    match cli.cmd {
        Cmd::Run { scenario, args } => {
            let sc = load_scenario(&scenario)?;
            let report = sim::run_with(&sc, &args.options())?;
            print_run(&report);
            if let Some(out) = &args.out {
                save(&report, out)?;
            }
        }
        Cmd::Batch { dir, args } => {
            let opts = args.options();
            let mut reports = Vec::new();
            for path in sim::scenario_files(&dir)? {
                let sc = load_scenario(&path)?;
                reports.push(sim::run_with(&sc, &opts)?);
            }
            let summary = sim::BatchSummary { reports };
            print!("{}", summary.to_text());
            if let Some(out) = &args.out {
                for r in &summary.reports {
                    save(r, out)?;
                }
                let path = out.join("summary.csv");
                std::fs::write(&path, summary.to_csv()).map_err(|e| SimError::io(&path, e))?;
                eprintln!("wrote {}", path.display());
            }
        }
        Cmd::Export { report, format, out } => {
            let r = RunReport::load_json(&report)?;
            let f = match format {
                FormatArg::Csv => ExportFormat::Csv,
                FormatArg::Json => ExportFormat::Json,
            };
            match out {
                Some(dir) => {
                    let path = sim::export(&r, f, &dir)?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{}", f.render(&r)),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
