//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain error (missing files, parse errors,
//! violated property), 2 usage error (clap's default).

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::analysis::{architecture_table, comparison_series, recovery_latency, render_exact};
use crate::campaign::run_campaign;
use crate::checker::{check_property, Verdict};
use crate::config::Scenario;
use crate::netlist::parse_netlist;
use crate::place::place;
use crate::trace::Trace;

#[derive(Parser)]
#[command(name = "healfab", version, about = "Self-healing cell-fabric simulator")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario with its fault schedule and write the trace.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the fault-free reference of a scenario and write the trace.
    Golden {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a list of scenarios and write the aggregated report.
    Campaign {
        /// Scenario config files.
        scenarios: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resilience metrics.
    Metrics {
        #[command(subcommand)]
        what: MetricsCommand,
    },
    /// Evaluate a property file against a trace.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        prop: PathBuf,
        /// Golden trace, required when the property uses golden(sig).
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// Parse a netlist and print its placement.
    Place {
        #[arg(long)]
        netlist: PathBuf,
        #[arg(long, default_value_t = 1)]
        layers: u8,
    },
    /// Extract per-fault recovery latencies from a trace.
    Latency {
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Four-architecture comparison at one array width.
    Table {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        spf: u64,
    },
    /// Coverage/overhead series over several widths.
    Series {
        #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
        n: Vec<u64>,
        #[arg(long)]
        spf: u64,
    },
}

pub fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run { scenario, out } => {
            let scenario = Scenario::load(&scenario).map_err(|e| e.to_string())?;
            let sim = scenario.run().map_err(|e| e.to_string())?;
            write_or_print(out, &sim.trace.to_csv())
        }
        Command::Golden { scenario, out } => {
            let scenario = Scenario::load(&scenario).map_err(|e| e.to_string())?;
            let sim = scenario.golden().map_err(|e| e.to_string())?;
            write_or_print(out, &sim.trace.to_csv())
        }
        Command::Campaign { scenarios, out } => {
            if scenarios.is_empty() {
                return Err("campaign needs at least one scenario".into());
            }
            let paths: Vec<&std::path::Path> = scenarios.iter().map(|p| p.as_path()).collect();
            let report = run_campaign(&paths);
            write_or_print(out, &report.to_csv())?;
            if report.errors.is_empty() {
                Ok(())
            } else {
                Err(format!("{} scenario(s) failed", report.errors.len()))
            }
        }
        Command::Metrics { what } => match what {
            MetricsCommand::Table { n, spf } => {
                let rows = architecture_table(n, spf).map_err(|e| e.to_string())?;
                println!("architecture,functional,spares,routing,coverage,overhead_percent");
                for r in rows {
                    println!(
                        "{},{},{},{},{},{}",
                        r.name,
                        render_exact(r.functional),
                        render_exact(r.spares),
                        render_exact(r.routing),
                        render_exact(r.coverage),
                        render_exact(r.overhead_percent)
                    );
                }
                // The comparison counts spares by the published per-row
                // formulas; the simulated fabric itself fields 8 T cells
                // plus 8 stem execution units per layer.
                println!("# simulator spare pool per layer: 8 T cells + 8 stem execution units");
                Ok(())
            }
            MetricsCommand::Series { n, spf } => {
                let csv = comparison_series(&n, spf).map_err(|e| e.to_string())?;
                print!("{csv}");
                Ok(())
            }
        },
        Command::Check { trace, prop, golden } => {
            let trace_text = fs::read_to_string(&trace)
                .map_err(|e| format!("cannot read {}: {e}", trace.display()))?;
            let trace = Trace::from_csv(&trace_text).map_err(|e| e.to_string())?;
            let golden = match golden {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                    Some(Trace::from_csv(&text).map_err(|e| e.to_string())?)
                }
                None => None,
            };
            let prop_text = fs::read_to_string(&prop)
                .map_err(|e| format!("cannot read {}: {e}", prop.display()))?;
            let verdict =
                check_property(&trace, golden.as_ref(), &prop_text).map_err(|e| e.to_string())?;
            println!("{verdict}");
            match verdict {
                Verdict::Holds => Ok(()),
                _ => Err(format!("property did not hold: {verdict}")),
            }
        }
        Command::Place { netlist, layers } => {
            let text = fs::read_to_string(&netlist)
                .map_err(|e| format!("cannot read {}: {e}", netlist.display()))?;
            let parsed = parse_netlist(&text).map_err(|errors| {
                errors
                    .iter()
                    .map(|e| format!("{}:{e}", netlist.display()))
                    .collect::<Vec<_>>()
                    .join("\n")
            })?;
            let mapping = place(&parsed, layers).map_err(|e| e.to_string())?;
            print!("{}", mapping.to_text(&parsed));
            Ok(())
        }
        Command::Latency { trace } => {
            let text = fs::read_to_string(&trace)
                .map_err(|e| format!("cannot read {}: {e}", trace.display()))?;
            let trace = Trace::from_csv(&text).map_err(|e| e.to_string())?;
            println!("target,injected_ns,healed_ns,latency_ns");
            for r in recovery_latency(&trace) {
                println!(
                    "{},{},{},{}",
                    r.target,
                    r.injected_ns,
                    r.healed_ns.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
                    r.latency_ns().map(|v| v.to_string()).unwrap_or_else(|| "-".into())
                );
            }
            Ok(())
        }
    }
}

fn write_or_print(out: Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(&path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
