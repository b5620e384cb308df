use std::process::ExitCode;

use clap::Parser;
use repindex_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::from_cli(cli).and_then(|config| run(&config));
    match result {
        Ok(summary) => {
            if summary.accepted_opinions > 0 || summary.rejected_lines > 0 {
                eprintln!(
                    "opinions: {} accepted, {} rejected",
                    summary.accepted_opinions, summary.rejected_lines
                );
            }
            for (entity, trend) in &summary.trends {
                println!("{entity}\t{trend}");
            }
            for r in &summary.reports {
                let m = r.m_statistic.map_or_else(|| "-".to_string(), |m| format!("{m:.2}"));
                println!("{}\ttrend={}\tM={}", r.entity, r.trend, m);
                for w in &r.warnings {
                    eprintln!("warning: {}: {}", r.entity, w);
                }
            }
            for path in &summary.written {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
