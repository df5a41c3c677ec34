use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

mod sadhan;
mod worthiness;

#[derive(Debug, Parser)]
#[command(
    name = "factcheck",
    version,
    about = "Train, score and serve the claim verification models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check-worthiness sentence classifier.
    #[command(subcommand)]
    Worthiness(worthiness::Command),
    /// Aspect-conditioned hierarchical attention classifier.
    #[command(subcommand)]
    Sadhan(sadhan::Command),
    /// Run the HTTP service, configured from environment variables.
    Serve,
}

/// Reads `arg` as a file when such a file exists, otherwise returns it.
pub(crate) fn text_or_file(arg: &str) -> anyhow::Result<String> {
    let path = PathBuf::from(arg);
    if path.is_file() {
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
    } else {
        Ok(arg.to_string())
    }
}

pub(crate) fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Worthiness(cmd) => worthiness::run(cmd),
        Command::Sadhan(cmd) => sadhan::run(cmd),
        Command::Serve => {
            let config = factcheck_service::ServiceConfig::from_env()?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(factcheck_service::serve(config))?;
            Ok(())
        }
    }
}
