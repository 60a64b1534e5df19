//! The authentication daemon.
//!
//! `contextauthd --config server.toml` serves until SIGINT or SIGTERM.
//! `contextauthd user-entry --username u --otp-channel c` reads a password
//! from stdin and prints a user store entry for it.

use std::io::BufRead;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use contextauth::auth::{UserRecord, UserStore};
use contextauth::events::EventLog;
use contextauth::server::{run_server, ServerConfig};

#[derive(Parser)]
#[command(name = "contextauthd", version, about = "Context-aware MFA server")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    /// Server configuration file.
    #[arg(long, value_name = "PATH", required = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a `[[users]]` entry for a password read from stdin.
    UserEntry {
        #[arg(long)]
        username: String,
        /// Defaults to the username.
        #[arg(long)]
        otp_channel: Option<String>,
    },
}

fn user_entry(username: String, otp_channel: Option<String>) -> anyhow::Result<()> {
    let mut line = String::new();
    std::io::stdin()
        .lock()
        .read_line(&mut line)
        .context("reading password from stdin")?;
    let password = line.trim_end_matches(['\r', '\n']);
    if password.is_empty() {
        bail!("empty password");
    }
    let channel = otp_channel.unwrap_or_else(|| username.clone());
    let store = UserStore::new([UserRecord::new(username, password.as_bytes(), channel)])?;
    print!("{}", store.to_toml_string());
    Ok(())
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = tokio::signal::ctrl_c() => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => {
                let _ = tokio::signal::ctrl_c().await;
            }
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}

fn serve(config: PathBuf) -> anyhow::Result<()> {
    let config = ServerConfig::load(&config)?;
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(run_server(config, EventLog::stderr(), shutdown_signal()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match (cli.command, cli.config) {
        (
            Some(Command::UserEntry {
                username,
                otp_channel,
            }),
            _,
        ) => user_entry(username, otp_channel),
        (None, Some(config)) => serve(config),
        (None, None) => unreachable!("clap requires --config"),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("contextauthd: {}", contextauth_cli::report(&e));
            ExitCode::FAILURE
        }
    }
}
