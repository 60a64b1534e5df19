//! Drives the canonical scenarios against a running server and prints the
//! observed message sequence. Exits 0 only when every scenario passes.

use std::net::{SocketAddr, ToSocketAddrs};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use contextauth::scenario::{fixture_username, run_all, ClientOptions, ScenarioId, ScenarioScript};

#[derive(Parser)]
#[command(name = "scenario", version, about = "Scenario client for contextauthd")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run S1, S2, S3, E1 or all of them.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// S1, S2, S3, E1 or all.
    which: String,

    #[arg(long, value_name = "HOST:PORT")]
    server: String,

    /// Shared secret, hex encoded.
    #[arg(long)]
    secret: String,

    /// The server's simulated OTP delivery log.
    #[arg(long, value_name = "PATH")]
    delivery_log: PathBuf,

    #[arg(long)]
    password: String,

    /// Overrides the fixture user; only with a single scenario.
    #[arg(long)]
    username: Option<String>,

    /// Defaults to the username.
    #[arg(long)]
    otp_channel: Option<String>,

    #[arg(long, default_value_t = 2000)]
    timeout_ms: u64,

    #[arg(long, default_value_t = 3)]
    retries: u32,
}

fn scripts(args: &RunArgs) -> anyhow::Result<Vec<ScenarioScript>> {
    let ids: Vec<ScenarioId> = if args.which.eq_ignore_ascii_case("all") {
        ScenarioId::ALL.to_vec()
    } else {
        vec![args.which.parse().map_err(anyhow::Error::msg)?]
    };
    if args.username.is_some() && ids.len() > 1 {
        bail!("--username needs a single scenario");
    }
    Ok(ids
        .into_iter()
        .map(|id| {
            let username = args.username.as_deref().unwrap_or(fixture_username(id));
            let mut script =
                ScenarioScript::new(id, username, args.password.as_bytes(), &args.delivery_log);
            if let Some(channel) = &args.otp_channel {
                script.otp_channel = channel.clone();
            }
            script
        })
        .collect())
}

fn run(args: RunArgs) -> anyhow::Result<bool> {
    let server: SocketAddr = args
        .server
        .to_socket_addrs()
        .with_context(|| format!("resolving {}", args.server))?
        .find(SocketAddr::is_ipv4)
        .with_context(|| format!("{} has no IPv4 address", args.server))?;
    let secret = hex::decode(&args.secret).context("--secret is not hex")?;
    if secret.is_empty() {
        bail!("--secret is empty");
    }
    let options = ClientOptions {
        timeout: Duration::from_millis(args.timeout_ms),
        retries: args.retries,
    };
    let transcripts = run_all(&scripts(&args)?, server, &secret, options);
    for t in &transcripts {
        println!("{t}");
    }
    let passed = transcripts.iter().filter(|t| t.passed()).count();
    println!("{passed}/{} scenarios passed", transcripts.len());
    Ok(passed == transcripts.len())
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("scenario: {}", contextauth_cli::report(&e));
            ExitCode::from(2)
        }
    }
}
