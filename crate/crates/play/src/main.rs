use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use impulse2d::env::SizeClass;
use impulse2d::levelgen::{deserialize, generate};
use impulse2d_play::{serve, ServerConfig};

#[derive(Parser)]
#[command(name = "impulse2d-play", version, about = "Serve impulse2d play and edit sessions over WebSocket")]
struct Cli {
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: String,
    /// Level file new sessions start with; a generated M level otherwise.
    #[arg(long)]
    level: Option<PathBuf>,
    /// Directory with the browser client, served at `/`.
    #[arg(long)]
    assets: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    tick_rate: u32,
    /// Seconds a session is kept after its client disconnects.
    #[arg(long, default_value_t = 60)]
    grace: u64,
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match &cli.level {
        Some(path) => match std::fs::read(path).map_err(|e| e.to_string()).and_then(|b| deserialize(&b).map_err(|e| e.to_string())) {
            Ok(level) => level,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => (0..).find_map(|seed| generate(seed, SizeClass::M).ok()).expect("generator yields a level"),
    };
    let listener = match tokio::net::TcpListener::bind(&cli.bind).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}: {e}", cli.bind);
            return ExitCode::from(2);
        }
    };
    eprintln!("listening on ws://{}/ws", listener.local_addr().map(|a| a.to_string()).unwrap_or(cli.bind.clone()));
    let config = ServerConfig {
        tick_rate: cli.tick_rate,
        grace: Duration::from_secs(cli.grace),
        initial_level: level,
        assets: cli.assets,
    };
    match serve(listener, config).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
