use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use livecue::config::Config;
use livecue::keywords::KeywordExtractor;
use livecue::mapping::MappingTable;
use livecue::protocol::{self, ServerOptions};

#[derive(Parser)]
#[command(name = "livecue", version, about = "Speech-driven live presentation overlay engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the WebSocket session server.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        /// Flat JSON config; $LIVECUE_CONFIG takes precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Mapping file; created on first change if missing.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        debug_gestures: bool,
    },
    /// Replay a session trace into a scene timeline.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the keywords of a sentence, one per line.
    Extract { text: String },
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Serve {
            port,
            config,
            mapping,
            debug_gestures,
        } => {
            let mut cfg = Config::resolve(config.as_deref()).map_err(|e| e.to_string())?;
            if let Some(p) = port {
                cfg.server.port = p;
            }
            let table = match &mapping {
                Some(p) if p.exists() => MappingTable::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
                _ => MappingTable::new(),
            };
            let opts = ServerOptions {
                debug_gestures,
                mapping_path: mapping,
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(protocol::serve(cfg, table, opts)).map_err(|e| e.to_string())
        }
        Command::Replay { trace, out } => {
            protocol::replay_file(&trace, &out).map_err(|e| format!("{}: {e}", trace.display()))
        }
        Command::Extract { text } => {
            let extractor = KeywordExtractor::default();
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for k in extractor.extract(&text) {
                writeln!(lock, "{}", k.normalized).map_err(|e| e.to_string())?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("livecue: {e}");
            ExitCode::FAILURE
        }
    }
}
