use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use emh::cli::{exit_code, run, validation_report, Command, EXIT_CONFIG, EXIT_NUMERICAL};
use emh::config::{RunConfig, KEYS};

/// Effective permittivity and long-wave dispersion of cylinder lattices.
///
/// Results are accurate in the long-wave, small-cylinder regime
/// q^2 + a^2 << 1; the caller is responsible for staying inside it.
#[derive(Parser, Debug)]
#[command(name = "emh", version, after_help = keys_help())]
struct Args {
    /// elliptic | coeffs | tensor | dispersion | oracle | validate
    command: Command,

    /// Config file of `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for the CSV output (overrides output.dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    /// `key=value` overrides applied after the config file.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn keys_help() -> String {
    format!("Config keys: {}", KEYS.join(", "))
}

fn main() -> ExitCode {
    let args = Args::parse();
    ExitCode::from(execute(args) as u8)
}

fn execute(args: Args) -> i32 {
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return EXIT_CONFIG;
        }
    }

    let text = match &args.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => Some((path.display().to_string(), t)),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        },
        None => None,
    };
    let file = text.as_ref().map(|(n, t)| (n.as_str(), t.as_str()));
    let mut config = match RunConfig::load(file, &args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(dir) = args.out {
        config.output_dir = dir;
    }

    let output = match run(args.command, &config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match output.write(&config.output_dir) {
        Ok(path) => eprintln!("wrote {}", path.display()),
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            return EXIT_NUMERICAL;
        }
    }
    if args.command == Command::Validate {
        print!("{}", validation_report(&output.outcomes));
    }
    output.exit_code()
}
