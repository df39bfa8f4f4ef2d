use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use fracbeam_cli::{parse_config, run, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "fracbeam", version = build_info(), about = "Fractional nonlocal beam solver")]
struct Args {
    /// Run configuration (flat key=value file).
    config: Option<PathBuf>,
    /// Print the effective configuration and exit; without a file, the defaults.
    #[arg(long)]
    print_defaults: bool,
}

fn build_info() -> &'static str {
    if cfg!(feature = "parallel") {
        concat!(env!("CARGO_PKG_VERSION"), " (parallel)")
    } else {
        concat!(env!("CARGO_PKG_VERSION"), " (sequential)")
    }
}

fn load(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(fracbeam_cli::ConfigError { line: None, message: format!("{}: {e}", path.display()) })
    })?;
    Ok(parse_config(&text)?)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match (&args.config, args.print_defaults) {
        (None, true) => {
            print!("{}", RunConfig::default().render());
            return ExitCode::SUCCESS;
        }
        (None, false) => {
            eprintln!("fracbeam: no configuration given (see --help)");
            return ExitCode::from(2);
        }
        (Some(path), true) => load(path).map(|cfg| print!("{}", cfg.render())),
        (Some(path), false) => load(path).and_then(|cfg| {
            let base = path.parent().map(PathBuf::from).unwrap_or_default();
            let summary = run(&cfg, &base)?;
            for note in &summary.notes {
                println!("{note}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracbeam: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
