use clap::Parser;
use gll::cli::{self, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    let out = cli.command.config().out.clone();
    match cli::run(&cli.command) {
        Ok(report) => {
            let mut text =
                serde_json::to_string_pretty(&report.json).expect("reports serialize");
            text.push('\n');
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &text) {
                        eprintln!("cannot write {}: {e}", path.display());
                        std::process::exit(2);
                    }
                }
                None => print!("{text}"),
            }
            std::process::exit(if report.pass { 0 } else { 1 });
        }
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            std::process::exit(2);
        }
    }
}
