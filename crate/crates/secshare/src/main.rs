use clap::Parser;

use secshare::app::execute;
use secshare::cli::Cli;

fn main() {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!("wrote {} files to {}", outcome.manifest.outputs.len() + 1, outcome.out.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
