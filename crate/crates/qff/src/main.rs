use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    // clap reports malformed command lines itself, with exit code 2.
    let cli = qff::Cli::parse();
    match qff::run(cli) {
        Ok(summary) => {
            print!("{summary}");
            if !summary.ends_with('\n') {
                println!();
            }
            ExitCode::from(qff::exit::SUCCESS)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
