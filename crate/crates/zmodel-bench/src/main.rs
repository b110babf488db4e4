use clap::Parser;
use zmodel_bench::driver::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "exit_code": 1 })
            );
            std::process::exit(1);
        }
    }
}
