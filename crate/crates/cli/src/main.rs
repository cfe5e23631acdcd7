use clap::Parser;

fn main() {
    let cli = ghrain_cli::Cli::parse();
    if let Err(e) = ghrain_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
