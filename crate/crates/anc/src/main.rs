use clap::Parser;

fn main() {
    let cli = anc::cli::Cli::parse();
    if let Err(e) = anc::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
