use clap::Parser;

fn main() {
    let cli = crowdest::cli::Cli::parse();
    if let Err(err) = crowdest::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
