use clap::Parser;

fn main() {
    let cli = healfab::cli::Cli::parse();
    if let Err(message) = healfab::cli::run(cli) {
        eprintln!("error: {message}");
        std::process::exit(1);
    }
}
