use clap::Parser;

fn main() {
    let cli = dext::cli::Cli::parse();
    std::process::exit(dext::cli::run(&cli));
}
