use clap::Parser;

fn main() {
    let cli = kit_cli::Cli::parse();
    let (code, _) = kit_cli::run(&cli);
    std::process::exit(code);
}
