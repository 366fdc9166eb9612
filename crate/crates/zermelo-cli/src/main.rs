use clap::Parser;

fn main() {
    let cli = zermelo_cli::Cli::parse();
    std::process::exit(zermelo_cli::run(cli));
}
