use clap::Parser;

fn main() {
    let args = hyperzeta::cli::Args::parse();
    std::process::exit(hyperzeta::cli::run(&args));
}
