use clap::Parser;

fn main() {
    if let Err(e) = crnlump_cli::configure_threads() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
    let code = crnlump_cli::run(crnlump_cli::Cli::parse());
    std::process::exit(code);
}
