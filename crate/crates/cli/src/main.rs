use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MACROPLACE_LOG", "warn")).init();
    let cli = macroplace_cli::args::Cli::parse();
    if let Err(e) = macroplace_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
