use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match rlldpc::cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are printed to stdout with status 0
            let code = if e.use_stderr() { rlldpc::cli::EXIT_USAGE } else { rlldpc::cli::EXIT_OK };
            e.print().ok();
            std::process::exit(code);
        }
    };
    std::process::exit(rlldpc::cli::run(cli));
}
