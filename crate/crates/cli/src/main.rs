use clap::Parser;
use fpanel_cli::config::SEED_ENV;
use fpanel_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(err) = run(cli, env_seed.as_deref(), &mut out) {
        eprintln!("error: {err:#}");
        std::process::exit(2);
    }
}
