use clap::Parser;
use kg_cli::{exit, run_cli, Cli, Environment};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let code = match run_cli(cli, &Environment::from_process(), &mut stdout) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("kgbench: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
