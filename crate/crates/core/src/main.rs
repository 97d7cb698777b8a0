use std::io::Write;

use clap::Parser;

use oqb::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    if let Some(n) = cli.overrides.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }

    match run(&cli) {
        Ok(output) => {
            // a closed pipe on stdout is not an error worth reporting
            let mut stdout = std::io::stdout().lock();
            let _ = write!(stdout, "{}", output.summary);
            for path in &output.files {
                let _ = writeln!(stdout, "wrote {}", path.display());
            }
        }
        Err(e) => {
            eprintln!("oqb: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
