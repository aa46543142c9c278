use clap::error::ErrorKind;
use clap::Parser;

use waring_cli::cli::Cli;
use waring_cli::run::{run, EXIT_BUDGET};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version are successful outcomes; anything else is a
            // usage error and exits 1 with the offending flag spelled out
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        let budget_like = err.chain().any(|cause| {
            matches!(
                cause.downcast_ref::<waring_core::Error>(),
                Some(waring_core::Error::Budget { .. }) | Some(waring_core::Error::Capacity { .. })
            )
        });
        std::process::exit(if budget_like { EXIT_BUDGET } else { 1 });
    }
}
