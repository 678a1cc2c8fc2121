mod args;
mod commands;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(&cli).and_then(|out| write_output(&cli, out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err) as u8)
        }
    }
}

fn write_output(cli: &args::Cli, out: commands::Output) -> anyhow::Result<()> {
    for (path, contents) in &out.files {
        fs::write(path, contents).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    }
    match &cli.global.out {
        Some(path) => fs::write(path, &out.text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?,
        None => std::io::stdout().write_all(out.text.as_bytes())?,
    }
    Ok(())
}
