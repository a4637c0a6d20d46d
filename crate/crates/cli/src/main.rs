use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use pbisim_cli::{run, Cli, Exit};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::InputError.into() } else { Exit::Success.into() };
        }
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let result = run(&cli, &mut out, &mut input);
    let _ = out.flush();
    match result {
        Ok(code) => code.into(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit().into()
        }
    }
}
