use std::io::{self, Write};

fn main() {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();
    let code = abslog::cli::main_with(std::env::args().collect(), &mut out, &mut input);
    let _ = out.flush();
    std::process::exit(code);
}
