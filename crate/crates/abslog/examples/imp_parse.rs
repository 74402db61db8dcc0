//! Parses every shipped IMP program and prints it back.
use abslog::examples::corpus;
use abslog::imp::{parse, render};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (path, src) in corpus() {
        let m = parse(src)?;
        let again = parse(&render(&m))?;
        println!("// {path} (round trip {})", if again == m { "ok" } else { "differs" });
        print!("{}", render(&m));
    }
    Ok(())
}
