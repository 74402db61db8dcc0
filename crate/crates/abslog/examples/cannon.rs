//! The cannon may fire once. Firing twice is caught by the checker.
use abslog::examples::{self, check_all};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [1, 2] {
        let b = examples::cannon(n)?;
        let r = check_all(&b)?;
        println!("fire x{n}: {}", if r.holds() { "holds" } else { "violated" });
        for o in &r.outcomes {
            println!("  {:10} {}", o.name, o.report.verdict());
        }
    }
    Ok(())
}
