//! The memory module, the pointer stack and both pool abstractions,
//! checked in a gradual chain.
use abslog::examples::{build, check_all};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["mem", "stack1", "stack2a", "stack2b"] {
        let b = build(name)?;
        let r = check_all(&b)?;
        println!("{name}: {}", b.summary);
        for o in &r.outcomes {
            println!("  {:10} {:14} {} ({} ms)", o.name, o.kind.label(), o.report.verdict(), o.millis);
        }
    }
    Ok(())
}
