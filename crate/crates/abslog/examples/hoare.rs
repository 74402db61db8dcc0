//! Main calls F.f with a number divisible by four and relies on the odd
//! result. Under the specs Main's check can be dropped.
use abslog::examples::{self, complete_terminals};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = examples::hoare()?;
    println!("{}", b.summary);
    for t in b.impl_behavior()?.complete_traces() {
        println!("impl: {t}");
    }
    for t in complete_terminals(&b.abs_behavior()?) {
        println!("abs terminal: {t:?}");
    }
    for c in &b.checks {
        let o = b.run_check(c)?;
        println!("{:12} {:14} {} ({} ms)", c.name, c.kind.label(), o.report.verdict(), o.millis);
    }
    Ok(())
}
