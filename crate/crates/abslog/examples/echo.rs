//! Echo reads integers until 0 and prints them back in reverse, on both
//! the implementation and the abstraction.
use abslog::examples::{self, putints, scripted_runs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = examples::echo()?;
    for script in [vec![0], vec![1, 0], vec![1, 2, 0], vec![2, 2, 1, 0]] {
        let i: Vec<_> = scripted_runs(&b, &b.impl_stack, &script)?.iter().map(putints).collect();
        let a: Vec<_> = scripted_runs(&b, &b.abs_stack, &script)?.iter().map(putints).collect();
        println!("{script:?}: impl {i:?} abs {a:?}");
    }
    for c in &b.checks {
        println!("{:10} {}", c.name, b.run_check(c)?.report.verdict());
    }
    Ok(())
}
