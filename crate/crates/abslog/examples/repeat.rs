//! A higher-order repeat whose spec takes the spec of its function
//! argument; AD.add(n, m) = n + m.
use abslog::behavior::{enumerate_stack, EnumConfig};
use abslog::examples::{self, complete_terminals, repeat_args};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = examples::repeat()?;
    for a in repeat_args() {
        let beh = enumerate_stack(&b.abs_stack, &b.main, a.clone(), b.budget, &EnumConfig::default())?;
        println!("{a}: {:?}", complete_terminals(&beh));
    }
    for c in &b.checks {
        println!("{:10} {}", c.name, b.run_check(c)?.report.verdict());
    }
    Ok(())
}
