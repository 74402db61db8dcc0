//! The simulation game on the shipped module pairs, cross-checked against
//! trace inclusion.
use abslog::examples::{sim_setup, SIM_NAMES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in SIM_NAMES {
        let r = sim_setup(n)?.run()?;
        let goals: usize = r.sim.iter().map(|s| s.goals).sum();
        println!(
            "{n:14} sim {:8} trace {:5} {} ({goals} goals)",
            r.sim_verdict().label(),
            r.trace.holds(),
            r.agreement.label()
        );
    }
    Ok(())
}
