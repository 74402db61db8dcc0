//! The cannon algebra: its addition table and a few frame-preserving
//! updates.
use abslog::pcm::{cannon_pcm, Resource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = cannon_pcm();
    let u = p.universe.clone().unwrap_or_default();
    for a in &u {
        let row: Vec<String> = u.iter().map(|b| a.plus(b).to_string()).collect();
        println!("{:>8} | {}", a.to_string(), row.join(" "));
    }
    let c = Resource::cannon;
    let ready_ball = c("Ready").plus(&c("Ball"));
    println!("Ready+Ball ~~> Fired: {}", p.fpu(&ready_ball, &c("Fired"))?);
    println!("Ready ~~> Fired: {}", p.fpu(&c("Ready"), &c("Fired"))?);
    println!("Fired ~~> Ready: {}", p.fpu(&c("Fired"), &c("Ready"))?);
    Ok(())
}
