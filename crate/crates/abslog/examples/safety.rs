//! Two Safe modules calling each other never reach an error.
use abslog::abspec::safe_module;
use abslog::behavior::{enumerate_stack, EnumConfig, Terminal};
use abslog::kernel::ModStack;
use abslog::values::AnyValue;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names = |m: &str| vec![format!("{m}.f"), format!("{m}.g")];
    let short = vec!["f".to_string(), "g".to_string()];
    let args = [AnyValue::Int(0), AnyValue::Int(1)];
    let rets = [AnyValue::Int(0)];
    let a = safe_module("A", &names("B"), &short, &args, &rets);
    let b = safe_module("B", &names("A"), &short, &args, &rets);
    let stack = ModStack::of(vec![a, b]);
    let beh = enumerate_stack(&stack, "A.f", AnyValue::Int(0), 8, &EnumConfig::default())?;
    let errors = beh.traces().iter().filter(|t| t.terminal == Terminal::Error).count();
    println!("{} traces, {errors} ending in error", beh.len());
    Ok(())
}
