#![allow(dead_code)]

use abslog::kernel::{
    assume, bind, choose, guarantee, obs, ret, seq, take, tau, Domain, Prog,
};
use abslog::values::AnyValue;
use rand::seq::SliceRandom;
use rand::Rng;

/// A program context over an integer accumulator with holes.
#[derive(Clone, Debug)]
pub enum Instr {
    Hole(Pred),
    Print,
    ChooseAdd(Vec<i64>),
    TakeAdd(Vec<i64>),
    Tau,
    Branch(Vec<Instr>, Vec<Instr>),
}

#[derive(Clone, Copy, Debug)]
pub enum Pred {
    True,
    False,
    Even,
    Below(i64),
}

impl Pred {
    fn eval(self, v: i64) -> bool {
        match self {
            Pred::True => true,
            Pred::False => false,
            Pred::Even => v % 2 == 0,
            Pred::Below(k) => v < k,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fill {
    GuaranteeAssume,
    Skip,
}

pub fn gen_ctx<R: Rng>(rng: &mut R, depth: u32) -> Vec<Instr> {
    let len = rng.gen_range(1..=4);
    let mut out: Vec<Instr> = (0..len).map(|_| gen_instr(rng, depth)).collect();
    if !has_hole(&out) {
        let at = rng.gen_range(0..=out.len());
        out.insert(at, Instr::Hole(gen_pred(rng)));
    }
    out
}

fn has_hole(is: &[Instr]) -> bool {
    is.iter().any(|i| match i {
        Instr::Hole(_) => true,
        Instr::Branch(a, b) => has_hole(a) || has_hole(b),
        _ => false,
    })
}

fn gen_pred<R: Rng>(rng: &mut R) -> Pred {
    match rng.gen_range(0..4) {
        0 => Pred::True,
        1 => Pred::False,
        2 => Pred::Even,
        _ => Pred::Below(rng.gen_range(0..4)),
    }
}

fn gen_set<R: Rng>(rng: &mut R) -> Vec<i64> {
    let mut v: Vec<i64> = (0..4).collect();
    v.shuffle(rng);
    v.truncate(rng.gen_range(0..=3));
    v
}

fn gen_instr<R: Rng>(rng: &mut R, depth: u32) -> Instr {
    let top = if depth == 0 { 6 } else { 7 };
    match rng.gen_range(0..top) {
        0 => Instr::Hole(gen_pred(rng)),
        1 | 2 => Instr::Print,
        3 => Instr::ChooseAdd(gen_set(rng)),
        4 => Instr::TakeAdd(gen_set(rng)),
        5 => Instr::Tau,
        _ => Instr::Branch(gen_ctx(rng, depth - 1), gen_ctx(rng, depth - 1)),
    }
}

pub fn plug(is: &[Instr], fill: Fill, acc: i64) -> Prog {
    let Some((first, rest)) = is.split_first() else {
        return ret(AnyValue::Int(acc));
    };
    let rest = rest.to_vec();
    let then = move |acc: i64| plug(&rest, fill, acc);
    let ints = |xs: &[i64]| Domain::finite(xs.iter().map(|x| AnyValue::Int(*x)));
    match first {
        Instr::Hole(p) => {
            let hole = match fill {
                Fill::GuaranteeAssume => seq(guarantee(p.eval(acc)), assume(p.eval(acc))),
                Fill::Skip => ret(AnyValue::Unit),
            };
            bind(hole, move |_| then(acc))
        }
        Instr::Print => bind(obs("print", AnyValue::Int(acc)), move |_| then(acc)),
        Instr::ChooseAdd(xs) => bind(choose(ints(xs)), move |v| then(acc + v.as_int().unwrap_or(0))),
        Instr::TakeAdd(xs) => bind(take(ints(xs)), move |v| then(acc + v.as_int().unwrap_or(0))),
        Instr::Tau => tau(move || then(acc)),
        Instr::Branch(a, b) => {
            let branch = if acc % 2 == 0 { a } else { b };
            let mut all = branch.clone();
            all.extend(is[1..].iter().cloned());
            plug(&all, fill, acc)
        }
    }
}

/// IMP expression over the given variables.
pub fn gen_expr<R: Rng>(rng: &mut R, vars: &[&str], depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.4) {
        return if rng.gen_bool(0.5) && !vars.is_empty() {
            vars.choose(rng).map(|s| s.to_string()).unwrap_or_default()
        } else {
            rng.gen_range(0..4).to_string()
        };
    }
    let op = ["+", "-", "*"].choose(rng).copied().unwrap_or("+");
    format!("{} {op} {}", gen_expr(rng, vars, depth - 1), gen_atom(rng, vars))
}

fn gen_atom<R: Rng>(rng: &mut R, vars: &[&str]) -> String {
    if rng.gen_bool(0.5) && !vars.is_empty() {
        vars.choose(rng).map(|s| s.to_string()).unwrap_or_default()
    } else {
        rng.gen_range(0..4).to_string()
    }
}

/// Body statements of `M.f(x)` over the global `g` (kept mod 3), the
/// parameter `x` and the local `r`; may call `E.g`.
pub fn gen_stmts<R: Rng>(rng: &mut R, depth: u32, calls: bool) -> Vec<String> {
    let vars = ["x", "g", "r"];
    let n = rng.gen_range(1..=4);
    (0..n)
        .map(|_| {
            let top = if depth == 0 { 4 } else { 5 };
            match rng.gen_range(0..top) {
                0 => format!("g := ({}) % 3", gen_expr(rng, &vars, 2)),
                1 => format!("print({})", gen_expr(rng, &vars, 1)),
                2 if calls => format!("r = E.g({})", gen_expr(rng, &vars, 1)),
                2 | 3 => format!("x := {}", gen_expr(rng, &vars, 2)),
                _ => format!(
                    "if ({} < {}) then {{ {} }} else {{ {} }}",
                    gen_expr(rng, &vars, 1),
                    rng.gen_range(0..4),
                    gen_stmts(rng, depth - 1, calls).join("; "),
                    gen_stmts(rng, depth - 1, calls).join("; ")
                ),
            }
        })
        .collect()
}

pub fn module_src(body: &[String], ret: &str) -> String {
    format!("module M\nlocal g = 0\n\ndef f(x) {{\n  var r;\n  r := 0;\n  {};\n  return {ret}\n}}\n", body.join(";\n  "))
}

/// Changes one integer literal of `src`, or returns it unchanged.
pub fn mutate<R: Rng>(rng: &mut R, src: &str) -> String {
    let bytes: Vec<(usize, char)> = src.char_indices().filter(|(_, c)| c.is_ascii_digit()).collect();
    if bytes.is_empty() || rng.gen_bool(0.5) {
        return src.to_string();
    }
    let (i, c) = bytes[rng.gen_range(0..bytes.len())];
    let d = (c.to_digit(10).unwrap_or(0) + 1) % 4;
    let mut out = src.to_string();
    out.replace_range(i..i + 1, &d.to_string());
    out
}

pub const E_MODULE: &str = "module E\n\ndef g(x) {\n  return x % 3\n}\n";

pub const PROBE_MAIN: &str =
    "module Main\n\ndef main() {\n  var a, b;\n  a = M.f(1);\n  print(a);\n  b = M.f(2);\n  return b\n}\n";

/// A deterministic closed program: `Main.main` over locals only.
pub fn gen_det_program<R: Rng>(rng: &mut R) -> String {
    let body = gen_stmts(rng, 2, false);
    format!(
        "module M\nlocal g = {}\n\ndef main() {{\n  var x, r;\n  x := 0;\n  r := 0;\n  {};\n  return {}\n}}\n",
        rng.gen_range(0..3),
        body.join(";\n  "),
        gen_expr(rng, &["x", "g", "r"], 2)
    )
}
