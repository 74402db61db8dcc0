//! The IMP language: syntax, parser, pretty-printer and the embedding into
//! modules, plus the memory module.

use std::fmt;

use thiserror::Error;

mod embed;
mod mem;
mod parse;

pub use embed::embed;
pub use mem::{mem_impl, mem_preabs, MemState};
pub use parse::parse;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImpError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("function {fun}: {msg}")]
    Wf { fun: String, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Eq,
    Lt,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    fn prec(self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Lt => 1,
            BinOp::Add | BinOp::Sub => 2,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 3,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "==",
            BinOp::Lt => "<",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Lit(i64),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn var(x: &str) -> Expr {
        Expr::Var(x.to_string())
    }
}

/// How a call target was resolved: `M.f` is a module call, a local variable
/// is a function pointer, anything else is an observable event.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Callee {
    Direct(String),
    Indirect(String),
    Obs(String),
}

impl Callee {
    pub fn name(&self) -> &str {
        match self {
            Callee::Direct(n) | Callee::Indirect(n) | Callee::Obs(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Assign(String, Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    Call { ret: Option<String>, callee: Callee, args: Vec<Expr> },
    AddrOf(String, String),
    Malloc(String, Expr),
    Free(Expr),
    Load(String, Expr),
    Store(Expr, Expr),
    Cmp(String, Expr, Expr),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ImpFun {
    pub name: String,
    pub params: Vec<String>,
    pub locals: Vec<String>,
    pub body: Vec<Stmt>,
    pub ret: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ImpModule {
    pub name: String,
    pub globals: Vec<(String, i64)>,
    pub funs: Vec<ImpFun>,
}

impl ImpModule {
    pub fn fun(&self, name: &str) -> Option<&ImpFun> {
        self.funs.iter().find(|f| f.name == name)
    }
}

pub fn render(m: &ImpModule) -> String {
    m.to_string()
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, f, 0)
    }
}

fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
    match e {
        Expr::Var(x) => write!(f, "{x}"),
        Expr::Lit(n) => write!(f, "{n}"),
        Expr::Bin(op, a, b) => {
            let p = op.prec();
            if p < min {
                write!(f, "(")?;
            }
            fmt_expr(a, f, p)?;
            write!(f, " {} ", op.symbol())?;
            fmt_expr(b, f, p + 1)?;
            if p < min {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

fn comma<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn fmt_block(ss: &[Stmt], f: &mut fmt::Formatter<'_>, ind: usize) -> fmt::Result {
    for (i, s) in ss.iter().enumerate() {
        write!(f, "{:ind$}", "")?;
        fmt_stmt(s, f, ind)?;
        writeln!(f, "{}", if i + 1 < ss.len() { ";" } else { "" })?;
    }
    Ok(())
}

fn fmt_stmt(s: &Stmt, f: &mut fmt::Formatter<'_>, ind: usize) -> fmt::Result {
    let lhs = |r: &Option<String>| r.as_ref().map(|x| format!("{x} = ")).unwrap_or_default();
    match s {
        Stmt::Skip => write!(f, "skip"),
        Stmt::Assign(x, e) => write!(f, "{x} := {e}"),
        Stmt::If(c, t, e) => {
            writeln!(f, "if ({c}) then {{")?;
            fmt_block(t, f, ind + 2)?;
            writeln!(f, "{:ind$}}} else {{", "")?;
            fmt_block(e, f, ind + 2)?;
            write!(f, "{:ind$}}}", "")
        }
        Stmt::Call { ret, callee, args } => write!(f, "{}{}({})", lhs(ret), callee.name(), comma(args)),
        Stmt::AddrOf(x, g) => write!(f, "{x} = &{g}"),
        Stmt::Malloc(x, e) => write!(f, "{x} = malloc({e})"),
        Stmt::Free(e) => write!(f, "free({e})"),
        Stmt::Load(x, e) => write!(f, "{x} = load({e})"),
        Stmt::Store(a, b) => write!(f, "store({a}, {b})"),
        Stmt::Cmp(x, a, b) => write!(f, "{x} = cmp({a}, {b})"),
    }
}

impl fmt::Display for ImpModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "module {}", self.name)?;
        for (g, v) in &self.globals {
            writeln!(f, "local {g} = {v}")?;
        }
        for fun in &self.funs {
            writeln!(f)?;
            writeln!(f, "def {}({}) {{", fun.name, fun.params.join(", "))?;
            if !fun.locals.is_empty() {
                writeln!(f, "  var {};", fun.locals.join(", "))?;
            }
            for s in &fun.body {
                write!(f, "  ")?;
                fmt_stmt(s, f, 2)?;
                writeln!(f, ";")?;
            }
            writeln!(f, "  return {}", fun.ret)?;
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}
