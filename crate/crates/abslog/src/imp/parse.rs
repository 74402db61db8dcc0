use std::collections::BTreeSet;

use super::{BinOp, Callee, Expr, ImpError, ImpFun, ImpModule, Stmt};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i128),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMS: [&str; 17] = [":=", "==", "=", "<", "+", "-", "*", "/", "%", "(", ")", "{", "}", ",", ";", "&", "."];

const KEYWORDS: [&str; 13] =
    ["module", "local", "def", "var", "return", "skip", "if", "then", "else", "malloc", "free", "load", "store"];

fn lex(src: &str) -> Result<Vec<Spanned>, ImpError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = vec![];
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ImpError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<i128>().map_err(|_| err(l0, c0, format!("integer literal {text} out of range")))?;
            col += i - start;
            out.push(Spanned { tok: Tok::Int(n), line: l0, col: c0 });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            loop {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let dotted = chars.get(i) == Some(&'.')
                    && chars.get(i + 1).is_some_and(|d| d.is_ascii_alphabetic() || *d == '_');
                if dotted {
                    i += 1;
                } else {
                    break;
                }
            }
            col += i - start;
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), line: l0, col: c0 });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Spanned { tok: Tok::Sym(s), line: l0, col: c0 });
            }
            None => return Err(err(l0, c0, format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: BTreeSet<String>,
    globals: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    fn err(&self, msg: impl Into<String>) -> ImpError {
        let (line, col) = match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self.toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1)),
        };
        ImpError::Syntax { line, col, msg: msg.into() }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(t)) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(t)) if t == k)
    }

    fn sym(&mut self, s: &str) -> Result<(), ImpError> {
        if self.is_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    fn kw(&mut self, k: &str) -> Result<(), ImpError> {
        if self.is_kw(k) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{k}`")))
        }
    }

    fn any_ident(&mut self) -> Result<String, ImpError> {
        match self.peek() {
            Some(Tok::Ident(x)) if !KEYWORDS.contains(&x.as_str()) => {
                let x = x.clone();
                self.pos += 1;
                Ok(x)
            }
            _ => Err(self.err("expected an identifier")),
        }
    }

    fn ident(&mut self) -> Result<String, ImpError> {
        let x = self.any_ident()?;
        if x.contains('.') {
            self.pos -= 1;
            return Err(self.err(format!("unexpected qualified name {x}")));
        }
        Ok(x)
    }

    fn int(&mut self) -> Result<i64, ImpError> {
        let neg = self.is_sym("-");
        if neg {
            self.pos += 1;
        }
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = if neg { -*n } else { *n };
                let n = i64::try_from(n).map_err(|_| self.err("integer literal out of range"))?;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err("expected an integer")),
        }
    }

    fn module(&mut self) -> Result<ImpModule, ImpError> {
        self.kw("module")?;
        let name = self.ident()?;
        let mut globals = vec![];
        while self.is_kw("local") {
            self.pos += 1;
            let g = self.ident()?;
            self.sym("=")?;
            let v = self.int()?;
            self.globals.insert(g.clone());
            globals.push((g, v));
        }
        let mut funs: Vec<ImpFun> = vec![];
        while self.is_kw("def") {
            let f = self.fun()?;
            if funs.iter().any(|g| g.name == f.name) {
                return Err(ImpError::Wf { fun: f.name, msg: "defined twice".into() });
            }
            funs.push(f);
        }
        if self.pos < self.toks.len() {
            return Err(self.err("expected `def` or end of input"));
        }
        Ok(ImpModule { name, globals, funs })
    }

    fn names(&mut self, close: &str) -> Result<Vec<String>, ImpError> {
        let mut out = vec![];
        if self.is_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.is_sym(",") {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }

    fn fun(&mut self) -> Result<ImpFun, ImpError> {
        self.kw("def")?;
        let name = self.ident()?;
        self.sym("(")?;
        let params = self.names(")")?;
        self.sym(")")?;
        self.sym("{")?;
        let mut locals = vec![];
        if self.is_kw("var") {
            self.pos += 1;
            locals = self.names(";")?;
            self.sym(";")?;
        }
        let mut seen = BTreeSet::new();
        for x in params.iter().chain(&locals) {
            if !seen.insert(x.clone()) {
                return Err(ImpError::Wf { fun: name, msg: format!("variable {x} declared twice") });
            }
        }
        self.vars = seen;
        let mut body = vec![];
        while !self.is_kw("return") && !self.is_sym("}") {
            body.push(self.stmt()?);
            self.sym(";")?;
        }
        let ret = if self.is_kw("return") {
            self.pos += 1;
            self.expr()?
        } else {
            Expr::Lit(0)
        };
        self.sym("}")?;
        Ok(ImpFun { name, params, locals, body, ret })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ImpError> {
        self.sym("{")?;
        let mut out = vec![];
        while !self.is_sym("}") {
            out.push(self.stmt()?);
            if self.is_sym(";") {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.sym("}")?;
        Ok(out)
    }

    fn assignable(&self, x: &str) -> Result<(), ImpError> {
        if self.vars.contains(x) || self.globals.contains(x) {
            Ok(())
        } else {
            Err(self.err(format!("undeclared variable {x}")))
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ImpError> {
        self.sym("(")?;
        let mut out = vec![];
        if !self.is_sym(")") {
            loop {
                out.push(self.expr()?);
                if self.is_sym(",") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.sym(")")?;
        Ok(out)
    }

    fn one_arg(&mut self) -> Result<Expr, ImpError> {
        let mut a = self.args()?;
        if a.len() != 1 {
            return Err(self.err("expected one argument"));
        }
        Ok(a.remove(0))
    }

    fn two_args(&mut self) -> Result<(Expr, Expr), ImpError> {
        let mut a = self.args()?;
        if a.len() != 2 {
            return Err(self.err("expected two arguments"));
        }
        let b = a.remove(1);
        Ok((a.remove(0), b))
    }

    fn callee(&self, name: String) -> Callee {
        if name.contains('.') {
            Callee::Direct(name)
        } else if self.vars.contains(&name) || self.globals.contains(&name) {
            Callee::Indirect(name)
        } else {
            Callee::Obs(name)
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ImpError> {
        if self.is_kw("skip") {
            self.pos += 1;
            return Ok(Stmt::Skip);
        }
        if self.is_kw("if") {
            self.pos += 1;
            self.sym("(")?;
            let c = self.expr()?;
            self.sym(")")?;
            self.kw("then")?;
            let t = self.block()?;
            let e = if self.is_kw("else") {
                self.pos += 1;
                self.block()?
            } else {
                vec![]
            };
            return Ok(Stmt::If(c, t, e));
        }
        if self.is_kw("free") {
            self.pos += 1;
            return Ok(Stmt::Free(self.one_arg()?));
        }
        if self.is_kw("store") {
            self.pos += 1;
            let (a, b) = self.two_args()?;
            return Ok(Stmt::Store(a, b));
        }
        if self.is_kw("cmp") {
            return Err(self.err("cmp needs a result variable"));
        }
        let name = self.any_ident()?;
        if self.is_sym("(") {
            let args = self.args()?;
            return Ok(Stmt::Call { ret: None, callee: self.callee(name), args });
        }
        if name.contains('.') {
            return Err(self.err("expected `(` after a qualified name"));
        }
        if self.is_sym(":=") {
            self.assignable(&name)?;
            self.pos += 1;
            return Ok(Stmt::Assign(name, self.expr()?));
        }
        self.sym("=")?;
        self.assignable(&name)?;
        if self.is_sym("&") {
            self.pos += 1;
            let g = self.any_ident()?;
            if !g.contains('.') {
                return Err(self.err("`&` needs a qualified function name"));
            }
            return Ok(Stmt::AddrOf(name, g));
        }
        if self.is_kw("malloc") {
            self.pos += 1;
            return Ok(Stmt::Malloc(name, self.one_arg()?));
        }
        if self.is_kw("load") {
            self.pos += 1;
            return Ok(Stmt::Load(name, self.one_arg()?));
        }
        if self.is_kw("cmp") && matches!(self.peek2(), Some(Tok::Sym("("))) {
            self.pos += 1;
            let (a, b) = self.two_args()?;
            return Ok(Stmt::Cmp(name, a, b));
        }
        let f = self.any_ident()?;
        let args = self.args()?;
        Ok(Stmt::Call { ret: Some(name), callee: self.callee(f), args })
    }

    fn expr(&mut self) -> Result<Expr, ImpError> {
        self.level(1)
    }

    fn op_at(&self, prec: u8) -> Option<BinOp> {
        let op = match self.peek()? {
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Sym("/") => BinOp::Div,
            Tok::Sym("%") => BinOp::Mod,
            _ => return None,
        };
        (op.prec() == prec).then_some(op)
    }

    fn level(&mut self, prec: u8) -> Result<Expr, ImpError> {
        if prec > 3 {
            return self.primary();
        }
        let mut e = self.level(prec + 1)?;
        while let Some(op) = self.op_at(prec) {
            self.pos += 1;
            let rhs = self.level(prec + 1)?;
            e = Expr::bin(op, e, rhs);
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ImpError> {
        match self.peek() {
            Some(Tok::Int(_)) | Some(Tok::Sym("-")) => Ok(Expr::Lit(self.int()?)),
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            _ => {
                let x = self.ident()?;
                if !self.vars.contains(&x) && !self.globals.contains(&x) && x != "NULL" {
                    self.pos -= 1;
                    return Err(self.err(format!("undeclared variable {x}")));
                }
                Ok(if x == "NULL" { Expr::Lit(0) } else { Expr::Var(x) })
            }
        }
    }
}

/// Parses one module.
pub fn parse(src: &str) -> Result<ImpModule, ImpError> {
    let toks = lex(src)?;
    Parser { toks, pos: 0, vars: BTreeSet::new(), globals: BTreeSet::new() }.module()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imp::render;

    const F: &str = "module F\n\ndef f(x) {\n  var r;\n  r := x * x / 4 + x + 1;\n  print(r);\n  return r\n}\n";

    #[test]
    fn parses_figure_body() {
        let m = parse(F).unwrap();
        assert_eq!(m.funs.len(), 1);
        let f = &m.funs[0];
        assert_eq!(f.params, vec!["x"]);
        assert!(matches!(&f.body[1], Stmt::Call { callee: Callee::Obs(p), .. } if p == "print"));
        assert_eq!(render(&m), F);
    }

    #[test]
    fn minimal_program() {
        let m = parse("module M def f(x) { skip; return 0 }").unwrap();
        assert_eq!(m.funs[0].body, vec![Stmt::Skip]);
    }

    #[test]
    fn precedence_and_assoc() {
        let m = parse("module M def f(a, b, c) { return a - (b - c) * 2 == a % 3 }").unwrap();
        let r = render(&m);
        assert!(r.contains("return a - (b - c) * 2 == a % 3"), "{r}");
        assert_eq!(parse(&r).unwrap(), m);
    }

    #[test]
    fn errors_carry_position() {
        let e = parse("module M\ndef f() {\n  x := 1;\n  return 0\n}").unwrap_err();
        assert!(matches!(e, ImpError::Syntax { line: 3, .. }), "{e}");
        assert!(matches!(parse("module M def f(x, x) { return 0 }"), Err(ImpError::Wf { .. })));
        assert!(matches!(parse("module M def f() { return 0 } $"), Err(ImpError::Syntax { .. })));
    }

    #[test]
    fn callee_resolution() {
        let m = parse("module M def f(fp) { var r, p; r = fp(1); r = M.g(r); p = &M.g; return r }").unwrap();
        let b = &m.funs[0].body;
        assert!(matches!(&b[0], Stmt::Call { callee: Callee::Indirect(_), .. }));
        assert!(matches!(&b[1], Stmt::Call { callee: Callee::Direct(_), .. }));
        assert!(matches!(&b[2], Stmt::AddrOf(..)));
    }
}
