//! Operator-precedence reader producing surface terms.
//!
//! This is a small Prolog-style reader over the closed operator table in
//! [`crate::term::ops`]. It knows nothing about rules; the compiler in
//! [`super::compile`] interprets the resulting trees.

use super::lexer::{tokenize, Tok, Token};
use crate::error::{Error, Result};
use crate::term::ops::{self, Assoc};

/// Surface term with named variables and source position.
#[derive(Debug, Clone, PartialEq)]
pub enum PTerm {
    Atom(String),
    Int(i64),
    Float(f64),
    Var(String),
    Compound(String, Vec<PTerm>),
    List(Vec<PTerm>),
}

impl PTerm {
    pub fn is_functor(&self, name: &str, arity: usize) -> bool {
        match self {
            PTerm::Atom(a) => arity == 0 && a == name,
            PTerm::Compound(f, args) => f == name && args.len() == arity,
            _ => false,
        }
    }

    pub fn args(&self) -> &[PTerm] {
        match self {
            PTerm::Compound(_, args) => args,
            _ => &[],
        }
    }

    /// Flattens a right-nested binary operator chain (`,` or `;`).
    pub fn flatten(&self, op: &str) -> Vec<&PTerm> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                PTerm::Compound(f, args) if f == op && args.len() == 2 => {
                    out.extend(args[0].flatten(op));
                    cur = &args[1];
                }
                _ => {
                    out.push(cur);
                    return out;
                }
            }
        }
    }
}

/// A clause together with the position of its first token.
#[derive(Debug, Clone)]
pub struct Clause {
    pub term: PTerm,
    pub line: usize,
    pub col: usize,
}

pub struct Reader {
    toks: Vec<Token>,
    pos: usize,
}

impl Reader {
    pub fn new(src: &str) -> Result<Self> {
        Ok(Reader {
            toks: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(Error::syntax(t.line, t.col, msg))
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    /// Reads every `.`-terminated clause. A final clause may omit the period
    /// when `lenient_end` is set.
    pub fn clauses(mut self, lenient_end: bool) -> Result<Vec<Clause>> {
        let mut out = Vec::new();
        while !self.at_eof() {
            let (line, col) = (self.peek().line, self.peek().col);
            let term = self.term(1200, true)?;
            match self.peek().tok {
                Tok::End => {
                    self.next();
                }
                Tok::Eof if lenient_end => {}
                _ => return self.err(format!("expected end of clause, found {:?}", self.peek().tok)),
            }
            out.push(Clause { term, line, col });
        }
        Ok(out)
    }

    /// Reads a single term spanning the whole input (optional final period).
    pub fn whole(mut self) -> Result<Option<PTerm>> {
        if self.at_eof() {
            return Ok(None);
        }
        let t = self.term(1200, true)?;
        if self.peek().tok == Tok::End {
            self.next();
        }
        if !self.at_eof() {
            return self.err(format!("unexpected {:?}", self.peek().tok));
        }
        Ok(Some(t))
    }

    fn can_start_term(tok: &Tok) -> bool {
        match tok {
            Tok::Name(n) => ops::infix(n).is_none() || ops::prefix(n).is_some(),
            Tok::Var(_) | Tok::Int(_) | Tok::Float(_) | Tok::Open | Tok::OpenList => true,
            _ => false,
        }
    }

    fn infix_here(&self, comma_ok: bool) -> Option<(String, u16, Assoc)> {
        match &self.peek().tok {
            Tok::Comma if comma_ok => Some((",".into(), 1000, Assoc::Xfy)),
            Tok::Bar if comma_ok => Some(("|".into(), 1170, Assoc::Xfx)),
            Tok::Name(n) => ops::infix(n).map(|(p, a)| (n.clone(), p, a)),
            _ => None,
        }
    }

    /// Parses a term of priority at most `max`. `comma_ok` is false inside
    /// argument lists, where `,` separates arguments.
    fn term(&mut self, max: u16, comma_ok: bool) -> Result<PTerm> {
        let (mut left, mut left_prec) = self.primary(max, comma_ok)?;
        while let Some((name, p, assoc)) = self.infix_here(comma_ok) {
            let (lmax, rmax) = match assoc {
                Assoc::Xfx => (p - 1, p - 1),
                Assoc::Xfy => (p - 1, p),
                Assoc::Yfx => (p, p - 1),
            };
            if p > max || left_prec > lmax {
                break;
            }
            self.next();
            let right = self.term(rmax, comma_ok)?;
            left = PTerm::Compound(name, vec![left, right]);
            left_prec = p;
        }
        Ok(left)
    }

    fn primary(&mut self, max: u16, comma_ok: bool) -> Result<(PTerm, u16)> {
        let t = self.next();
        match t.tok {
            Tok::Int(i) => Ok((PTerm::Int(i), 0)),
            Tok::Float(f) => Ok((PTerm::Float(f), 0)),
            Tok::Var(v) => Ok((PTerm::Var(v), 0)),
            Tok::Open => {
                let inner = self.term(1200, true)?;
                self.expect(Tok::Close)?;
                Ok((inner, 0))
            }
            Tok::OpenList => {
                let mut items = vec![self.term(999, false)?];
                while self.peek().tok == Tok::Comma {
                    self.next();
                    items.push(self.term(999, false)?);
                }
                self.expect(Tok::CloseList)?;
                Ok((PTerm::List(items), 0))
            }
            Tok::Name(name) => {
                if t.call {
                    self.next();
                    let mut args = vec![self.term(1200, false)?];
                    while self.peek().tok == Tok::Comma {
                        self.next();
                        args.push(self.term(1200, false)?);
                    }
                    self.expect(Tok::Close)?;
                    return Ok((PTerm::Compound(name, args), 0));
                }
                if name == "-" {
                    match self.peek().tok {
                        Tok::Int(i) => {
                            self.next();
                            return Ok((PTerm::Int(-i), 0));
                        }
                        Tok::Float(f) => {
                            self.next();
                            return Ok((PTerm::Float(-f), 0));
                        }
                        _ => {}
                    }
                }
                if let Some((p, eq)) = ops::prefix(&name) {
                    let next = &self.peek().tok;
                    let operand_follows = Self::can_start_term(next)
                        && !matches!(next, Tok::Name(n) if ops::infix(n).is_some() && ops::prefix(n).is_none());
                    if operand_follows {
                        let (p, arg_max) = if p > max {
                            (max, max)
                        } else {
                            (p, if eq { p } else { p - 1 })
                        };
                        let operand = self.term(arg_max, comma_ok)?;
                        return Ok((PTerm::Compound(name, vec![operand]), p));
                    }
                }
                Ok((PTerm::Atom(name), 0))
            }
            other => Err(Error::syntax(
                t.line,
                t.col,
                format!("unexpected {}", describe(&other)),
            )),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            let found = describe(&self.peek().tok);
            self.err(format!("expected {}, found {found}", describe(&tok)))
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Name(n) => format!("`{n}`"),
        Tok::Var(v) => format!("variable {v}"),
        Tok::Int(i) => i.to_string(),
        Tok::Float(f) => f.to_string(),
        Tok::Open => "`(`".into(),
        Tok::Close => "`)`".into(),
        Tok::OpenList => "`[`".into(),
        Tok::CloseList => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Bar => "`|`".into(),
        Tok::End => "end of clause".into(),
        Tok::Eof => "end of input".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> PTerm {
        Reader::new(s).unwrap().whole().unwrap().unwrap()
    }

    fn c(f: &str, args: Vec<PTerm>) -> PTerm {
        PTerm::Compound(f.into(), args)
    }

    fn a(s: &str) -> PTerm {
        PTerm::Atom(s.into())
    }

    #[test]
    fn chance_rule_shape() {
        let t = read("0.5 ?? a <=> b.");
        assert_eq!(
            t,
            c("<=>", vec![c("??", vec![PTerm::Float(0.5), a("a")]), a("b")])
        );
    }

    #[test]
    fn experiment_disjunction_in_body() {
        let t = read("burglary(B), earthquake(E) ==> B,E ?? alarm(yes) ; alarm(no).");
        let body = &t.args()[1];
        assert!(body.is_functor("??", 2));
        assert!(body.args()[0].is_functor(",", 2));
        assert!(body.args()[1].is_functor(";", 2));
    }

    #[test]
    fn anonymous_prefix_forms() {
        let t = read("go ==> ?? burglary(yes) ; burglary(no).");
        let body = &t.args()[1];
        assert!(body.is_functor("??", 1));
        let t = read("?? a <=> b.");
        assert!(t.args()[0].is_functor("??", 1));
    }

    #[test]
    fn guard_bar_and_simpagation() {
        let t = read("gcd(N) \\ gcd(M) <=> N =< M | L is M mod N, gcd(L).");
        assert!(t.args()[0].is_functor("\\", 2));
        let rhs = &t.args()[1];
        assert!(rhs.is_functor("|", 2));
        assert!(rhs.args()[1].is_functor(",", 2));
    }

    #[test]
    fn cond_inside_arguments() {
        let t = read("foo(cond A>B) ?? c(A,B) <=> d.");
        let name = &t.args()[0].args()[0];
        assert!(name.is_functor("foo", 1));
        assert!(name.args()[0].is_functor("cond", 1));
        assert!(name.args()[0].args()[0].is_functor(">", 2));
    }

    #[test]
    fn arithmetic_precedence() {
        let t = read("X is 1 + 2 * 3 - -4");
        assert_eq!(
            t,
            c(
                "is",
                vec![
                    PTerm::Var("X".into()),
                    c(
                        "-",
                        vec![
                            c(
                                "+",
                                vec![PTerm::Int(1), c("*", vec![PTerm::Int(2), PTerm::Int(3)])]
                            ),
                            PTerm::Int(-4)
                        ]
                    )
                ]
            )
        );
    }

    #[test]
    fn observation_with_count_and_negation() {
        let t = read("50 times player(tom),player(jon) ===> ~winner(tom),~winner(jon)");
        assert!(t.is_functor("times", 2));
        let obs = &t.args()[1];
        assert!(obs.is_functor("===>", 2));
        let rhs = obs.args()[1].flatten(",");
        assert_eq!(rhs.len(), 2);
        assert!(rhs[0].is_functor("~", 1));
    }

    #[test]
    fn operator_heavy_argument() {
        let t = read("count(a ===> b, 3)");
        assert!(t.is_functor("count", 2));
        assert!(t.args()[0].is_functor("===>", 2));
    }

    #[test]
    fn lists_and_directives() {
        let t = read(":- set_sw(choice(tom), [0.2, 0.3, 0.5]).");
        assert!(t.is_functor(":-", 1));
        let call = &t.args()[0];
        assert!(matches!(&call.args()[1], PTerm::List(v) if v.len() == 3));
    }

    #[test]
    fn clauses_report_errors_with_position() {
        let err = Reader::new("a <=> b.\nc <=> (d.")
            .unwrap()
            .clauses(false)
            .unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
    }
}
