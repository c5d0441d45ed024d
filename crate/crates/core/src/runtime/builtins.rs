//! Bindings, head matching, arithmetic and the builtin goals allowed in
//! guards and bodies.
//!
//! Execution is ground, so the builtin store collapses to "has everything
//! succeeded so far". Goals are deterministic: if-then-else and disjunction
//! commit to the first succeeding branch.

use crate::error::{Error, Result};
use crate::term::{Constraint, Term, VarId};

/// Variable bindings of one rule instance, indexed by `VarId`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Env {
    slots: Vec<Option<Term>>,
}

impl Env {
    pub fn new(vars: usize) -> Self {
        Env {
            slots: vec![None; vars],
        }
    }

    pub fn get(&self, v: VarId) -> Option<&Term> {
        self.slots.get(v as usize).and_then(|s| s.as_ref())
    }

    pub fn bind(&mut self, v: VarId, t: Term) {
        let i = v as usize;
        if i >= self.slots.len() {
            self.slots.resize(i + 1, None);
        }
        self.slots[i] = Some(t);
    }

    fn unbind(&mut self, v: VarId) {
        if let Some(s) = self.slots.get_mut(v as usize) {
            *s = None;
        }
    }

    /// Follows variable-to-variable bindings.
    fn deref<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.get(*v) {
                Some(b) => t = b,
                None => return t,
            }
        }
        t
    }

    /// Applies the bindings; unbound variables stay in place.
    pub fn resolve(&self, t: &Term) -> Term {
        match self.deref(t) {
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
            other => other.clone(),
        }
    }

    /// Applies the bindings and insists on a ground result.
    pub fn ground(&self, t: &Term, what: &str, names: &[crate::term::Sym]) -> Result<Term> {
        let r = self.resolve(t);
        if r.is_ground() {
            Ok(r)
        } else {
            Err(Error::Instantiation(format!(
                "{what} `{}` is not ground",
                t.display_with(names)
            )))
        }
    }

    pub fn ground_constraint(&self, c: &Constraint, names: &[crate::term::Sym]) -> Result<Constraint> {
        let args = c
            .args
            .iter()
            .map(|a| self.ground(a, "constraint argument", names))
            .collect::<Result<_>>()?;
        Ok(Constraint {
            functor: c.functor.clone(),
            args,
        })
    }
}

/// Undo log for speculative bindings.
#[derive(Debug, Default)]
pub struct Trail(Vec<VarId>);

impl Trail {
    pub fn mark(&self) -> usize {
        self.0.len()
    }

    pub fn undo(&mut self, env: &mut Env, mark: usize) {
        for v in self.0.drain(mark..) {
            env.unbind(v);
        }
    }
}

/// One-sided matching of a pattern (with variables) against a ground term.
pub fn match_term(pattern: &Term, ground: &Term, env: &mut Env, trail: &mut Trail) -> bool {
    match pattern {
        Term::Var(v) => match env.get(*v).cloned() {
            Some(bound) => match_term(&bound, ground, env, trail),
            None => {
                env.bind(*v, ground.clone());
                trail.0.push(*v);
                true
            }
        },
        Term::Compound(f, args) => match ground {
            Term::Compound(g, gargs) if f == g && args.len() == gargs.len() => {
                args.iter().zip(gargs).all(|(p, g)| match_term(p, g, env, trail))
            }
            _ => false,
        },
        other => other == ground,
    }
}

pub fn match_constraint(pattern: &Constraint, ground: &Constraint, env: &mut Env, trail: &mut Trail) -> bool {
    pattern.functor == ground.functor
        && pattern.args.len() == ground.args.len()
        && pattern
            .args
            .iter()
            .zip(&ground.args)
            .all(|(p, g)| match_term(p, g, env, trail))
}

/// Whether the ground `name` is an instance of `pattern` (fresh bindings).
pub fn matches_pattern(pattern: &Term, name: &Term) -> bool {
    let mut env = Env::default();
    let mut trail = Trail::default();
    match_term(pattern, name, &mut env, &mut trail)
}

/// Two-sided unification under `env`.
fn unify(a: &Term, b: &Term, env: &mut Env, trail: &mut Trail) -> bool {
    let a = env.deref(a).clone();
    let b = env.deref(b).clone();
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), _) => {
            env.bind(*x, b);
            trail.0.push(*x);
            true
        }
        (_, Term::Var(y)) => {
            env.bind(*y, a);
            trail.0.push(*y);
            true
        }
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, env, trail))
        }
        _ => a == b,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Num {
    Int(i64),
    Float(f64),
}

impl Num {
    pub fn to_f64(self) -> f64 {
        match self {
            Num::Int(i) => i as f64,
            Num::Float(f) => f,
        }
    }

    fn to_term(self) -> Term {
        match self {
            Num::Int(i) => Term::Int(i),
            Num::Float(f) => Term::Float(f),
        }
    }
}

fn arith_err(msg: impl Into<String>) -> Error {
    Error::Arithmetic(msg.into())
}

/// Evaluates an arithmetic expression: `+ - * / // mod`, unary minus,
/// `min/2`, `max/2`, `abs/1`, `**`.
pub fn eval_arith(t: &Term, env: &Env) -> Result<Num> {
    match env.deref(t) {
        Term::Int(i) => Ok(Num::Int(*i)),
        Term::Float(f) => Ok(Num::Float(*f)),
        Term::Var(_) => Err(Error::Instantiation(
            "unbound variable in arithmetic expression".into(),
        )),
        Term::Atom(a) => match &**a {
            "pi" => Ok(Num::Float(std::f64::consts::PI)),
            "e" => Ok(Num::Float(std::f64::consts::E)),
            other => Err(arith_err(format!("`{other}` is not a number"))),
        },
        Term::Compound(f, args) => {
            let f = &**f;
            if args.len() == 1 {
                let x = eval_arith(&args[0], env)?;
                return match (f, x) {
                    ("-", Num::Int(i)) => Ok(Num::Int(-i)),
                    ("-", Num::Float(v)) => Ok(Num::Float(-v)),
                    ("+", x) => Ok(x),
                    ("abs", Num::Int(i)) => Ok(Num::Int(i.abs())),
                    ("abs", Num::Float(v)) => Ok(Num::Float(v.abs())),
                    _ => Err(arith_err(format!("unknown function {f}/1"))),
                };
            }
            if args.len() != 2 {
                return Err(arith_err(format!("unknown function {f}/{}", args.len())));
            }
            let x = eval_arith(&args[0], env)?;
            let y = eval_arith(&args[1], env)?;
            use Num::*;
            let overflow = || arith_err("integer overflow");
            match (f, x, y) {
                ("+", Int(a), Int(b)) => a.checked_add(b).map(Int).ok_or_else(overflow),
                ("-", Int(a), Int(b)) => a.checked_sub(b).map(Int).ok_or_else(overflow),
                ("*", Int(a), Int(b)) => a.checked_mul(b).map(Int).ok_or_else(overflow),
                ("+", a, b) => Ok(Float(a.to_f64() + b.to_f64())),
                ("-", a, b) => Ok(Float(a.to_f64() - b.to_f64())),
                ("*", a, b) => Ok(Float(a.to_f64() * b.to_f64())),
                ("/", _, b) if b.to_f64() == 0.0 => Err(arith_err("division by zero")),
                ("/", Int(a), Int(b)) if a % b == 0 => Ok(Int(a / b)),
                ("/", a, b) => Ok(Float(a.to_f64() / b.to_f64())),
                ("//" | "mod", Int(_), Int(0)) => Err(arith_err("division by zero")),
                ("//", Int(a), Int(b)) => Ok(Int(a / b)),
                ("mod", Int(a), Int(b)) => {
                    let r = a % b;
                    Ok(Int(if r != 0 && (r < 0) != (b < 0) { r + b } else { r }))
                }
                ("min", a, b) => Ok(if a.to_f64() <= b.to_f64() { a } else { b }),
                ("max", a, b) => Ok(if a.to_f64() >= b.to_f64() { a } else { b }),
                ("**", a, b) => Ok(Float(a.to_f64().powf(b.to_f64()))),
                ("//" | "mod", _, _) => Err(arith_err(format!("{f} expects integers"))),
                _ => Err(arith_err(format!("unknown function {f}/2"))),
            }
        }
    }
}

fn compare(op: &str, a: Num, b: Num) -> bool {
    let ord = match (a, b) {
        (Num::Int(x), Num::Int(y)) => x.cmp(&y),
        (x, y) => x.to_f64().total_cmp(&y.to_f64()),
    };
    use std::cmp::Ordering::*;
    match op {
        "<" => ord == Less,
        ">" => ord == Greater,
        "=<" => ord != Greater,
        ">=" => ord != Less,
        "=:=" => ord == Equal,
        "=\\=" => ord != Equal,
        _ => unreachable!("not a comparison: {op}"),
    }
}

/// Runs a builtin goal. Bindings made by a successful goal stay in `env`;
/// a failing goal leaves `env` as it found it.
pub fn solve(goal: &Term, env: &mut Env) -> Result<bool> {
    let mut trail = Trail::default();
    let ok = solve_in(goal, env, &mut trail)?;
    if !ok {
        trail.undo(env, 0);
    }
    Ok(ok)
}

fn solve_in(goal: &Term, env: &mut Env, trail: &mut Trail) -> Result<bool> {
    let goal = env.deref(goal).clone();
    let (name, args): (&str, &[Term]) = match &goal {
        Term::Atom(a) => (a, &[]),
        Term::Compound(f, args) => (f, args),
        Term::Var(_) => return Err(Error::Instantiation("unbound goal".into())),
        other => return Err(Error::Compile(format!("{other} is not a goal"))),
    };
    match (name, args.len()) {
        ("true" | "!", 0) => Ok(true),
        ("fail" | "false", 0) => Ok(false),
        (",", 2) => {
            let mark = trail.mark();
            if solve_in(&args[0], env, trail)? && solve_in(&args[1], env, trail)? {
                Ok(true)
            } else {
                trail.undo(env, mark);
                Ok(false)
            }
        }
        (";", 2) => {
            if let Term::Compound(f, ite) = env.deref(&args[0]).clone() {
                if &*f == "->" && ite.len() == 2 {
                    let mark = trail.mark();
                    return if solve_in(&ite[0], env, trail)? {
                        solve_in(&ite[1], env, trail)
                    } else {
                        trail.undo(env, mark);
                        solve_in(&args[1], env, trail)
                    };
                }
            }
            let mark = trail.mark();
            if solve_in(&args[0], env, trail)? {
                Ok(true)
            } else {
                trail.undo(env, mark);
                solve_in(&args[1], env, trail)
            }
        }
        ("->", 2) => {
            let mark = trail.mark();
            if solve_in(&args[0], env, trail)? {
                solve_in(&args[1], env, trail)
            } else {
                trail.undo(env, mark);
                Ok(false)
            }
        }
        ("\\+", 1) => {
            let mark = trail.mark();
            let ok = solve_in(&args[0], env, trail)?;
            trail.undo(env, mark);
            Ok(!ok)
        }
        ("=", 2) => {
            let mark = trail.mark();
            let ok = unify(&args[0], &args[1], env, trail);
            if !ok {
                trail.undo(env, mark);
            }
            Ok(ok)
        }
        ("\\=", 2) => {
            let mark = trail.mark();
            let ok = unify(&args[0], &args[1], env, trail);
            trail.undo(env, mark);
            Ok(!ok)
        }
        ("==", 2) => Ok(env.resolve(&args[0]) == env.resolve(&args[1])),
        ("\\==", 2) => Ok(env.resolve(&args[0]) != env.resolve(&args[1])),
        ("is", 2) => {
            let v = eval_arith(&args[1], env)?.to_term();
            let mark = trail.mark();
            let ok = unify(&args[0], &v, env, trail);
            if !ok {
                trail.undo(env, mark);
            }
            Ok(ok)
        }
        (op @ ("<" | ">" | "=<" | ">=" | "=:=" | "=\\="), 2) => {
            let a = eval_arith(&args[0], env)?;
            let b = eval_arith(&args[1], env)?;
            Ok(compare(op, a, b))
        }
        (other, n) => Err(Error::Compile(format!("unknown builtin {other}/{n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::reader::{PTerm, Reader};

    /// Reads a goal, numbering variables in order of appearance.
    fn goal(s: &str) -> (Term, Vec<String>) {
        fn conv(p: &PTerm, names: &mut Vec<String>) -> Term {
            match p {
                PTerm::Atom(a) => Term::atom(a),
                PTerm::Int(i) => Term::Int(*i),
                PTerm::Float(f) => Term::Float(*f),
                PTerm::Var(v) => {
                    let i = names.iter().position(|n| n == v).unwrap_or_else(|| {
                        names.push(v.clone());
                        names.len() - 1
                    });
                    Term::Var(i as VarId)
                }
                PTerm::Compound(f, args) => Term::compound(f, args.iter().map(|a| conv(a, names)).collect()),
                PTerm::List(_) => unreachable!(),
            }
        }
        let p = Reader::new(s).unwrap().whole().unwrap().unwrap();
        let mut names = Vec::new();
        let t = conv(&p, &mut names);
        (t, names)
    }

    fn run(s: &str) -> (bool, Env) {
        let (t, names) = goal(s);
        let mut env = Env::new(names.len());
        let ok = solve(&t, &mut env).unwrap();
        (ok, env)
    }

    #[test]
    fn comparisons() {
        assert!(run("3 < 5").0);
        assert!(!run("5 < 3").0);
        assert!(run("2 =:= 2.0").0);
        assert!(run("1 =\\= 2").0);
        assert!(run("4 =< 4, 4 >= 4").0);
    }

    #[test]
    fn arithmetic() {
        let (ok, env) = run("X is 3/(7-1)");
        assert!(ok);
        assert_eq!(env.get(0), Some(&Term::Float(0.5)));
        let (_, env) = run("X is 6/3");
        assert_eq!(env.get(0), Some(&Term::Int(2)));
        let (_, env) = run("X is -7 mod 3");
        assert_eq!(env.get(0), Some(&Term::Int(2)));
        let (_, env) = run("X is 7 mod -3");
        assert_eq!(env.get(0), Some(&Term::Int(-2)));
        let (_, env) = run("X is 7 // 2 + max(1, 2.5)");
        assert_eq!(env.get(0), Some(&Term::Float(5.5)));
        let (t, _) = goal("X is 1/0");
        assert!(solve(&t, &mut Env::new(1)).is_err());
    }

    #[test]
    fn if_then_else_binds() {
        let (ok, env) = run("A = 3, B = 2, (A > B -> X = yes ; X = no)");
        assert!(ok);
        assert_eq!(env.get(2), Some(&Term::atom("yes")));
        let (_, env) = run("A = 1, B = 2, (A > B -> X = yes ; X = no)");
        assert_eq!(env.get(2), Some(&Term::atom("no")));
    }

    #[test]
    fn failure_restores_bindings() {
        let (ok, env) = run("X = 1, 1 > 2");
        assert!(!ok);
        assert_eq!(env.get(0), None);
        assert!(run("\\+ 1 > 2").0);
        assert!(run("a \\= b").0);
        assert!(run("f(a) == f(a)").0);
    }

    #[test]
    fn head_matching_is_one_sided() {
        let mut env = Env::new(2);
        let mut trail = Trail::default();
        let pat = Constraint::new("edge", vec![Term::Var(0), Term::Var(0)]);
        let g = Constraint::new("edge", vec![Term::Int(1), Term::Int(2)]);
        assert!(!match_constraint(&pat, &g, &mut env, &mut trail));
        trail.undo(&mut env, 0);
        assert_eq!(env.get(0), None);
        let g = Constraint::new("edge", vec![Term::Int(1), Term::Int(1)]);
        assert!(match_constraint(&pat, &g, &mut env, &mut trail));
    }
}
