//! Terms and constraints.
//!
//! Data handled by the engine is ground. Rule heads, guards and bodies may
//! contain variables, which are numbered per rule and resolved through an
//! [`Env`](crate::runtime::builtins::Env) at match time.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Interned-by-sharing symbol name.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// Index of a variable within its rule.
pub type VarId = u32;

#[derive(Debug, Clone)]
pub enum Term {
    Atom(Sym),
    Int(i64),
    Float(f64),
    Compound(Sym, Vec<Term>),
    Var(VarId),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(sym(name))
    }

    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::atom(functor)
        } else {
            Term::Compound(sym(functor), args)
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Atom(a) => Some((a, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Term::Int(_) | Term::Float(_))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Term::Int(i) => Some(*i as f64),
            Term::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<VarId>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    /// Rank in the standard order of terms: numbers < atoms < compounds.
    fn rank(&self) -> u8 {
        match self {
            Term::Var(_) => 0,
            Term::Int(_) | Term::Float(_) => 1,
            Term::Atom(_) => 2,
            Term::Compound(..) => 3,
        }
    }

    /// Renders with the given variable names (falls back to `_G<n>`).
    pub fn display_with<'a>(&'a self, names: &'a [Sym]) -> TermDisplay<'a> {
        TermDisplay { term: self, names }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Term {}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        use Term::*;
        match (self, other) {
            (Var(a), Var(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Float(a), Float(b)) => a.total_cmp(b),
            (Int(a), Float(b)) => (*a as f64).total_cmp(b).then(Ordering::Greater),
            (Float(a), Int(b)) => a.total_cmp(&(*b as f64)).then(Ordering::Less),
            (Atom(a), Atom(b)) => a.cmp(b),
            (Compound(f, xs), Compound(g, ys)) => xs
                .len()
                .cmp(&ys.len())
                .then_with(|| f.cmp(g))
                .then_with(|| xs.cmp(ys)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Term::Atom(a) => {
                0u8.hash(state);
                a.hash(state)
            }
            Term::Int(i) => {
                1u8.hash(state);
                i.hash(state)
            }
            Term::Float(f) => {
                2u8.hash(state);
                f.to_bits().hash(state)
            }
            Term::Compound(f, args) => {
                3u8.hash(state);
                f.hash(state);
                args.hash(state)
            }
            Term::Var(v) => {
                4u8.hash(state);
                v.hash(state)
            }
        }
    }
}

impl From<i64> for Term {
    fn from(i: i64) -> Self {
        Term::Int(i)
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::atom(s)
    }
}

/// Operator table shared by the parser and the printer.
pub mod ops {
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Assoc {
        Xfx,
        Xfy,
        Yfx,
    }

    pub fn infix(name: &str) -> Option<(u16, Assoc)> {
        use Assoc::*;
        Some(match name {
            ":-" => (1200, Xfx),
            "times" => (1195, Xfx),
            "<==>" | "===>" => (1190, Xfx),
            "<=>" | "==>" => (1180, Xfx),
            "|" => (1170, Xfx),
            "??" => (1160, Xfx),
            "\\" => (1150, Xfx),
            ";" => (1100, Xfy),
            "->" => (1050, Xfy),
            "," => (1000, Xfy),
            "=" | "\\=" | "==" | "\\==" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" | "is" => (700, Xfx),
            "+" | "-" => (500, Yfx),
            "*" | "/" | "//" | "mod" => (400, Yfx),
            "**" => (200, Xfx),
            ":" => (200, Xfy),
            _ => return None,
        })
    }

    /// Prefix operators: (priority, operand may have equal priority).
    pub fn prefix(name: &str) -> Option<(u16, bool)> {
        Some(match name {
            ":-" => (1200, false),
            "??" => (1160, false),
            "\\+" | "cond" | "~" => (900, true),
            "-" | "+" => (200, true),
            _ => return None,
        })
    }

    /// Operators printed without surrounding spaces.
    pub fn tight(name: &str) -> bool {
        matches!(name, "," | ":")
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    names: &'a [Sym],
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, self.names, 1200)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, &[], 1200)
    }
}

fn atom_needs_quotes(a: &str) -> bool {
    match a.chars().next() {
        None => true,
        Some(c) if c.is_ascii_lowercase() => !a.chars().all(|c| c.is_alphanumeric() || c == '_'),
        _ if matches!(a, "[]" | "!" | ";") => false,
        _ => !a.chars().all(crate::syntax::lexer::is_symbol_char),
    }
}

pub(crate) fn write_atom(f: &mut fmt::Formatter<'_>, a: &str) -> fmt::Result {
    if atom_needs_quotes(a) {
        write!(f, "'")?;
        for c in a.chars() {
            match c {
                '\'' => write!(f, "\\'")?,
                '\\' => write!(f, "\\\\")?,
                '\n' => write!(f, "\\n")?,
                c => write!(f, "{c}")?,
            }
        }
        write!(f, "'")
    } else {
        write!(f, "{a}")
    }
}

fn write_float(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    // `{:?}` keeps a decimal point (1.0, not 1) so floats reparse as floats.
    write!(f, "{x:?}")
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, names: &[Sym], max: u16) -> fmt::Result {
    match t {
        Term::Atom(a) => {
            if max < 1200 && (ops::infix(a).is_some() || ops::prefix(a).is_some()) {
                write!(f, "(")?;
                write_atom(f, a)?;
                write!(f, ")")
            } else {
                write_atom(f, a)
            }
        }
        Term::Int(i) => write!(f, "{i}"),
        Term::Float(x) => write_float(f, *x),
        Term::Var(v) => match names.get(*v as usize) {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "_G{v}"),
        },
        Term::Compound(name, args) => {
            if args.len() == 2 {
                if let Some((p, assoc)) = ops::infix(name) {
                    let (lmax, rmax) = match assoc {
                        ops::Assoc::Xfx => (p - 1, p - 1),
                        ops::Assoc::Xfy => (p - 1, p),
                        ops::Assoc::Yfx => (p, p - 1),
                    };
                    let paren = p > max;
                    if paren {
                        write!(f, "(")?;
                    }
                    write_term(f, &args[0], names, lmax)?;
                    if ops::tight(name) {
                        write!(f, "{name}")?;
                    } else {
                        write!(f, " {name} ")?;
                    }
                    let neg_num = matches!(&args[1], Term::Int(i) if *i < 0)
                        || matches!(&args[1], Term::Float(x) if x.is_sign_negative());
                    if neg_num {
                        write!(f, "(")?;
                        write_term(f, &args[1], names, 1200)?;
                        write!(f, ")")?;
                    } else {
                        write_term(f, &args[1], names, rmax)?;
                    }
                    if paren {
                        write!(f, ")")?;
                    }
                    return Ok(());
                }
            }
            if args.len() == 1 && !args[0].is_number() {
                if let Some((p, eq)) = ops::prefix(name) {
                    let paren = p > max;
                    if paren {
                        write!(f, "(")?;
                    }
                    write!(f, "{name} ")?;
                    write_term(f, &args[0], names, if eq { p } else { p - 1 })?;
                    if paren {
                        write!(f, ")")?;
                    }
                    return Ok(());
                }
            }
            write_atom(f, name)?;
            write!(f, "(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write_term(f, a, names, 999)?;
            }
            write!(f, ")")
        }
    }
}

/// A CHRiSM constraint: functor plus arguments, identified by functor/arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub functor: Sym,
    pub args: Vec<Term>,
}

impl Constraint {
    pub fn new(functor: &str, args: Vec<Term>) -> Self {
        Constraint {
            functor: sym(functor),
            args,
        }
    }

    pub fn atom(functor: &str) -> Self {
        Constraint::new(functor, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn to_term(&self) -> Term {
        if self.args.is_empty() {
            Term::Atom(self.functor.clone())
        } else {
            Term::Compound(self.functor.clone(), self.args.clone())
        }
    }

    pub fn from_term(t: &Term) -> Option<Constraint> {
        match t {
            Term::Atom(a) => Some(Constraint {
                functor: a.clone(),
                args: Vec::new(),
            }),
            Term::Compound(f, args) => Some(Constraint {
                functor: f.clone(),
                args: args.clone(),
            }),
            _ => None,
        }
    }

    pub fn display_with<'a>(&'a self, names: &'a [Sym]) -> ConstraintDisplay<'a> {
        ConstraintDisplay { c: self, names }
    }
}

pub struct ConstraintDisplay<'a> {
    c: &'a Constraint,
    names: &'a [Sym],
}

impl fmt::Display for ConstraintDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, &self.c.functor)?;
        if !self.c.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.c.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write_term(f, a, self.names, 999)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.display_with(&[]).fmt(f)
    }
}

/// Renders constraints as a comma-separated list, in the given order.
pub fn render_conjunction(cs: &[Constraint]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}
