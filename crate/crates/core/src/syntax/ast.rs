//! Abstract syntax of chance-rule programs and observations.

use std::fmt;
use std::sync::Arc;

use crate::runtime::switches::SwitchRegistry;
use crate::term::{render_conjunction, write_atom, Constraint, Sym, Term};

/// How likely a rule instance is to fire once considered.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbExpr {
    Const(f64),
    /// Arithmetic expression over rule variables, evaluated per instance.
    Eval(Term),
    /// Named experiment (switch). Before desugaring the name may contain
    /// `cond C` arguments.
    Experiment(Term),
    /// `?? ...` with no name; replaced by `rule_<k>` during compilation.
    Anonymous,
}

/// Selects one branch of a probabilistic disjunction.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    /// LPAD-style `D1:P1 ; ... ; Dn:Pn`.
    Fixed(Vec<f64>),
    /// `E ?? D1 ; ... ; Dn`, with `E` an experiment name.
    Experiment(Term),
    Anonymous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Disjunction {
    /// Position of this disjunction among the rule's disjunctions (1-based,
    /// source order).
    pub site: usize,
    pub selector: Selector,
    pub branches: Vec<Vec<Arc<BodyItem>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodyItem {
    Constraint(Constraint),
    /// Host-language goal: comparison, arithmetic, unification, control.
    Builtin(Term),
    Disjunction(Disjunction),
}

pub type RuleId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct ChanceRule {
    /// 1-based position in the program.
    pub id: RuleId,
    pub prob: ProbExpr,
    pub kept: Vec<Constraint>,
    pub removed: Vec<Constraint>,
    /// Conjunction of builtin goals; empty means `true`.
    pub guard: Vec<Term>,
    pub body: Vec<Arc<BodyItem>>,
    /// Variable names indexed by `VarId`.
    pub var_names: Vec<Sym>,
}

impl ChanceRule {
    pub fn is_propagation(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn is_simplification(&self) -> bool {
        self.kept.is_empty()
    }

    /// Head constraints in textual order: kept heads, then removed heads.
    pub fn heads(&self) -> impl Iterator<Item = &Constraint> {
        self.kept.iter().chain(self.removed.iter())
    }

    pub fn head_count(&self) -> usize {
        self.kept.len() + self.removed.len()
    }

    pub fn head(&self, pos: usize) -> &Constraint {
        if pos < self.kept.len() {
            &self.kept[pos]
        } else {
            &self.removed[pos - self.kept.len()]
        }
    }

    pub fn var_count(&self) -> usize {
        self.var_names.len()
    }

    /// Iterates over every disjunction in the body, depth first.
    pub fn disjunctions(&self) -> Vec<&Disjunction> {
        fn walk<'a>(items: &'a [Arc<BodyItem>], out: &mut Vec<&'a Disjunction>) {
            for item in items {
                if let BodyItem::Disjunction(d) = item.as_ref() {
                    out.push(d);
                    for b in &d.branches {
                        walk(b, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub rules: Vec<ChanceRule>,
    /// Switches known at compile time: ground experiment names with their
    /// uniform defaults, overridden by `:- set_sw(...)` directives.
    pub switches: SwitchRegistry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationKind {
    /// `Q <==> A`
    Full,
    /// `Q ===> A`
    Partial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub query: Vec<Constraint>,
    pub kind: ObservationKind,
    pub answer: Vec<Constraint>,
    /// Negated constraints (`~c`), each checked on its own.
    pub negated: Vec<Constraint>,
    pub count: u64,
}

impl Observation {
    /// The observation without its count, as written in `prob` output.
    pub fn render(&self) -> String {
        let arrow = match self.kind {
            ObservationKind::Full => "<==>",
            ObservationKind::Partial => "===>",
        };
        let mut rhs: Vec<String> = self.answer.iter().map(|c| c.to_string()).collect();
        rhs.extend(self.negated.iter().map(|c| format!("~{c}")));
        format!("{} {arrow} {}", render_conjunction(&self.query), rhs.join(","))
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count != 1 {
            write!(f, "{} times ", self.count)?;
        }
        write!(f, "{}", self.render())
    }
}

// ---------------------------------------------------------------------------
// Pretty printing: the output reparses to a structurally equal program.

struct Items<'a> {
    items: &'a [Arc<BodyItem>],
    names: &'a [Sym],
}

impl fmt::Display for Items<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.items.is_empty() {
            return write!(f, "true");
        }
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match item.as_ref() {
                BodyItem::Constraint(c) => write!(f, "{}", c.display_with(self.names))?,
                BodyItem::Builtin(t) => {
                    // Wrap anything looser than `,` so the conjunction survives.
                    let s = t.display_with(self.names).to_string();
                    if matches!(t.functor(), Some((";" | "->" | ",", 2))) {
                        write!(f, "({s})")?
                    } else {
                        write!(f, "{s}")?
                    }
                }
                BodyItem::Disjunction(d) => {
                    write!(f, "(")?;
                    if let Selector::Experiment(name) = &d.selector {
                        write!(f, "({}) ?? ", name.display_with(self.names))?;
                    } else if d.selector == Selector::Anonymous {
                        write!(f, "?? ")?;
                    }
                    for (j, branch) in d.branches.iter().enumerate() {
                        if j > 0 {
                            write!(f, " ; ")?;
                        }
                        let inner = Items {
                            items: branch,
                            names: self.names,
                        };
                        write!(f, "({inner})")?;
                        if let Selector::Fixed(ps) = &d.selector {
                            write!(f, ":{:?}", ps[j])?;
                        }
                    }
                    write!(f, ")")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ChanceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = &self.var_names[..];
        match &self.prob {
            ProbExpr::Const(p) => write!(f, "{p:?} ?? ")?,
            ProbExpr::Eval(e) => write!(f, "eval({}) ?? ", e.display_with(names))?,
            ProbExpr::Experiment(t) => write!(f, "({}) ?? ", t.display_with(names))?,
            ProbExpr::Anonymous => write!(f, "?? ")?,
        }
        let heads = |cs: &[Constraint]| {
            cs.iter()
                .map(|c| c.display_with(names).to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        if self.kept.is_empty() {
            write!(f, "{} <=> ", heads(&self.removed))?;
        } else if self.removed.is_empty() {
            write!(f, "{} ==> ", heads(&self.kept))?;
        } else {
            write!(f, "{} \\ {} <=> ", heads(&self.kept), heads(&self.removed))?;
        }
        if !self.guard.is_empty() {
            let g: Vec<String> = self
                .guard
                .iter()
                .map(|t| {
                    let s = t.display_with(names).to_string();
                    if matches!(t.functor(), Some((";" | "->" | ",", 2))) {
                        format!("({s})")
                    } else {
                        s
                    }
                })
                .collect();
            write!(f, "{} | ", g.join(", "))?;
        }
        write!(
            f,
            "{}.",
            Items {
                items: &self.body,
                names
            }
        )
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, dist) in self.switches.iter() {
            if dist.declared {
                write!(f, ":- set_sw(")?;
                write_atom_term(f, name)?;
                let ps: Vec<String> = dist.probs.iter().map(|p| format!("{p:?}")).collect();
                writeln!(f, ", [{}]).", ps.join(", "))?;
            }
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

fn write_atom_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Atom(a) => write_atom(f, a),
        other => write!(f, "({other})"),
    }
}
