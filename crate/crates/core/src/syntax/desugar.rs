//! `cond C` arguments of experiment names.
//!
//! `foo(cond A>B) ?? c(A,B) <=> d` becomes
//! `foo(X) ?? c(A,B) <=> (A>B -> X=yes ; X=no) | d`. Conditions in the name
//! of a body disjunction become a builtin goal placed right before it.

use std::sync::Arc;

use super::ast::{BodyItem, ChanceRule, ProbExpr, Selector};
use crate::term::{sym, Sym, Term, VarId};

struct Fresh<'a> {
    names: &'a mut Vec<Sym>,
    counter: usize,
}

impl Fresh<'_> {
    fn var(&mut self) -> VarId {
        loop {
            self.counter += 1;
            let name = format!("_Cond{}", self.counter);
            if !self.names.iter().any(|n| **n == *name) {
                self.names.push(sym(&name));
                return (self.names.len() - 1) as VarId;
            }
        }
    }
}

/// `(C -> X = yes ; X = no)`
fn conditional_binding(cond: Term, var: VarId) -> Term {
    let bind = |v: &str| Term::compound("=", vec![Term::Var(var), Term::atom(v)]);
    Term::compound(
        ";",
        vec![Term::compound("->", vec![cond, bind("yes")]), bind("no")],
    )
}

/// Replaces `cond C` subterms left to right, collecting the bindings.
fn strip_conds(t: &Term, fresh: &mut Fresh, bindings: &mut Vec<Term>) -> Term {
    match t {
        Term::Compound(f, args) if &**f == "cond" && args.len() == 1 => {
            let v = fresh.var();
            bindings.push(conditional_binding(args[0].clone(), v));
            Term::Var(v)
        }
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| strip_conds(a, fresh, bindings)).collect(),
        ),
        other => other.clone(),
    }
}

fn has_cond(t: &Term) -> bool {
    match t {
        Term::Compound(f, args) => (&**f == "cond" && args.len() == 1) || args.iter().any(has_cond),
        _ => false,
    }
}

fn desugar_items(items: &[Arc<BodyItem>], fresh: &mut Fresh) -> Vec<Arc<BodyItem>> {
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        match item.as_ref() {
            BodyItem::Disjunction(d) => {
                let mut d = d.clone();
                if let Selector::Experiment(name) = &d.selector {
                    if has_cond(name) {
                        let mut bindings = Vec::new();
                        let stripped = strip_conds(name, fresh, &mut bindings);
                        out.extend(bindings.into_iter().map(|b| Arc::new(BodyItem::Builtin(b))));
                        d.selector = Selector::Experiment(stripped);
                    }
                }
                d.branches = d.branches.iter().map(|b| desugar_items(b, fresh)).collect();
                out.push(Arc::new(BodyItem::Disjunction(d)));
            }
            _ => out.push(item.clone()),
        }
    }
    out
}

/// Rewrites every `cond C` argument away. Rules without conditions come back
/// unchanged.
pub fn desugar_cond(rule: &ChanceRule) -> ChanceRule {
    let mut out = rule.clone();
    let mut fresh = Fresh {
        names: &mut out.var_names,
        counter: 0,
    };
    if let ProbExpr::Experiment(name) = &rule.prob {
        if has_cond(name) {
            let mut bindings = Vec::new();
            let stripped = strip_conds(name, &mut fresh, &mut bindings);
            out.guard.extend(bindings);
            out.prob = ProbExpr::Experiment(stripped);
        }
    }
    let body = desugar_items(&rule.body, &mut fresh);
    out.body = body;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    #[test]
    fn single_condition_moves_to_guard() {
        let p = parse_program("foo(cond A>B) ?? c(A,B) <=> d.").unwrap();
        let r = &p.rules[0];
        let expected = parse_program("foo(X) ?? c(A,B) <=> (A>B -> X=yes ; X=no) | d.").unwrap();
        let e = &expected.rules[0];
        assert_eq!(r.prob, e.prob);
        assert_eq!(r.guard, e.guard);
        assert_eq!(r.body, e.body);
        assert_eq!(r.removed, e.removed);
    }

    #[test]
    fn rule_without_conditions_is_unchanged() {
        let p = parse_program("choice(P) ?? player(P) <=> rock(P).").unwrap();
        let r = &p.rules[0];
        assert_eq!(desugar_cond(r), *r);
    }

    #[test]
    fn two_conditions_bind_left_to_right() {
        let p = parse_program("f(cond A>1, cond B>1) ?? c(A,B) <=> d.").unwrap();
        let r = &p.rules[0];
        assert_eq!(r.guard.len(), 2);
        let ProbExpr::Experiment(Term::Compound(_, args)) = &r.prob else {
            panic!("expected experiment");
        };
        let (Term::Var(x), Term::Var(y)) = (&args[0], &args[1]) else {
            panic!("expected fresh variables");
        };
        let bound_first = {
            let mut vs = Vec::new();
            r.guard[0].collect_vars(&mut vs);
            vs
        };
        assert!(bound_first.contains(x));
        assert!(!bound_first.contains(y));
    }

    #[test]
    fn condition_in_body_disjunction_becomes_builtin() {
        let p = parse_program("c(A) <=> s(cond A>0) ?? x ; y.").unwrap();
        let r = &p.rules[0];
        assert!(matches!(r.body[0].as_ref(), BodyItem::Builtin(_)));
        assert!(matches!(r.body[1].as_ref(), BodyItem::Disjunction(_)));
    }
}
