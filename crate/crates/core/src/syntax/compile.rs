//! Turns surface clauses into validated chance rules.

use std::collections::HashMap;
use std::sync::Arc;

use super::ast::*;
use super::desugar::desugar_cond;
use super::reader::{Clause, PTerm, Reader};
use crate::error::{Error, Result};
use crate::runtime::switches::{Outcome, SwitchRegistry};
use crate::term::{sym, Constraint, Sym, Term, VarId};

/// Sum tolerance for LPAD-style branch probabilities.
pub const FIXED_SUM_TOLERANCE: f64 = 1e-9;

/// Builtin goals recognised in guards and bodies, by name/arity.
pub fn is_builtin(name: &str, arity: usize) -> bool {
    matches!(
        (name, arity),
        ("true" | "fail" | "false" | "!", 0)
            | (
                "=" | "\\=" | "==" | "\\==" | "<" | ">" | "=<" | ">=" | "=:=" | "=\\=" | "is",
                2
            )
            | (";" | "->" | ",", 2)
            | ("\\+", 1)
    )
}

fn is_builtin_goal(t: &PTerm) -> bool {
    match t {
        PTerm::Atom(a) => is_builtin(a, 0),
        PTerm::Compound(f, args) => {
            is_builtin(f, args.len())
                && match (f.as_str(), args.len()) {
                    (";" | "->" | ",", 2) => args.iter().all(is_builtin_goal),
                    ("\\+", 1) => is_builtin_goal(&args[0]),
                    _ => true,
                }
        }
        _ => false,
    }
}

/// Variable scope for one rule.
#[derive(Default)]
pub(crate) struct Scope {
    names: Vec<Sym>,
    index: HashMap<String, VarId>,
}

impl Scope {
    fn var(&mut self, name: &str) -> VarId {
        if name == "_" {
            self.names.push(sym("_"));
            return (self.names.len() - 1) as VarId;
        }
        if let Some(v) = self.index.get(name) {
            return *v;
        }
        let v = self.names.len() as VarId;
        self.names.push(sym(name));
        self.index.insert(name.to_string(), v);
        v
    }

    fn term(&mut self, t: &PTerm) -> Result<Term> {
        Ok(match t {
            PTerm::Atom(a) => Term::atom(a),
            PTerm::Int(i) => Term::Int(*i),
            PTerm::Float(f) => Term::Float(*f),
            PTerm::Var(v) => Term::Var(self.var(v)),
            PTerm::Compound(f, args) => {
                Term::Compound(sym(f), args.iter().map(|a| self.term(a)).collect::<Result<_>>()?)
            }
            PTerm::List(_) => {
                return Err(Error::Compile(
                    "lists are only supported in set_sw directives".into(),
                ))
            }
        })
    }
}

fn ground_term(t: &PTerm, what: &str) -> Result<Term> {
    let mut scope = Scope::default();
    let term = scope.term(t)?;
    if !term.is_ground() {
        return Err(Error::Compile(format!("{what} `{term}` is not ground")));
    }
    Ok(term)
}

fn constraint(scope: &mut Scope, t: &PTerm) -> Result<Constraint> {
    match t {
        PTerm::Atom(a) => Ok(Constraint::atom(a)),
        PTerm::Compound(f, args) => Ok(Constraint {
            functor: sym(f),
            args: args.iter().map(|a| scope.term(a)).collect::<Result<_>>()?,
        }),
        other => Err(Error::Compile(format!("expected a constraint, found {other:?}"))),
    }
}

fn number(t: &PTerm) -> Option<f64> {
    match t {
        PTerm::Int(i) => Some(*i as f64),
        PTerm::Float(f) => Some(*f),
        _ => None,
    }
}

fn check_probability(p: f64, rule: usize) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::Compile(format!(
            "rule {rule}: probability {p} is outside [0,1]"
        )))
    }
}

struct RuleBuilder {
    id: usize,
    scope: Scope,
    next_site: usize,
}

impl RuleBuilder {
    fn prob(&mut self, t: &PTerm) -> Result<ProbExpr> {
        if let Some(p) = number(t) {
            return Ok(ProbExpr::Const(check_probability(p, self.id)?));
        }
        if t.is_functor("eval", 1) {
            return Ok(ProbExpr::Eval(self.scope.term(&t.args()[0])?));
        }
        match t {
            PTerm::Atom(_) | PTerm::Compound(..) | PTerm::Var(_) => {
                Ok(ProbExpr::Experiment(self.scope.term(t)?))
            }
            _ => Err(Error::Compile(format!(
                "rule {}: invalid probability expression",
                self.id
            ))),
        }
    }

    fn body(&mut self, t: &PTerm) -> Result<Vec<Arc<BodyItem>>> {
        let mut out = Vec::new();
        for goal in t.flatten(",") {
            out.push(Arc::new(self.body_item(goal)?));
        }
        Ok(out)
    }

    fn disjunction(&mut self, selector: Option<&PTerm>, alts: &PTerm) -> Result<BodyItem> {
        let site = self.next_site;
        self.next_site += 1;
        let parts: Vec<PTerm> = alts.flatten(";").into_iter().cloned().collect();
        if parts.len() < 2 {
            return Err(Error::Compile(format!(
                "rule {}: a probabilistic disjunction needs at least two branches",
                self.id
            )));
        }
        let selector = match selector {
            None => Selector::Anonymous,
            Some(name) => {
                if number(name).is_some() {
                    return Err(Error::Compile(format!(
                        "rule {}: a disjunction selector must be an experiment name",
                        self.id
                    )));
                }
                Selector::Experiment(self.scope.term(name)?)
            }
        };
        let mut branches = Vec::with_capacity(parts.len());
        for part in &parts {
            branches.push(self.body(part)?);
        }
        Ok(BodyItem::Disjunction(Disjunction {
            site,
            selector,
            branches,
        }))
    }

    fn lpad(&mut self, parts: &[&PTerm]) -> Result<BodyItem> {
        let site = self.next_site;
        self.next_site += 1;
        let mut probs = Vec::with_capacity(parts.len());
        let mut branches = Vec::with_capacity(parts.len());
        for part in parts {
            let p = number(&part.args()[1]).ok_or_else(|| {
                Error::Compile(format!("rule {}: disjunct probability must be a number", self.id))
            })?;
            probs.push(check_probability(p, self.id)?);
            branches.push(self.body(&part.args()[0])?);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > FIXED_SUM_TOLERANCE {
            return Err(Error::Compile(format!(
                "rule {}: disjunct probabilities sum to {sum}, not 1",
                self.id
            )));
        }
        Ok(BodyItem::Disjunction(Disjunction {
            site,
            selector: Selector::Fixed(probs),
            branches,
        }))
    }

    fn body_item(&mut self, t: &PTerm) -> Result<BodyItem> {
        if t.is_functor("??", 2) {
            return self.disjunction(Some(&t.args()[0]), &t.args()[1]);
        }
        if t.is_functor("??", 1) {
            return self.disjunction(None, &t.args()[0]);
        }
        if t.is_functor(";", 2) {
            let parts = t.flatten(";");
            let annotated = parts.iter().filter(|p| p.is_functor(":", 2)).count();
            if annotated == parts.len() {
                return self.lpad(&parts);
            }
            if annotated > 0 {
                return Err(Error::Compile(format!(
                    "rule {}: every disjunct needs a probability when one has",
                    self.id
                )));
            }
        }
        if is_builtin_goal(t) {
            return Ok(BodyItem::Builtin(self.scope.term(t)?));
        }
        if t.is_functor(";", 2) || t.is_functor("->", 2) {
            return Err(Error::Compile(format!(
                "rule {}: plain disjunctions may only contain builtin goals",
                self.id
            )));
        }
        match t {
            PTerm::Atom(_) | PTerm::Compound(..) => Ok(BodyItem::Constraint(constraint(&mut self.scope, t)?)),
            PTerm::Var(v) => Err(Error::Compile(format!(
                "rule {}: variable {v} used as a goal",
                self.id
            ))),
            _ => Err(Error::Compile(format!(
                "rule {}: a number is not a goal",
                self.id
            ))),
        }
    }

    fn guard(&mut self, t: &PTerm) -> Result<Vec<Term>> {
        let mut out = Vec::new();
        for g in t.flatten(",") {
            if !is_builtin_goal(g) {
                return Err(Error::Compile(format!(
                    "rule {}: guard goal {g:?} is not a builtin",
                    self.id
                )));
            }
            if !g.is_functor("true", 0) {
                out.push(self.scope.term(g)?);
            }
        }
        Ok(out)
    }
}

fn heads(scope: &mut Scope, t: &PTerm) -> Result<Vec<Constraint>> {
    t.flatten(",")
        .into_iter()
        .map(|h| {
            if matches!(h, PTerm::Atom(a) if is_builtin(a, 0)) {
                return Err(Error::Compile(format!("builtin {h:?} cannot be a rule head")));
            }
            constraint(scope, h)
        })
        .collect()
}

fn compile_rule(id: usize, term: &PTerm) -> Result<ChanceRule> {
    let (lhs, rhs, propagation) = if term.is_functor("<=>", 2) {
        (&term.args()[0], &term.args()[1], false)
    } else if term.is_functor("==>", 2) {
        (&term.args()[0], &term.args()[1], true)
    } else {
        return Err(Error::Compile(format!(
            "clause {id} is neither a `<=>` nor a `==>` rule"
        )));
    };
    let mut b = RuleBuilder {
        id,
        scope: Scope::default(),
        next_site: 1,
    };
    let (prob, head_part) = if lhs.is_functor("??", 2) {
        (b.prob(&lhs.args()[0])?, &lhs.args()[1])
    } else if lhs.is_functor("??", 1) {
        (ProbExpr::Anonymous, &lhs.args()[0])
    } else {
        (ProbExpr::Const(1.0), lhs)
    };
    let (kept, removed) = if head_part.is_functor("\\", 2) {
        if propagation {
            return Err(Error::Compile(format!(
                "rule {id}: `\\` is not allowed in a propagation rule"
            )));
        }
        (
            heads(&mut b.scope, &head_part.args()[0])?,
            heads(&mut b.scope, &head_part.args()[1])?,
        )
    } else if propagation {
        (heads(&mut b.scope, head_part)?, Vec::new())
    } else {
        (Vec::new(), heads(&mut b.scope, head_part)?)
    };
    let (guard, body) = if rhs.is_functor("|", 2) {
        (b.guard(&rhs.args()[0])?, b.body(&rhs.args()[1])?)
    } else {
        (Vec::new(), b.body(rhs)?)
    };
    let rule = ChanceRule {
        id,
        prob,
        kept,
        removed,
        guard,
        body,
        var_names: b.scope.names,
    };
    check_variables(&rule)?;
    Ok(rule)
}

/// Probability expression variables must be bound by the heads or the guard.
fn check_variables(rule: &ChanceRule) -> Result<()> {
    let mut bound = Vec::new();
    for h in rule.heads() {
        h.args.iter().for_each(|a| a.collect_vars(&mut bound));
    }
    for g in &rule.guard {
        g.collect_vars(&mut bound);
    }
    let mut used = Vec::new();
    match &rule.prob {
        ProbExpr::Eval(t) | ProbExpr::Experiment(t) => t.collect_vars(&mut used),
        _ => {}
    }
    for v in used {
        if !bound.contains(&v) {
            return Err(Error::Compile(format!(
                "rule {}: variable {} in the probability expression is not bound by the head or guard",
                rule.id, rule.var_names[v as usize]
            )));
        }
    }
    Ok(())
}

/// Names anonymous experiments `rule_<k>`; a second anonymous experiment in
/// the same rule gets `rule_<k>_2`, and so on.
fn name_anonymous(rule: &mut ChanceRule) {
    let mut n = 0;
    let mut fresh = |id: usize| {
        n += 1;
        if n == 1 {
            Term::atom(&format!("rule_{id}"))
        } else {
            Term::atom(&format!("rule_{id}_{n}"))
        }
    };
    if rule.prob == ProbExpr::Anonymous {
        rule.prob = ProbExpr::Experiment(fresh(rule.id));
    }
    fn walk(items: &mut [Arc<BodyItem>], id: usize, fresh: &mut dyn FnMut(usize) -> Term) {
        for item in items {
            if let BodyItem::Disjunction(d) = Arc::make_mut(item) {
                if d.selector == Selector::Anonymous {
                    d.selector = Selector::Experiment(fresh(id));
                }
                for b in &mut d.branches {
                    walk(b, id, fresh);
                }
            }
        }
    }
    let id = rule.id;
    walk(&mut rule.body, id, &mut fresh);
}

/// Renumbers variables by first occurrence (probability, heads, guard, body)
/// so printing and reparsing yields identical numbering.
pub(crate) fn normalize_vars(rule: &mut ChanceRule) {
    let mut order: Vec<VarId> = Vec::new();
    let visit = |t: &Term, order: &mut Vec<VarId>| t.collect_vars(order);
    match &rule.prob {
        ProbExpr::Eval(t) | ProbExpr::Experiment(t) => visit(t, &mut order),
        _ => {}
    }
    for h in rule.kept.iter().chain(rule.removed.iter()) {
        h.args.iter().for_each(|a| visit(a, &mut order));
    }
    for g in &rule.guard {
        visit(g, &mut order);
    }
    fn walk_items(items: &[Arc<BodyItem>], order: &mut Vec<VarId>) {
        for item in items {
            match item.as_ref() {
                BodyItem::Constraint(c) => c.args.iter().for_each(|a| a.collect_vars(order)),
                BodyItem::Builtin(t) => t.collect_vars(order),
                BodyItem::Disjunction(d) => {
                    if let Selector::Experiment(t) = &d.selector {
                        t.collect_vars(order);
                    }
                    for b in &d.branches {
                        walk_items(b, order);
                    }
                }
            }
        }
    }
    walk_items(&rule.body, &mut order);
    // Variables never occurring (cannot happen after parsing) keep relative order.
    for v in 0..rule.var_names.len() as VarId {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    let mut map = vec![0 as VarId; order.len()];
    for (new, old) in order.iter().enumerate() {
        map[*old as usize] = new as VarId;
    }
    let names: Vec<Sym> = order
        .iter()
        .map(|o| rule.var_names[*o as usize].clone())
        .collect();
    rule.var_names = names;
    rename_rule(rule, &map);
}

fn rename(t: &mut Term, map: &[VarId]) {
    match t {
        Term::Var(v) => *v = map[*v as usize],
        Term::Compound(_, args) => args.iter_mut().for_each(|a| rename(a, map)),
        _ => {}
    }
}

fn rename_rule(rule: &mut ChanceRule, map: &[VarId]) {
    match &mut rule.prob {
        ProbExpr::Eval(t) | ProbExpr::Experiment(t) => rename(t, map),
        _ => {}
    }
    for h in rule.kept.iter_mut().chain(rule.removed.iter_mut()) {
        h.args.iter_mut().for_each(|a| rename(a, map));
    }
    rule.guard.iter_mut().for_each(|g| rename(g, map));
    fn walk(items: &mut [Arc<BodyItem>], map: &[VarId]) {
        for item in items {
            match Arc::make_mut(item) {
                BodyItem::Constraint(c) => c.args.iter_mut().for_each(|a| rename(a, map)),
                BodyItem::Builtin(t) => rename(t, map),
                BodyItem::Disjunction(d) => {
                    if let Selector::Experiment(t) = &mut d.selector {
                        rename(t, map);
                    }
                    for b in &mut d.branches {
                        walk(b, map);
                    }
                }
            }
        }
    }
    walk(&mut rule.body, map);
}

fn directive(term: &PTerm, switches: &mut SwitchRegistry, rules: &[ChanceRule]) -> Result<()> {
    if term.is_functor("set_sw", 2) {
        let name = ground_term(&term.args()[0], "switch name")?;
        let PTerm::List(items) = &term.args()[1] else {
            return Err(Error::Compile("set_sw expects a list of probabilities".into()));
        };
        let probs = items
            .iter()
            .map(|p| number(p).ok_or_else(|| Error::Compile("set_sw expects numbers".into())))
            .collect::<Result<Vec<_>>>()?;
        let outcomes = match switches.get(&name) {
            Some(d) => d.outcomes.clone(),
            None => outcome_space(rules, &name)?,
        };
        switches.set_switch_with(&name, outcomes, probs)?;
        switches.mark_declared(&name);
        return Ok(());
    }
    Err(Error::Compile(format!("unsupported directive {term:?}")))
}

/// Outcome space of a switch, found from the experiment sites its name
/// matches.
pub fn outcome_space(rules: &[ChanceRule], name: &Term) -> Result<Vec<Outcome>> {
    let mut found: Option<Vec<Outcome>> = None;
    let mut consider = |pattern: &Term, outcomes: Vec<Outcome>| -> Result<()> {
        if crate::runtime::builtins::matches_pattern(pattern, name) {
            match &found {
                Some(prev) if *prev != outcomes => {
                    return Err(Error::Compile(format!(
                        "switch {name} is used with different outcome spaces"
                    )))
                }
                _ => found = Some(outcomes),
            }
        }
        Ok(())
    };
    for r in rules {
        if let ProbExpr::Experiment(t) = &r.prob {
            consider(t, Outcome::rule_outcomes())?;
        }
        for d in r.disjunctions() {
            if let Selector::Experiment(t) = &d.selector {
                consider(t, Outcome::branch_outcomes(d.branches.len()))?;
            }
        }
    }
    found.ok_or_else(|| Error::UnknownSwitch(name.to_string()))
}

fn register_ground_experiments(rules: &[ChanceRule], switches: &mut SwitchRegistry) -> Result<()> {
    for r in rules {
        if let ProbExpr::Experiment(t) = &r.prob {
            if t.is_ground() {
                switches.lookup_or_default(t, &Outcome::rule_outcomes())?;
            }
        }
        for d in r.disjunctions() {
            if let Selector::Experiment(t) = &d.selector {
                if t.is_ground() {
                    switches.lookup_or_default(t, &Outcome::branch_outcomes(d.branches.len()))?;
                }
            }
        }
    }
    Ok(())
}

fn is_directive(c: &Clause) -> bool {
    c.term.is_functor(":-", 1)
}

/// Parses program text into a validated program.
pub fn parse_program(text: &str) -> Result<Program> {
    let clauses = Reader::new(text)?.clauses(false)?;
    let mut rules = Vec::new();
    for c in clauses.iter().filter(|c| !is_directive(c)) {
        let id = rules.len() + 1;
        let located = |e: Error| match e {
            Error::Compile(m) => Error::Compile(format!("line {}: {m}", c.line)),
            other => other,
        };
        let mut rule = compile_rule(id, &c.term).map_err(located)?;
        name_anonymous(&mut rule);
        let mut rule = desugar_cond(&rule);
        normalize_vars(&mut rule);
        rules.push(rule);
    }
    let mut switches = SwitchRegistry::new();
    register_ground_experiments(&rules, &mut switches)?;
    for c in clauses.iter().filter(|c| is_directive(c)) {
        directive(&c.term.args()[0], &mut switches, &rules)?;
    }
    Ok(Program { rules, switches })
}

fn ground_constraints(t: &PTerm, what: &str) -> Result<Vec<Constraint>> {
    t.flatten(",")
        .into_iter()
        .filter(|g| !g.is_functor("true", 0))
        .map(|g| {
            let term = ground_term(g, what)?;
            Constraint::from_term(&term)
                .ok_or_else(|| Error::Compile(format!("{what}: `{term}` is not a constraint")))
        })
        .collect()
}

/// Parses a comma-separated ground query; the empty string is the empty query.
pub fn parse_query(text: &str) -> Result<Vec<Constraint>> {
    match Reader::new(text)?.whole()? {
        None => Ok(Vec::new()),
        Some(t) => ground_constraints(&t, "query"),
    }
}

/// Parses a single ground term, e.g. a switch name such as `choice(jon)`.
pub fn parse_term(text: &str) -> Result<Term> {
    match Reader::new(text)?.whole()? {
        None => Err(Error::syntax(1, 1, "empty term")),
        Some(t) => ground_term(&t, "term"),
    }
}

fn observation_from(t: &PTerm) -> Result<Observation> {
    if t.is_functor("times", 2) {
        let n = match &t.args()[0] {
            PTerm::Int(n) if *n > 0 => *n as u64,
            other => {
                return Err(Error::Compile(format!(
                    "observation count must be a positive integer, found {other:?}"
                )))
            }
        };
        let mut o = observation_from(&t.args()[1])?;
        o.count *= n;
        return Ok(o);
    }
    if t.is_functor("count", 2) {
        return observation_from(&PTerm::Compound(
            "times".into(),
            vec![t.args()[1].clone(), t.args()[0].clone()],
        ));
    }
    let kind = if t.is_functor("<==>", 2) {
        ObservationKind::Full
    } else if t.is_functor("===>", 2) {
        ObservationKind::Partial
    } else {
        return Err(Error::Compile(
            "an observation must have the form `Q <==> A` or `Q ===> A`".into(),
        ));
    };
    let query = ground_constraints(&t.args()[0], "observation query")?;
    let mut answer = Vec::new();
    let mut negated = Vec::new();
    for item in t.args()[1].flatten(",") {
        if item.is_functor("true", 0) {
            continue;
        }
        if item.is_functor("~", 1) {
            if kind == ObservationKind::Full {
                return Err(Error::Compile(
                    "negated constraints are only allowed in partial observations".into(),
                ));
            }
            negated.extend(ground_constraints(&item.args()[0], "negated constraint")?);
        } else {
            answer.extend(ground_constraints(item, "observation answer")?);
        }
    }
    Ok(Observation {
        query,
        kind,
        answer,
        negated,
        count: 1,
    })
}

/// Parses one observation, e.g. `50 times q ===> a, ~b`.
pub fn parse_observation(text: &str) -> Result<Observation> {
    match Reader::new(text)?.whole()? {
        None => Err(Error::syntax(1, 1, "empty observation")),
        Some(t) => observation_from(&t),
    }
}

/// Parses an observation file: one observation per line, `%` comments.
pub fn parse_observations(text: &str) -> Result<Vec<Observation>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let obs = parse_observation(line).map_err(|e| match e {
            Error::Syntax { col, message, .. } => Error::Syntax {
                line: i + 1,
                col,
                message,
            },
            Error::Compile(m) => Error::Compile(format!("line {}: {m}", i + 1)),
            other => other,
        })?;
        out.push(obs);
    }
    Ok(out)
}
