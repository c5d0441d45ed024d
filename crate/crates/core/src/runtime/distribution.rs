//! Probability mass over equivalence classes of final states.

use std::collections::BTreeMap;
use std::fmt;

use crate::term::Constraint;

/// Canonical key of a final-state class: the sorted rendering of the store,
/// or the failed state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StoreKey {
    Store(String),
    Failed,
}

impl StoreKey {
    pub fn of(store: &[Constraint]) -> StoreKey {
        let mut parts: Vec<String> = store.iter().map(|c| c.to_string()).collect();
        parts.sort();
        StoreKey::Store(parts.join(","))
    }
}

impl fmt::Display for StoreKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoreKey::Store(s) if s.is_empty() => write!(f, "true"),
            StoreKey::Store(s) => write!(f, "{s}"),
            StoreKey::Failed => write!(f, "fail"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Distribution {
    masses: BTreeMap<StoreKey, f64>,
}

impl Distribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: StoreKey, p: f64) {
        *self.masses.entry(key).or_insert(0.0) += p;
    }

    pub fn merge(&mut self, other: &Distribution) {
        for (k, p) in &other.masses {
            self.add(k.clone(), *p);
        }
    }

    pub fn get(&self, key: &StoreKey) -> f64 {
        self.masses.get(key).copied().unwrap_or(0.0)
    }

    /// Mass of the class rendered as `store` (comma separated, any order).
    pub fn mass_of(&self, store: &str) -> f64 {
        let mut parts: Vec<&str> = if store.is_empty() || store == "true" {
            Vec::new()
        } else {
            split_top_level(store)
        };
        parts.sort();
        self.get(&StoreKey::Store(parts.join(",")))
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StoreKey, f64)> {
        self.masses.iter().map(|(k, p)| (k, *p))
    }

    /// Largest absolute difference over the union of classes.
    pub fn max_difference(&self, other: &Distribution) -> f64 {
        self.masses
            .keys()
            .chain(other.masses.keys())
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }
}

/// Splits at commas outside parentheses and brackets.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

impl fmt::Display for Distribution {
    /// One `<canonical-store>\t<prob>` line per class.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in &self.masses {
            writeln!(f, "{k}\t{p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    #[test]
    fn keys_are_order_insensitive() {
        let a = StoreKey::of(&[Constraint::atom("tail"), Constraint::atom("head")]);
        let b = StoreKey::of(&[Constraint::atom("head"), Constraint::atom("tail")]);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "head,tail");
    }

    #[test]
    fn mass_lookup_by_rendering() {
        let mut d = Distribution::new();
        let c = |n: i64| Constraint::new("c", vec![Term::Int(n)]);
        d.add(StoreKey::of(&[c(1), Constraint::atom("b")]), 0.5);
        d.add(StoreKey::of(&[c(1), Constraint::atom("b")]), 0.25);
        d.add(StoreKey::Failed, 0.25);
        assert_eq!(d.mass_of("c(1), b"), 0.75);
        assert_eq!(d.get(&StoreKey::Failed), 0.25);
        assert_eq!(d.total(), 1.0);
        let mut e = Distribution::new();
        e.add(StoreKey::Failed, 0.5);
        assert_eq!(d.max_difference(&e), 0.75);
    }
}
