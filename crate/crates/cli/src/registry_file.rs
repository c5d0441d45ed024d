//! Text persistence for switch registries.
//!
//! One switch per line: `<name> | <outcome>:<prob> <outcome>:<prob> ...`.
//! Probabilities are written with full precision, so loading a persisted
//! registry gives back bit-identical distributions. Blank lines and lines
//! starting with `%` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use chrism_core::{parse_term, Outcome, SwitchRegistry};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegistryFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("registry line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("registry line {line}: {source}")]
    Invalid { line: usize, source: chrism_core::Error },
}

pub fn render(registry: &SwitchRegistry) -> String {
    let mut out = String::new();
    for (name, d) in registry.iter() {
        let _ = write!(out, "{name} |");
        for (o, p) in d.outcomes.iter().zip(&d.probs) {
            let _ = write!(out, " {o}:{p:?}");
        }
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> Result<SwitchRegistry, RegistryFileError> {
    let mut registry = SwitchRegistry::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let malformed = |message: String| RegistryFileError::Malformed { line, message };
        let (name, rest) = trimmed
            .rsplit_once(" |")
            .ok_or_else(|| malformed("expected `<name> | <outcome>:<prob> ...`".into()))?;
        let name = parse_term(name.trim()).map_err(|source| RegistryFileError::Invalid { line, source })?;
        let mut outcomes = Vec::new();
        let mut probs = Vec::new();
        for pair in rest.split_whitespace() {
            let (o, p) = pair
                .split_once(':')
                .ok_or_else(|| malformed(format!("expected `<outcome>:<prob>`, found `{pair}`")))?;
            outcomes.push(Outcome::parse(o).ok_or_else(|| malformed(format!("unknown outcome `{o}`")))?);
            probs.push(
                p.parse::<f64>()
                    .map_err(|_| malformed(format!("`{p}` is not a probability")))?,
            );
        }
        registry
            .set_switch_with(&name, outcomes, probs)
            .map_err(|source| RegistryFileError::Invalid { line, source })?;
    }
    Ok(registry)
}

pub fn load(path: &Path) -> Result<SwitchRegistry, RegistryFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| RegistryFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn persist(registry: &SwitchRegistry, path: &Path) -> Result<(), RegistryFileError> {
    std::fs::write(path, render(registry)).map_err(|source| RegistryFileError::Io {
        path: path.display().to_string(),
        source,
    })
}
