//! The `chrism` command-line tool.

pub mod dot;
pub mod registry_file;

use std::io::Write;
use std::path::{Path, PathBuf};

use chrism_core::{
    check_ambiguity_with, distribution, em_learn, enumerate, for_each_leaf, observation_matches,
    outcome_space, parse_observation, parse_observations, parse_program, parse_query, parse_term,
    probability, AmbiguityOptions, Constraint, Distribution, EmConfig, EmInit, Engine, ErrorClass,
    ExecutionStrategy, Limits, Observation, PartnerOrder, Program, SampleOutcome, SwitchRegistry,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::registry_file::RegistryFileError;

#[derive(Debug, Parser)]
#[command(name = "chrism", version, about = "Run, query and train chance-rule programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Program file.
    #[arg(short = 'p', long = "program")]
    pub program: PathBuf,
    /// Switch registry file. Defaults to `<program>.sw`, used if present.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Maximum number of transitions per derivation.
    #[arg(long, env = "CHRISM_MAX_DEPTH")]
    pub max_depth: Option<u64>,
    /// Maximum number of leaves per enumeration.
    #[arg(long, env = "CHRISM_MAX_LEAVES")]
    pub max_leaves: Option<u64>,
    /// Tab-separated output with full-precision numbers.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Partners {
    Ascending,
    Descending,
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// Rule order as a permutation of rule numbers, e.g. `2,1,3`.
    #[arg(long, value_delimiter = ',')]
    pub rule_order: Option<Vec<usize>>,
    /// Order in which partner constraints are tried.
    #[arg(long, value_enum, default_value = "ascending")]
    pub partners: Partners,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Query, a comma-separated list of ground constraints.
    #[arg(short = 'q', long, conflicts_with = "query_file")]
    pub query: Option<String>,
    /// File holding the query.
    #[arg(long)]
    pub query_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    /// Start from the registry (uniform for unseen switches).
    Registry,
    /// Random starting points with restarts.
    Random,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw random derivations of a query.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of samples, from seeds `seed`, `seed+1`, ...
        #[arg(short = 'n', long, default_value_t = 1)]
        count: u64,
        /// Print every transition.
        #[arg(long)]
        trace: bool,
    },
    /// Probability of observations.
    Prob {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Observation, e.g. `toss,toss <==> head,tail`.
        #[arg(short = 'o', long = "obs", conflicts_with = "obs_file")]
        obs: Option<String>,
        /// File of observations, one per line.
        #[arg(long)]
        obs_file: Option<PathBuf>,
    },
    /// Learn switch distributions from observations with EM.
    Learn {
        #[command(flatten)]
        common: Common,
        /// File of observations, one per line, optionally `N times ...`.
        #[arg(long)]
        obs_file: PathBuf,
        #[arg(long, value_enum, default_value = "random")]
        init: Init,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random restarts; the best log-likelihood wins.
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Pseudo-count added to every outcome.
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
        /// Write the log-likelihood per iteration as CSV.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        /// Do not write the learned registry.
        #[arg(long)]
        no_save: bool,
    },
    /// Print the switch distributions.
    ShowSw {
        #[command(flatten)]
        common: Common,
    },
    /// Set the distribution of one switch and save the registry.
    SetSw {
        #[command(flatten)]
        common: Common,
        /// Switch name, e.g. `choice(jon)`.
        #[arg(long)]
        name: String,
        /// Comma-separated probabilities in outcome order.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        dist: Vec<f64>,
    },
    /// Compare answer distributions under several execution strategies.
    CheckAmbiguity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        query: QueryArgs,
        /// Number of strategy variants.
        #[arg(short = 'k', long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = chrism_core::ambiguity::DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Also try global (non-stack) scheduling.
        #[arg(long)]
        wide: bool,
        /// Seed for extra rule-order permutations.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List every leaf of the derivation tree.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Print the derivation tree in Graphviz format instead.
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] chrism_core::Error),
    #[error(transparent)]
    Registry(#[from] RegistryFileError),
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    /// 1 for bad input, 2 for failures while running a valid program.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.class() == ErrorClass::Engine => 2,
            CliError::Output(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn registry_path(common: &Common) -> PathBuf {
    common.registry.clone().unwrap_or_else(|| {
        let mut p = common.program.clone().into_os_string();
        p.push(".sw");
        p.into()
    })
}

/// The program and its registry: compile-time switches overlaid with the
/// registry file, if there is one.
fn load(common: &Common) -> CliResult<(Program, SwitchRegistry)> {
    let program = parse_program(&read(&common.program)?)?;
    let mut registry = program.switches.clone();
    let path = registry_path(common);
    if path.exists() {
        registry.merge_from(&registry_file::load(&path)?);
    } else if common.registry.is_some() {
        log::info!("registry {} does not exist yet", path.display());
    }
    Ok((program, registry))
}

fn limits(common: &Common) -> Limits {
    let d = Limits::default();
    Limits {
        max_depth: common.max_depth.unwrap_or(d.max_depth),
        max_leaves: common.max_leaves.unwrap_or(d.max_leaves),
        ..d
    }
}

fn strategy(program: &Program, args: &StrategyArgs) -> CliResult<ExecutionStrategy> {
    let mut s = ExecutionStrategy::refined(program);
    if let Some(order) = &args.rule_order {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (1..=program.rules.len()).collect::<Vec<_>>() {
            return Err(CliError::Usage(format!(
                "--rule-order must be a permutation of 1..{}",
                program.rules.len()
            )));
        }
        s = s.with_rule_order(order.clone());
    }
    if args.partners == Partners::Descending {
        s = s.with_partner_order(PartnerOrder::Descending);
    }
    Ok(s)
}

fn query(args: &QueryArgs) -> CliResult<(String, Vec<Constraint>)> {
    let text = match (&args.query, &args.query_file) {
        (Some(q), _) => q.clone(),
        (None, Some(path)) => read(path)?.trim().trim_end_matches('.').to_string(),
        (None, None) => return Err(CliError::Usage("a query is required (-q or --query-file)".into())),
    };
    let q = parse_query(&text)?;
    Ok((text.trim().to_string(), q))
}

fn render_store(store: &[Constraint]) -> String {
    if store.is_empty() {
        "true".into()
    } else {
        store.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn render_outcome(o: &SampleOutcome) -> String {
    match o {
        SampleOutcome::Final(store) => render_store(store),
        SampleOutcome::Failed => "fail".into(),
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Sample {
            common,
            query: q,
            strategy: sa,
            seed,
            count,
            trace,
        } => {
            let (program, registry) = load(&common)?;
            let (text, q) = query(&q)?;
            let engine =
                Engine::new(&program, strategy(&program, &sa)?).with_max_depth(limits(&common).max_depth);
            for i in 0..count {
                let s = engine.sample(&q, &registry, seed.wrapping_add(i))?;
                if trace {
                    for ev in &s.trace {
                        writeln!(out, "  {ev}")?;
                    }
                }
                let answer = render_outcome(&s.outcome);
                if common.machine {
                    writeln!(out, "{}\t{answer}\t{}", seed.wrapping_add(i), s.probability)?;
                } else {
                    writeln!(out, "{text} <==> {answer}.")?;
                }
            }
        }
        Command::Prob {
            common,
            strategy: sa,
            obs,
            obs_file,
        } => {
            let (program, registry) = load(&common)?;
            let observations = match (obs, obs_file) {
                (Some(o), _) => vec![parse_observation(&o)?],
                (None, Some(path)) => parse_observations(&read(&path)?)?,
                (None, None) => {
                    return Err(CliError::Usage(
                        "an observation is required (-o or --obs-file)".into(),
                    ))
                }
            };
            let s = strategy(&program, &sa)?;
            for (i, o) in observations.iter().enumerate() {
                if common.machine {
                    // Matching classes, one per line; observations separated by a blank line.
                    if i > 0 {
                        writeln!(out)?;
                    }
                    let mut d = Distribution::new();
                    for_each_leaf(&program, &o.query, &s, &registry, &limits(&common), |l| {
                        if observation_matches(o, &l.outcome) {
                            d.add(l.key(), l.probability);
                        }
                    })?;
                    for (k, p) in d.iter() {
                        writeln!(out, "{k}\t{p}")?;
                    }
                } else {
                    let p = probability(&program, o, &s, &registry, &limits(&common))?;
                    writeln!(out, "Probability of {} is: {p:.6}", o.render())?;
                }
            }
        }
        Command::Learn {
            common,
            obs_file,
            init,
            seed,
            restarts,
            max_iterations,
            tolerance,
            smoothing,
            trace_csv,
            no_save,
        } => {
            let (program, registry) = load(&common)?;
            let observations: Vec<Observation> = parse_observations(&read(&obs_file)?)?;
            let config = EmConfig {
                max_iterations,
                tolerance,
                smoothing,
                init: match init {
                    Init::Registry => EmInit::Registry,
                    Init::Random => EmInit::Random { seed },
                },
                restarts,
                limits: limits(&common),
            };
            let r = em_learn(
                &program,
                &observations,
                &ExecutionStrategy::refined(&program),
                &registry,
                &config,
            )?;
            if let Some(path) = trace_csv {
                let mut csv = String::from("iteration,log_likelihood\n");
                for (i, ll) in r.log_likelihood.iter().enumerate() {
                    csv.push_str(&format!("{i},{ll:?}\n"));
                }
                std::fs::write(&path, csv)?;
            }
            let status = if r.converged { "converged" } else { "stopped" };
            if common.machine {
                writeln!(out, "{status}\t{}\t{:?}", r.iterations, r.final_log_likelihood())?;
                write!(out, "{}", registry_file::render(&r.registry))?;
            } else {
                writeln!(
                    out,
                    "EM {status} after {} iterations, log-likelihood {:.6}",
                    r.iterations,
                    r.final_log_likelihood()
                )?;
                for sw in &r.unlearnable {
                    writeln!(out, "Switch {sw} is not drawn by any observation; left unchanged")?;
                }
                write!(out, "{}", r.registry.show_sw())?;
            }
            if !no_save {
                registry_file::persist(&r.registry, &registry_path(&common))?;
            }
        }
        Command::ShowSw { common } => {
            let (_, registry) = load(&common)?;
            if common.machine {
                write!(out, "{}", registry_file::render(&registry))?;
            } else {
                write!(out, "{}", registry.show_sw())?;
            }
        }
        Command::SetSw { common, name, dist } => {
            let (program, mut registry) = load(&common)?;
            let name = parse_term(&name)?;
            let outcomes = match registry.get(&name) {
                Some(d) => d.outcomes.clone(),
                None => outcome_space(&program.rules, &name)?,
            };
            registry.set_switch_with(&name, outcomes, dist)?;
            registry_file::persist(&registry, &registry_path(&common))?;
            if common.machine {
                write!(out, "{}", registry_file::render(&registry))?;
            } else {
                write!(out, "{}", registry.show_sw())?;
            }
        }
        Command::CheckAmbiguity {
            common,
            query: q,
            k,
            tolerance,
            wide,
            seed,
        } => {
            let (program, registry) = load(&common)?;
            let (_, q) = query(&q)?;
            if k < 2 {
                return Err(CliError::Usage("-k must be at least 2".into()));
            }
            let options = AmbiguityOptions {
                k,
                tolerance,
                wide,
                seed,
                limits: limits(&common),
            };
            let verdict = check_ambiguity_with(&program, &q, &registry, &options)?;
            write!(out, "{verdict}")?;
        }
        Command::Enumerate {
            common,
            query: q,
            strategy: sa,
            dot,
        } => {
            let (program, registry) = load(&common)?;
            let (_, q) = query(&q)?;
            let s = strategy(&program, &sa)?;
            let lim = limits(&common);
            if dot {
                let engine = Engine::new(&program, s).with_max_depth(lim.max_depth);
                write!(out, "{}", dot::derivation_tree(&engine, &q, &registry, &lim)?)?;
                return Ok(());
            }
            let leaves = enumerate(&program, &q, &s, &registry, &lim)?;
            for l in &leaves {
                let mut draws: Vec<String> = l
                    .explanation
                    .counts
                    .iter()
                    .map(|((sw, o), n)| {
                        if *n == 1 {
                            format!("{sw}={o}")
                        } else {
                            format!("{sw}={o}^{n}")
                        }
                    })
                    .collect();
                if l.explanation.fixed_factor != 1.0 {
                    draws.push(format!("fixed={}", l.explanation.fixed_factor));
                }
                if common.machine {
                    writeln!(
                        out,
                        "{}\t{}\t{}",
                        render_outcome(&l.outcome),
                        l.probability,
                        draws.join(" ")
                    )?;
                } else {
                    writeln!(
                        out,
                        "{:.6}  {}  [{}]",
                        l.probability,
                        render_outcome(&l.outcome),
                        draws.join(" ")
                    )?;
                }
            }
            if !common.machine {
                let d = distribution(&program, &q, &s, &registry, &lim)?;
                writeln!(out, "{} leaves, {} classes:", leaves.len(), d.len())?;
                for (k, p) in d.iter() {
                    writeln!(out, "  {k}\t{p:.6}")?;
                }
            }
        }
    }
    Ok(())
}
