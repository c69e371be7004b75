//! Command-line front end: argument parsing, the command pipelines and
//! their JSON reports.
//!
//! Reports are `serde_json` values, whose objects keep their keys sorted,
//! so identical inputs and flags give byte-identical output.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bekic::{gaussian_eliminate, BekicError};
use crate::bridge::{game_to_term, term_to_game, BridgeError};
use crate::game::{
    parse_pg, print_pg, zielonka_solve, Outcome, ParityGame, Player, SolveError, WinningRegions,
};
use crate::generate::{random_game, random_term, GameParams, TermParams};
use crate::graph::VertexId;
use crate::oracle::{count_sequence, stabilized_count, OracleError, Stabilization};
use crate::semantics::{
    eval, eval_system, sized_env, unroll, Env, EvalError, EvalOptions, SetValue, SystemValue,
    DEFAULT_BUDGET, PRINT_CAP,
};
use crate::term::{
    free_vars, parse_with_warnings, simplify, to_file, EquationSystem, MuTerm, SystemError,
    TermNode,
};

pub const SCHEMA: u32 = 1;

/// Terms larger than this (counting shared subterms once per occurrence)
/// are not printed or unfolded into games.
pub const MAX_PRINTED_SIZE: usize = 2_000_000;

/// Largest translated term that `check` unfolds into a game again.
const ROUND_TRIP_LIMIT: usize = 2_000;

#[derive(Parser, Debug)]
#[command(
    name = "parity-mu",
    version,
    about = "Parity games and fixed-point terms: solve, translate, evaluate, count and cross-check"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a game and report both winning regions with positional strategies.
    Solve {
        file: PathBuf,
        /// Outcome of a variable leaf for Eva, e.g. `A=win`.
        #[arg(long = "assume", value_name = "NAME=win|lose", value_parser = parse_assumption)]
        assume: Vec<(String, Outcome)>,
    },
    /// Translate a game into a term or a term into a game.
    #[command(group(ArgGroup::new("direction").required(true).args(["to_term", "to_game"])))]
    Translate {
        #[arg(long, value_name = "FILE.pg")]
        to_term: Option<PathBuf>,
        #[arg(long, value_name = "FILE.mu")]
        to_game: Option<PathBuf>,
        /// Where to write the result; defaults to the input with the other extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Replace the output file if it already exists.
        #[arg(long)]
        force: bool,
    },
    /// Evaluate a term (.mu) or an equation system (.eqs) to finite sets.
    Eval {
        file: PathBuf,
        /// Size of the atom set for a free variable.
        #[arg(long = "env", value_name = "NAME=SIZE", value_parser = parse_binding)]
        env: Vec<(String, usize)>,
        /// Maximal number of iterations per fixed point.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Count a player's winning strategy prefixes at depths 0..=D.
    Count {
        file: PathBuf,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = Side::Eva)]
        player: Side,
    },
    /// Cross-check solver, semantics, counting and translations on inputs.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Size of a free variable of a term; unlisted variables get size 2.
        #[arg(long = "env", value_name = "NAME=SIZE", value_parser = parse_binding)]
        env: Vec<(String, usize)>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Play a closed game against the solver's positional strategy.
    Play {
        file: PathBuf,
        /// The side you play.
        #[arg(long, value_enum, default_value_t = Side::Adam)]
        player: Side,
        /// Seed for the computer's moves from positions it cannot win.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_steps: usize,
    },
    /// Run the coherence checks on seeded random games and terms.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Eva,
    Adam,
}

impl From<Side> for Player {
    fn from(s: Side) -> Player {
        match s {
            Side::Eva => Player::Eva,
            Side::Adam => Player::Adam,
        }
    }
}

fn parse_binding(s: &str) -> Result<(String, usize), String> {
    let (name, size) = s.split_once('=').ok_or("expected NAME=SIZE")?;
    let size = size.parse().map_err(|_| format!("invalid size '{size}'"))?;
    Ok((name.to_string(), size))
}

fn parse_assumption(s: &str) -> Result<(String, Outcome), String> {
    let (name, o) = s.split_once('=').ok_or("expected NAME=win|lose")?;
    let o = match o {
        "win" => Outcome::Win,
        "lose" => Outcome::Lose,
        _ => return Err(format!("invalid outcome '{o}'")),
    };
    Ok((name.to_string(), o))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Resource(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Failed(_) => "failure",
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Resource(_) => "resource",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "error": { "kind": self.kind(), "message": self.to_string() },
        })
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BudgetExhausted { .. } | EvalError::ResourceLimit(_) => {
                CliError::Resource(e.to_string())
            }
            EvalError::Internal(_) => CliError::Failed(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } => CliError::Resource(e.to_string()),
            OracleError::Solve(s) => s.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::SelfCheck(_) => CliError::Failed(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<BridgeError> for CliError {
    fn from(e: BridgeError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<BekicError> for CliError {
    fn from(e: BekicError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str, force: bool) -> Result<(), CliError> {
    if !force && path.exists() {
        return Err(CliError::Parse(format!(
            "{} already exists; pass --force to replace it",
            path.display()
        )));
    }
    std::fs::write(path, text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn load_game(path: &Path) -> Result<ParityGame, CliError> {
    let g =
        parse_pg(&read(path)?).map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))?;
    g.validate().map_err(|ds| {
        let msgs: Vec<String> = ds.iter().map(ToString::to_string).collect();
        CliError::Validation(format!("{}: {}", path.display(), msgs.join("; ")))
    })?;
    Ok(g)
}

pub fn load_term(path: &Path) -> Result<MuTerm, CliError> {
    let parsed = parse_with_warnings(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))?;
    for w in &parsed.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(parsed.term)
}

pub fn load_system(path: &Path) -> Result<EquationSystem, CliError> {
    EquationSystem::parse(&read(path)?).map_err(|e| match e {
        SystemError::Syntax { .. } | SystemError::Term { .. } => {
            CliError::Parse(format!("{}: {e}", path.display()))
        }
        _ => CliError::Validation(format!("{}: {e}", path.display())),
    })
}

fn extension(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn ids(vs: impl IntoIterator<Item = VertexId>) -> Value {
    vs.into_iter().map(|v| v.0).collect()
}

fn number(n: u128) -> Value {
    u64::try_from(n)
        .map(Value::from)
        .unwrap_or_else(|_| Value::from(n.to_string()))
}

fn strategy_json(g: &ParityGame, s: &BTreeMap<VertexId, crate::graph::EdgeId>) -> Value {
    s.iter()
        .map(|(v, e)| {
            let target = g
                .moves(*v)
                .into_iter()
                .find(|(f, _)| f == e)
                .map(|(_, t)| t.0);
            json!({ "vertex": v.0, "edge": e.0, "target": target })
        })
        .collect()
}

fn regions_json(g: &ParityGame, r: &WinningRegions) -> Value {
    json!({
        "eva_region": ids(r.eva_region.iter().copied()),
        "adam_region": ids(r.adam_region.iter().copied()),
        "eva_strategy": strategy_json(g, &r.eva_strategy),
        "adam_strategy": strategy_json(g, &r.adam_strategy),
    })
}

fn game_summary(g: &ParityGame) -> Value {
    let mut priorities: BTreeMap<String, usize> = BTreeMap::new();
    for &v in g.vertices() {
        *priorities.entry(g.priority(v).to_string()).or_default() += 1;
    }
    json!({
        "vertices": g.vertex_count(),
        "edges": g.edge_count(),
        "max_priority": g.max_priority(),
        "priorities": priorities,
        "labels": g.labels(),
        "initial": g.initial().map(|v| v.0),
    })
}

/// Binder occurrences of each kind, counting shared subterms once per occurrence.
fn binder_counts(t: &MuTerm) -> (usize, usize) {
    fn go(t: &MuTerm, memo: &mut HashMap<usize, (usize, usize)>) -> (usize, usize) {
        if let Some(&c) = memo.get(&t.ptr_id()) {
            return c;
        }
        let add = |a: (usize, usize), b: (usize, usize)| {
            (a.0.saturating_add(b.0), a.1.saturating_add(b.1))
        };
        let c = match t.node() {
            TermNode::Var(_) => (0, 0),
            TermNode::Prod(ts) | TermNode::Coprod(ts) => {
                ts.iter().fold((0, 0), |acc, c| add(acc, go(c, memo)))
            }
            TermNode::Fix(k, _, b) => {
                let own = if *k == crate::term::FixKind::Mu {
                    (1, 0)
                } else {
                    (0, 1)
                };
                add(own, go(b, memo))
            }
        };
        memo.insert(t.ptr_id(), c);
        c
    }
    go(t, &mut HashMap::new())
}

fn term_summary(t: &MuTerm) -> Value {
    let (mu, nu) = binder_counts(t);
    json!({
        "size": t.size(),
        "shared_nodes": t.node_count(),
        "binder_depth": t.binder_depth(),
        "binders": { "mu": mu, "nu": nu },
        "free_vars": free_vars(t).names(),
    })
}

fn check_printable(t: &MuTerm) -> Result<(), CliError> {
    let n = t.size();
    if n > MAX_PRINTED_SIZE {
        return Err(CliError::Resource(format!(
            "the term has {n} nodes when written out, more than {MAX_PRINTED_SIZE}"
        )));
    }
    Ok(())
}

fn env_json(env: &Env) -> Value {
    env.iter()
        .map(|(k, c)| (k.clone(), Value::from(c.len())))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn with_header(command: &str, mut v: Value) -> Value {
    v["schema"] = json!(SCHEMA);
    v["command"] = json!(command);
    v
}

fn solve_cmd(file: &Path, assume: &[(String, Outcome)]) -> Result<Value, CliError> {
    let g = load_game(file)?;
    let assumption: BTreeMap<String, Outcome> = assume.iter().cloned().collect();
    let r = zielonka_solve(&g, &assumption)?;
    let mut v = regions_json(&g, &r);
    v["file"] = json!(file.display().to_string());
    v["initial"] = json!(g.initial().map(|v| v.0));
    v["winner"] = json!(g.initial().and_then(|i| r.winner(i)).map(|p| p.to_string()));
    v["game"] = game_summary(&g);
    Ok(with_header("solve", v))
}

fn translate_cmd(
    to_term: Option<&Path>,
    to_game: Option<&Path>,
    output: Option<&Path>,
    force: bool,
) -> Result<Value, CliError> {
    if let Some(input) = to_term {
        let g = load_game(input)?;
        let t = simplify(&game_to_term(&g)?);
        check_printable(&t)?;
        let out = output
            .map(Path::to_path_buf)
            .unwrap_or_else(|| input.with_extension("mu"));
        write(&out, &to_file(&t), force)?;
        Ok(with_header(
            "translate",
            json!({
                "direction": "to_term",
                "input": input.display().to_string(),
                "output": out.display().to_string(),
                "game": game_summary(&g),
                "term": term_summary(&t),
            }),
        ))
    } else {
        let input = to_game.expect("clap requires one direction");
        let t = load_term(input)?;
        check_printable(&t)?;
        let g = term_to_game(&t);
        let out = output
            .map(Path::to_path_buf)
            .unwrap_or_else(|| input.with_extension("pg"));
        write(&out, &print_pg(&g), force)?;
        Ok(with_header(
            "translate",
            json!({
                "direction": "to_game",
                "input": input.display().to_string(),
                "output": out.display().to_string(),
                "game": game_summary(&g),
                "term": term_summary(&t),
            }),
        ))
    }
}

fn env_from(bindings: &[(String, usize)]) -> Env {
    sized_env(bindings.iter().map(|(n, s)| (n.as_str(), *s)))
}

fn eval_cmd(file: &Path, bindings: &[(String, usize)], budget: usize) -> Result<Value, CliError> {
    let env = env_from(bindings);
    let mut v = if extension(file) == "eqs" {
        let sys = load_system(file)?;
        let solved = gaussian_eliminate(&sys)?;
        let mut components = serde_json::Map::new();
        for eq in sys.equations() {
            let t = solved.get(&eq.var).expect("every variable is solved");
            components.insert(eq.var.clone(), eval(t, &env, budget)?.to_json(PRINT_CAP));
        }
        let mut v = json!({ "components": components });
        if sys.uniform_kind().is_some() {
            v["simultaneous"] = match eval_system(&sys, &env, &EvalOptions::with_budget(budget))? {
                SystemValue::Stabilized {
                    components,
                    iterations,
                    ..
                } => json!({
                    "verdict": "stabilized",
                    "iterations": iterations,
                    "cardinalities": sys
                        .equations()
                        .iter()
                        .zip(&components)
                        .map(|(eq, c)| (eq.var.clone(), Value::from(c.len())))
                        .collect::<serde_json::Map<_, _>>(),
                }),
                SystemValue::Diverged { reason, .. } => {
                    json!({ "verdict": "diverged", "reason": reason })
                }
            };
        }
        v
    } else {
        let t = load_term(file)?;
        eval(&t, &env, budget)?.to_json(PRINT_CAP)
    };
    v["file"] = json!(file.display().to_string());
    v["env"] = env_json(&env);
    v["budget"] = json!(budget);
    Ok(with_header("eval", v))
}

fn count_cmd(file: &Path, depth: usize, player: Side) -> Result<Value, CliError> {
    let g = load_game(file)?;
    let g = match player {
        Side::Eva => g,
        Side::Adam => g.dual(),
    };
    let sequence: Vec<Value> = count_sequence(&g, depth)?.into_iter().map(number).collect();
    let verdict = match stabilized_count(&g, depth)? {
        Stabilization::Finite(n) => json!({ "verdict": "stabilized", "count": number(n) }),
        Stabilization::NotStabilized(_) => json!({ "verdict": "not_stabilized", "count": null }),
    };
    let mut v = json!({
        "file": file.display().to_string(),
        "player": Player::from(player).to_string(),
        "depth": depth,
        "sequence": sequence,
    });
    v["verdict"] = verdict["verdict"].clone();
    v["count"] = verdict["count"].clone();
    Ok(with_header("count", v))
}

/// Result of one coherence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Pass(String),
    Fail(String),
    Skipped(String),
}

impl Status {
    fn to_json(&self, name: &str) -> Value {
        let (status, detail) = match self {
            Status::Pass(d) => ("pass", d),
            Status::Fail(d) => ("fail", d),
            Status::Skipped(d) => ("skipped", d),
        };
        json!({ "check": name, "status": status, "detail": detail })
    }
}

type Checks = Vec<(&'static str, Status)>;

fn card(v: &SetValue) -> String {
    v.cardinality()
        .map_or("infinite".to_string(), |n| n.to_string())
}

fn status_of(r: Result<Status, CliError>) -> Status {
    r.unwrap_or_else(|e| match e {
        CliError::Resource(m) => Status::Skipped(m),
        e => Status::Fail(e.to_string()),
    })
}

/// Nonempty semantics exactly when Eva wins from the initial position.
/// Variable leaves are won by Eva when their set is nonempty.
fn winner_check(g: &ParityGame, value: &SetValue, env: &Env) -> Result<Status, CliError> {
    let assumption: BTreeMap<String, Outcome> = g
        .labels()
        .into_iter()
        .map(|l| {
            let win = env.get(&l).is_some_and(|c| !c.is_empty());
            (l, if win { Outcome::Win } else { Outcome::Lose })
        })
        .collect();
    let r = zielonka_solve(g, &assumption)?;
    let init = g
        .initial()
        .expect("validated games have an initial position");
    let eva = r.winner(init) == Some(Player::Eva);
    let detail = format!(
        "winner {}, cardinality {}",
        if eva { "Eva" } else { "Adam" },
        card(value)
    );
    Ok(if eva != value.is_empty() {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    })
}

fn count_check(g: &ParityGame, value: &SetValue, depth: usize) -> Result<Status, CliError> {
    if !g.is_closed() {
        return Ok(Status::Skipped("the game has variable leaves".into()));
    }
    Ok(match stabilized_count(g, depth)? {
        Stabilization::Finite(n) => {
            let detail = format!("count {n}, cardinality {}", card(value));
            if value.cardinality().map(|c| c as u128) == Some(n) {
                Status::Pass(detail)
            } else {
                Status::Fail(detail)
            }
        }
        Stabilization::NotStabilized(tail) => {
            let seq = count_sequence(g, depth)?;
            if seq.windows(2).all(|w| w[0] < w[1]) {
                let detail = format!("counts {tail:?} still growing, cardinality {}", card(value));
                if value.is_infinite() {
                    Status::Pass(detail)
                } else {
                    Status::Fail(detail)
                }
            } else {
                Status::Skipped(format!(
                    "counts {tail:?} neither stabilized nor strictly increasing"
                ))
            }
        }
    })
}

fn same_value(a: &SetValue, b: &SetValue) -> bool {
    a.cardinality() == b.cardinality()
}

fn check_game(g: &ParityGame, opts: &CheckOptions) -> Checks {
    let mut out: Checks = Vec::new();
    let term = match game_to_term(g) {
        Ok(t) => t,
        Err(e) => return vec![("translation", Status::Fail(e.to_string()))],
    };
    // Open games are checked with every leaf set empty or a singleton.
    let labels = g.labels();
    let envs: Vec<Env> = if labels.len() > 4 {
        vec![sized_env(labels.iter().map(|l| (l.as_str(), 1)))]
    } else {
        (0..1usize << labels.len())
            .map(|mask| {
                sized_env(
                    labels
                        .iter()
                        .enumerate()
                        .map(|(i, l)| (l.as_str(), (mask >> i) & 1)),
                )
            })
            .collect()
    };
    let values: Result<Vec<SetValue>, CliError> = envs
        .iter()
        .map(|env| eval(&term, env, opts.budget).map_err(CliError::from))
        .collect();
    let values = match values {
        Ok(v) => v,
        Err(e) => return vec![("evaluation", status_of(Err(e)))],
    };
    let winner = envs
        .iter()
        .zip(&values)
        .map(|(env, v)| status_of(winner_check(g, v, env)))
        .find(|s| !matches!(s, Status::Pass(_)))
        .unwrap_or_else(|| status_of(winner_check(g, &values[0], &envs[0])));
    out.push(("winner_matches_emptiness", winner));
    out.push((
        "count_matches_cardinality",
        status_of(count_check(g, &values[0], opts.depth)),
    ));
    let round = (|| {
        let t = simplify(&term);
        if t.size() > opts.max_round_trip {
            return Ok(Status::Skipped(format!(
                "the term has {} nodes when written out",
                t.size()
            )));
        }
        let again = game_to_term(&term_to_game(&t))?;
        let v = eval(&again, &envs[0], opts.budget)?;
        let detail = format!(
            "cardinality {} after the round trip, {} before",
            card(&v),
            card(&values[0])
        );
        Ok(if same_value(&v, &values[0]) {
            Status::Pass(detail)
        } else {
            Status::Fail(detail)
        })
    })();
    out.push(("round_trip", status_of(round)));
    out
}

fn check_term(t: &MuTerm, env: &Env, opts: &CheckOptions) -> Checks {
    let mut out: Checks = Vec::new();
    let value = match eval(t, env, opts.budget) {
        Ok(v) => v,
        Err(e) => return vec![("evaluation", status_of(Err(e.into())))],
    };
    let g = term_to_game(t);
    out.push((
        "winner_matches_emptiness",
        status_of(winner_check(&g, &value, env)),
    ));
    out.push((
        "count_matches_cardinality",
        status_of(count_check(&g, &value, opts.depth)),
    ));
    let round = (|| {
        let again = game_to_term(&g)?;
        let v = eval(&again, env, opts.budget)?;
        let detail = format!(
            "cardinality {} after the round trip, {} before",
            card(&v),
            card(&value)
        );
        Ok(if same_value(&v, &value) {
            Status::Pass(detail)
        } else {
            Status::Fail(detail)
        })
    })();
    out.push(("round_trip", status_of(round)));
    let lambek = match unroll(t) {
        None => Ok(Status::Skipped("not a fixed point".into())),
        Some(u) => eval(&u, env, opts.budget).map_err(CliError::from).map(|v| {
            let detail = format!(
                "unrolled cardinality {}, cardinality {}",
                card(&v),
                card(&value)
            );
            if same_value(&v, &value) {
                Status::Pass(detail)
            } else {
                Status::Fail(detail)
            }
        }),
    };
    out.push(("unrolling", status_of(lambek)));
    out
}

fn check_system(sys: &EquationSystem, env: &Env, opts: &CheckOptions) -> Checks {
    let r = (|| {
        if sys.uniform_kind().is_none() {
            return Ok(Status::Skipped("the system mixes μ and ν equations".into()));
        }
        let solved = gaussian_eliminate(sys)?;
        let nested: Vec<SetValue> = sys
            .equations()
            .iter()
            .map(|eq| eval(solved.get(&eq.var).expect("solved"), env, opts.budget))
            .collect::<Result<_, _>>()?;
        Ok(
            match eval_system(sys, env, &EvalOptions::with_budget(opts.budget))? {
                SystemValue::Stabilized { components, .. } => {
                    let sim: Vec<Option<usize>> =
                        components.iter().map(|c| Some(c.len())).collect();
                    let nes: Vec<Option<usize>> =
                        nested.iter().map(SetValue::cardinality).collect();
                    let detail = format!("simultaneous {sim:?}, nested {nes:?}");
                    if sim == nes {
                        Status::Pass(detail)
                    } else {
                        Status::Fail(detail)
                    }
                }
                SystemValue::Diverged { reason, .. } => {
                    if nested.iter().any(SetValue::is_infinite) {
                        Status::Pass(format!("both sides are infinite: {reason}"))
                    } else {
                        Status::Fail(format!("simultaneous iteration diverged ({reason}) but nested values are finite"))
                    }
                }
            },
        )
    })();
    vec![("nested_matches_simultaneous", status_of(r))]
}

#[derive(Clone, Debug)]
struct CheckOptions {
    env: Vec<(String, usize)>,
    budget: usize,
    depth: usize,
    max_round_trip: usize,
}

fn term_env(t: &MuTerm, bindings: &[(String, usize)]) -> Env {
    let given: HashSet<&str> = bindings.iter().map(|(n, _)| n.as_str()).collect();
    let mut all = bindings.to_vec();
    for x in free_vars(t).names() {
        if !given.contains(x.as_str()) {
            all.push((x.clone(), 2));
        }
    }
    env_from(&all)
}

fn check_file(path: &Path, opts: &CheckOptions) -> Result<Checks, CliError> {
    Ok(match extension(path) {
        "pg" => check_game(&load_game(path)?, opts),
        "mu" => {
            let t = load_term(path)?;
            let env = term_env(&t, &opts.env);
            check_term(&t, &env, opts)
        }
        "eqs" => check_system(&load_system(path)?, &env_from(&opts.env), opts),
        other => {
            return Err(CliError::Parse(format!(
                "{}: unknown extension '{other}'",
                path.display()
            )))
        }
    })
}

/// Runs `f` on every item with up to `jobs` threads; results keep input order.
fn parallel<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                let f = &f;
                s.spawn(move || {
                    (w..items.len())
                        .step_by(jobs)
                        .map(|i| (i, f(&items[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("check worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|r| r.expect("every item is processed"))
        .collect()
}

/// Turns named check results into a report with a failure list; the exit
/// code is 1 if a check failed, otherwise the code of the first input error.
fn check_report(
    command: &str,
    entries: Vec<(String, Result<Checks, CliError>)>,
    extra: Value,
) -> (Value, i32) {
    let mut files = Vec::new();
    let mut failures = Vec::new();
    let mut error_code = 0;
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    for (name, r) in entries {
        match r {
            Ok(checks) => {
                for (check, s) in &checks {
                    match s {
                        Status::Pass(_) => passed += 1,
                        Status::Skipped(_) => skipped += 1,
                        Status::Fail(d) => {
                            failed += 1;
                            failures.push(json!({ "input": name, "check": check, "detail": d }));
                        }
                    }
                }
                files.push(json!({
                    "input": name,
                    "checks": checks.iter().map(|(c, s)| s.to_json(c)).collect::<Vec<_>>(),
                }));
            }
            Err(e) => {
                if error_code == 0 {
                    error_code = e.exit_code();
                }
                failures.push(json!({ "input": name, "check": e.kind(), "detail": e.to_string() }));
                files.push(json!({ "input": name, "error": e.to_json()["error"] }));
            }
        }
    }
    let code = if failed > 0 { 1 } else { error_code };
    let mut v = extra;
    v["inputs"] = json!(files);
    v["failures"] = json!(failures);
    v["passed"] = json!(code == 0);
    v["totals"] = json!({ "pass": passed, "fail": failed, "skipped": skipped });
    (with_header(command, v), code)
}

fn check_cmd(files: &[PathBuf], opts: &CheckOptions, jobs: usize) -> (Value, i32) {
    let results = parallel(files, jobs, |p| check_file(p, opts));
    let entries = files
        .iter()
        .map(|p| p.display().to_string())
        .zip(results)
        .collect();
    check_report("check", entries, json!({}))
}

enum Instance {
    Game(ParityGame),
    Term(MuTerm),
}

fn selftest_cmd(seed: u64, count: usize, jobs: usize) -> (Value, i32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(2 * count);
    let gp = GameParams::default();
    let tp = TermParams::default();
    for _ in 0..count {
        instances.push(Instance::Game(random_game(&mut rng, &gp)));
        instances.push(Instance::Term(random_term(&mut rng, &tp)));
    }
    let opts = CheckOptions {
        env: Vec::new(),
        budget: DEFAULT_BUDGET,
        depth: 12,
        max_round_trip: ROUND_TRIP_LIMIT,
    };
    let results = parallel(&instances, jobs, |i| match i {
        Instance::Game(g) => Ok(check_game(g, &opts)),
        Instance::Term(t) => Ok(check_term(t, &Env::new(), &opts)),
    });
    let entries = instances
        .iter()
        .zip(results)
        .map(|(i, r)| {
            let name = match i {
                Instance::Game(g) => print_pg(g),
                Instance::Term(t) => crate::term::print(t),
            };
            (name, r)
        })
        .collect();
    check_report("selftest", entries, json!({ "seed": seed, "count": count }))
}

fn play_cmd(
    file: &Path,
    human: Player,
    seed: u64,
    max_steps: usize,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<Value, CliError> {
    let g = load_game(file)?;
    if !g.is_closed() {
        return Err(CliError::Validation(
            "play needs a game without variable leaves".into(),
        ));
    }
    let r = zielonka_solve(&g, &BTreeMap::new())?;
    let computer = human.opponent();
    let strategy = match computer {
        Player::Eva => &r.eva_strategy,
        Player::Adam => &r.adam_strategy,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let io = |e: std::io::Error| CliError::Resource(e.to_string());
    let mut v = g
        .initial()
        .expect("validated games have an initial position");
    let mut play = vec![v];
    let winner = r.winner(v).expect("closed games are fully solved");
    writeln!(
        out,
        "You play {human}; the computer plays {computer}. {winner} wins from {v}."
    )
    .map_err(io)?;
    let (result, reason) = loop {
        let moves = g.moves(v);
        let owner = g.owner(v);
        writeln!(out, "At {v} (owner {owner}, priority {}).", g.priority(v)).map_err(io)?;
        if moves.is_empty() {
            break (Some(owner.opponent()), format!("{owner} is stuck at {v}"));
        }
        if play.len() > max_steps {
            break (None, format!("stopped after {max_steps} moves"));
        }
        let (_, next) = if owner == human {
            for (i, (_, t)) in moves.iter().enumerate() {
                writeln!(out, "  [{i}] to {t} (priority {})", g.priority(*t)).map_err(io)?;
            }
            loop {
                write!(out, "> ").map_err(io)?;
                out.flush().map_err(io)?;
                let mut line = String::new();
                if input.read_line(&mut line).map_err(io)? == 0 || line.trim() == "q" {
                    writeln!(out).map_err(io)?;
                    return Ok(play_report(file, human, &play, None, "abandoned"));
                }
                match line.trim().parse::<usize>() {
                    Ok(i) if i < moves.len() => break moves[i],
                    _ => {
                        writeln!(out, "Enter a number below {}, or q.", moves.len()).map_err(io)?
                    }
                }
            }
        } else {
            let m = strategy
                .get(&v)
                .and_then(|e| moves.iter().find(|(f, _)| f == e).copied())
                .unwrap_or_else(|| *moves.choose(&mut rng).expect("nonempty"));
            writeln!(out, "The computer moves to {}.", m.1).map_err(io)?;
            m
        };
        if let Some(k) = play.iter().position(|&p| p == next) {
            let top = play[k..]
                .iter()
                .map(|&p| g.priority(p))
                .max()
                .expect("nonempty cycle");
            let w = Player::of_priority(top);
            play.push(next);
            break (Some(w), format!("the play returned to {next}; repeating this cycle forever, priority {top} is highest"));
        }
        play.push(next);
        v = next;
    };
    match result {
        Some(w) => writeln!(out, "{reason}: {w} wins.").map_err(io)?,
        None => writeln!(out, "{reason}.").map_err(io)?,
    }
    Ok(play_report(file, human, &play, result, &reason))
}

fn play_report(
    file: &Path,
    human: Player,
    play: &[VertexId],
    winner: Option<Player>,
    reason: &str,
) -> Value {
    with_header(
        "play",
        json!({
            "file": file.display().to_string(),
            "human": human.to_string(),
            "play": ids(play.iter().copied()),
            "winner": winner.map(|w| w.to_string()),
            "reason": reason,
        }),
    )
}

/// Runs one command; returns the report and the exit code.
pub fn execute(
    cli: &Cli,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(Value, i32), CliError> {
    let ok = |v: Value| Ok((v, 0));
    match &cli.command {
        Command::Solve { file, assume } => ok(solve_cmd(file, assume)?),
        Command::Translate {
            to_term,
            to_game,
            output,
            force,
        } => ok(translate_cmd(
            to_term.as_deref(),
            to_game.as_deref(),
            output.as_deref(),
            *force,
        )?),
        Command::Eval { file, env, budget } => ok(eval_cmd(file, env, *budget)?),
        Command::Count {
            file,
            depth,
            player,
        } => ok(count_cmd(file, *depth, *player)?),
        Command::Check {
            files,
            env,
            budget,
            depth,
            jobs,
        } => {
            let opts = CheckOptions {
                env: env.clone(),
                budget: *budget,
                depth: *depth,
                max_round_trip: ROUND_TRIP_LIMIT,
            };
            Ok(check_cmd(files, &opts, *jobs))
        }
        Command::Play {
            file,
            player,
            seed,
            max_steps,
        } => ok(play_cmd(
            file,
            (*player).into(),
            *seed,
            *max_steps,
            input,
            out,
        )?),
        Command::Selftest { seed, count, jobs } => Ok(selftest_cmd(*seed, *count, *jobs)),
    }
}

/// Parses `args`, runs the command and prints its JSON report to `out`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let (report, code) = match execute(&cli, input, out) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            (e.to_json(), e.exit_code())
        }
    };
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("reports serialize")
    );
    code
}
