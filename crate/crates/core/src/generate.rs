//! Seeded random games, terms, systems and finite functions.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::game::{GameBuilder, ParityGame, Player};
use crate::semantics::{Carrier, FiniteFunction};
use crate::term::{Context, Equation, EquationSystem, FixKind, MuTerm};

#[derive(Clone, Debug)]
pub struct GameParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub max_priority: u32,
    pub max_out: usize,
    /// Chance that a vertex gets no moves at all.
    pub dead_end: f64,
    /// Only edges to higher-numbered vertices.
    pub acyclic: bool,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            min_vertices: 1,
            max_vertices: 6,
            max_priority: 4,
            max_out: 3,
            dead_end: 0.1,
            acyclic: false,
        }
    }
}

/// A closed game with vertices `0..n` and initial vertex 0.
pub fn random_game<R: Rng>(rng: &mut R, p: &GameParams) -> ParityGame {
    let n = rng.gen_range(p.min_vertices.max(1)..=p.max_vertices.max(p.min_vertices.max(1)));
    let mut b = GameBuilder::new();
    for v in 0..n {
        let owner = if rng.gen_bool(0.5) {
            Player::Eva
        } else {
            Player::Adam
        };
        b.vertex(v as u32, owner, rng.gen_range(0..=p.max_priority));
    }
    for v in 0..n {
        let lo = if p.acyclic { v + 1 } else { 0 };
        if lo >= n || rng.gen_bool(p.dead_end) {
            continue;
        }
        for _ in 0..rng.gen_range(1..=p.max_out.max(1)) {
            b.edge(v as u32, rng.gen_range(lo..n) as u32);
        }
    }
    b.initial(0);
    b.build().expect("generated games are well formed")
}

#[derive(Clone, Debug)]
pub struct TermParams {
    pub max_depth: usize,
    pub max_width: usize,
    /// Free variables the term may mention.
    pub params: Vec<String>,
    /// Probability weight of binders among inner nodes.
    pub binder_weight: u32,
}

impl Default for TermParams {
    fn default() -> Self {
        TermParams {
            max_depth: 4,
            max_width: 3,
            params: Vec::new(),
            binder_weight: 2,
        }
    }
}

struct TermGen<'a, R> {
    rng: &'a mut R,
    p: &'a TermParams,
    next: usize,
}

impl<R: Rng> TermGen<'_, R> {
    fn leaf(&mut self, scope: &[String]) -> MuTerm {
        let vars: Vec<&String> = scope.iter().chain(&self.p.params).collect();
        match self.rng.gen_range(0..4) {
            0 => MuTerm::one(),
            1 if self.rng.gen_bool(0.3) => MuTerm::zero(),
            _ if !vars.is_empty() => MuTerm::var(vars.choose(self.rng).expect("nonempty").as_str()),
            _ => MuTerm::one(),
        }
    }

    fn term(&mut self, depth: usize, scope: &mut Vec<String>) -> MuTerm {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.leaf(scope);
        }
        let w = self.p.binder_weight;
        match self.rng.gen_range(0..4 + w) {
            0 | 1 => {
                let k = self.rng.gen_range(0..=self.p.max_width);
                MuTerm::prod((0..k).map(|_| self.term(depth - 1, scope)).collect())
            }
            2 | 3 => {
                let k = self.rng.gen_range(0..=self.p.max_width);
                MuTerm::coprod((0..k).map(|_| self.term(depth - 1, scope)).collect())
            }
            _ => {
                let x = format!("X{}", self.next);
                self.next += 1;
                let kind = if self.rng.gen_bool(0.5) {
                    FixKind::Mu
                } else {
                    FixKind::Nu
                };
                scope.push(x.clone());
                let body = self.term(depth - 1, scope);
                scope.pop();
                MuTerm::fix(kind, x, body)
            }
        }
    }
}

/// A term whose binders are all distinct and whose free variables come from `p.params`.
pub fn random_term<R: Rng>(rng: &mut R, p: &TermParams) -> MuTerm {
    TermGen { rng, p, next: 0 }.term(p.max_depth, &mut Vec::new())
}

/// A fixed point `μX.b` or `νX.b` with `X` free in a random body.
pub fn random_fixpoint<R: Rng>(rng: &mut R, kind: FixKind, p: &TermParams) -> MuTerm {
    let mut g = TermGen { rng, p, next: 1 };
    let mut scope = vec!["X0".to_string()];
    let body = g.term(p.max_depth.saturating_sub(1).max(1), &mut scope);
    MuTerm::fix(kind, "X0", body)
}

/// Right-hand side over the unknowns and parameters, without binders.
fn random_rhs<R: Rng>(rng: &mut R, vars: &[String], depth: usize, width: usize) -> MuTerm {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..5) {
            0 => MuTerm::one(),
            1 => MuTerm::zero(),
            _ => MuTerm::var(vars.choose(rng).expect("variables").as_str()),
        };
    }
    let k = rng.gen_range(1..=width);
    let cs = (0..k)
        .map(|_| random_rhs(rng, vars, depth - 1, width))
        .collect();
    if rng.gen_bool(0.5) {
        MuTerm::prod(cs)
    } else {
        MuTerm::coprod(cs)
    }
}

/// A system of `equations` equations of one kind over the parameters `params`.
pub fn random_system<R: Rng>(
    rng: &mut R,
    kind: FixKind,
    equations: usize,
    params: &[String],
) -> EquationSystem {
    let lhs: Vec<String> = (0..equations).map(|i| format!("X{i}")).collect();
    let vars: Vec<String> = lhs.iter().chain(params).cloned().collect();
    let eqs = lhs
        .iter()
        .map(|x| {
            let base = if kind == FixKind::Mu { 1 } else { 0 };
            Equation {
                var: x.clone(),
                kind,
                priority: base + 2 * rng.gen_range(0..2),
                rhs: random_rhs(rng, &vars, 3, 3),
            }
        })
        .collect();
    EquationSystem::new(eqs, Context::from_names(params.iter().cloned()))
        .expect("generated systems are valid")
}

/// A random function between atom sets of the given sizes (`to` must be positive unless `from` is zero).
pub fn random_function<R: Rng>(
    rng: &mut R,
    name_from: &str,
    from: usize,
    name_to: &str,
    to: usize,
) -> FiniteFunction {
    let map = (0..from).map(|_| rng.gen_range(0..to)).collect();
    FiniteFunction::from_indices(
        Carrier::atoms(name_from, from),
        Carrier::atoms(name_to, to),
        map,
    )
    .expect("indices are in range")
}
