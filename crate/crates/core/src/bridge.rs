//! Translations between parity games and μ-terms.
//!
//! A game becomes one equation per position: Eva positions are coproducts
//! over their moves, Adam positions products, and the priority fixes the
//! binder (even ν, odd μ). Eliminating the system yields a term. In the
//! other direction every subterm occurrence becomes a position and every
//! bound variable a move back to its binder.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::bekic::{gaussian_eliminate, BekicError};
use crate::game::{Diagnostic, GameBuilder, ParityGame, Player};
use crate::graph::VertexId;
use crate::term::{Context, Equation, EquationSystem, FixKind, MuTerm, SystemError, TermNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BridgeError {
    #[error("invalid game: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Bekic(#[from] BekicError),
}

/// Names of the position variables, `X<id>`, primed until they avoid the leaf labels.
fn position_names(g: &ParityGame) -> Vec<String> {
    let labels: HashSet<String> = g.labels().into_iter().collect();
    g.vertices()
        .iter()
        .map(|v| {
            let mut n = format!("X{}", v.0);
            while labels.contains(&n) {
                n.push('\'');
            }
            n
        })
        .collect()
}

pub fn game_to_system(g: &ParityGame) -> Result<EquationSystem, BridgeError> {
    g.validate().map_err(BridgeError::Invalid)?;
    let names = position_names(g);
    let occurrence = |v: VertexId| -> MuTerm {
        match g.label(v) {
            Some(l) => MuTerm::var(l),
            None => MuTerm::var(names[g.graph().index_of(v).expect("vertex")].clone()),
        }
    };
    let mut equations = Vec::new();
    for (i, &v) in g.vertices().iter().enumerate() {
        if g.label(v).is_some() {
            continue;
        }
        let moves = g.moves(v);
        let (kind, priority, rhs) = if moves.is_empty() {
            match g.owner(v) {
                Player::Adam => (FixKind::Nu, 0, MuTerm::one()),
                Player::Eva => (FixKind::Mu, 1, MuTerm::zero()),
            }
        } else {
            let children = moves.iter().map(|&(_, t)| occurrence(t)).collect();
            let rhs = match g.owner(v) {
                Player::Eva => MuTerm::coprod(children),
                Player::Adam => MuTerm::prod(children),
            };
            let p = g.priority(v);
            (FixKind::for_priority(p), p, rhs)
        };
        equations.push(Equation {
            var: names[i].clone(),
            kind,
            priority,
            rhs,
        });
    }
    Ok(EquationSystem::new(
        equations,
        Context::from_names(g.labels()),
    )?)
}

/// The term of the initial position; its free variables are leaf labels.
pub fn game_to_term(g: &ParityGame) -> Result<MuTerm, BridgeError> {
    g.validate().map_err(BridgeError::Invalid)?;
    let init = g.initial().expect("validated");
    if let Some(l) = g.label(init) {
        return Ok(MuTerm::var(l));
    }
    let reach: BTreeSet<VertexId> = g.reachable();
    let sub = g.restrict(&reach);
    let names = position_names(&sub);
    let sys = game_to_system(&sub)?;
    let solved = gaussian_eliminate(&sys)?;
    let x = &names[sub.graph().index_of(init).expect("initial is reachable")];
    Ok(solved
        .get(x)
        .expect("initial position has an equation")
        .clone())
}

struct Draft {
    owner: Vec<Player>,
    priority: Vec<u32>,
    label: Vec<Option<String>>,
    edges: Vec<(u32, u32)>,
}

impl Draft {
    fn alloc(&mut self, owner: Player) -> u32 {
        self.owner.push(owner);
        self.priority.push(0);
        self.label.push(None);
        (self.owner.len() - 1) as u32
    }

    /// Entry vertex of an occurrence in child position, and the largest
    /// binder priority inside it.
    fn child(&mut self, t: &MuTerm, env: &mut Vec<(String, u32)>) -> (u32, Option<u32>) {
        if let TermNode::Var(x) = t.node() {
            if let Some(&(_, v)) = env.iter().rev().find(|(n, _)| n == x) {
                return (v, None);
            }
        }
        self.node(t, env)
    }

    fn node(&mut self, t: &MuTerm, env: &mut Vec<(String, u32)>) -> (u32, Option<u32>) {
        match t.node() {
            TermNode::Var(x) => {
                let v = self.alloc(Player::Eva);
                self.label[v as usize] = Some(x.clone());
                (v, None)
            }
            TermNode::Prod(ts) | TermNode::Coprod(ts) => {
                let owner = if matches!(t.node(), TermNode::Prod(_)) {
                    Player::Adam
                } else {
                    Player::Eva
                };
                let v = self.alloc(owner);
                (v, self.children(v, ts, env))
            }
            TermNode::Fix(kind, x, body) => {
                let v = self.alloc(Player::Eva);
                env.push((x.clone(), v));
                let inner = match body.node() {
                    TermNode::Prod(ts) => {
                        self.owner[v as usize] = Player::Adam;
                        self.children(v, ts, env)
                    }
                    TermNode::Coprod(ts) => self.children(v, ts, env),
                    _ => {
                        let (c, m) = self.child(body, env);
                        self.edges.push((v, c));
                        m
                    }
                };
                env.pop();
                let mut p = inner.map_or(0, |m| m + 1);
                if !kind.matches_priority(p) {
                    p += 1;
                }
                self.priority[v as usize] = p;
                (v, Some(p))
            }
        }
    }

    fn children(&mut self, v: u32, ts: &[MuTerm], env: &mut Vec<(String, u32)>) -> Option<u32> {
        let mut inner = None;
        for c in ts {
            let (w, m) = self.child(c, env);
            self.edges.push((v, w));
            inner = inner.max(m);
        }
        inner
    }
}

/// One position per subterm occurrence, numbered in preorder from the root.
/// A binder shares the position of its body when that body is a product or
/// coproduct; otherwise it is an Eva position with a single move.
pub fn term_to_game(t: &MuTerm) -> ParityGame {
    let mut d = Draft {
        owner: Vec::new(),
        priority: Vec::new(),
        label: Vec::new(),
        edges: Vec::new(),
    };
    d.node(t, &mut Vec::new());
    let mut b = GameBuilder::new();
    for i in 0..d.owner.len() {
        b.vertex(i as u32, d.owner[i], d.priority[i]);
        if let Some(l) = &d.label[i] {
            b.label(i as u32, l.clone());
        }
    }
    for &(s, t) in &d.edges {
        b.edge(s, t);
    }
    b.initial(0);
    b.build().expect("translation produces a well-formed arena")
}
