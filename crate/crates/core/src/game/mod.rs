//! Parity games on finite arenas.
//!
//! Convention: max-parity. Eva wins an infinite play iff the largest
//! priority seen infinitely often is even; a player who cannot move loses.
//! Vertices labelled with a variable are leaves whose outcome is supplied
//! from outside (see [`zielonka_solve`]).

mod pg;
mod solve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, EdgeId, Graph, GraphError, VertexId};

pub use pg::{parse_pg, print_pg, PgError};
pub use solve::{verify_regions, zielonka_solve, Outcome, SolveError, WinningRegions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Player {
    Eva,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eva => Player::Adam,
            Player::Adam => Player::Eva,
        }
    }

    /// The player favoured by a priority: Eva for even, Adam for odd.
    pub fn of_priority(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Eva
        } else {
            Player::Adam
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Player::Eva => 0,
            Player::Adam => 1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Eva => "Eva",
            Player::Adam => "Adam",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex {0} has data but is declared twice")]
    DuplicateVertex(VertexId),
}

/// One violated invariant found by [`ParityGame::validate`].
#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum Diagnostic {
    #[error("no initial position")]
    NoInitial,
    #[error("initial position {0} is not a vertex")]
    InitialNotAVertex(VertexId),
    #[error("vertex {vertex} is labelled '{label}' but has {moves} outgoing move(s)")]
    LabelledWithMoves {
        vertex: VertexId,
        label: String,
        moves: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityGame {
    graph: Graph,
    owner: Vec<Player>,
    priority: Vec<u32>,
    label: Vec<Option<String>>,
    name: Vec<Option<String>>,
    initial: Option<VertexId>,
}

/// Incremental construction of a [`ParityGame`]. Edge ids follow insertion order.
#[derive(Clone, Debug, Default)]
pub struct GameBuilder {
    vertices: Vec<(VertexId, Player, u32)>,
    labels: BTreeMap<VertexId, String>,
    names: BTreeMap<VertexId, String>,
    edges: Vec<(VertexId, VertexId)>,
    initial: Option<VertexId>,
}

impl GameBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, id: u32, owner: Player, priority: u32) -> &mut Self {
        self.vertices.push((VertexId(id), owner, priority));
        self
    }

    /// A leaf standing for the variable `label` (Eva-owned, priority 0).
    pub fn leaf(&mut self, id: u32, label: impl Into<String>) -> &mut Self {
        self.vertices.push((VertexId(id), Player::Eva, 0));
        self.labels.insert(VertexId(id), label.into());
        self
    }

    pub fn label(&mut self, id: u32, label: impl Into<String>) -> &mut Self {
        self.labels.insert(VertexId(id), label.into());
        self
    }

    pub fn name(&mut self, id: u32, name: impl Into<String>) -> &mut Self {
        self.names.insert(VertexId(id), name.into());
        self
    }

    pub fn edge(&mut self, src: u32, tgt: u32) -> &mut Self {
        self.edges.push((VertexId(src), VertexId(tgt)));
        self
    }

    pub fn initial(&mut self, id: u32) -> &mut Self {
        self.initial = Some(VertexId(id));
        self
    }

    /// Builds the game; without an explicit initial vertex the first
    /// declared vertex is initial.
    pub fn build(&self) -> Result<ParityGame, GameError> {
        let edges = self.edges.iter().enumerate().map(|(k, &(src, tgt))| Edge {
            id: EdgeId(k as u32),
            src,
            tgt,
        });
        let graph = Graph::new(self.vertices.iter().map(|v| v.0), edges)?;
        let n = graph.vertex_count();
        let mut owner = vec![Player::Eva; n];
        let mut priority = vec![0; n];
        for &(v, o, p) in &self.vertices {
            let i = graph.index_of(v).expect("declared vertex");
            owner[i] = o;
            priority[i] = p;
        }
        let mut label = vec![None; n];
        for (v, l) in &self.labels {
            let i = graph.index_of(*v).ok_or(GraphError::UnknownVertex(*v))?;
            label[i] = Some(l.clone());
        }
        let mut name = vec![None; n];
        for (v, l) in &self.names {
            let i = graph.index_of(*v).ok_or(GraphError::UnknownVertex(*v))?;
            name[i] = Some(l.clone());
        }
        let initial = self.initial.or_else(|| self.vertices.first().map(|v| v.0));
        Ok(ParityGame {
            graph,
            owner,
            priority,
            label,
            name,
            initial,
        })
    }
}

impl ParityGame {
    pub fn builder() -> GameBuilder {
        GameBuilder::new()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertices(&self) -> &[VertexId] {
        self.graph.vertices()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn initial(&self) -> Option<VertexId> {
        self.initial
    }

    fn idx(&self, v: VertexId) -> usize {
        self.graph
            .index_of(v)
            .unwrap_or_else(|| panic!("unknown vertex {v}"))
    }

    pub fn owner(&self, v: VertexId) -> Player {
        self.owner[self.idx(v)]
    }

    pub fn priority(&self, v: VertexId) -> u32 {
        self.priority[self.idx(v)]
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.label[self.idx(v)].as_deref()
    }

    pub fn name(&self, v: VertexId) -> Option<&str> {
        self.name[self.idx(v)].as_deref()
    }

    /// Outgoing moves in edge-id order.
    pub fn moves(&self, v: VertexId) -> Vec<(EdgeId, VertexId)> {
        self.graph.out_edges(v).map(|e| (e.id, e.tgt)).collect()
    }

    pub fn is_dead_end(&self, v: VertexId) -> bool {
        self.graph.out_degree(v) == 0
    }

    /// Variable labels in vertex order, without repetition.
    pub fn labels(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.label
            .iter()
            .flatten()
            .filter(|l| seen.insert(l.as_str()))
            .cloned()
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.label.iter().all(Option::is_none)
    }

    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), Vec<Diagnostic>> {
        let mut out = Vec::new();
        match self.initial {
            None => out.push(Diagnostic::NoInitial),
            Some(v) if !self.graph.contains_vertex(v) => out.push(Diagnostic::InitialNotAVertex(v)),
            _ => {}
        }
        for (i, &v) in self.graph.vertices().iter().enumerate() {
            if let Some(l) = &self.label[i] {
                let moves = self.graph.out_degree(v);
                if moves > 0 {
                    out.push(Diagnostic::LabelledWithMoves {
                        vertex: v,
                        label: l.clone(),
                        moves,
                    });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// The game seen from Adam's side: owners swapped, priorities shifted by one.
    pub fn dual(&self) -> ParityGame {
        ParityGame {
            graph: self.graph.clone(),
            owner: self.owner.iter().map(|o| o.opponent()).collect(),
            priority: self.priority.iter().map(|p| p + 1).collect(),
            label: self.label.clone(),
            name: self.name.clone(),
            initial: self.initial,
        }
    }

    /// The subgame on `keep`; moves leaving `keep` are dropped.
    pub fn restrict(&self, keep: &BTreeSet<VertexId>) -> ParityGame {
        let graph = self.graph.induced(|v| keep.contains(&v));
        let pick = |v: &VertexId| self.idx(*v);
        ParityGame {
            owner: graph
                .vertices()
                .iter()
                .map(|v| self.owner[pick(v)])
                .collect(),
            priority: graph
                .vertices()
                .iter()
                .map(|v| self.priority[pick(v)])
                .collect(),
            label: graph
                .vertices()
                .iter()
                .map(|v| self.label[pick(v)].clone())
                .collect(),
            name: graph
                .vertices()
                .iter()
                .map(|v| self.name[pick(v)].clone())
                .collect(),
            initial: self.initial.filter(|v| keep.contains(v)),
            graph,
        }
    }

    /// Vertices reachable from the initial one.
    pub fn reachable(&self) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<VertexId> = self.initial.into_iter().collect();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(self.graph.out_edges(v).map(|e| e.tgt));
            }
        }
        seen
    }

    /// The least set containing `target` and every vertex from which
    /// `player` can force a move into the set. An opponent vertex without
    /// moves is never attracted.
    pub fn attractor(&self, player: Player, target: &BTreeSet<VertexId>) -> BTreeSet<VertexId> {
        let arena = solve::Arena::new(self);
        let live = vec![true; arena.len()];
        let mask: Vec<bool> = self
            .graph
            .vertices()
            .iter()
            .map(|v| target.contains(v))
            .collect();
        let (set, _) = arena.attract(&live, player, &mask);
        self.graph
            .vertices()
            .iter()
            .zip(set)
            .filter(|(_, b)| *b)
            .map(|(v, _)| *v)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> ParityGame {
        let mut b = ParityGame::builder();
        b.vertex(0, Player::Eva, 0)
            .vertex(1, Player::Adam, 1)
            .edge(0, 1)
            .edge(1, 1);
        b.build().unwrap()
    }

    #[test]
    fn validation() {
        let empty = ParityGame::builder().build().unwrap();
        assert_eq!(empty.validate(), Err(vec![Diagnostic::NoInitial]));

        let mut b = ParityGame::builder();
        b.vertex(0, Player::Eva, 0)
            .leaf(1, "X")
            .edge(0, 1)
            .edge(1, 0);
        let errs = b.build().unwrap().validate().unwrap_err();
        assert!(matches!(
            errs[0],
            Diagnostic::LabelledWithMoves {
                vertex: VertexId(1),
                ..
            }
        ));

        let mut b = ParityGame::builder();
        b.vertex(0, Player::Eva, 0)
            .vertex(1, Player::Adam, 1)
            .vertex(2, Player::Eva, 2)
            .edge(0, 1)
            .edge(1, 2)
            .edge(2, 0);
        assert!(b.build().unwrap().validate().is_ok());
    }

    #[test]
    fn dangling_edges_are_rejected() {
        let mut b = ParityGame::builder();
        b.vertex(0, Player::Eva, 0).edge(0, 7);
        assert!(b.build().is_err());
    }

    #[test]
    fn attractor_examples() {
        let g = chain();
        let all: BTreeSet<VertexId> = g.vertices().iter().copied().collect();
        assert!(g.attractor(Player::Eva, &BTreeSet::new()).is_empty());
        assert_eq!(g.attractor(Player::Adam, &all), all);
        let target: BTreeSet<VertexId> = [VertexId(1)].into();
        assert_eq!(g.attractor(Player::Eva, &target), all);
    }

    #[test]
    fn opponent_dead_ends_are_not_attracted() {
        let mut b = ParityGame::builder();
        b.vertex(0, Player::Adam, 0);
        let g = b.build().unwrap();
        assert!(g.attractor(Player::Eva, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn restrict_and_dual() {
        let g = chain();
        let keep: BTreeSet<VertexId> = [VertexId(1)].into();
        let r = g.restrict(&keep);
        assert_eq!(r.vertex_count(), 1);
        assert_eq!(r.edge_count(), 1);
        assert_eq!(r.initial(), None);
        let d = g.dual();
        assert_eq!(d.owner(VertexId(0)), Player::Adam);
        assert_eq!(d.priority(VertexId(1)), 2);
        assert_eq!(g.max_priority(), 1);
    }
}
