//! Zielonka's recursive algorithm, with positional strategies, and an
//! independent checker that every returned strategy is winning.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Diagnostic, ParityGame, Player};
use crate::graph::{EdgeId, VertexId};

/// How a variable-labelled leaf ends the play for Eva.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win,
    Lose,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("invalid game: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("no outcome assumed for variable '{0}'")]
    UncoveredLabel(String),
    #[error("solver self-check failed: {0}")]
    SelfCheck(String),
}

/// Winning regions over the unlabelled vertices, with positional strategies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WinningRegions {
    pub eva_region: BTreeSet<VertexId>,
    pub adam_region: BTreeSet<VertexId>,
    pub eva_strategy: BTreeMap<VertexId, EdgeId>,
    pub adam_strategy: BTreeMap<VertexId, EdgeId>,
}

impl WinningRegions {
    pub fn winner(&self, v: VertexId) -> Option<Player> {
        if self.eva_region.contains(&v) {
            Some(Player::Eva)
        } else if self.adam_region.contains(&v) {
            Some(Player::Adam)
        } else {
            None
        }
    }
}

/// Dense view of a game for the solver.
pub(crate) struct Arena {
    succ: Vec<Vec<(usize, EdgeId)>>,
    pred: Vec<Vec<(usize, EdgeId)>>,
    owner: Vec<Player>,
    prio: Vec<u32>,
}

impl Arena {
    pub(crate) fn new(g: &ParityGame) -> Self {
        let n = g.vertex_count();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for e in g.graph().edges() {
            let s = g.graph().index_of(e.src).expect("valid edge");
            let t = g.graph().index_of(e.tgt).expect("valid edge");
            succ[s].push((t, e.id));
            pred[t].push((s, e.id));
        }
        Arena {
            succ,
            pred,
            owner: g.owner.clone(),
            prio: g.priority.clone(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.owner.len()
    }

    /// Attractor of `target` inside `live`, with the forcing move of each
    /// attracted `player` vertex.
    pub(crate) fn attract(
        &self,
        live: &[bool],
        player: Player,
        target: &[bool],
    ) -> (Vec<bool>, Vec<Option<EdgeId>>) {
        let n = self.len();
        let mut set = vec![false; n];
        let mut strat = vec![None; n];
        let mut count: Vec<usize> = (0..n)
            .map(|v| self.succ[v].iter().filter(|(t, _)| live[*t]).count())
            .collect();
        let mut queue = VecDeque::new();
        for v in 0..n {
            if live[v] && target[v] {
                set[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &self.pred[u] {
                if !live[v] || set[v] {
                    continue;
                }
                if self.owner[v] == player {
                    set[v] = true;
                    strat[v] = Some(e);
                    queue.push_back(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        set[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        (set, strat)
    }

    /// Zielonka on a subgame in which every live vertex has a live successor.
    fn zielonka(&self, live: &[bool]) -> (Vec<Option<Player>>, Vec<Option<EdgeId>>) {
        let n = self.len();
        let mut win = vec![None; n];
        let mut strat = vec![None; n];
        let Some(d) = (0..n).filter(|&v| live[v]).map(|v| self.prio[v]).max() else {
            return (win, strat);
        };
        let p = Player::of_priority(d);
        let top: Vec<bool> = (0..n).map(|v| live[v] && self.prio[v] == d).collect();
        let (a, sa) = self.attract(live, p, &top);
        let live1: Vec<bool> = (0..n).map(|v| live[v] && !a[v]).collect();
        let (w1, s1) = self.zielonka(&live1);
        let opp_region: Vec<bool> = (0..n).map(|v| w1[v] == Some(p.opponent())).collect();
        if !opp_region.iter().any(|&b| b) {
            for v in (0..n).filter(|&v| live[v]) {
                win[v] = Some(p);
                if self.owner[v] != p {
                    continue;
                }
                strat[v] = if live1[v] {
                    s1[v]
                } else if top[v] {
                    self.succ[v].iter().find(|(t, _)| live[*t]).map(|&(_, e)| e)
                } else {
                    sa[v]
                };
            }
            return (win, strat);
        }
        let (b, sb) = self.attract(live, p.opponent(), &opp_region);
        let live2: Vec<bool> = (0..n).map(|v| live[v] && !b[v]).collect();
        let (w2, s2) = self.zielonka(&live2);
        for v in (0..n).filter(|&v| live[v]) {
            if live2[v] {
                win[v] = w2[v];
                strat[v] = s2[v];
            } else {
                win[v] = Some(p.opponent());
                if self.owner[v] == p.opponent() {
                    strat[v] = if opp_region[v] { s1[v] } else { sb[v] };
                }
            }
        }
        (win, strat)
    }
}

fn leaf_outcomes(
    g: &ParityGame,
    assumption: &BTreeMap<String, Outcome>,
) -> Result<Vec<Option<Outcome>>, SolveError> {
    g.label
        .iter()
        .map(|l| match l {
            None => Ok(None),
            Some(x) => assumption
                .get(x)
                .copied()
                .map(Some)
                .ok_or_else(|| SolveError::UncoveredLabel(x.clone())),
        })
        .collect()
}

/// Solves the game. Leaves labelled `X` are won by Eva iff
/// `assumption[X] = Win`. The result is checked by [`verify_regions`]
/// before it is returned.
pub fn zielonka_solve(
    g: &ParityGame,
    assumption: &BTreeMap<String, Outcome>,
) -> Result<WinningRegions, SolveError> {
    g.validate().map_err(SolveError::Invalid)?;
    let leaves = leaf_outcomes(g, assumption)?;
    let arena = Arena::new(g);
    let n = arena.len();
    let all = vec![true; n];
    let dead = |v: usize| arena.succ[v].is_empty() && leaves[v].is_none();

    let eva_target: Vec<bool> = (0..n)
        .map(|v| (dead(v) && arena.owner[v] == Player::Adam) || leaves[v] == Some(Outcome::Win))
        .collect();
    let (ae, sae) = arena.attract(&all, Player::Eva, &eva_target);
    let live1: Vec<bool> = (0..n).map(|v| !ae[v]).collect();
    let adam_target: Vec<bool> = (0..n)
        .map(|v| (dead(v) && arena.owner[v] == Player::Eva) || leaves[v] == Some(Outcome::Lose))
        .collect();
    let (aa, saa) = arena.attract(&live1, Player::Adam, &adam_target);
    let live2: Vec<bool> = (0..n).map(|v| live1[v] && !aa[v]).collect();
    let (w, s) = arena.zielonka(&live2);

    let mut win = vec![Player::Eva; n];
    let mut strat = vec![None; n];
    for v in 0..n {
        if ae[v] {
            win[v] = Player::Eva;
            strat[v] = if arena.owner[v] == Player::Eva {
                sae[v]
            } else {
                None
            };
        } else if aa[v] {
            win[v] = Player::Adam;
            strat[v] = if arena.owner[v] == Player::Adam {
                saa[v]
            } else {
                None
            };
        } else {
            win[v] = w[v].expect("total subgame is fully solved");
            strat[v] = if arena.owner[v] == win[v] { s[v] } else { None };
        }
    }

    let vs = g.vertices();
    let mut regions = WinningRegions {
        eva_region: BTreeSet::new(),
        adam_region: BTreeSet::new(),
        eva_strategy: BTreeMap::new(),
        adam_strategy: BTreeMap::new(),
    };
    for v in 0..n {
        if leaves[v].is_some() {
            continue;
        }
        let (region, strategy) = match win[v] {
            Player::Eva => (&mut regions.eva_region, &mut regions.eva_strategy),
            Player::Adam => (&mut regions.adam_region, &mut regions.adam_strategy),
        };
        region.insert(vs[v]);
        if let Some(e) = strat[v] {
            strategy.insert(vs[v], e);
        }
    }
    verify_regions(g, assumption, &regions).map_err(SolveError::SelfCheck)?;
    Ok(regions)
}

/// Checks that the regions partition the unlabelled vertices and that each
/// player's positional strategy wins from every vertex of their region:
/// every cycle consistent with it has a maximum priority of that player's
/// parity, and every reachable end of play is won.
pub fn verify_regions(
    g: &ParityGame,
    assumption: &BTreeMap<String, Outcome>,
    r: &WinningRegions,
) -> Result<(), String> {
    let leaves = leaf_outcomes(g, assumption).map_err(|e| e.to_string())?;
    let vs = g.vertices();
    for (i, &v) in vs.iter().enumerate() {
        let (e, a) = (r.eva_region.contains(&v), r.adam_region.contains(&v));
        match (leaves[i].is_some(), e, a) {
            (true, false, false) | (false, true, false) | (false, false, true) => {}
            _ => return Err(format!("vertex {v} is not covered exactly once")),
        }
    }
    for player in [Player::Eva, Player::Adam] {
        let (region, strategy) = match player {
            Player::Eva => (&r.eva_region, &r.eva_strategy),
            Player::Adam => (&r.adam_region, &r.adam_strategy),
        };
        let good = |i: usize| match leaves[i] {
            Some(o) => (o == Outcome::Win) == (player == Player::Eva),
            None => region.contains(&vs[i]),
        };
        let mut kept: Vec<Vec<usize>> = vec![Vec::new(); vs.len()];
        for (i, &v) in vs.iter().enumerate() {
            if !region.contains(&v) {
                continue;
            }
            let moves = g.moves(v);
            if moves.is_empty() {
                if g.owner(v) == player {
                    return Err(format!("{player} is stuck at {v} inside their region"));
                }
                continue;
            }
            if g.owner(v) == player {
                let e = strategy
                    .get(&v)
                    .ok_or_else(|| format!("{player} has no move at {v}"))?;
                let &(_, t) = moves
                    .iter()
                    .find(|(id, _)| id == e)
                    .ok_or_else(|| format!("strategy move {e} does not leave {v}"))?;
                let ti = g.graph().index_of(t).expect("valid edge");
                if !good(ti) {
                    return Err(format!("{player}'s move at {v} leaves the region"));
                }
                kept[i].push(ti);
            } else {
                for (_, t) in moves {
                    let ti = g.graph().index_of(t).expect("valid edge");
                    if !good(ti) {
                        return Err(format!("opponent escapes {player}'s region at {v}"));
                    }
                    kept[i].push(ti);
                }
            }
        }
        let bad_parity = match player {
            Player::Eva => 1,
            Player::Adam => 0,
        };
        let priorities: BTreeSet<u32> = vs.iter().map(|&v| g.priority(v)).collect();
        for &q in priorities.iter().filter(|&&q| q % 2 == bad_parity) {
            if let Some(v) = cycle_with_max(g, &kept, q) {
                return Err(format!(
                    "{player}'s strategy allows a cycle through {v} with maximum priority {q}"
                ));
            }
        }
    }
    Ok(())
}

/// A vertex of priority `q` on a cycle using only vertices of priority at most `q`.
fn cycle_with_max(g: &ParityGame, kept: &[Vec<usize>], q: u32) -> Option<VertexId> {
    let vs = g.vertices();
    let low = |i: usize| g.priority(vs[i]) <= q;
    let mut h = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..vs.len()).map(|i| h.add_node(i)).collect();
    for (i, ts) in kept.iter().enumerate() {
        for &t in ts {
            if low(i) && low(t) {
                h.add_edge(nodes[i], nodes[t], ());
            }
        }
    }
    for scc in tarjan_scc(&h) {
        let cyclic = scc.len() > 1 || kept[h[scc[0]]].iter().any(|&t| t == h[scc[0]]);
        if !cyclic {
            continue;
        }
        if let Some(&n) = scc.iter().find(|&&n| g.priority(vs[h[n]]) == q) {
            return Some(vs[h[n]]);
        }
    }
    None
}
