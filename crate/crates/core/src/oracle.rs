//! Counting Eva's deterministic winning strategies through their finite
//! prefixes.
//!
//! A depth-`d` prefix fixes one move at every Eva history of length below
//! `d` that it can reach, and keeps every Adam move. It is
//! winning-extendable when every play that ends inside it ends at an Adam
//! dead end and every history of length `d` stops in Eva's winning region.
//! Parity is prefix-independent and branches that have separated can be
//! continued independently, so such a prefix extends to a winning strategy
//! and every winning strategy truncates to one. The counts therefore grow
//! monotonically to the number of winning strategies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::game::{zielonka_solve, ParityGame, Player, SolveError};
use crate::graph::{EdgeId, Path, VertexId};

/// Prefix counts above this are refused rather than approximated.
pub const COUNT_LIMIT: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("the game has variable leaves; counting needs a closed game")]
    Open,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("more than {limit} prefixes at depth {depth}")]
    TooLarge { depth: usize, limit: u128 },
    #[error("the game has a cycle through {0}; full strategies cannot be enumerated")]
    Cyclic(VertexId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Stabilization {
    Finite(u128),
    NotStabilized(Vec<u128>),
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stabilization::Finite(n) => write!(f, "finite({n})"),
            Stabilization::NotStabilized(tail) => write!(f, "not stabilized {tail:?}"),
        }
    }
}

struct Counter<'a> {
    g: &'a ParityGame,
    winning: Vec<bool>,
    succ: Vec<Vec<usize>>,
    init: usize,
}

impl<'a> Counter<'a> {
    fn new(g: &'a ParityGame) -> Result<Self, OracleError> {
        if !g.is_closed() {
            return Err(OracleError::Open);
        }
        let regions = zielonka_solve(g, &BTreeMap::new())?;
        let vs = g.vertices();
        let graph = g.graph();
        Ok(Counter {
            g,
            winning: vs.iter().map(|v| regions.eva_region.contains(v)).collect(),
            succ: (0..vs.len())
                .map(|i| graph.successors_of_index(i).collect())
                .collect(),
            init: graph
                .index_of(g.initial().expect("validated"))
                .expect("vertex"),
        })
    }

    fn base(&self) -> Vec<u128> {
        self.winning.iter().map(|&w| w as u128).collect()
    }

    fn step(&self, prev: &[u128]) -> Vec<u128> {
        let vs = self.g.vertices();
        (0..vs.len())
            .map(|i| {
                let owner = self.g.owner(vs[i]);
                if self.succ[i].is_empty() {
                    return (owner == Player::Adam) as u128;
                }
                match owner {
                    Player::Eva => self.succ[i]
                        .iter()
                        .fold(0u128, |acc, &t| acc.saturating_add(prev[t])),
                    Player::Adam => self.succ[i]
                        .iter()
                        .fold(1u128, |acc, &t| acc.saturating_mul(prev[t])),
                }
            })
            .collect()
    }

    /// Positions reachable from the initial one without leaving Eva's region
    /// through her own moves.
    fn relevant(&self) -> Vec<usize> {
        let mut seen = vec![false; self.winning.len()];
        let mut stack = Vec::new();
        if self.winning[self.init] {
            stack.push(self.init);
        }
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(self.succ[v].iter().copied().filter(|&t| self.winning[t]));
        }
        (0..seen.len()).filter(|&v| seen[v]).collect()
    }

    fn check(&self, counts: &[u128], depth: usize) -> Result<u128, OracleError> {
        let c = counts[self.init];
        if c > COUNT_LIMIT {
            Err(OracleError::TooLarge {
                depth,
                limit: COUNT_LIMIT,
            })
        } else {
            Ok(c)
        }
    }
}

/// Number of winning-extendable depth-`depth` prefixes from the initial position.
pub fn count_prefixes(g: &ParityGame, depth: usize) -> Result<u128, OracleError> {
    Ok(*count_sequence(g, depth)?.last().expect("nonempty"))
}

/// `count_prefixes(g, d)` for `d = 0..=max_depth`.
pub fn count_sequence(g: &ParityGame, max_depth: usize) -> Result<Vec<u128>, OracleError> {
    let c = Counter::new(g)?;
    let mut counts = c.base();
    let mut out = vec![c.check(&counts, 0)?];
    for d in 1..=max_depth {
        counts = c.step(&counts);
        out.push(c.check(&counts, d)?);
    }
    Ok(out)
}

/// Detects when the prefix counts have stopped growing for good: the count
/// of every relevant position is the same at two consecutive depths, so the
/// truncation maps are bijections from there on.
pub fn stabilized_count(g: &ParityGame, max_depth: usize) -> Result<Stabilization, OracleError> {
    let c = Counter::new(g)?;
    let relevant = c.relevant();
    let mut counts = c.base();
    let mut history = vec![c.check(&counts, 0)?];
    for d in 1..=max_depth {
        let next = c.step(&counts);
        history.push(c.check(&next, d)?);
        let saturated = relevant.iter().any(|&v| next[v] == u128::MAX);
        if !saturated && relevant.iter().all(|&v| next[v] == counts[v]) {
            return Ok(Stabilization::Finite(next[c.init]));
        }
        counts = next;
    }
    let tail = history.len().saturating_sub(4);
    Ok(Stabilization::NotStabilized(history[tail..].to_vec()))
}

/// A depth-bounded deterministic strategy prefix: one move at each reached
/// Eva history shorter than `depth`, all moves at Adam histories.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrategyPrefixTree {
    root: VertexId,
    depth: usize,
    choices: BTreeMap<Path, EdgeId>,
}

impl StrategyPrefixTree {
    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn choices(&self) -> &BTreeMap<Path, EdgeId> {
        &self.choices
    }

    /// The prefix cut down to depth `d ≤ depth`.
    pub fn truncate(&self, d: usize) -> StrategyPrefixTree {
        assert!(d <= self.depth);
        StrategyPrefixTree {
            root: self.root,
            depth: d,
            choices: self
                .choices
                .iter()
                .filter(|(h, _)| h.len() < d)
                .map(|(h, e)| (h.clone(), *e))
                .collect(),
        }
    }

    /// Every history of the prefix, in order.
    pub fn histories(&self, g: &ParityGame) -> Vec<Path> {
        let mut out = Vec::new();
        let mut stack = vec![Path::identity(self.root)];
        while let Some(h) = stack.pop() {
            if h.len() < self.depth {
                let v = h.end();
                let moves: Vec<EdgeId> = match g.owner(v) {
                    Player::Eva => self.choices.get(&h).copied().into_iter().collect(),
                    Player::Adam => g.moves(v).into_iter().map(|(e, _)| e).collect(),
                };
                for e in moves.into_iter().rev() {
                    let mut next = h.clone();
                    next.push(g.graph(), e).expect("move of the game");
                    stack.push(next);
                }
            }
            out.push(h);
        }
        out.sort();
        out
    }
}

type ChoiceMaps = Vec<BTreeMap<Path, EdgeId>>;

struct Enumerator<'a> {
    g: &'a ParityGame,
    leaf_ok: &'a dyn Fn(VertexId) -> bool,
    limit: usize,
}

impl Enumerator<'_> {
    fn go(&self, h: &Path, remaining: Option<usize>) -> Result<ChoiceMaps, OracleError> {
        let v = h.end();
        if remaining == Some(0) {
            return Ok(if (self.leaf_ok)(v) {
                vec![BTreeMap::new()]
            } else {
                Vec::new()
            });
        }
        let moves = self.g.moves(v);
        if moves.is_empty() {
            return Ok(if self.g.owner(v) == Player::Adam {
                vec![BTreeMap::new()]
            } else {
                Vec::new()
            });
        }
        let rest = remaining.map(|r| r - 1);
        let extend = |e: EdgeId| -> Result<ChoiceMaps, OracleError> {
            let mut next = h.clone();
            next.push(self.g.graph(), e).expect("move of the game");
            self.go(&next, rest)
        };
        let mut out: ChoiceMaps = Vec::new();
        match self.g.owner(v) {
            Player::Eva => {
                for (e, _) in moves {
                    for mut m in extend(e)? {
                        m.insert(h.clone(), e);
                        out.push(m);
                        self.guard(out.len(), h.len())?;
                    }
                }
            }
            Player::Adam => {
                out.push(BTreeMap::new());
                for (e, _) in moves {
                    let subs = extend(e)?;
                    let mut merged = Vec::new();
                    for base in &out {
                        for s in &subs {
                            let mut m = base.clone();
                            m.extend(s.iter().map(|(k, v)| (k.clone(), *v)));
                            merged.push(m);
                            self.guard(merged.len(), h.len())?;
                        }
                    }
                    out = merged;
                }
            }
        }
        Ok(out)
    }

    fn guard(&self, n: usize, depth: usize) -> Result<(), OracleError> {
        if n > self.limit {
            Err(OracleError::TooLarge {
                depth,
                limit: self.limit as u128,
            })
        } else {
            Ok(())
        }
    }
}

/// Every winning-extendable depth-`depth` prefix, listed explicitly.
pub fn enumerate_prefixes(
    g: &ParityGame,
    depth: usize,
    limit: usize,
) -> Result<Vec<StrategyPrefixTree>, OracleError> {
    if !g.is_closed() {
        return Err(OracleError::Open);
    }
    let regions = zielonka_solve(g, &BTreeMap::new())?;
    let root = g.initial().expect("validated");
    let leaf_ok = |v: VertexId| regions.eva_region.contains(&v);
    let en = Enumerator {
        g,
        leaf_ok: &leaf_ok,
        limit,
    };
    let mut out: Vec<StrategyPrefixTree> = en
        .go(&Path::identity(root), Some(depth))?
        .into_iter()
        .map(|choices| StrategyPrefixTree {
            root,
            depth,
            choices,
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Complete winning strategies of an acyclic game, enumerated without
/// reference to any solver: every play must end at an Adam dead end.
pub fn enumerate_full_strategies(
    g: &ParityGame,
    limit: usize,
) -> Result<Vec<StrategyPrefixTree>, OracleError> {
    if !g.is_closed() {
        return Err(OracleError::Open);
    }
    g.validate()
        .map_err(|d| OracleError::Solve(SolveError::Invalid(d)))?;
    if let Some(v) = find_cycle(g) {
        return Err(OracleError::Cyclic(v));
    }
    let root = g.initial().expect("validated");
    let never = |_: VertexId| false;
    let en = Enumerator {
        g,
        leaf_ok: &never,
        limit,
    };
    let depth = g.vertex_count();
    let mut out: Vec<StrategyPrefixTree> = en
        .go(&Path::identity(root), None)?
        .into_iter()
        .map(|choices| StrategyPrefixTree {
            root,
            depth,
            choices,
        })
        .collect();
    out.sort();
    Ok(out)
}

fn find_cycle(g: &ParityGame) -> Option<VertexId> {
    let graph = g.graph();
    let n = graph.vertex_count();
    // 0 unvisited, 1 on the stack, 2 done
    let mut state = vec![0u8; n];
    for s in 0..n {
        if state[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, graph.successors_of_index(s).collect::<Vec<_>>(), 0usize)];
        state[s] = 1;
        while let Some((v, succ, k)) = stack.last_mut() {
            if *k < succ.len() {
                let t = succ[*k];
                *k += 1;
                match state[t] {
                    0 => {
                        state[t] = 1;
                        let next: Vec<usize> = graph.successors_of_index(t).collect();
                        stack.push((t, next, 0));
                    }
                    1 => return Some(graph.vertices()[t]),
                    _ => {}
                }
            } else {
                state[*v] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Whether every play from the initial position is finite.
pub fn is_acyclic(g: &ParityGame) -> bool {
    let reach: BTreeSet<VertexId> = g.reachable();
    find_cycle(&g.restrict(&reach)).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::parse_pg;

    #[test]
    fn adam_loop_has_one_prefix() {
        let g = parse_pg("0 0 1 0;\n").unwrap();
        assert_eq!(count_sequence(&g, 5).unwrap(), vec![1; 6]);
        assert_eq!(stabilized_count(&g, 12).unwrap(), Stabilization::Finite(1));
    }

    #[test]
    fn counting_game_grows_linearly() {
        let g = parse_pg("0 1 0 1,0;\n1 0 1;\n").unwrap();
        assert_eq!(count_sequence(&g, 5).unwrap(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(
            stabilized_count(&g, 12).unwrap(),
            Stabilization::NotStabilized(vec![10, 11, 12, 13])
        );
    }

    #[test]
    fn losing_loop_has_none() {
        let g = parse_pg("0 1 0 0;\n").unwrap();
        assert_eq!(count_sequence(&g, 4).unwrap(), vec![0; 5]);
        assert_eq!(stabilized_count(&g, 12).unwrap(), Stabilization::Finite(0));
    }

    #[test]
    fn adam_only_games_match_the_winner() {
        let g = parse_pg("0 0 1 1,2;\n1 2 1 0;\n2 1 1 2;\n").unwrap();
        assert_eq!(stabilized_count(&g, 12).unwrap(), Stabilization::Finite(0));
        let g = parse_pg("0 0 1 1,2;\n1 2 1 0;\n2 2 1 2;\n").unwrap();
        assert_eq!(stabilized_count(&g, 12).unwrap(), Stabilization::Finite(1));
    }

    #[test]
    fn explicit_prefixes_agree_with_counts() {
        let g = parse_pg("0 1 0 1,0,2;\n1 0 1 2,0;\n2 2 0 2,0;\n").unwrap();
        let counts = count_sequence(&g, 4).unwrap();
        for d in 0..=4 {
            let trees = enumerate_prefixes(&g, d, 100_000).unwrap();
            assert_eq!(trees.len() as u128, counts[d]);
            if d > 0 {
                let shorter = enumerate_prefixes(&g, d - 1, 100_000).unwrap();
                let image: BTreeSet<_> = trees.iter().map(|t| t.truncate(d - 1)).collect();
                assert_eq!(image, shorter.into_iter().collect());
            }
        }
    }

    #[test]
    fn full_strategies_of_an_acyclic_game() {
        // Eva picks one of two Adam positions; each offers two Eva choices.
        let g =
            parse_pg("0 0 0 1,2;\n1 0 1 3,4;\n2 0 1 3;\n3 0 0 5,5,6;\n4 0 0 6;\n5 0 1;\n6 0 0;\n")
                .unwrap();
        assert!(is_acyclic(&g));
        let all = enumerate_full_strategies(&g, 1000).unwrap();
        // 1 -> 3 (2 ways) and 4 (dead for Eva); 2 -> 3 (2 ways)
        assert_eq!(all.len(), 2);
        assert_eq!(stabilized_count(&g, 12).unwrap(), Stabilization::Finite(2));
        let cyclic = parse_pg("0 0 0 0;\n").unwrap();
        assert!(matches!(
            enumerate_full_strategies(&cyclic, 10),
            Err(OracleError::Cyclic(_))
        ));
    }

    #[test]
    fn open_games_are_refused() {
        let g = parse_pg("0 0 0 1;\n1 0 0 \"var:X\";\n").unwrap();
        assert_eq!(count_prefixes(&g, 1), Err(OracleError::Open));
    }
}
