#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use parity_mu::game::{ParityGame, Player, WinningRegions};
use parity_mu::graph::{EdgeId, VertexId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Dense {
    ids: Vec<VertexId>,
    owner: Vec<Player>,
    prio: Vec<u32>,
    succ: Vec<Vec<(EdgeId, usize)>>,
}

fn dense(g: &ParityGame) -> Dense {
    let ids = g.vertices().to_vec();
    let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    Dense {
        owner: ids.iter().map(|&v| g.owner(v)).collect(),
        prio: ids.iter().map(|&v| g.priority(v)).collect(),
        succ: ids
            .iter()
            .map(|&v| {
                g.moves(v)
                    .into_iter()
                    .map(|(e, t)| (e, index[&t]))
                    .collect()
            })
            .collect(),
        ids,
    }
}

/// Vertices from which the opponent of `p` wins once `p` is bound to the
/// positional choice `choice` (an index into each own vertex's moves).
fn opponent_wins(d: &Dense, p: Player, choice: &[usize]) -> Vec<bool> {
    let n = d.ids.len();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            if d.owner[v] == p && !d.succ[v].is_empty() {
                vec![d.succ[v][choice[v]].1]
            } else {
                d.succ[v].iter().map(|&(_, t)| t).collect()
            }
        })
        .collect();
    let mut bad: Vec<bool> = (0..n)
        .map(|v| d.owner[v] == p && d.succ[v].is_empty())
        .collect();
    for u in 0..n {
        let q = d.prio[u];
        if Player::of_priority(q) == p {
            continue;
        }
        // Is u on a cycle through vertices of priority at most q?
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = succ[u]
            .iter()
            .copied()
            .filter(|&t| d.prio[t] <= q)
            .collect();
        while let Some(v) = stack.pop() {
            if v == u {
                bad[u] = true;
                break;
            }
            if std::mem::replace(&mut seen[v], true) {
                continue;
            }
            stack.extend(succ[v].iter().copied().filter(|&t| d.prio[t] <= q));
        }
    }
    (0..n)
        .map(|s| {
            let mut seen = vec![false; n];
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                if bad[v] {
                    return true;
                }
                if !std::mem::replace(&mut seen[v], true) {
                    stack.extend(&succ[v]);
                }
            }
            false
        })
        .collect()
}

/// Vertices where `p` has a positional strategy that the opponent cannot beat,
/// found by trying every positional strategy of `p`.
fn brute_region(d: &Dense, p: Player) -> BTreeSet<VertexId> {
    let n = d.ids.len();
    let own: Vec<usize> = (0..n)
        .filter(|&v| d.owner[v] == p && !d.succ[v].is_empty())
        .collect();
    let mut choice = vec![0; n];
    let mut won = vec![false; n];
    loop {
        let lost = opponent_wins(d, p, &choice);
        for v in 0..n {
            won[v] |= !lost[v];
        }
        // Next strategy in mixed radix.
        let mut k = 0;
        loop {
            if k == own.len() {
                return (0..n).filter(|&v| won[v]).map(|v| d.ids[v]).collect();
            }
            let v = own[k];
            choice[v] += 1;
            if choice[v] < d.succ[v].len() {
                break;
            }
            choice[v] = 0;
            k += 1;
        }
    }
}

/// Winning regions of a closed game by exhaustive positional strategies.
pub fn brute_force_regions(g: &ParityGame) -> (BTreeSet<VertexId>, BTreeSet<VertexId>) {
    let d = dense(g);
    (
        brute_region(&d, Player::Eva),
        brute_region(&d, Player::Adam),
    )
}

/// Whether the solver's positional strategies win everywhere in the claimed regions.
pub fn strategies_win(g: &ParityGame, r: &WinningRegions) -> bool {
    let d = dense(g);
    [
        (Player::Eva, &r.eva_strategy, &r.eva_region),
        (Player::Adam, &r.adam_strategy, &r.adam_region),
    ]
    .into_iter()
    .all(|(p, strat, region)| {
        let choice: Vec<usize> = (0..d.ids.len())
            .map(|v| {
                strat
                    .get(&d.ids[v])
                    .and_then(|e| d.succ[v].iter().position(|(f, _)| f == e))
                    .unwrap_or(0)
            })
            .collect();
        let lost = opponent_wins(&d, p, &choice);
        (0..d.ids.len()).all(|v| !region.contains(&d.ids[v]) || !lost[v])
    })
}
