//! Exact emptiness and finiteness of fixed-point terms.
//!
//! Only the sizes 0, 1 and "at least 2" of the environment matter. A term
//! denotes an infinite set exactly when some binder can be unfolded along
//! an inhabited path arbitrarily often and that path can branch, either at
//! a sum with two inhabited summands or at a variable with two elements.

use std::collections::HashMap;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use super::compile::{CNode, Dag, NodeId};
use crate::term::FixKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Finiteness {
    Empty,
    NonemptyFinite,
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    pub verdict: Finiteness,
    /// For `Infinite`: the binder that unfolds unboundedly and the branching it reaches.
    pub certificate: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Slot {
    Binder(u32),
    Ext(u8),
}

#[derive(Default)]
pub(crate) struct Analyzer {
    inh: HashMap<(NodeId, Vec<bool>), bool>,
    results: HashMap<(NodeId, Vec<u8>), Analysis>,
}

pub(crate) fn clamp(n: usize) -> u8 {
    n.min(2) as u8
}

impl Analyzer {
    /// Whether `node` is inhabited; `env` gives inhabitation of its environment.
    pub(crate) fn inhabited(&mut self, dag: &Dag, free: &[u8], node: NodeId, env: &[bool]) -> bool {
        if let Some(&b) = self.inh.get(&(node, env.to_vec())) {
            return b;
        }
        let b = match dag.node(node) {
            CNode::Free(n) => free[*n as usize] > 0,
            CNode::Bound => env[0],
            CNode::Prod(cs) => cs
                .iter()
                .all(|c| self.inhabited(dag, free, c.node, &c.select(env))),
            CNode::Coprod(cs) => cs
                .iter()
                .any(|c| self.inhabited(dag, free, c.node, &c.select(env))),
            CNode::Fix(kind, body) => {
                let mut v = *kind == FixKind::Nu;
                let mut inner = env.to_vec();
                inner.push(v);
                loop {
                    *inner.last_mut().expect("pushed") = v;
                    let next = self.inhabited(dag, free, body.node, &body.select(&inner));
                    if next == v {
                        break v;
                    }
                    v = next;
                }
            }
        };
        self.inh.insert((node, env.to_vec()), b);
        b
    }

    /// `env` holds the clamped sizes of the node's environment.
    pub(crate) fn analyze(&mut self, dag: &Dag, free: &[u8], node: NodeId, env: &[u8]) -> Analysis {
        if let Some(a) = self.results.get(&(node, env.to_vec())) {
            return a.clone();
        }
        let a = self.explore(dag, free, node, env);
        self.results.insert((node, env.to_vec()), a.clone());
        a
    }

    fn explore(&mut self, dag: &Dag, free: &[u8], root: NodeId, env: &[u8]) -> Analysis {
        let mut ex = Explorer {
            positions: Vec::new(),
            index: HashMap::new(),
            inhabited: Vec::new(),
            edges: Vec::new(),
            choice: Vec::new(),
        };
        let start = ex.intern(
            self,
            dag,
            free,
            root,
            env.iter().map(|&s| Slot::Ext(s)).collect(),
        );
        if !ex.inhabited[start as usize] {
            return Analysis {
                verdict: Finiteness::Empty,
                certificate: None,
            };
        }
        let mut next = 0;
        while next < ex.positions.len() {
            let p = next as u32;
            next += 1;
            if ex.inhabited[p as usize] {
                ex.expand(self, dag, free, p);
            }
        }

        let n = ex.positions.len();
        let mut g = DiGraph::<(), ()>::with_capacity(n, n);
        let ids: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for (s, ts) in ex.edges.iter().enumerate() {
            for &t in ts {
                g.add_edge(ids[s], ids[t as usize], ());
            }
        }
        // Positions from which some branching is reachable.
        let mut reaches: Vec<Option<usize>> = ex
            .choice
            .iter()
            .enumerate()
            .map(|(i, c)| c.as_ref().map(|_| i))
            .collect();
        let sccs = tarjan_scc(&g);
        // tarjan_scc yields components in reverse topological order.
        for comp in &sccs {
            let mut found = comp.iter().find_map(|v| reaches[v.index()]);
            if found.is_none() {
                found = comp
                    .iter()
                    .flat_map(|v| ex.edges[v.index()].iter())
                    .find_map(|&t| reaches[t as usize]);
            }
            for v in comp {
                reaches[v.index()] = found;
            }
        }
        for comp in &sccs {
            let cyclic =
                comp.len() > 1 || ex.edges[comp[0].index()].contains(&(comp[0].index() as u32));
            if !cyclic {
                continue;
            }
            let Some(c) = reaches[comp[0].index()] else {
                continue;
            };
            let binder = comp
                .iter()
                .map(|v| ex.positions[v.index()].0)
                .find(|&node| matches!(dag.node(node), CNode::Fix(..)))
                .expect("every cycle passes a binder");
            let CNode::Fix(kind, _) = dag.node(binder) else {
                unreachable!()
            };
            return Analysis {
                verdict: Finiteness::Infinite,
                certificate: Some(format!(
                    "{} {} unfolds along an inhabited cycle that reaches {}",
                    kind.keyword(),
                    dag.hint(binder),
                    ex.choice[c].as_ref().expect("choice")
                )),
            };
        }
        Analysis {
            verdict: Finiteness::NonemptyFinite,
            certificate: None,
        }
    }
}

struct Explorer {
    positions: Vec<(NodeId, Vec<Slot>)>,
    index: HashMap<(NodeId, Vec<Slot>), u32>,
    inhabited: Vec<bool>,
    edges: Vec<Vec<u32>>,
    choice: Vec<Option<String>>,
}

impl Explorer {
    fn intern(
        &mut self,
        an: &mut Analyzer,
        dag: &Dag,
        free: &[u8],
        node: NodeId,
        env: Vec<Slot>,
    ) -> u32 {
        if let Some(&p) = self.index.get(&(node, env.clone())) {
            return p;
        }
        let bools: Vec<bool> = env
            .iter()
            .map(|s| match s {
                Slot::Binder(q) => self.inhabited[*q as usize],
                Slot::Ext(n) => *n > 0,
            })
            .collect();
        let inh = an.inhabited(dag, free, node, &bools);
        let p = self.positions.len() as u32;
        self.positions.push((node, env.clone()));
        self.index.insert((node, env), p);
        self.inhabited.push(inh);
        self.edges.push(Vec::new());
        self.choice.push(None);
        p
    }

    fn expand(&mut self, an: &mut Analyzer, dag: &Dag, free: &[u8], p: u32) {
        let (node, env) = self.positions[p as usize].clone();
        let pi = p as usize;
        match dag.node(node) {
            CNode::Free(n) => {
                if free[*n as usize] >= 2 {
                    self.choice[pi] = Some(format!(
                        "variable {} with at least two elements",
                        dag.name(*n)
                    ));
                }
            }
            CNode::Bound => match env[0] {
                Slot::Binder(q) => self.edges[pi].push(q),
                Slot::Ext(n) => {
                    if n >= 2 {
                        self.choice[pi] =
                            Some("an enclosing variable with at least two elements".into());
                    }
                }
            },
            CNode::Prod(cs) => {
                for c in cs {
                    let q = self.intern(an, dag, free, c.node, c.select(&env));
                    self.edges[pi].push(q);
                }
            }
            CNode::Coprod(cs) => {
                for c in cs {
                    let q = self.intern(an, dag, free, c.node, c.select(&env));
                    if self.inhabited[q as usize] {
                        self.edges[pi].push(q);
                    }
                }
                if self.edges[pi].len() >= 2 {
                    self.choice[pi] = Some(format!(
                        "a sum with {} inhabited summands",
                        self.edges[pi].len()
                    ));
                }
            }
            CNode::Fix(_, body) => {
                let mut inner = env.clone();
                inner.push(Slot::Binder(p));
                let q = self.intern(an, dag, free, body.node, body.select(&inner));
                self.edges[pi].push(q);
            }
        }
    }
}
