//! Hash-consed, nameless form of terms.
//!
//! A compiled node sees only the bound variables that occur free in it, as
//! a short environment in order of first occurrence. Each edge carries the
//! positions in the parent's environment that make up the child's, so a
//! subterm shared under many different binders compiles to one node.

use std::collections::HashMap;

use crate::term::syntax::{free_list, FreeMemo};
use crate::term::{FixKind, MuTerm, TermNode};

pub(crate) type NodeId = u32;

type MemoKey = (usize, Vec<Option<usize>>);

/// A child together with where its environment comes from. Under a binder
/// the parent's environment is extended by the bound variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Edge {
    pub(crate) node: NodeId,
    pub(crate) map: Vec<u32>,
}

impl Edge {
    pub(crate) fn select<T: Clone>(&self, env: &[T]) -> Vec<T> {
        self.map.iter().map(|&i| env[i as usize].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) enum CNode {
    Free(u32),
    /// The only variable of its one-entry environment.
    Bound,
    Prod(Vec<Edge>),
    Coprod(Vec<Edge>),
    Fix(FixKind, Edge),
}

/// A compiled term together with the scope positions of its environment.
#[derive(Clone, Debug)]
pub(crate) struct Root {
    pub(crate) node: NodeId,
    pub(crate) caps: Vec<usize>,
}

impl Root {
    pub(crate) fn select<T: Clone>(&self, scope_env: &[T]) -> Vec<T> {
        self.caps.iter().map(|&i| scope_env[i].clone()).collect()
    }
}

#[derive(Default)]
pub(crate) struct Dag {
    nodes: Vec<CNode>,
    arity: Vec<u32>,
    hint: Vec<String>,
    index: HashMap<(CNode, u32), NodeId>,
    names: Vec<String>,
    name_index: HashMap<String, u32>,
    /// Keyed by node and by where each of its free variables is bound.
    memo: HashMap<MemoKey, (NodeId, Vec<String>, MuTerm)>,
    free: FreeMemo,
}

impl Dag {
    pub(crate) fn node(&self, n: NodeId) -> &CNode {
        &self.nodes[n as usize]
    }

    /// Length of the node's environment.
    pub(crate) fn arity(&self, n: NodeId) -> usize {
        self.arity[n as usize] as usize
    }

    /// Binder name of a `Fix` node, for messages.
    pub(crate) fn hint(&self, n: NodeId) -> &str {
        &self.hint[n as usize]
    }

    pub(crate) fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub(crate) fn name_count(&self) -> usize {
        self.names.len()
    }

    fn intern(&mut self, n: CNode, arity: usize, hint: &str) -> NodeId {
        let key = (n, arity as u32);
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(key.0.clone());
        self.arity.push(key.1);
        self.hint.push(hint.to_string());
        self.index.insert(key, id);
        id
    }

    fn free_name(&mut self, x: &str) -> u32 {
        if let Some(&i) = self.name_index.get(x) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(x.to_string());
        self.name_index.insert(x.to_string(), i);
        i
    }

    /// Compiles `t` with `scope` as the bound variables, outermost first.
    pub(crate) fn compile(&mut self, t: &MuTerm, scope: &[String]) -> Root {
        let mut scope = scope.to_vec();
        let (node, caps) = self.go(t, &mut scope);
        let caps = caps
            .iter()
            .map(|x| {
                scope
                    .iter()
                    .rposition(|y| y == x)
                    .expect("captured names are in scope")
            })
            .collect();
        Root { node, caps }
    }

    /// Returns the node and the names of its environment.
    fn go(&mut self, t: &MuTerm, scope: &mut Vec<String>) -> (NodeId, Vec<String>) {
        let fl = free_list(t, &mut self.free);
        let binding: Vec<Option<usize>> = fl
            .iter()
            .map(|x| scope.iter().rposition(|y| y == x).map(|p| scope.len() - p))
            .collect();
        let key = (t.ptr_id(), binding);
        if let Some((id, caps, _)) = self.memo.get(&key) {
            return (*id, caps.clone());
        }
        let caps: Vec<String> = fl
            .iter()
            .zip(&key.1)
            .filter(|(_, b)| b.is_some())
            .map(|(x, _)| x.clone())
            .collect();
        let position = |caps: &[String], x: &String| {
            caps.iter().position(|y| y == x).expect("captured") as u32
        };
        let id = match t.node() {
            TermNode::Var(x) => {
                if caps.is_empty() {
                    let f = self.free_name(x);
                    self.intern(CNode::Free(f), 0, "")
                } else {
                    self.intern(CNode::Bound, 1, "")
                }
            }
            TermNode::Prod(ts) | TermNode::Coprod(ts) => {
                let mut edges = Vec::with_capacity(ts.len());
                for c in ts {
                    let (node, ccaps) = self.go(c, scope);
                    let map = ccaps.iter().map(|x| position(&caps, x)).collect();
                    edges.push(Edge { node, map });
                }
                let n = if matches!(t.node(), TermNode::Prod(_)) {
                    CNode::Prod(edges)
                } else {
                    CNode::Coprod(edges)
                };
                self.intern(n, caps.len(), "")
            }
            TermNode::Fix(kind, x, body) => {
                scope.push(x.clone());
                let (node, bcaps) = self.go(body, scope);
                scope.pop();
                let map = bcaps
                    .iter()
                    .map(|y| {
                        if y == x {
                            caps.len() as u32
                        } else {
                            position(&caps, y)
                        }
                    })
                    .collect();
                self.intern(CNode::Fix(*kind, Edge { node, map }), caps.len(), x)
            }
        };
        // Keep the term alive so its address is not reused.
        self.memo.insert(key, (id, caps.clone(), t.clone()));
        (id, caps)
    }
}
