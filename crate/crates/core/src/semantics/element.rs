//! Canonical element trees.
//!
//! Elements of least fixed points are finite trees with `Fold` nodes.
//! Elements of greatest fixed points are possibly infinite but regular
//! trees; each is stored as the minimal graph of its unfolding, with a
//! `Layer` node per ν-unfolding and nodes numbered breadth-first from the
//! root. Equal behaviours therefore have equal representations, however
//! and in whichever environment they were computed.

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde_json::{json, Value};

#[derive(Clone)]
pub struct Element(Arc<Inner>);

struct Inner {
    tree: ElementTree,
    hash: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementTree {
    /// Element `id` of the parameter set `set`.
    Atom {
        set: Arc<str>,
        id: u32,
    },
    Tuple(Vec<Element>),
    Inj(u32, Element),
    /// The structure map of an initial algebra applied to an element.
    Fold(Element),
    /// An element of a final coalgebra.
    Nu(Arc<NuGraph>),
    /// Placeholder for the single element of the first stage of a
    /// greatest-fixed-point iteration.
    Hole {
        token: u64,
        index: u32,
    },
}

/// A minimal graph whose node 0 is a `Layer`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NuGraph {
    pub(crate) nodes: Vec<GNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GNode {
    Atom { set: Arc<str>, id: u32 },
    Hole { token: u64, index: u32 },
    Tuple(Vec<u32>),
    Inj(u32, u32),
    Fold(u32),
    Layer(u32),
}

impl Element {
    fn make(tree: ElementTree) -> Element {
        let mut h = DefaultHasher::new();
        tree.hash(&mut h);
        Element(Arc::new(Inner {
            tree,
            hash: h.finish(),
        }))
    }

    pub fn atom(set: &str, id: u32) -> Element {
        Self::make(ElementTree::Atom {
            set: Arc::from(set),
            id,
        })
    }

    pub(crate) fn atom_shared(set: Arc<str>, id: u32) -> Element {
        Self::make(ElementTree::Atom { set, id })
    }

    pub fn tuple(items: Vec<Element>) -> Element {
        Self::make(ElementTree::Tuple(items))
    }

    pub fn inj(i: u32, e: Element) -> Element {
        Self::make(ElementTree::Inj(i, e))
    }

    pub fn fold(e: Element) -> Element {
        Self::make(ElementTree::Fold(e))
    }

    pub(crate) fn hole(token: u64, index: u32) -> Element {
        Self::make(ElementTree::Hole { token, index })
    }

    pub(crate) fn nu(g: Arc<NuGraph>) -> Element {
        debug_assert!(matches!(g.nodes.first(), Some(GNode::Layer(_))));
        Self::make(ElementTree::Nu(g))
    }

    pub fn tree(&self) -> &ElementTree {
        &self.0.tree
    }

    pub fn ptr_eq(&self, other: &Element) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn cached_hash(&self) -> u64 {
        self.0.hash
    }

    /// Number of constructor nodes (graph nodes for ν-elements).
    pub fn size(&self) -> usize {
        match self.tree() {
            ElementTree::Atom { .. } | ElementTree::Hole { .. } => 1,
            ElementTree::Tuple(xs) => 1 + xs.iter().map(Element::size).sum::<usize>(),
            ElementTree::Inj(_, x) | ElementTree::Fold(x) => 1 + x.size(),
            ElementTree::Nu(g) => g.nodes.len(),
        }
    }

    /// Nested tagged arrays, e.g. `["inj", 1, ["tuple"]]`.
    pub fn to_json(&self) -> Value {
        match self.tree() {
            ElementTree::Atom { set, id } => json!(["atom", &**set, id]),
            ElementTree::Tuple(xs) => {
                let mut v = vec![json!("tuple")];
                v.extend(xs.iter().map(Element::to_json));
                Value::Array(v)
            }
            ElementTree::Inj(i, x) => json!(["inj", i, x.to_json()]),
            ElementTree::Fold(x) => json!(["fold", x.to_json()]),
            ElementTree::Nu(g) => json!(["nu", g.to_json()]),
            ElementTree::Hole { token, index } => json!(["hole", token, index]),
        }
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || (self.0.hash == other.0.hash && self.0.tree == other.0.tree)
    }
}

impl Eq for Element {}

impl Hash for Element {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.ptr_eq(other) {
            Ordering::Equal
        } else {
            self.0.tree.cmp(&other.0.tree)
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tree() {
            ElementTree::Atom { set, id } => write!(f, "{set}.{id}"),
            ElementTree::Tuple(xs) => {
                f.write_str("(")?;
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            ElementTree::Inj(i, x) => write!(f, "in{i}({x})"),
            ElementTree::Fold(x) => write!(f, "fold({x})"),
            ElementTree::Nu(g) => write!(f, "{g}"),
            ElementTree::Hole { .. } => f.write_str("*"),
        }
    }
}

impl GNode {
    pub(crate) fn children(&self) -> Vec<u32> {
        match self {
            GNode::Atom { .. } | GNode::Hole { .. } => Vec::new(),
            GNode::Tuple(xs) => xs.clone(),
            GNode::Inj(_, x) | GNode::Fold(x) | GNode::Layer(x) => vec![*x],
        }
    }

    fn map_children(&self, f: impl Fn(u32) -> u32) -> GNode {
        match self {
            GNode::Tuple(xs) => GNode::Tuple(xs.iter().map(|&x| f(x)).collect()),
            GNode::Inj(i, x) => GNode::Inj(*i, f(*x)),
            GNode::Fold(x) => GNode::Fold(f(*x)),
            GNode::Layer(x) => GNode::Layer(f(*x)),
            leaf => leaf.clone(),
        }
    }
}

impl NuGraph {
    pub fn nodes(&self) -> &[GNode] {
        &self.nodes
    }

    /// Renumbers the part reachable from `start` breadth-first.
    pub(crate) fn from_reachable(nodes: &[GNode], start: u32) -> NuGraph {
        let mut order = vec![start];
        let mut index: HashMap<u32, u32> = HashMap::from([(start, 0)]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for c in nodes[v as usize].children() {
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(c) {
                    e.insert(order.len() as u32);
                    order.push(c);
                    queue.push_back(c);
                }
            }
        }
        NuGraph {
            nodes: order
                .iter()
                .map(|&v| nodes[v as usize].map_children(|c| index[&c]))
                .collect(),
        }
    }

    /// The element whose unfolding starts at node `idx`.
    pub(crate) fn element_at(self: &Arc<Self>, idx: u32) -> Element {
        let mut memo = HashMap::new();
        self.element_at_memo(idx, &mut memo)
    }

    fn element_at_memo(self: &Arc<Self>, idx: u32, memo: &mut HashMap<u32, Element>) -> Element {
        if let Some(e) = memo.get(&idx) {
            return e.clone();
        }
        let e = match &self.nodes[idx as usize] {
            GNode::Layer(_) if idx == 0 => Element::nu(self.clone()),
            GNode::Layer(_) => Element::nu(Arc::new(NuGraph::from_reachable(&self.nodes, idx))),
            GNode::Atom { set, id } => Element::atom_shared(set.clone(), *id),
            GNode::Hole { token, index } => Element::hole(*token, *index),
            GNode::Tuple(xs) => {
                Element::tuple(xs.iter().map(|&x| self.element_at_memo(x, memo)).collect())
            }
            GNode::Inj(i, x) => Element::inj(*i, self.element_at_memo(*x, memo)),
            GNode::Fold(x) => Element::fold(self.element_at_memo(*x, memo)),
        };
        memo.insert(idx, e.clone());
        e
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.nodes
                .iter()
                .map(|n| match n {
                    GNode::Atom { set, id } => json!(["atom", &**set, id]),
                    GNode::Hole { token, index } => json!(["hole", token, index]),
                    GNode::Tuple(xs) => {
                        let mut v = vec![json!("tuple")];
                        v.extend(xs.iter().map(|x| json!(x)));
                        Value::Array(v)
                    }
                    GNode::Inj(i, x) => json!(["inj", i, x]),
                    GNode::Fold(x) => json!(["fold", x]),
                    GNode::Layer(x) => json!(["layer", x]),
                })
                .collect(),
        )
    }
}

impl fmt::Display for NuGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("nu{")?;
        for (k, n) in self.nodes.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            match n {
                GNode::Atom { set, id } => write!(f, "{k}={set}.{id}")?,
                GNode::Hole { .. } => write!(f, "{k}=*")?,
                GNode::Tuple(xs) => write!(f, "{k}={xs:?}")?,
                GNode::Inj(i, x) => write!(f, "{k}=in{i}@{x}")?,
                GNode::Fold(x) => write!(f, "{k}=fold@{x}")?,
                GNode::Layer(x) => write!(f, "{k}=layer@{x}")?,
            }
        }
        f.write_str("}")
    }
}
