//! Construction of elements from possibly cyclic node graphs.
//!
//! The walker emits nodes into a [`Builder`]; cycles are closed through
//! pending `Layer` nodes. [`Builder::finish_many`] collapses bisimilar
//! nodes and cuts the result into canonical [`Element`]s.

use std::collections::HashMap;
use std::sync::Arc;

use super::element::{Element, ElementTree, GNode, NuGraph};

pub(crate) type BRef = u32;

#[derive(Clone, Debug)]
enum BNode {
    Ext(Element),
    Tuple(Vec<BRef>),
    Inj(u32, BRef),
    Fold(BRef),
    Layer(BRef),
    Pending,
}

#[derive(Default)]
pub(crate) struct Builder {
    nodes: Vec<BNode>,
}

/// A position inside an element: either a finite tree or a node of a graph.
#[derive(Clone, Debug)]
pub(crate) enum View {
    Tree(Element),
    Graph(Arc<NuGraph>, u32),
}

pub(crate) enum Shape {
    Leaf,
    Tuple(Vec<View>),
    Inj(u32, View),
    Fold(View),
    Layer(View),
}

impl View {
    pub(crate) fn new(e: &Element) -> View {
        match e.tree() {
            ElementTree::Nu(g) => View::Graph(g.clone(), 0),
            _ => View::Tree(e.clone()),
        }
    }

    pub(crate) fn shape(&self) -> Shape {
        match self {
            View::Tree(e) => match e.tree() {
                ElementTree::Atom { .. } | ElementTree::Hole { .. } => Shape::Leaf,
                ElementTree::Tuple(xs) => Shape::Tuple(xs.iter().map(View::new).collect()),
                ElementTree::Inj(i, x) => Shape::Inj(*i, View::new(x)),
                ElementTree::Fold(x) => Shape::Fold(View::new(x)),
                ElementTree::Nu(g) => View::Graph(g.clone(), 0).shape(),
            },
            View::Graph(g, i) => {
                let at = |j: u32| View::Graph(g.clone(), j);
                match &g.nodes[*i as usize] {
                    GNode::Atom { .. } | GNode::Hole { .. } => Shape::Leaf,
                    GNode::Tuple(xs) => Shape::Tuple(xs.iter().map(|&x| at(x)).collect()),
                    GNode::Inj(k, x) => Shape::Inj(*k, at(*x)),
                    GNode::Fold(x) => Shape::Fold(at(*x)),
                    GNode::Layer(x) => Shape::Layer(at(*x)),
                }
            }
        }
    }

    pub(crate) fn to_element(&self) -> Element {
        match self {
            View::Tree(e) => e.clone(),
            View::Graph(g, i) => g.element_at(*i),
        }
    }

    /// Identity of a graph position, used to tie cycles while walking.
    pub(crate) fn key(&self) -> (usize, u32) {
        match self {
            View::Graph(g, i) => (Arc::as_ptr(g) as usize, *i),
            View::Tree(e) => (e.cached_hash() as usize, u32::MAX),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Label {
    Atom(Arc<str>, u32),
    Hole(u64, u32),
    Tuple(usize),
    Inj(u32),
    Fold,
    Layer,
}

struct Flat {
    label: Vec<Label>,
    children: Vec<Vec<u32>>,
}

impl Flat {
    fn push(&mut self, label: Label, children: Vec<u32>) -> u32 {
        self.label.push(label);
        self.children.push(children);
        (self.label.len() - 1) as u32
    }
}

impl Builder {
    pub(crate) fn new() -> Builder {
        Builder::default()
    }

    fn push(&mut self, n: BNode) -> BRef {
        self.nodes.push(n);
        (self.nodes.len() - 1) as BRef
    }

    pub(crate) fn ext(&mut self, e: Element) -> BRef {
        self.push(BNode::Ext(e))
    }

    pub(crate) fn tuple(&mut self, xs: Vec<BRef>) -> BRef {
        self.push(BNode::Tuple(xs))
    }

    pub(crate) fn inj(&mut self, i: u32, x: BRef) -> BRef {
        self.push(BNode::Inj(i, x))
    }

    pub(crate) fn fold(&mut self, x: BRef) -> BRef {
        self.push(BNode::Fold(x))
    }

    pub(crate) fn pending(&mut self) -> BRef {
        self.push(BNode::Pending)
    }

    pub(crate) fn set_layer(&mut self, r: BRef, child: BRef) {
        assert!(
            matches!(self.nodes[r as usize], BNode::Pending),
            "layer already set"
        );
        self.nodes[r as usize] = BNode::Layer(child);
    }

    pub(crate) fn finish(&self, root: BRef) -> Element {
        self.finish_many(&[root]).pop().expect("one root")
    }

    pub(crate) fn finish_many(&self, roots: &[BRef]) -> Vec<Element> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<BRef> = roots.to_vec();
        let mut cyclic = false;
        while let Some(r) = stack.pop() {
            if std::mem::replace(&mut seen[r as usize], true) {
                continue;
            }
            match &self.nodes[r as usize] {
                BNode::Ext(_) => {}
                BNode::Tuple(xs) => stack.extend(xs),
                BNode::Inj(_, x) | BNode::Fold(x) => stack.push(*x),
                BNode::Layer(x) => {
                    cyclic = true;
                    stack.push(*x);
                }
                BNode::Pending => panic!("unfinished layer node"),
            }
        }
        if cyclic {
            self.finish_graph(roots)
        } else {
            let mut memo = vec![None; self.nodes.len()];
            roots.iter().map(|&r| self.tree(r, &mut memo)).collect()
        }
    }

    fn tree(&self, r: BRef, memo: &mut Vec<Option<Element>>) -> Element {
        if let Some(e) = &memo[r as usize] {
            return e.clone();
        }
        let e = match &self.nodes[r as usize] {
            BNode::Ext(e) => e.clone(),
            BNode::Tuple(xs) => Element::tuple(xs.iter().map(|&x| self.tree(x, memo)).collect()),
            BNode::Inj(i, x) => Element::inj(*i, self.tree(*x, memo)),
            BNode::Fold(x) => Element::fold(self.tree(*x, memo)),
            BNode::Layer(_) | BNode::Pending => unreachable!("acyclic case"),
        };
        memo[r as usize] = Some(e.clone());
        e
    }

    fn finish_graph(&self, roots: &[BRef]) -> Vec<Element> {
        let mut flat = Flat {
            label: Vec::new(),
            children: Vec::new(),
        };
        let mut map: Vec<Option<u32>> = vec![None; self.nodes.len()];
        let mut imported: HashMap<Element, u32> = HashMap::new();
        let mut graphs: HashMap<usize, u32> = HashMap::new();
        let flat_roots: Vec<u32> = roots
            .iter()
            .map(|&r| self.flatten(r, &mut flat, &mut map, &mut imported, &mut graphs))
            .collect();

        let class = minimize(&flat);
        let nclasses = class.iter().max().map_or(0, |&c| c as usize + 1);
        let mut rep = vec![u32::MAX; nclasses];
        for (v, &c) in class.iter().enumerate() {
            if rep[c as usize] == u32::MAX {
                rep[c as usize] = v as u32;
            }
        }
        let quotient: Vec<GNode> = rep
            .iter()
            .map(|&v| {
                let cs: Vec<u32> = flat.children[v as usize]
                    .iter()
                    .map(|&c| class[c as usize])
                    .collect();
                match &flat.label[v as usize] {
                    Label::Atom(s, id) => GNode::Atom {
                        set: s.clone(),
                        id: *id,
                    },
                    Label::Hole(t, i) => GNode::Hole {
                        token: *t,
                        index: *i,
                    },
                    Label::Tuple(_) => GNode::Tuple(cs),
                    Label::Inj(i) => GNode::Inj(*i, cs[0]),
                    Label::Fold => GNode::Fold(cs[0]),
                    Label::Layer => GNode::Layer(cs[0]),
                }
            })
            .collect();
        let mut memo: HashMap<u32, Element> = HashMap::new();
        flat_roots
            .iter()
            .map(|&r| quotient_element(&quotient, class[r as usize], &mut memo))
            .collect()
    }

    fn flatten(
        &self,
        r: BRef,
        flat: &mut Flat,
        map: &mut Vec<Option<u32>>,
        imported: &mut HashMap<Element, u32>,
        graphs: &mut HashMap<usize, u32>,
    ) -> u32 {
        if let Some(f) = map[r as usize] {
            return f;
        }
        let f = match &self.nodes[r as usize] {
            BNode::Ext(e) => import(e, flat, imported, graphs),
            BNode::Layer(_) => {
                // Reserve the slot first: the child may lead back here.
                let f = flat.push(Label::Layer, Vec::new());
                map[r as usize] = Some(f);
                let BNode::Layer(c) = &self.nodes[r as usize] else {
                    unreachable!()
                };
                let fc = self.flatten(*c, flat, map, imported, graphs);
                flat.children[f as usize] = vec![fc];
                f
            }
            BNode::Tuple(xs) => {
                let cs = xs
                    .iter()
                    .map(|&x| self.flatten(x, flat, map, imported, graphs))
                    .collect::<Vec<_>>();
                flat.push(Label::Tuple(cs.len()), cs)
            }
            BNode::Inj(i, x) => {
                let c = self.flatten(*x, flat, map, imported, graphs);
                flat.push(Label::Inj(*i), vec![c])
            }
            BNode::Fold(x) => {
                let c = self.flatten(*x, flat, map, imported, graphs);
                flat.push(Label::Fold, vec![c])
            }
            BNode::Pending => panic!("unfinished layer node"),
        };
        map[r as usize] = Some(f);
        f
    }
}

fn import(
    e: &Element,
    flat: &mut Flat,
    imported: &mut HashMap<Element, u32>,
    graphs: &mut HashMap<usize, u32>,
) -> u32 {
    if let Some(&f) = imported.get(e) {
        return f;
    }
    let f = match e.tree() {
        ElementTree::Atom { set, id } => flat.push(Label::Atom(set.clone(), *id), Vec::new()),
        ElementTree::Hole { token, index } => flat.push(Label::Hole(*token, *index), Vec::new()),
        ElementTree::Tuple(xs) => {
            let cs = xs
                .iter()
                .map(|x| import(x, flat, imported, graphs))
                .collect::<Vec<_>>();
            flat.push(Label::Tuple(cs.len()), cs)
        }
        ElementTree::Inj(i, x) => {
            let c = import(x, flat, imported, graphs);
            flat.push(Label::Inj(*i), vec![c])
        }
        ElementTree::Fold(x) => {
            let c = import(x, flat, imported, graphs);
            flat.push(Label::Fold, vec![c])
        }
        ElementTree::Nu(g) => {
            let key = Arc::as_ptr(g) as usize;
            match graphs.get(&key) {
                Some(&base) => base,
                None => {
                    let base = flat.label.len() as u32;
                    for n in &g.nodes {
                        let (label, cs) = match n {
                            GNode::Atom { set, id } => (Label::Atom(set.clone(), *id), vec![]),
                            GNode::Hole { token, index } => (Label::Hole(*token, *index), vec![]),
                            GNode::Tuple(xs) => (Label::Tuple(xs.len()), xs.clone()),
                            GNode::Inj(i, x) => (Label::Inj(*i), vec![*x]),
                            GNode::Fold(x) => (Label::Fold, vec![*x]),
                            GNode::Layer(x) => (Label::Layer, vec![*x]),
                        };
                        flat.push(label, cs.into_iter().map(|c| c + base).collect());
                    }
                    graphs.insert(key, base);
                    base
                }
            }
        }
    };
    imported.insert(e.clone(), f);
    f
}

/// Coarsest partition compatible with labels and children (partition refinement).
fn minimize(flat: &Flat) -> Vec<u32> {
    let n = flat.label.len();
    let mut ids: HashMap<&Label, u32> = HashMap::new();
    let mut class: Vec<u32> = flat
        .label
        .iter()
        .map(|l| {
            let k = ids.len() as u32;
            *ids.entry(l).or_insert(k)
        })
        .collect();
    let mut count = ids.len();
    loop {
        let mut sigs: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
        let next: Vec<u32> = (0..n)
            .map(|v| {
                let sig = (
                    class[v],
                    flat.children[v]
                        .iter()
                        .map(|&c| class[c as usize])
                        .collect(),
                );
                let k = sigs.len() as u32;
                *sigs.entry(sig).or_insert(k)
            })
            .collect();
        let stable = sigs.len() == count;
        count = sigs.len();
        class = next;
        if stable {
            return class;
        }
    }
}

fn quotient_element(q: &[GNode], c: u32, memo: &mut HashMap<u32, Element>) -> Element {
    if let Some(e) = memo.get(&c) {
        return e.clone();
    }
    let e = match &q[c as usize] {
        GNode::Layer(_) => Element::nu(Arc::new(NuGraph::from_reachable(q, c))),
        GNode::Atom { set, id } => Element::atom_shared(set.clone(), *id),
        GNode::Hole { token, index } => Element::hole(*token, *index),
        GNode::Tuple(xs) => {
            Element::tuple(xs.iter().map(|&x| quotient_element(q, x, memo)).collect())
        }
        GNode::Inj(i, x) => Element::inj(*i, quotient_element(q, *x, memo)),
        GNode::Fold(x) => Element::fold(quotient_element(q, *x, memo)),
    };
    memo.insert(c, e.clone());
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(b: &mut Builder, period: usize) -> BRef {
        // A cycle of `period` layers, each wrapping `in0(())`-paired data.
        let first = b.pending();
        let mut prev = first;
        for k in 1..=period {
            let next = if k == period { first } else { b.pending() };
            let unit = b.tuple(vec![]);
            let pair = b.tuple(vec![unit, next]);
            b.set_layer(prev, pair);
            prev = next;
        }
        first
    }

    #[test]
    fn bisimilar_cycles_coincide() {
        let mut b = Builder::new();
        let s1 = stream(&mut b, 1);
        let s3 = stream(&mut b, 3);
        let es = b.finish_many(&[s1, s3]);
        assert_eq!(es[0], es[1]);
        let ElementTree::Nu(g) = es[0].tree() else {
            panic!("expected a graph")
        };
        assert_eq!(g.nodes().len(), 3);
    }

    #[test]
    fn finite_results_stay_trees() {
        let mut b = Builder::new();
        let u = b.tuple(vec![]);
        let x = b.inj(1, u);
        let f = b.fold(x);
        let e = b.finish(f);
        assert_eq!(e, Element::fold(Element::inj(1, Element::tuple(vec![]))));
    }

    #[test]
    fn imported_graphs_are_reminimized() {
        let mut b = Builder::new();
        let s = stream(&mut b, 2);
        let e = b.finish(s);
        // Wrap an existing stream in one more identical layer.
        let mut b = Builder::new();
        let inner = b.ext(e.clone());
        let unit = b.tuple(vec![]);
        let pair = b.tuple(vec![unit, inner]);
        let l = b.pending();
        b.set_layer(l, pair);
        assert_eq!(b.finish(l), e);
    }

    #[test]
    fn views_navigate_graphs() {
        let mut b = Builder::new();
        let s = stream(&mut b, 1);
        let e = b.finish(s);
        let Shape::Layer(inside) = View::new(&e).shape() else {
            panic!("expected a layer")
        };
        let Shape::Tuple(parts) = inside.shape() else {
            panic!("expected a pair")
        };
        assert_eq!(parts[1].to_element(), e);
    }
}
