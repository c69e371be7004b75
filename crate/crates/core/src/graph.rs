//! Finite directed multigraphs, paths in their free category, eventually
//! periodic infinite paths and graph morphisms.
//!
//! A graph is a pair of maps `src, tgt : E -> V`. Parallel edges and loops
//! are allowed. Vertex and edge ids are opaque ordered tokens, so every
//! iteration order in this module is deterministic.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex {0}")]
    DuplicateVertex(VertexId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(EdgeId),
    #[error("edge {edge} has endpoint {vertex} outside the graph")]
    DanglingEdge { edge: EdgeId, vertex: VertexId },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("step {index} ({edge}) starts at {found}, expected {expected}")]
    BrokenPath {
        index: usize,
        edge: EdgeId,
        expected: VertexId,
        found: VertexId,
    },
    #[error("cannot compose: first path ends at {end}, second starts at {start}")]
    Composition { end: VertexId, start: VertexId },
    #[error("lasso cycle must be a nonempty closed path starting where the stem ends")]
    BadLasso,
    #[error("morphism is not defined on {0}")]
    Undefined(String),
    #[error("morphism does not commute with endpoints on {edge}")]
    NotAMorphism { edge: EdgeId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub src: VertexId,
    pub tgt: VertexId,
}

/// A finite graph `<src, tgt : E -> V>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, GraphError> {
        let mut vertices: Vec<VertexId> = vertices.into_iter().collect();
        vertices.sort();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateVertex(w[0]));
        }
        let mut edges: Vec<Edge> = edges.into_iter().collect();
        edges.sort();
        if let Some(w) = edges.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(GraphError::DuplicateEdge(w[0].id));
        }
        let mut out = vec![Vec::new(); vertices.len()];
        let mut inc = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            let s = vertices
                .binary_search(&e.src)
                .map_err(|_| GraphError::DanglingEdge {
                    edge: e.id,
                    vertex: e.src,
                })?;
            let t = vertices
                .binary_search(&e.tgt)
                .map_err(|_| GraphError::DanglingEdge {
                    edge: e.id,
                    vertex: e.tgt,
                })?;
            out[s].push(k);
            inc[t].push(k);
        }
        Ok(Graph {
            vertices,
            edges,
            out,
            inc,
        })
    }

    pub fn empty() -> Self {
        Graph {
            vertices: Vec::new(),
            edges: Vec::new(),
            out: Vec::new(),
            inc: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Dense index of a vertex, in id order.
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.index_of(v).is_some()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges
            .binary_search_by(|e| e.id.cmp(&id))
            .ok()
            .map(|k| &self.edges[k])
    }

    /// Outgoing edges of `v` in edge-id order.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        let slot = self
            .index_of(v)
            .map(|i| self.out[i].as_slice())
            .unwrap_or(&[]);
        slot.iter().map(move |&k| &self.edges[k])
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        let slot = self
            .index_of(v)
            .map(|i| self.inc[i].as_slice())
            .unwrap_or(&[]);
        slot.iter().map(move |&k| &self.edges[k])
    }

    /// Successor indices of the vertex with dense index `i`, one entry per edge.
    pub fn successors_of_index(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[i]
            .iter()
            .map(move |&k| self.index_of(self.edges[k].tgt).expect("validated edge"))
    }

    pub fn predecessors_of_index(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.inc[i]
            .iter()
            .map(move |&k| self.index_of(self.edges[k].src).expect("validated edge"))
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.index_of(v).map(|i| self.out[i].len()).unwrap_or(0)
    }

    /// The subgraph on `keep`, dropping every edge with an endpoint outside it.
    pub fn induced(&self, keep: impl Fn(VertexId) -> bool) -> Graph {
        let vertices: Vec<VertexId> = self.vertices.iter().copied().filter(|&v| keep(v)).collect();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .copied()
            .filter(|e| keep(e.src) && keep(e.tgt))
            .collect();
        Graph::new(vertices, edges).expect("induced subgraph of a valid graph")
    }
}

/// A finite path: an arrow of the free category on a graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Path {
    start: VertexId,
    end: VertexId,
    steps: Vec<EdgeId>,
}

impl Path {
    /// The identity path `1_p`.
    pub fn identity(p: VertexId) -> Self {
        Path {
            start: p,
            end: p,
            steps: Vec::new(),
        }
    }

    pub fn new(graph: &Graph, start: VertexId, steps: Vec<EdgeId>) -> Result<Self, GraphError> {
        if !graph.contains_vertex(start) {
            return Err(GraphError::UnknownVertex(start));
        }
        let mut at = start;
        for (index, &id) in steps.iter().enumerate() {
            let e = graph.edge(id).ok_or(GraphError::UnknownEdge(id))?;
            if e.src != at {
                return Err(GraphError::BrokenPath {
                    index,
                    edge: id,
                    expected: at,
                    found: e.src,
                });
            }
            at = e.tgt;
        }
        Ok(Path {
            start,
            end: at,
            steps,
        })
    }

    pub fn single(graph: &Graph, edge: EdgeId) -> Result<Self, GraphError> {
        let e = graph.edge(edge).ok_or(GraphError::UnknownEdge(edge))?;
        Ok(Path {
            start: e.src,
            end: e.tgt,
            steps: vec![edge],
        })
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self) -> VertexId {
        self.end
    }

    pub fn steps(&self) -> &[EdgeId] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Extend by one edge. The caller guarantees `edge` leaves `self.end()`.
    pub fn push(&mut self, graph: &Graph, edge: EdgeId) -> Result<(), GraphError> {
        let e = graph.edge(edge).ok_or(GraphError::UnknownEdge(edge))?;
        if e.src != self.end {
            return Err(GraphError::BrokenPath {
                index: self.steps.len(),
                edge,
                expected: self.end,
                found: e.src,
            });
        }
        self.steps.push(edge);
        self.end = e.tgt;
        Ok(())
    }

    /// The prefix made of the first `n` steps.
    pub fn truncate(&self, graph: &Graph, n: usize) -> Path {
        let steps = self.steps[..n.min(self.steps.len())].to_vec();
        Path::new(graph, self.start, steps).expect("prefix of a valid path")
    }

    /// Vertices visited, starting with `start`; `len() + 1` entries.
    pub fn vertices(&self, graph: &Graph) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(self.start);
        for id in &self.steps {
            out.push(graph.edge(*id).expect("validated path").tgt);
        }
        out
    }
}

/// `d ⋆ g`: concatenation of `d` followed by `g`.
pub fn compose_paths(d: &Path, g: &Path) -> Result<Path, GraphError> {
    if d.end != g.start {
        return Err(GraphError::Composition {
            end: d.end,
            start: g.start,
        });
    }
    let mut steps = d.steps.clone();
    steps.extend_from_slice(&g.steps);
    Ok(Path {
        start: d.start,
        end: g.end,
        steps,
    })
}

/// Whether `g = d ⋆ g'` for some path `g'`.
pub fn is_prefix(d: &Path, g: &Path) -> bool {
    d.start == g.start && g.steps.starts_with(&d.steps)
}

/// An eventually periodic infinite path `stem ⋆ cycle ⋆ cycle ⋆ ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LassoPath {
    stem: Path,
    cycle: Path,
}

impl LassoPath {
    pub fn new(stem: Path, cycle: Path) -> Result<Self, GraphError> {
        if cycle.is_empty() || stem.end != cycle.start || cycle.start != cycle.end {
            return Err(GraphError::BadLasso);
        }
        Ok(LassoPath { stem, cycle })
    }

    pub fn stem(&self) -> &Path {
        &self.stem
    }

    pub fn cycle(&self) -> &Path {
        &self.cycle
    }

    /// The edge taken at step `n` of the infinite path.
    pub fn step(&self, n: usize) -> EdgeId {
        if n < self.stem.len() {
            self.stem.steps[n]
        } else {
            self.cycle.steps[(n - self.stem.len()) % self.cycle.len()]
        }
    }

    /// The finite prefix of length `n`.
    pub fn prefix(&self, graph: &Graph, n: usize) -> Path {
        let steps = (0..n).map(|k| self.step(k)).collect();
        Path::new(graph, self.stem.start, steps).expect("prefix of a valid lasso")
    }

    /// Vertices occurring infinitely often.
    pub fn recurring_vertices(&self, graph: &Graph) -> Vec<VertexId> {
        let mut vs = self.cycle.vertices(graph);
        vs.pop();
        vs.sort();
        vs.dedup();
        vs
    }
}

/// A pair of maps on vertices and edges commuting with `src` and `tgt`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMorphism {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, EdgeId>,
}

impl GraphMorphism {
    pub fn identity(graph: &Graph) -> Self {
        GraphMorphism {
            vertex_map: graph.vertices().iter().map(|&v| (v, v)).collect(),
            edge_map: graph.edges().iter().map(|e| (e.id, e.id)).collect(),
        }
    }

    /// Checks totality on `from` and `∂_i Φ(m) = Φ(∂_i m)` edge by edge.
    pub fn validate(&self, from: &Graph, to: &Graph) -> Result<(), GraphError> {
        for &v in from.vertices() {
            let image = self
                .vertex_map
                .get(&v)
                .ok_or_else(|| GraphError::Undefined(format!("vertex {v}")))?;
            if !to.contains_vertex(*image) {
                return Err(GraphError::UnknownVertex(*image));
            }
        }
        for e in from.edges() {
            let image = self
                .edge_map
                .get(&e.id)
                .ok_or_else(|| GraphError::Undefined(format!("edge {}", e.id)))?;
            let target = to.edge(*image).ok_or(GraphError::UnknownEdge(*image))?;
            if target.src != self.vertex_map[&e.src] || target.tgt != self.vertex_map[&e.tgt] {
                return Err(GraphError::NotAMorphism { edge: e.id });
            }
        }
        Ok(())
    }

    fn map_path_unchecked(&self, p: &Path) -> Path {
        Path {
            start: self.vertex_map[&p.start],
            end: self.vertex_map[&p.end],
            steps: p.steps.iter().map(|e| self.edge_map[e]).collect(),
        }
    }
}

/// A finite or lasso-shaped path, the two shapes a morphism can act on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyPath {
    Finite(Path),
    Lasso(LassoPath),
}

/// The image `Φ(γ) = γ · Φ` of a path under a graph morphism.
pub fn apply_morphism(
    phi: &GraphMorphism,
    from: &Graph,
    to: &Graph,
    path: &AnyPath,
) -> Result<AnyPath, GraphError> {
    phi.validate(from, to)?;
    Ok(match path {
        AnyPath::Finite(p) => {
            Path::new(from, p.start, p.steps.clone())?;
            AnyPath::Finite(phi.map_path_unchecked(p))
        }
        AnyPath::Lasso(l) => {
            Path::new(from, l.stem.start, l.stem.steps.clone())?;
            Path::new(from, l.cycle.start, l.cycle.steps.clone())?;
            AnyPath::Lasso(LassoPath {
                stem: phi.map_path_unchecked(&l.stem),
                cycle: phi.map_path_unchecked(&l.cycle),
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Graph {
        // p -> q -> r -> s
        Graph::new(
            (0..4).map(VertexId),
            (0..3).map(|k| Edge {
                id: EdgeId(k),
                src: VertexId(k),
                tgt: VertexId(k + 1),
            }),
        )
        .unwrap()
    }

    #[test]
    fn identity_paths_are_neutral() {
        let g = chain();
        let gamma = Path::new(&g, VertexId(0), vec![EdgeId(0), EdgeId(1)]).unwrap();
        let left = compose_paths(&Path::identity(VertexId(0)), &gamma).unwrap();
        let right = compose_paths(&gamma, &Path::identity(VertexId(2))).unwrap();
        assert_eq!(left, gamma);
        assert_eq!(right, gamma);
    }

    #[test]
    fn two_steps_compose() {
        let g = chain();
        let pq = Path::single(&g, EdgeId(0)).unwrap();
        let qr = Path::single(&g, EdgeId(1)).unwrap();
        let pqr = compose_paths(&pq, &qr).unwrap();
        assert_eq!(pqr.len(), 2);
        assert_eq!(
            pqr.vertices(&g),
            vec![VertexId(0), VertexId(1), VertexId(2)]
        );
        assert!(matches!(
            compose_paths(&qr, &pq),
            Err(GraphError::Composition { .. })
        ));
    }

    #[test]
    fn prefixes() {
        let g = chain();
        let pq = Path::single(&g, EdgeId(0)).unwrap();
        let pqr = Path::new(&g, VertexId(0), vec![EdgeId(0), EdgeId(1)]).unwrap();
        assert!(is_prefix(&Path::identity(VertexId(0)), &pqr));
        assert!(is_prefix(&pqr, &pqr));
        assert!(is_prefix(&pq, &pqr));
        assert!(!is_prefix(&pqr, &pq));
        assert!(!is_prefix(&Path::identity(VertexId(1)), &pqr));
    }

    #[test]
    fn broken_path_is_rejected() {
        let g = chain();
        let err = Path::new(&g, VertexId(0), vec![EdgeId(1)]).unwrap_err();
        assert!(matches!(err, GraphError::BrokenPath { index: 0, .. }));
    }

    #[test]
    fn collapse_morphism_turns_path_into_loop() {
        let g = chain();
        let point = Graph::new(
            [VertexId(0)],
            (0..3).map(|k| Edge {
                id: EdgeId(k),
                src: VertexId(0),
                tgt: VertexId(0),
            }),
        )
        .unwrap();
        let phi = GraphMorphism {
            vertex_map: g.vertices().iter().map(|&v| (v, VertexId(0))).collect(),
            edge_map: g.edges().iter().map(|e| (e.id, e.id)).collect(),
        };
        let gamma = Path::new(&g, VertexId(0), vec![EdgeId(0), EdgeId(1), EdgeId(2)]).unwrap();
        let AnyPath::Finite(image) =
            apply_morphism(&phi, &g, &point, &AnyPath::Finite(gamma)).unwrap()
        else {
            panic!("finite path maps to a finite path");
        };
        assert_eq!(image.len(), 3);
        assert_eq!(image.start(), VertexId(0));
        assert_eq!(image.end(), VertexId(0));
        Path::new(&point, image.start(), image.steps().to_vec()).unwrap();
    }

    #[test]
    fn non_morphism_is_rejected() {
        let g = chain();
        let mut phi = GraphMorphism::identity(&g);
        phi.edge_map.insert(EdgeId(0), EdgeId(1));
        assert!(matches!(
            phi.validate(&g, &g),
            Err(GraphError::NotAMorphism { .. })
        ));
    }

    #[test]
    fn lasso_unrolls_its_cycle() {
        let g = Graph::new(
            [VertexId(0), VertexId(1)],
            [
                Edge {
                    id: EdgeId(0),
                    src: VertexId(0),
                    tgt: VertexId(1),
                },
                Edge {
                    id: EdgeId(1),
                    src: VertexId(1),
                    tgt: VertexId(1),
                },
            ],
        )
        .unwrap();
        let lasso = LassoPath::new(
            Path::single(&g, EdgeId(0)).unwrap(),
            Path::single(&g, EdgeId(1)).unwrap(),
        )
        .unwrap();
        assert_eq!(
            lasso.prefix(&g, 4).steps(),
            &[EdgeId(0), EdgeId(1), EdgeId(1), EdgeId(1)]
        );
        assert_eq!(lasso.recurring_vertices(&g), vec![VertexId(1)]);
        assert!(LassoPath::new(Path::identity(VertexId(0)), Path::identity(VertexId(0))).is_err());
    }
}
