//! ℤ-labelled graphs and the presentations they induce.
//!
//! A labelled graph encodes a graph-of-groups decomposition in which every
//! vertex and edge group is infinite cyclic, so the only data beyond the
//! graph itself is a nonzero integer at each end of each edge. Validation,
//! Betti number, 1-freeness, elementarity detection, spanning trees and the
//! derived presentation all live here.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Largest admissible |label|; labels beyond this cannot be factored
/// exactly by the modulus machinery and are rejected up front.
pub const MAX_LABEL: i64 = 1_000_000_000_000;

/// Index of a vertex in a validated [`LabelledGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexIx(pub usize);

/// Index of an edge in a validated [`LabelledGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeIx(pub usize);

/// One edge with its two end labels. Loops (`from == to`) are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub from: VertexIx,
    pub to: VertexIx,
    /// Label at the initial (`from`) end.
    pub label_from: i64,
    /// Label at the terminal (`to`) end.
    pub label_to: i64,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }

    /// The two ends as (vertex, label at that end) pairs, `from` end first.
    pub fn ends(&self) -> [(VertexIx, i64); 2] {
        [(self.from, self.label_from), (self.to, self.label_to)]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge '{edge}' carries a zero label")]
    ZeroLabel { edge: String },
    #[error("edge '{edge}' label {label} exceeds the factorisation bound {bound}")]
    LabelTooLarge { edge: String, label: i64, bound: i64 },
    #[error("graph is disconnected: vertex '{vertex}' is unreachable")]
    Disconnected { vertex: String },
    #[error("edge '{edge}' references unknown vertex '{vertex}'")]
    DanglingEdge { edge: String, vertex: String },
    #[error("duplicate id '{id}'")]
    DuplicateId { id: String },
    #[error("graph has no vertices")]
    Empty,
    #[error("unknown root vertex '{root}'")]
    UnknownRoot { root: String },
    #[error("edge '{edge}' is not collapsible: {reason}")]
    NotCollapsible { edge: String, reason: String },
}

/// A validated GBS quotient graph: connected, finite, all labels nonzero.
///
/// Vertices and edges are stored sorted by id, so every derived structure
/// (presentations, spanning trees, reports) is reproducible across runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_lookup: BTreeMap<String, VertexIx>,
    edge_lookup: BTreeMap<String, EdgeIx>,
}

/// Unvalidated edge description fed to [`LabelledGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEdge {
    pub id: String,
    pub from: String,
    pub label_from: i64,
    pub to: String,
    pub label_to: i64,
}

impl LabelledGraph {
    /// Validates a raw description into a [`LabelledGraph`].
    ///
    /// Checks: ids unique (vertex and edge ids share one namespace, since
    /// both become generator names), endpoints exist, labels nonzero and
    /// within the factorisation bound, graph nonempty and connected.
    pub fn validate(vertices: Vec<String>, edges: Vec<RawEdge>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut vs = vertices;
        vs.sort();
        for pair in vs.windows(2) {
            if pair[0] == pair[1] {
                return Err(GraphError::DuplicateId { id: pair[0].clone() });
            }
        }
        let vertex_lookup: BTreeMap<String, VertexIx> = vs
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), VertexIx(i)))
            .collect();

        let mut es = edges;
        es.sort_by(|a, b| a.id.cmp(&b.id));
        let mut edge_lookup = BTreeMap::new();
        let mut built = Vec::with_capacity(es.len());
        for (i, e) in es.into_iter().enumerate() {
            if vertex_lookup.contains_key(&e.id) || edge_lookup.contains_key(&e.id) {
                return Err(GraphError::DuplicateId { id: e.id });
            }
            let from = *vertex_lookup
                .get(&e.from)
                .ok_or_else(|| GraphError::DanglingEdge {
                    edge: e.id.clone(),
                    vertex: e.from.clone(),
                })?;
            let to = *vertex_lookup
                .get(&e.to)
                .ok_or_else(|| GraphError::DanglingEdge {
                    edge: e.id.clone(),
                    vertex: e.to.clone(),
                })?;
            for label in [e.label_from, e.label_to] {
                if label == 0 {
                    return Err(GraphError::ZeroLabel { edge: e.id });
                }
                if label.abs() > MAX_LABEL {
                    return Err(GraphError::LabelTooLarge {
                        edge: e.id,
                        label,
                        bound: MAX_LABEL,
                    });
                }
            }
            edge_lookup.insert(e.id.clone(), EdgeIx(i));
            built.push(Edge {
                id: e.id,
                from,
                to,
                label_from: e.label_from,
                label_to: e.label_to,
            });
        }

        let g = LabelledGraph {
            vertices: vs,
            edges: built,
            vertex_lookup,
            edge_lookup,
        };
        g.check_connected()?;
        Ok(g)
    }

    /// Convenience constructor for the one-loop system ⟨x, t | x^p = t x^q t^{-1}⟩.
    pub fn bs(p: i64, q: i64) -> Result<Self, GraphError> {
        Self::validate(
            vec!["x".to_string()],
            vec![RawEdge {
                id: "t".to_string(),
                from: "x".to_string(),
                label_from: p,
                to: "x".to_string(),
                label_to: q,
            }],
        )
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(VertexIx(0));
        while let Some(v) = queue.pop_front() {
            for e in &self.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !seen[b.0] {
                        seen[b.0] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        match seen.iter().position(|s| !s) {
            None => Ok(()),
            Some(i) => Err(GraphError::Disconnected {
                vertex: self.vertices[i].clone(),
            }),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = &str> {
        self.vertices.iter().map(|s| s.as_str())
    }

    pub fn vertex_id(&self, v: VertexIx) -> &str {
        &self.vertices[v.0]
    }

    pub fn vertex(&self, id: &str) -> Option<VertexIx> {
        self.vertex_lookup.get(id).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeIx) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_by_id(&self, id: &str) -> Option<EdgeIx> {
        self.edge_lookup.get(id).copied()
    }

    /// First Betti number 1 − |V| + |E| of the (connected) graph.
    pub fn betti(&self) -> usize {
        1 + self.edges.len() - self.vertices.len()
    }

    /// True iff no end label is +1 or −1.
    pub fn is_one_free(&self) -> bool {
        self.edges
            .iter()
            .all(|e| e.label_from.abs() != 1 && e.label_to.abs() != 1)
    }

    /// An edge witnessing failure of 1-freeness, if any.
    pub fn one_free_violation(&self) -> Option<&Edge> {
        self.edges
            .iter()
            .find(|e| e.label_from.abs() == 1 || e.label_to.abs() == 1)
    }

    /// Contracts a non-loop edge carrying a ±1 label.
    ///
    /// The vertex on the ±1 side is eliminated (its generator equals a power
    /// of the surviving one), and every label formerly sitting at it is
    /// multiplied through by the signed other label of the collapsed edge.
    pub fn collapse_move(&self, edge: EdgeIx) -> Result<LabelledGraph, GraphError> {
        let e = self.edge(edge);
        if e.is_loop() {
            return Err(GraphError::NotCollapsible {
                edge: e.id.clone(),
                reason: "loop edges cannot be contracted".into(),
            });
        }
        // Eliminate the ±1-side vertex; prefer the `from` side when both qualify.
        let (removed, survivor, sign, factor) = if e.label_from.abs() == 1 {
            (e.from, e.to, e.label_from, e.label_to)
        } else if e.label_to.abs() == 1 {
            (e.to, e.from, e.label_to, e.label_from)
        } else {
            return Err(GraphError::NotCollapsible {
                edge: e.id.clone(),
                reason: "neither label is ±1".into(),
            });
        };
        // x_removed = x_survivor^{sign·factor}; an end label c at the removed
        // vertex becomes c·sign·factor at the survivor.
        let scale = sign * factor;
        let vertices: Vec<String> = self
            .vertices
            .iter()
            .filter(|id| *id != &self.vertices[removed.0])
            .cloned()
            .collect();
        let mut edges = Vec::new();
        for (i, old) in self.edges.iter().enumerate() {
            if EdgeIx(i) == edge {
                continue;
            }
            let map_end = |v: VertexIx, label: i64| -> (String, i64) {
                if v == removed {
                    (self.vertices[survivor.0].clone(), label * scale)
                } else {
                    (self.vertices[v.0].clone(), label)
                }
            };
            let (from, label_from) = map_end(old.from, old.label_from);
            let (to, label_to) = map_end(old.to, old.label_to);
            edges.push(RawEdge {
                id: old.id.clone(),
                from,
                label_from,
                to,
                label_to,
            });
        }
        LabelledGraph::validate(vertices, edges)
    }

    /// Detects whether the system presents ℤ, ℤ² or the Klein bottle group.
    ///
    /// Applies collapse moves exhaustively, then matches the reduced form
    /// against the table of elementary shapes. Anything else is declared
    /// non-elementary.
    pub fn elementary_kind(&self) -> Option<ElementaryKind> {
        let mut g = self.clone();
        loop {
            let collapsible = g
                .edges
                .iter()
                .position(|e| !e.is_loop() && (e.label_from.abs() == 1 || e.label_to.abs() == 1));
            match collapsible {
                Some(i) => g = g.collapse_move(EdgeIx(i)).expect("edge checked collapsible"),
                None => break,
            }
        }
        if g.edges.is_empty() {
            // Connected and edge-free means a single vertex.
            return Some(ElementaryKind::Z);
        }
        if g.vertices.len() == 1 && g.edges.len() == 1 {
            let e = &g.edges[0];
            if e.label_from.abs() == 1 && e.label_to.abs() == 1 {
                return if e.label_from * e.label_to == 1 {
                    Some(ElementaryKind::Z2)
                } else {
                    Some(ElementaryKind::Klein)
                };
            }
        }
        if g.vertices.len() == 2 && g.edges.len() == 1 {
            let e = &g.edges[0];
            if !e.is_loop() && e.label_from.abs() == 2 && e.label_to.abs() == 2 {
                return Some(ElementaryKind::Klein);
            }
        }
        None
    }

    pub fn is_elementary(&self) -> bool {
        self.elementary_kind().is_some()
    }

    /// Derives the presentation from the breadth-first spanning tree at `root`.
    pub fn presentation(&self, root: &str) -> Result<Presentation, GraphError> {
        let root = self
            .vertex(root)
            .ok_or_else(|| GraphError::UnknownRoot { root: root.to_string() })?;
        Ok(Presentation::derive(self.clone(), root))
    }
}

/// The three elementary GBS groups excluded from the classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementaryKind {
    Z,
    Z2,
    Klein,
}

impl fmt::Display for ElementaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementaryKind::Z => write!(f, "Z"),
            ElementaryKind::Z2 => write!(f, "Z^2"),
            ElementaryKind::Klein => write!(f, "Klein bottle"),
        }
    }
}

/// Presentation induced by a spanning tree: one generator per vertex, one
/// stable letter per non-tree edge.
///
/// Relators follow the convention that a loop `t: v[p] -- v[q]` presents
/// ⟨x, t | x^p = t x^q t^{-1}⟩:
/// tree edge e gives x_{from}^{label_from} = x_{to}^{label_to}, and a
/// non-tree edge e gives t_e x_{to}^{label_to} t_e^{-1} = x_{from}^{label_from}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    graph: LabelledGraph,
    root: VertexIx,
    /// `in_tree[e]` marks spanning-tree membership.
    in_tree: Vec<bool>,
    /// Parent link of each non-root vertex: (parent, edge, true if the edge
    /// is traversed from→to when walking parent→child).
    parent: Vec<Option<(VertexIx, EdgeIx, bool)>>,
    /// Non-tree edges in id order; these are the stable letters.
    stable: Vec<EdgeIx>,
}

impl Presentation {
    /// Breadth-first spanning tree from `root`; ties broken by edge id order
    /// (edges are stored sorted by id), so the result is deterministic.
    fn derive(graph: LabelledGraph, root: VertexIx) -> Self {
        let n = graph.vertex_count();
        let mut in_tree = vec![false; graph.edge_count()];
        let mut parent: Vec<Option<(VertexIx, EdgeIx, bool)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[root.0] = true;
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for (i, e) in graph.edges.iter().enumerate() {
                if e.is_loop() {
                    continue;
                }
                let next = if e.from == v && !seen[e.to.0] {
                    Some((e.to, true))
                } else if e.to == v && !seen[e.from.0] {
                    Some((e.from, false))
                } else {
                    None
                };
                if let Some((child, forward)) = next {
                    seen[child.0] = true;
                    in_tree[i] = true;
                    parent[child.0] = Some((v, EdgeIx(i), forward));
                    queue.push_back(child);
                }
            }
        }
        let stable = (0..graph.edge_count())
            .filter(|i| !in_tree[*i])
            .map(EdgeIx)
            .collect();
        Presentation {
            graph,
            root,
            in_tree,
            parent,
            stable,
        }
    }

    pub fn graph(&self) -> &LabelledGraph {
        &self.graph
    }

    pub fn root(&self) -> VertexIx {
        self.root
    }

    pub fn is_tree_edge(&self, e: EdgeIx) -> bool {
        self.in_tree[e.0]
    }

    /// BFS-tree parent of a non-root vertex: (parent, edge, true when the
    /// edge is traversed from→to going parent→child).
    pub fn parent_link(&self, v: VertexIx) -> Option<(VertexIx, EdgeIx, bool)> {
        self.parent[v.0]
    }

    /// Vertices in breadth-first discovery order (root first).
    pub fn bfs_order(&self) -> Vec<VertexIx> {
        let mut order: Vec<VertexIx> = (0..self.graph.vertex_count()).map(VertexIx).collect();
        order.sort_by_key(|v| self.tree_path(self.root, *v).len());
        order
    }

    /// Stable letters (non-tree edges) in id order.
    pub fn stable_letters(&self) -> &[EdgeIx] {
        &self.stable
    }

    /// Tree path from `from` to `to` as (edge, traversed from→to?) steps.
    pub fn tree_path(&self, from: VertexIx, to: VertexIx) -> Vec<(EdgeIx, bool)> {
        if from == to {
            return Vec::new();
        }
        let up = |mut v: VertexIx| {
            let mut path = vec![v];
            while let Some((p, _, _)) = self.parent[v.0] {
                path.push(p);
                v = p;
            }
            path
        };
        let a = up(from);
        let b = up(to);
        // Strip the common tail (both end at root).
        let mut ai = a.len();
        let mut bi = b.len();
        while ai > 0 && bi > 0 && a[ai - 1] == b[bi - 1] {
            ai -= 1;
            bi -= 1;
        }
        let mut steps = Vec::new();
        // Walk up from `from` to the meeting point: child→parent reverses
        // the parent→child orientation.
        for v in &a[..ai] {
            let (_, e, forward) = self.parent[v.0].expect("non-root vertex has a parent");
            steps.push((e, !forward));
        }
        // Walk down to `to`.
        for v in b[..bi].iter().rev() {
            let (_, e, forward) = self.parent[v.0].expect("non-root vertex has a parent");
            steps.push((e, forward));
        }
        steps
    }

    /// Generator names: every vertex id, then every stable-letter edge id.
    pub fn generator_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.graph.vertex_ids().collect();
        names.extend(self.stable.iter().map(|e| self.graph.edge(*e).id.as_str()));
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(id: &str, from: &str, lf: i64, to: &str, lt: i64) -> RawEdge {
        RawEdge {
            id: id.into(),
            from: from.into(),
            label_from: lf,
            to: to.into(),
            label_to: lt,
        }
    }

    #[test]
    fn bs_loop_is_valid() {
        let g = LabelledGraph::bs(2, 3).unwrap();
        assert_eq!(g.betti(), 1);
        assert!(g.is_one_free());
        assert!(!g.is_elementary());
    }

    #[test]
    fn zero_label_rejected() {
        let err = LabelledGraph::bs(0, 3).unwrap_err();
        assert_eq!(err, GraphError::ZeroLabel { edge: "t".into() });
    }

    #[test]
    fn disconnected_rejected() {
        let err = LabelledGraph::validate(vec!["a".into(), "b".into()], vec![]).unwrap_err();
        assert!(matches!(err, GraphError::Disconnected { .. }));
    }

    #[test]
    fn dangling_edge_rejected() {
        let err =
            LabelledGraph::validate(vec!["a".into()], vec![raw("e", "a", 2, "c", 3)]).unwrap_err();
        assert_eq!(
            err,
            GraphError::DanglingEdge { edge: "e".into(), vertex: "c".into() }
        );
    }

    #[test]
    fn betti_values() {
        assert_eq!(LabelledGraph::bs(2, 3).unwrap().betti(), 1);
        let segment =
            LabelledGraph::validate(vec!["u".into(), "v".into()], vec![raw("e", "u", 2, "v", 3)])
                .unwrap();
        assert_eq!(segment.betti(), 0);
        let two_loops = LabelledGraph::validate(
            vec!["x".into()],
            vec![raw("s", "x", 2, "x", 4), raw("t", "x", 2, "x", 6)],
        )
        .unwrap();
        assert_eq!(two_loops.betti(), 2);
    }

    #[test]
    fn one_freeness() {
        assert!(LabelledGraph::bs(2, 3).unwrap().is_one_free());
        assert!(!LabelledGraph::bs(1, 6).unwrap().is_one_free());
        let seg =
            LabelledGraph::validate(vec!["u".into(), "v".into()], vec![raw("e", "u", 2, "v", -1)])
                .unwrap();
        assert!(!seg.is_one_free());
    }

    #[test]
    fn elementary_detection() {
        let single = LabelledGraph::validate(vec!["v".into()], vec![]).unwrap();
        assert_eq!(single.elementary_kind(), Some(ElementaryKind::Z));
        assert_eq!(
            LabelledGraph::bs(1, 1).unwrap().elementary_kind(),
            Some(ElementaryKind::Z2)
        );
        assert_eq!(
            LabelledGraph::bs(1, -1).unwrap().elementary_kind(),
            Some(ElementaryKind::Klein)
        );
        assert_eq!(
            LabelledGraph::bs(-1, -1).unwrap().elementary_kind(),
            Some(ElementaryKind::Z2)
        );
        let klein_seg =
            LabelledGraph::validate(vec!["u".into(), "v".into()], vec![raw("e", "u", 2, "v", 2)])
                .unwrap();
        assert_eq!(klein_seg.elementary_kind(), Some(ElementaryKind::Klein));
        assert_eq!(LabelledGraph::bs(2, 3).unwrap().elementary_kind(), None);
        // A pendant (1,5) edge collapses away before the table is consulted.
        let inflated = LabelledGraph::validate(
            vec!["u".into(), "v".into(), "w".into()],
            vec![raw("e", "u", 2, "v", 2), raw("f", "w", 1, "u", 5)],
        )
        .unwrap();
        assert_eq!(inflated.elementary_kind(), Some(ElementaryKind::Klein));
    }

    #[test]
    fn collapse_scales_labels() {
        // Segment (1,3) with a loop (5,7) at the label-1 end collapses to a
        // single vertex with loop (15,21).
        let g = LabelledGraph::validate(
            vec!["u".into(), "v".into()],
            vec![raw("e", "u", 1, "v", 3), raw("l", "u", 5, "u", 7)],
        )
        .unwrap();
        let e = g.edge_by_id("e").unwrap();
        let collapsed = g.collapse_move(e).unwrap();
        assert_eq!(collapsed.vertex_count(), 1);
        let l = collapsed.edge(collapsed.edge_by_id("l").unwrap());
        assert_eq!((l.label_from, l.label_to), (15, 21));
    }

    #[test]
    fn collapse_preserves_betti() {
        let g = LabelledGraph::validate(
            vec!["u".into(), "v".into()],
            vec![raw("e", "u", 1, "v", 3), raw("l", "u", 5, "u", 7)],
        )
        .unwrap();
        let collapsed = g.collapse_move(g.edge_by_id("e").unwrap()).unwrap();
        assert_eq!(collapsed.betti(), g.betti());
    }

    #[test]
    fn collapse_rejects_bad_edges() {
        let g = LabelledGraph::bs(1, 3).unwrap();
        let err = g.collapse_move(g.edge_by_id("t").unwrap()).unwrap_err();
        assert!(matches!(err, GraphError::NotCollapsible { .. }));
        let seg =
            LabelledGraph::validate(vec!["u".into(), "v".into()], vec![raw("e", "u", 2, "v", 2)])
                .unwrap();
        let err = seg.collapse_move(seg.edge_by_id("e").unwrap()).unwrap_err();
        assert!(matches!(err, GraphError::NotCollapsible { .. }));
    }

    #[test]
    fn presentation_stable_letters_equal_betti() {
        let g = LabelledGraph::bs(2, 3).unwrap();
        let p = g.presentation("x").unwrap();
        assert_eq!(p.stable_letters().len(), 1);

        let theta = LabelledGraph::validate(
            vec!["u".into(), "v".into()],
            vec![raw("a", "u", 2, "v", 3), raw("b", "u", 5, "v", 7)],
        )
        .unwrap();
        let p = theta.presentation("u").unwrap();
        assert_eq!(p.stable_letters().len(), theta.betti());
        assert_eq!(p.stable_letters().len(), 1);
        // BFS with id tie-breaking puts 'a' in the tree.
        assert!(p.is_tree_edge(theta.edge_by_id("a").unwrap()));
    }

    #[test]
    fn presentation_is_deterministic() {
        let mk = || {
            LabelledGraph::validate(
                vec!["c".into(), "a".into(), "b".into()],
                vec![
                    raw("e1", "a", 2, "b", 3),
                    raw("e2", "b", 5, "c", 7),
                    raw("e3", "c", 2, "a", 9),
                ],
            )
            .unwrap()
        };
        let p1 = mk().presentation("a").unwrap();
        let p2 = mk().presentation("a").unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn unknown_root_rejected() {
        let g = LabelledGraph::bs(2, 3).unwrap();
        assert!(matches!(
            g.presentation("nope"),
            Err(GraphError::UnknownRoot { .. })
        ));
    }

    #[test]
    fn tree_path_roundtrip() {
        let g = LabelledGraph::validate(
            vec!["a".into(), "b".into(), "c".into()],
            vec![raw("e1", "a", 2, "b", 3), raw("e2", "b", 5, "c", 7)],
        )
        .unwrap();
        let p = g.presentation("a").unwrap();
        let (a, c) = (g.vertex("a").unwrap(), g.vertex("c").unwrap());
        let path = p.tree_path(a, c);
        assert_eq!(path.len(), 2);
        let back = p.tree_path(c, a);
        assert_eq!(back.len(), 2);
        assert_eq!(p.tree_path(a, a), vec![]);
    }
}
