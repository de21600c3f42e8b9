//! Trivalent graphs with leaves.
//!
//! Every internal vertex carries exactly three half-edge slots. A loop binds
//! two slots of one vertex, an internal edge binds two slots in total, and a
//! leaf edge binds exactly one. Vertex-local constraints downstream always read
//! the multiset of the three slot values, so a loop contributes its weight
//! twice.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Internal,
    Leaf,
}

/// Provenance tag for graphs produced by [`build_caterpillar`].
///
/// Several results about interior points are only known for this family, so
/// the tag travels with the graph (and its serialization).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Caterpillar {
        genus: u32,
        leaves: u32,
        /// Edge separating the tree portion from the loop portion; absent when
        /// there is no tree portion (`leaves == 0`).
        #[serde(default, skip_serializing_if = "Option::is_none")]
        separator: Option<EdgeId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub kind: EdgeKind,
}

/// Serialized form of a graph. Edge ids are positions in `edges` and stay
/// stable, so certificates can refer to them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDescription {
    pub vertices: Vec<VertexId>,
    pub slots: Vec<Vec<EdgeId>>,
    pub edges: Vec<EdgeRecord>,
    pub leaf_order: Vec<EdgeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
}

/// A validated, immutable trivalent graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDescription", into = "GraphDescription")]
pub struct TrivalentGraph {
    slots: Vec<[EdgeId; 3]>,
    kinds: Vec<EdgeKind>,
    leaf_order: Vec<EdgeId>,
    family: Option<Family>,
    /// Per edge: incident vertices with the number of slots bound there.
    incidence: Vec<Vec<(VertexId, u8)>>,
}

impl TrivalentGraph {
    pub fn from_description(desc: GraphDescription) -> Result<Self> {
        validate(&desc)?;
        let slots = desc
            .slots
            .iter()
            .map(|s| [s[0], s[1], s[2]])
            .collect::<Vec<_>>();
        let kinds = desc.edges.iter().map(|e| e.kind).collect::<Vec<_>>();
        let incidence = incidence_of(&slots, kinds.len());
        Ok(Self {
            slots,
            kinds,
            leaf_order: desc.leaf_order,
            family: desc.family,
            incidence,
        })
    }

    pub fn describe(&self) -> GraphDescription {
        GraphDescription {
            vertices: (0..self.slots.len()).map(VertexId).collect(),
            slots: self.slots.iter().map(|s| s.to_vec()).collect(),
            edges: self
                .kinds
                .iter()
                .enumerate()
                .map(|(i, &kind)| EdgeRecord {
                    id: EdgeId(i),
                    kind,
                })
                .collect(),
            leaf_order: self.leaf_order.clone(),
            family: self.family.clone(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.slots.len()
    }

    pub fn edge_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_order.len()
    }

    pub fn internal_edge_count(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| **k == EdgeKind::Internal)
            .count()
    }

    pub fn slots(&self, v: VertexId) -> [EdgeId; 3] {
        self.slots[v.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.slots.len()).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.kinds.len()).map(EdgeId)
    }

    pub fn kind(&self, e: EdgeId) -> EdgeKind {
        self.kinds[e.0]
    }

    pub fn is_loop(&self, e: EdgeId) -> bool {
        matches!(self.incidence[e.0].as_slice(), [(_, 2)])
    }

    /// Vertices incident to `e` with the number of slots `e` occupies there.
    pub fn incidence(&self, e: EdgeId) -> &[(VertexId, u8)] {
        &self.incidence[e.0]
    }

    /// Leaf edges in symbol order: position `i` carries `r_i`.
    pub fn leaf_order(&self) -> &[EdgeId] {
        &self.leaf_order
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    /// `(genus, leaves)` when the graph came from [`build_caterpillar`].
    pub fn caterpillar_signature(&self) -> Option<(u32, u32)> {
        self.family
            .as_ref()
            .map(|Family::Caterpillar { genus, leaves, .. }| (*genus, *leaves))
    }

    pub fn separator(&self) -> Option<EdgeId> {
        match self.family {
            Some(Family::Caterpillar { separator, .. }) => separator,
            None => None,
        }
    }

    /// First Betti number from internal edges and vertices only.
    pub fn betti_number(&self) -> usize {
        self.internal_edge_count() + 1 - self.vertex_count()
    }

    /// First Betti number with leaves kept as pendant edges ending in
    /// univalent vertices. Agrees with [`Self::betti_number`].
    pub fn betti_number_with_leaves(&self) -> usize {
        let n = self.leaf_count();
        (self.edge_count() + 1) - (self.vertex_count() + n)
    }
}

impl TryFrom<GraphDescription> for TrivalentGraph {
    type Error = Error;

    fn try_from(desc: GraphDescription) -> Result<Self> {
        Self::from_description(desc)
    }
}

impl From<TrivalentGraph> for GraphDescription {
    fn from(g: TrivalentGraph) -> Self {
        g.describe()
    }
}

fn incidence_of(slots: &[[EdgeId; 3]], edge_count: usize) -> Vec<Vec<(VertexId, u8)>> {
    let mut incidence: Vec<Vec<(VertexId, u8)>> = vec![Vec::new(); edge_count];
    for (v, s) in slots.iter().enumerate() {
        for &e in s {
            let list = &mut incidence[e.0];
            match list.iter_mut().find(|(w, _)| w.0 == v) {
                Some((_, m)) => *m += 1,
                None => list.push((VertexId(v), 1)),
            }
        }
    }
    incidence
}

/// Checks every structural invariant of a graph description.
pub fn validate(desc: &GraphDescription) -> Result<()> {
    let bad = |msg: String| Err(Error::InvariantViolation(msg));

    if desc.slots.is_empty() {
        return bad("graph has no internal vertex".into());
    }
    if desc.vertices.len() != desc.slots.len()
        || desc.vertices.iter().enumerate().any(|(i, v)| v.0 != i)
    {
        return bad("vertex ids must be 0..V in order, one per slot list".into());
    }
    for (i, e) in desc.edges.iter().enumerate() {
        if e.id.0 != i {
            return bad(format!("edge record {i} carries id {}", e.id));
        }
    }

    let mut uses = vec![0usize; desc.edges.len()];
    for (v, s) in desc.slots.iter().enumerate() {
        if s.len() != 3 {
            return bad(format!("vertex v{v} has {} slots, expected 3", s.len()));
        }
        for e in s {
            if e.0 >= desc.edges.len() {
                return bad(format!("vertex v{v} references unknown edge {e}"));
            }
            uses[e.0] += 1;
        }
    }
    for (i, rec) in desc.edges.iter().enumerate() {
        let expected = match rec.kind {
            EdgeKind::Internal => 2,
            EdgeKind::Leaf => 1,
        };
        if uses[i] != expected {
            return bad(format!(
                "edge e{i} ({:?}) occupies {} slots, expected {expected}",
                rec.kind, uses[i]
            ));
        }
    }

    let mut leaves: Vec<usize> = desc.leaf_order.iter().map(|e| e.0).collect();
    leaves.sort_unstable();
    let expected: Vec<usize> = desc
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Leaf)
        .map(|e| e.id.0)
        .collect();
    if leaves != expected {
        return bad("leaf_order must list every leaf edge exactly once".into());
    }

    // connectivity over internal edges
    let slots: Vec<[EdgeId; 3]> = desc.slots.iter().map(|s| [s[0], s[1], s[2]]).collect();
    let incidence = incidence_of(&slots, desc.edges.len());
    let mut parent: Vec<usize> = (0..slots.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for inc in &incidence {
        if let [(a, _), (b, _)] = inc.as_slice() {
            let (ra, rb) = (find(&mut parent, a.0), find(&mut parent, b.0));
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, 0);
    if (0..slots.len()).any(|v| find(&mut parent, v) != root) {
        return bad("graph is not connected".into());
    }

    if let Some(Family::Caterpillar { genus, leaves, .. }) = desc.family {
        let internal = uses.len() - expected.len();
        let betti = internal + 1 - slots.len();
        if betti != genus as usize || expected.len() != leaves as usize {
            return bad(format!(
                "caterpillar tag ({genus},{leaves}) does not match betti {betti}, leaves {}",
                expected.len()
            ));
        }
    }
    Ok(())
}

/// Whether a trivalent graph with first Betti number `g` and `n` leaves exists.
pub fn signature_is_feasible(g: u32, n: u32) -> bool {
    match g {
        0 => n >= 3,
        1 => n >= 1,
        _ => true,
    }
}

#[derive(Default)]
struct Builder {
    slots: Vec<[EdgeId; 3]>,
    kinds: Vec<EdgeKind>,
}

impl Builder {
    fn edge(&mut self, kind: EdgeKind) -> EdgeId {
        self.kinds.push(kind);
        EdgeId(self.kinds.len() - 1)
    }

    fn internal(&mut self) -> EdgeId {
        self.edge(EdgeKind::Internal)
    }

    fn vertex(&mut self, a: EdgeId, b: EdgeId, c: EdgeId) {
        self.slots.push([a, b, c]);
    }

    fn leaves(&mut self, n: usize) -> Vec<EdgeId> {
        (0..n).map(|_| self.edge(EdgeKind::Leaf)).collect()
    }

    fn finish(self, leaf_order: Vec<EdgeId>, family: Option<Family>) -> TrivalentGraph {
        let incidence = incidence_of(&self.slots, self.kinds.len());
        let graph = TrivalentGraph {
            slots: self.slots,
            kinds: self.kinds,
            leaf_order,
            family,
            incidence,
        };
        debug_assert_eq!(validate(&graph.describe()), Ok(()));
        graph
    }
}

/// Builds the caterpillar graph `Γ_{g,n}`.
///
/// Layout: leaves `r_1..r_n` (edge ids `0..n`) hang off a path of trinodes
/// (the tree portion). The separating edge leads into the loop portion, a
/// chain of `g - 1` digons closed by an end loop. With no leaves the tree
/// portion is replaced by a second end loop.
pub fn build_caterpillar(g: u32, n: u32) -> Result<TrivalentGraph> {
    if !signature_is_feasible(g, n) {
        return Err(Error::InfeasibleSignature(format!(
            "no trivalent graph with genus {g} and {n} leaves"
        )));
    }
    let mut b = Builder::default();
    let leaves = b.leaves(n as usize);
    let mut separator = None;

    if g == 0 {
        if n == 3 {
            b.vertex(leaves[0], leaves[1], leaves[2]);
        } else {
            let mut prev = b.internal();
            b.vertex(leaves[0], leaves[1], prev);
            for &leaf in &leaves[2..leaves.len() - 2] {
                let next = b.internal();
                b.vertex(prev, leaf, next);
                prev = next;
            }
            b.vertex(prev, leaves[leaves.len() - 2], leaves[leaves.len() - 1]);
        }
    } else {
        let entry = match n {
            0 => {
                let cap = b.internal();
                let e = b.internal();
                b.vertex(cap, cap, e);
                e
            }
            1 => leaves[0],
            _ => {
                let mut prev = b.internal();
                b.vertex(leaves[0], leaves[1], prev);
                for &leaf in &leaves[2..] {
                    let next = b.internal();
                    b.vertex(prev, leaf, next);
                    prev = next;
                }
                prev
            }
        };
        if n > 0 {
            separator = Some(entry);
        }
        let digons = if n == 0 { g - 2 } else { g - 1 };
        let mut current = entry;
        for _ in 0..digons {
            let (x, y, c) = (b.internal(), b.internal(), b.internal());
            b.vertex(current, x, y);
            b.vertex(x, y, c);
            current = c;
        }
        let end = b.internal();
        b.vertex(current, end, end);
    }

    let family = Family::Caterpillar {
        genus: g,
        leaves: n,
        separator,
    };
    let graph = b.finish(leaves, Some(family));
    let (g, n) = (g as usize, n as usize);
    assert_eq!(graph.betti_number(), g);
    assert_eq!(graph.betti_number_with_leaves(), g);
    assert_eq!(graph.leaf_count(), n);
    assert_eq!(graph.internal_edge_count() + 3, 3 * g + n);
    assert_eq!(graph.edge_count() + 3, 3 * g + 2 * n);
    Ok(graph)
}

/// Small named graphs used as alternates to the caterpillar family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedGraph {
    Trinode,
    /// Two vertices joined by three parallel edges.
    Theta,
    /// Two loop vertices joined by a bridge.
    Dumbbell,
    LoopWithLeaf,
    /// Theta with one edge subdivided by the leaf vertex.
    ThetaWithLeaf,
    /// Leaf vertex with two pendant edges, each ending in a loop vertex.
    TwinLoopsWithLeaf,
}

impl NamedGraph {
    pub const ALL: [NamedGraph; 6] = [
        NamedGraph::Trinode,
        NamedGraph::Theta,
        NamedGraph::Dumbbell,
        NamedGraph::LoopWithLeaf,
        NamedGraph::ThetaWithLeaf,
        NamedGraph::TwinLoopsWithLeaf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedGraph::Trinode => "trinode",
            NamedGraph::Theta => "theta",
            NamedGraph::Dumbbell => "dumbbell",
            NamedGraph::LoopWithLeaf => "loop_with_leaf",
            NamedGraph::ThetaWithLeaf => "theta_with_leaf",
            NamedGraph::TwinLoopsWithLeaf => "twin_loops_with_leaf",
        }
    }
}

impl FromStr for NamedGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NamedGraph::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

impl fmt::Display for NamedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn build_named(name: NamedGraph) -> TrivalentGraph {
    let mut b = Builder::default();
    let leaves = match name {
        NamedGraph::Trinode => {
            let l = b.leaves(3);
            b.vertex(l[0], l[1], l[2]);
            l
        }
        NamedGraph::Theta => {
            let (x, y, z) = (b.internal(), b.internal(), b.internal());
            b.vertex(x, y, z);
            b.vertex(x, y, z);
            vec![]
        }
        NamedGraph::Dumbbell => {
            let (l1, bridge, l2) = (b.internal(), b.internal(), b.internal());
            b.vertex(l1, l1, bridge);
            b.vertex(bridge, l2, l2);
            vec![]
        }
        NamedGraph::LoopWithLeaf => {
            let l = b.leaves(1);
            let lp = b.internal();
            b.vertex(l[0], lp, lp);
            l
        }
        NamedGraph::ThetaWithLeaf => {
            let l = b.leaves(1);
            let (a1, a2, y, z) = (b.internal(), b.internal(), b.internal(), b.internal());
            b.vertex(l[0], a1, a2);
            b.vertex(a1, y, z);
            b.vertex(a2, y, z);
            l
        }
        NamedGraph::TwinLoopsWithLeaf => {
            let l = b.leaves(1);
            let (p1, p2, l1, l2) = (b.internal(), b.internal(), b.internal(), b.internal());
            b.vertex(l[0], p1, p2);
            b.vertex(p1, l1, l1);
            b.vertex(p2, l2, l2);
            l
        }
    };
    b.finish(leaves, None)
}
