//! The constraint system of `P_Γ(r⃗, L)` and its lattice.
//!
//! A point is an assignment of a nonnegative integer to every edge. At degree
//! `N` the level bound is `2·N·L` on every vertex triple and fixed leaves carry
//! `N·r_i`. The lattice `M_Γ` asks every vertex triple to have even sum.

mod enumerate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, TrivalentGraph, VertexId};

pub use enumerate::{
    count_lattice_points, enumerate_lattice_points, for_each_lattice_point, EnumOptions,
};

/// Integer edge labelling indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeWeights(pub Vec<u32>);

impl EdgeWeights {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn constant(len: usize, value: u32) -> Self {
        Self(vec![value; len])
    }

    pub fn get(&self, e: EdgeId) -> u32 {
        self.0[e.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Edgewise `self - other`, if no entry goes negative.
    pub fn checked_sub(&self, other: &EdgeWeights) -> Option<EdgeWeights> {
        if self.len() != other.len() {
            return None;
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(EdgeWeights)
    }

    pub fn add(&self, other: &EdgeWeights) -> EdgeWeights {
        assert_eq!(self.len(), other.len());
        EdgeWeights(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for EdgeWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

/// An element `(w, N)` of the graded cone semigroup.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GradedPoint {
    pub degree: u32,
    pub weights: EdgeWeights,
}

impl GradedPoint {
    pub fn new(degree: u32, weights: EdgeWeights) -> Self {
        Self { degree, weights }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct RawSpec {
    graph: TrivalentGraph,
    level: u32,
    #[serde(default)]
    leaf_fixing: Option<Vec<u32>>,
}

/// A graph, a level `L`, and optionally fixed leaf weights `r⃗`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct PolytopeSpec {
    graph: TrivalentGraph,
    level: u32,
    leaf_fixing: Option<Vec<u32>>,
}

impl TryFrom<RawSpec> for PolytopeSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        PolytopeSpec::new(raw.graph, raw.level, raw.leaf_fixing)
    }
}

impl From<PolytopeSpec> for RawSpec {
    fn from(s: PolytopeSpec) -> Self {
        RawSpec {
            graph: s.graph,
            level: s.level,
            leaf_fixing: s.leaf_fixing,
        }
    }
}

impl PolytopeSpec {
    pub fn new(graph: TrivalentGraph, level: u32, leaf_fixing: Option<Vec<u32>>) -> Result<Self> {
        if let Some(r) = &leaf_fixing {
            if r.len() != graph.leaf_count() {
                return Err(Error::ShapeMismatch {
                    expected: graph.leaf_count(),
                    got: r.len(),
                });
            }
        }
        Ok(Self {
            graph,
            level,
            leaf_fixing,
        })
    }

    pub fn free(graph: TrivalentGraph, level: u32) -> Self {
        Self {
            graph,
            level,
            leaf_fixing: None,
        }
    }

    pub fn graph(&self) -> &TrivalentGraph {
        &self.graph
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn leaf_fixing(&self) -> Option<&[u32]> {
        self.leaf_fixing.as_deref()
    }

    /// Same graph and leaves, different level.
    pub fn with_level(&self, level: u32) -> Self {
        Self {
            level,
            ..self.clone()
        }
    }

    /// Fixed value of edge `e` at `degree`, if `e` is a fixed leaf.
    pub fn fixed_value(&self, e: EdgeId, degree: u32) -> Option<u64> {
        let r = self.leaf_fixing.as_ref()?;
        let pos = self.graph.leaf_order().iter().position(|&l| l == e)?;
        Some(r[pos] as u64 * degree as u64)
    }

    pub(crate) fn fixed_values(&self, degree: u32) -> Vec<Option<u64>> {
        let mut out = vec![None; self.graph.edge_count()];
        if let Some(r) = &self.leaf_fixing {
            for (&leaf, &ri) in self.graph.leaf_order().iter().zip(r) {
                out[leaf.0] = Some(ri as u64 * degree as u64);
            }
        }
        out
    }

    /// Determines which characterization of interior points applies.
    pub fn interior_regime(&self) -> Result<InteriorRegime> {
        if self.level == 0 {
            return Err(Error::UnsupportedRegime(
                "at level 0 the polytope is a single point and no inequality can be strict".into(),
            ));
        }
        let Some(r) = &self.leaf_fixing else {
            return Ok(InteriorRegime::LeafFree);
        };
        let Some((genus, leaves)) = self.graph.caterpillar_signature() else {
            return Err(Error::UnsupportedRegime(
                "leaf fixing is only characterized on the caterpillar family".into(),
            ));
        };
        let level = self.level;
        if genus >= 1 && !r.is_empty() && r.iter().all(|&x| 0 < x && x < level) {
            return Ok(InteriorRegime::GenericLeaves);
        }
        if genus >= 2 && leaves == 1 && r[0] == level && level > 0 {
            let leaf = self.graph.leaf_order()[0];
            let (vertex, _) = self.graph.incidence(leaf)[0];
            return Ok(InteriorRegime::OneMarkedAtLevel {
                leaf_vertex: vertex,
            });
        }
        Err(Error::UnsupportedRegime(format!(
            "genus {genus} with leaf weights {r:?} at level {level}: interior points are only \
             characterized for free leaves, 0 < r_i < L (genus >= 1), or one leaf at r = L (genus >= 2)"
        )))
    }

    pub(crate) fn interior_profile(&self) -> Result<InteriorProfile> {
        let regime = self.interior_regime()?;
        let graph = &self.graph;
        let mut vertex_margin = vec![1u8; graph.vertex_count()];
        if let InteriorRegime::OneMarkedAtLevel { leaf_vertex } = regime {
            vertex_margin[leaf_vertex.0] = 0;
        }
        let fixed = self.fixed_values(1);
        let edge_floor = fixed
            .iter()
            .map(|f| if f.is_some() { 0 } else { 1 })
            .collect();
        Ok(InteriorProfile {
            vertex_margin,
            edge_floor,
        })
    }
}

/// Known characterizations of the relative interior by strict inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteriorRegime {
    /// No leaf fixing, any graph: interior iff every inequality is strict.
    LeafFree,
    /// Caterpillar with `0 < r_i < L` and genus ≥ 1: same criterion, the
    /// fixed-leaf equalities are exempt.
    GenericLeaves,
    /// Caterpillar `Γ_{g,1}`, `g ≥ 2`, with `r_1 = L`. At the leaf vertex the
    /// two other slots must sum to `N·L` for every point, so interiority there
    /// reduces to both being positive; everywhere else inequalities are strict.
    OneMarkedAtLevel { leaf_vertex: VertexId },
}

/// Strictness margins used by the interior test and the enumerator.
#[derive(Clone, Debug)]
pub(crate) struct InteriorProfile {
    pub vertex_margin: Vec<u8>,
    pub edge_floor: Vec<u32>,
}

fn check_shape(w: &EdgeWeights, graph: &TrivalentGraph) -> Result<()> {
    if w.len() != graph.edge_count() {
        return Err(Error::ShapeMismatch {
            expected: graph.edge_count(),
            got: w.len(),
        });
    }
    Ok(())
}

/// Vertex constraints with an additive margin: `margin = 0` gives the closed
/// inequalities, `margin = 1` the strict ones.
fn vertex_ok(a: u64, b: u64, c: u64, bound: u64, margin: u64) -> bool {
    a + margin <= b + c && b + margin <= a + c && c + margin <= a + b && a + b + c + margin <= bound
}

fn triple(w: &EdgeWeights, s: [EdgeId; 3]) -> (u64, u64, u64) {
    (w.get(s[0]) as u64, w.get(s[1]) as u64, w.get(s[2]) as u64)
}

/// Membership in the degree-`degree` dilate of the real polytope.
pub fn satisfies(w: &EdgeWeights, spec: &PolytopeSpec, degree: u32) -> Result<bool> {
    let graph = spec.graph();
    check_shape(w, graph)?;
    let bound = 2 * degree as u64 * spec.level() as u64;
    for v in graph.vertices() {
        let (a, b, c) = triple(w, graph.slots(v));
        if !vertex_ok(a, b, c, bound, 0) {
            return Ok(false);
        }
    }
    for (e, fixed) in spec.fixed_values(degree).into_iter().enumerate() {
        if let Some(x) = fixed {
            if w.0[e] as u64 != x {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every vertex triple has even sum (a loop counts twice).
pub fn in_lattice(w: &EdgeWeights, graph: &TrivalentGraph) -> bool {
    w.len() == graph.edge_count()
        && graph.vertices().all(|v| {
            let (a, b, c) = triple(w, graph.slots(v));
            (a + b + c) % 2 == 0
        })
}

/// Whether `w` lies in the relative interior of the degree-`degree` dilate.
///
/// Refuses with [`Error::UnsupportedRegime`] outside the regimes where
/// strictness is known to characterize interiority.
pub fn is_interior(w: &EdgeWeights, spec: &PolytopeSpec, degree: u32) -> Result<bool> {
    let profile = spec.interior_profile()?;
    if !satisfies(w, spec, degree)? {
        return Ok(false);
    }
    Ok(strict_ok(w.as_slice(), spec, degree, &profile))
}

pub(crate) fn strict_ok(
    w: &[u32],
    spec: &PolytopeSpec,
    degree: u32,
    profile: &InteriorProfile,
) -> bool {
    let graph = spec.graph();
    let bound = 2 * degree as u64 * spec.level() as u64;
    if w.iter().zip(&profile.edge_floor).any(|(x, f)| x < f) {
        return false;
    }
    graph.vertices().all(|v| {
        let s = graph.slots(v);
        let (a, b, c) = (w[s[0].0] as u64, w[s[1].0] as u64, w[s[2].0] as u64);
        vertex_ok(a, b, c, bound, profile.vertex_margin[v.0] as u64)
    })
}

/// The weight assigning 2 to every edge, graded so that its ambient level is 4.
pub fn omega(graph: &TrivalentGraph, level: u32) -> Result<GradedPoint> {
    if level == 0 || 4 % level != 0 {
        return Err(Error::LevelMismatch { level });
    }
    Ok(GradedPoint::new(
        4 / level,
        EdgeWeights::constant(graph.edge_count(), 2),
    ))
}

/// Returns `u = v - w` when it is an element of the cone semigroup at degree
/// `v.degree - w.degree`.
pub fn decompose(v: &GradedPoint, w: &GradedPoint, spec: &PolytopeSpec) -> Option<GradedPoint> {
    let degree = v.degree.checked_sub(w.degree)?;
    let u = v.weights.checked_sub(&w.weights)?;
    if !in_lattice(&u, spec.graph()) || !satisfies(&u, spec, degree).ok()? {
        return None;
    }
    Some(GradedPoint::new(degree, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_caterpillar, build_named, NamedGraph};

    fn w(v: &[u32]) -> EdgeWeights {
        EdgeWeights(v.to_vec())
    }

    fn theta(level: u32) -> PolytopeSpec {
        PolytopeSpec::free(build_named(NamedGraph::Theta), level)
    }

    fn trinode(level: u32) -> PolytopeSpec {
        PolytopeSpec::free(build_named(NamedGraph::Trinode), level)
    }

    #[test]
    fn trinode_membership() {
        assert!(satisfies(&w(&[0, 0, 0]), &trinode(1), 1).unwrap());
        for l in 1..6 {
            assert!(satisfies(&w(&[l, l, 0]), &trinode(l), 1).unwrap());
            assert!(satisfies(&w(&[l, 0, l]), &trinode(l), 1).unwrap());
            assert!(!satisfies(&w(&[l, l, l]), &trinode(l), 1).unwrap());
        }
    }

    #[test]
    fn degree_scales_the_level() {
        assert!(!satisfies(&w(&[2, 2, 0]), &trinode(1), 1).unwrap());
        assert!(satisfies(&w(&[2, 2, 0]), &trinode(1), 2).unwrap());
    }

    #[test]
    fn dumbbell_loop_counts_twice() {
        let spec = PolytopeSpec::free(build_named(NamedGraph::Dumbbell), 1);
        // edges: loop, bridge, loop
        assert!(!satisfies(&w(&[1, 1, 0]), &spec, 1).unwrap());
        assert!(!in_lattice(&w(&[1, 1, 0]), spec.graph()));
        assert!(in_lattice(&w(&[1, 0, 1]), spec.graph()));
    }

    #[test]
    fn shape_mismatch() {
        assert_eq!(
            satisfies(&w(&[0, 0]), &trinode(1), 1),
            Err(Error::ShapeMismatch {
                expected: 3,
                got: 2
            })
        );
        assert!(!in_lattice(&w(&[0, 0]), trinode(1).graph()));
    }

    #[test]
    fn lattice_parity() {
        let g = build_named(NamedGraph::Trinode);
        assert!(in_lattice(&w(&[1, 1, 0]), &g));
        assert!(!in_lattice(&w(&[1, 1, 1]), &g));
    }

    #[test]
    fn leaf_fixing_is_scaled() {
        let spec =
            PolytopeSpec::new(build_named(NamedGraph::Trinode), 2, Some(vec![1, 1, 2])).unwrap();
        assert!(satisfies(&w(&[1, 1, 2]), &spec, 1).unwrap());
        assert!(!satisfies(&w(&[1, 1, 2]), &spec, 2).unwrap());
        assert!(satisfies(&w(&[2, 2, 4]), &spec, 2).unwrap());
        assert!(PolytopeSpec::new(build_named(NamedGraph::Trinode), 2, Some(vec![1])).is_err());
    }

    #[test]
    fn interior_examples() {
        assert!(is_interior(&w(&[2, 2, 2]), &theta(4), 1).unwrap());
        assert!(!is_interior(&w(&[1, 1, 0]), &theta(1), 1).unwrap());
        for l in 1..5 {
            assert!(!is_interior(&w(&[l, l, 0]), &trinode(l), 1).unwrap());
        }
    }

    #[test]
    fn interior_regimes() {
        let g21 = build_caterpillar(2, 1).unwrap();
        let generic = PolytopeSpec::new(g21.clone(), 4, Some(vec![2])).unwrap();
        assert_eq!(
            generic.interior_regime().unwrap(),
            InteriorRegime::GenericLeaves
        );
        let at_level = PolytopeSpec::new(g21.clone(), 4, Some(vec![4])).unwrap();
        assert!(matches!(
            at_level.interior_regime().unwrap(),
            InteriorRegime::OneMarkedAtLevel { .. }
        ));
        let zero = PolytopeSpec::new(g21, 4, Some(vec![0])).unwrap();
        assert!(matches!(
            is_interior(&EdgeWeights::zeros(5), &zero, 1),
            Err(Error::UnsupportedRegime(_))
        ));
        let named =
            PolytopeSpec::new(build_named(NamedGraph::ThetaWithLeaf), 4, Some(vec![2])).unwrap();
        assert!(named.interior_regime().is_err());
        let tree =
            PolytopeSpec::new(build_caterpillar(0, 3).unwrap(), 2, Some(vec![1, 1, 1])).unwrap();
        assert!(tree.interior_regime().is_err());
    }

    #[test]
    fn one_marked_point_interior() {
        // Γ_{2,1}: leaf e0 -> (e0,e1,e2), (e1,e2,e3), (e3,e4,e4)
        let spec = PolytopeSpec::new(build_caterpillar(2, 1).unwrap(), 4, Some(vec![4])).unwrap();
        let generator = w(&[4, 2, 2, 2, 2]);
        assert!(is_interior(&generator, &spec, 1).unwrap());
        assert!(!is_interior(&w(&[4, 4, 0, 4, 2]), &spec, 1).unwrap());
    }

    #[test]
    fn omega_levels() {
        let g = build_named(NamedGraph::Theta);
        assert_eq!(omega(&g, 1).unwrap().degree, 4);
        assert_eq!(omega(&g, 2).unwrap().degree, 2);
        assert_eq!(omega(&g, 4).unwrap(), GradedPoint::new(1, w(&[2, 2, 2])));
        assert_eq!(omega(&g, 3), Err(Error::LevelMismatch { level: 3 }));
        let t = build_named(NamedGraph::Trinode);
        assert!(in_lattice(&omega(&t, 1).unwrap().weights, &t));
        let c = build_caterpillar(2, 1).unwrap();
        assert_eq!(omega(&c, 1).unwrap().weights, EdgeWeights::constant(5, 2));
    }

    #[test]
    fn decompose_examples() {
        let spec = theta(1);
        let om = omega(spec.graph(), 1).unwrap();
        assert_eq!(
            decompose(&om, &om, &spec),
            Some(GradedPoint::new(0, EdgeWeights::zeros(3)))
        );
        let v = GradedPoint::new(6, w(&[3, 3, 2]));
        assert_eq!(
            decompose(&v, &om, &spec),
            Some(GradedPoint::new(2, w(&[1, 1, 0])))
        );
        let bad = GradedPoint::new(4, w(&[3, 2, 2]));
        assert_eq!(decompose(&bad, &om, &spec), None);
        assert_eq!(decompose(&om, &v, &spec), None);
    }
}
