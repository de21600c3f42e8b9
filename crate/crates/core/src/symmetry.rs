//! Symmetries of `ψ` and the canonical reduction of weight signatures.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_caterpillar, build_named, NamedGraph, TrivalentGraph};
use crate::hilbert::{PsiEngine, PsiMethod};
use crate::polytope::{count_lattice_points, EnumOptions, PolytopeSpec};

/// The involution `(x, y, z) ↦ (L - x, L - y, z)` of `P_3(L)`.
pub fn trinode_flip(a: i64, b: i64, c: i64, level: i64) -> (i64, i64, i64) {
    (level - a, level - b, c)
}

/// Arguments `(g, r⃗, L)` of `ψ_{g,n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightSignature {
    pub genus: u32,
    pub weights: Vec<u32>,
    pub level: u32,
}

impl WeightSignature {
    pub fn new(genus: u32, weights: Vec<u32>, level: u32) -> Self {
        Self {
            genus,
            weights,
            level,
        }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }
}

impl fmt::Display for WeightSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g={} r={:?} L={}", self.genus, self.weights, self.level)
    }
}

/// One rewrite applied by [`normalize`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum ReductionStep {
    DropVacuum { count: usize },
    Flip { from: (u32, u32), to: (u32, u32) },
    Sort,
}

/// Greedy canonical form. Ends with all `0 < r_i < L`, with `n = 1` and
/// `r_1 = L`, or with `n = 0`.
pub fn normalize(sig: &WeightSignature) -> Result<WeightSignature> {
    normalize_with_trace(sig).map(|(s, _)| s)
}

pub fn normalize_with_trace(
    sig: &WeightSignature,
) -> Result<(WeightSignature, Vec<ReductionStep>)> {
    normalize_by(sig, |w, i| {
        // largest other entry, lowest index on ties
        (0..w.len())
            .filter(|&j| j != i)
            .max_by_key(|&j| (w[j], std::cmp::Reverse(j)))
            .expect("n >= 2")
    })
}

/// [`normalize`] with a caller-chosen flip partner for the entry at `i`.
pub fn normalize_by<F>(
    sig: &WeightSignature,
    mut partner: F,
) -> Result<(WeightSignature, Vec<ReductionStep>)>
where
    F: FnMut(&[u32], usize) -> usize,
{
    let level = sig.level;
    if let Some(&bad) = sig.weights.iter().find(|&&x| x > level) {
        return Err(Error::InfeasibleSignature(format!(
            "weight {bad} exceeds level {level}; the polytope is empty"
        )));
    }
    let mut w = sig.weights.clone();
    let mut trace = Vec::new();
    loop {
        let before = w.len();
        w.retain(|&x| x != 0);
        if w.len() < before {
            trace.push(ReductionStep::DropVacuum {
                count: before - w.len(),
            });
            continue;
        }
        if w.len() >= 2 {
            if let Some(i) = w.iter().position(|&x| x == level) {
                let j = partner(&w, i);
                assert!(j != i && j < w.len(), "flip partner must be another entry");
                let from = (w[i], w[j]);
                w[i] = 0;
                w[j] = level - w[j];
                trace.push(ReductionStep::Flip {
                    from,
                    to: (w[i], w[j]),
                });
                continue;
            }
        }
        break;
    }
    if !w.windows(2).all(|p| p[0] <= p[1]) {
        w.sort_unstable();
        trace.push(ReductionStep::Sort);
    }
    if sig.genus == 0 && w.len() < 3 {
        return Err(Error::InfeasibleSignature(format!(
            "genus 0 reduces to {} leaves; fewer than 3 is outside the classification",
            w.len()
        )));
    }
    Ok((WeightSignature::new(sig.genus, w, level), trace))
}

/// Source of counts for the identity suite.
pub trait CountOracle: Sync {
    fn psi(&self, genus: u32, weights: &[u32], level: u32) -> Result<BigUint>;
    fn count(&self, spec: &PolytopeSpec, degree: u32) -> Result<BigUint>;
}

/// Counts by direct enumeration on the caterpillar family.
pub struct EnumerationOracle {
    engine: PsiEngine,
}

impl EnumerationOracle {
    pub fn new(opts: EnumOptions) -> Self {
        Self {
            engine: PsiEngine::new(opts),
        }
    }
}

impl CountOracle for EnumerationOracle {
    fn psi(&self, genus: u32, weights: &[u32], level: u32) -> Result<BigUint> {
        self.engine.psi(genus, weights, level, PsiMethod::Enumerate)
    }

    fn count(&self, spec: &PolytopeSpec, degree: u32) -> Result<BigUint> {
        Ok(BigUint::from(count_lattice_points(
            spec,
            degree,
            false,
            self.engine.options(),
        )?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    Vacuum,
    Permutation,
    Factorization,
    Flip,
    FlipSeries,
    GraphIndependence,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::Vacuum,
        Identity::Permutation,
        Identity::Factorization,
        Identity::Flip,
        Identity::FlipSeries,
        Identity::GraphIndependence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Vacuum => "vacuum",
            Identity::Permutation => "permutation",
            Identity::Factorization => "factorization",
            Identity::Flip => "flip",
            Identity::FlipSeries => "flip_series",
            Identity::GraphIndependence => "graph_independence",
        }
    }
}

impl std::str::FromStr for Identity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Identity::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown identity `{s}`")))
    }
}

/// Bounded grid over which identities are evaluated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpace {
    pub max_genus: u32,
    pub max_leaves: u32,
    pub max_level: u32,
    /// Degrees checked by the series identities.
    pub max_degree: u32,
    pub identities: Vec<Identity>,
}

impl Default for SampleSpace {
    fn default() -> Self {
        Self {
            max_genus: 2,
            max_leaves: 3,
            max_level: 4,
            max_degree: 3,
            identities: Identity::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub identity: Identity,
    pub input: String,
    #[serde(with = "crate::decimal::biguint")]
    pub lhs: BigUint,
    #[serde(with = "crate::decimal::biguint")]
    pub rhs: BigUint,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Number of equalities evaluated, per identity.
    pub checked: Vec<(Identity, u64)>,
    pub violations: Vec<Violation>,
}

impl IdentityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(
        &mut self,
        identity: Identity,
        input: impl FnOnce() -> String,
        lhs: BigUint,
        rhs: BigUint,
    ) {
        match self.checked.iter_mut().find(|(i, _)| *i == identity) {
            Some((_, n)) => *n += 1,
            None => self.checked.push((identity, 1)),
        }
        if lhs != rhs {
            self.violations.push(Violation {
                identity,
                input: input(),
                lhs,
                rhs,
            });
        }
    }
}

/// All weight vectors of length `n` with entries in `0..=max`.
pub fn weight_grid(n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn permutations(w: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![w.to_vec()];
    let mut cur = w.to_vec();
    cur.sort_unstable();
    // lexicographic successors of the sorted vector visit every distinct order
    out.push(cur.clone());
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

fn next_permutation(v: &mut [u32]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn flipped(w: &[u32], i: usize, j: usize, level: u32) -> Vec<u32> {
    let mut f = w.to_vec();
    f[i] = level - w[i];
    f[j] = level - w[j];
    f
}

/// Evaluates the selected identities as exact equalities over the grid.
pub fn verify_identities(space: &SampleSpace, oracle: &dyn CountOracle) -> Result<IdentityReport> {
    let mut report = IdentityReport::default();
    let wants = |i: Identity| space.identities.contains(&i);
    for g in 0..=space.max_genus {
        for level in 0..=space.max_level {
            for n in 0..=space.max_leaves as usize {
                for r in weight_grid(n, level) {
                    let here = || format!("g={g} r={r:?} L={level}");
                    let base = oracle.psi(g, &r, level)?;
                    if wants(Identity::Vacuum) {
                        let mut padded = r.clone();
                        padded.push(0);
                        let rhs = oracle.psi(g, &padded, level)?;
                        report.record(Identity::Vacuum, here, base.clone(), rhs);
                    }
                    if wants(Identity::Permutation) {
                        for p in permutations(&r) {
                            let rhs = oracle.psi(g, &p, level)?;
                            report.record(
                                Identity::Permutation,
                                || format!("{} as {p:?}", here()),
                                base.clone(),
                                rhs,
                            );
                        }
                    }
                    if wants(Identity::Factorization) && n >= 2 {
                        let mut rhs = BigUint::default();
                        let mut rest = vec![0];
                        rest.extend_from_slice(&r[2..]);
                        for a in 0..=level {
                            let f = crate::hilbert::fusion_trinode(
                                a as i64,
                                r[0] as i64,
                                r[1] as i64,
                                level as i64,
                            );
                            if f == 1 {
                                rest[0] = a;
                                rhs += oracle.psi(g, &rest, level)?;
                            }
                        }
                        report.record(Identity::Factorization, here, base.clone(), rhs);
                    }
                    for i in 0..n {
                        for j in i + 1..n {
                            if wants(Identity::Flip) {
                                let rhs = oracle.psi(g, &flipped(&r, i, j, level), level)?;
                                report.record(
                                    Identity::Flip,
                                    || format!("{} flip ({i},{j})", here()),
                                    base.clone(),
                                    rhs,
                                );
                            }
                            if wants(Identity::FlipSeries) {
                                for d in 1..=space.max_degree {
                                    let scale =
                                        |w: &[u32]| w.iter().map(|x| x * d).collect::<Vec<_>>();
                                    let lhs = oracle.psi(g, &scale(&r), level * d)?;
                                    let rhs = oracle.psi(
                                        g,
                                        &scale(&flipped(&r, i, j, level)),
                                        level * d,
                                    )?;
                                    report.record(
                                        Identity::FlipSeries,
                                        || format!("{} flip ({i},{j}) N={d}", here()),
                                        lhs,
                                        rhs,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if wants(Identity::GraphIndependence) {
        graph_independence(space, oracle, &mut report)?;
    }
    Ok(report)
}

/// Groups of graphs sharing `(β_1, n)`: the caterpillar first, then alternates.
pub fn alternate_graphs(max_genus: u32) -> Vec<(String, Vec<(String, TrivalentGraph)>)> {
    let named = |n: NamedGraph| (n.name().to_string(), build_named(n));
    let cat = |g: u32, n: u32| {
        (
            format!("caterpillar({g},{n})"),
            build_caterpillar(g, n).expect("feasible"),
        )
    };
    let mut groups = vec![
        (
            "(0,3)".to_string(),
            vec![cat(0, 3), named(NamedGraph::Trinode)],
        ),
        (
            "(1,1)".to_string(),
            vec![cat(1, 1), named(NamedGraph::LoopWithLeaf)],
        ),
    ];
    if max_genus >= 2 {
        groups.push((
            "(2,0)".to_string(),
            vec![
                cat(2, 0),
                named(NamedGraph::Theta),
                named(NamedGraph::Dumbbell),
            ],
        ));
        groups.push((
            "(2,1)".to_string(),
            vec![
                cat(2, 1),
                named(NamedGraph::ThetaWithLeaf),
                named(NamedGraph::TwinLoopsWithLeaf),
            ],
        ));
    }
    groups
}

fn graph_independence(
    space: &SampleSpace,
    oracle: &dyn CountOracle,
    report: &mut IdentityReport,
) -> Result<()> {
    for (label, graphs) in alternate_graphs(space.max_genus) {
        let (ref_name, reference) = &graphs[0];
        let n = reference.leaf_count();
        for level in 0..=space.max_level {
            let mut fixings: Vec<Option<Vec<u32>>> = vec![None];
            fixings.extend(weight_grid(n, level).into_iter().map(Some));
            for fixing in fixings {
                let degrees = if fixing.is_none() {
                    space.max_degree.max(1)
                } else {
                    1
                };
                for d in 1..=degrees {
                    let lhs = oracle.count(
                        &PolytopeSpec::new(reference.clone(), level, fixing.clone())?,
                        d,
                    )?;
                    for (name, alt) in &graphs[1..] {
                        let rhs = oracle
                            .count(&PolytopeSpec::new(alt.clone(), level, fixing.clone())?, d)?;
                        report.record(
                            Identity::GraphIndependence,
                            || {
                                format!(
                                    "{label}: {ref_name} vs {name} L={level} r={fixing:?} N={d}"
                                )
                            },
                            lhs.clone(),
                            rhs,
                        );
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::fusion_trinode;

    fn sig(g: u32, r: &[u32], level: u32) -> WeightSignature {
        WeightSignature::new(g, r.to_vec(), level)
    }

    #[test]
    fn flip_examples() {
        assert_eq!(trinode_flip(0, 0, 0, 5), (5, 5, 0));
        assert_eq!(trinode_flip(5, 5, 0, 5), (0, 0, 0));
        assert_eq!(trinode_flip(1, 0, 1, 2), (1, 2, 1));
        for level in 0..=6i64 {
            for a in 0..=level {
                for b in 0..=level {
                    for c in 0..=level {
                        let (x, y, z) = trinode_flip(a, b, c, level);
                        assert_eq!(trinode_flip(x, y, z, level), (a, b, c));
                        assert_eq!(
                            fusion_trinode(a, b, c, level),
                            fusion_trinode(x, y, z, level)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&sig(2, &[0, 3], 3)).unwrap(), sig(2, &[3], 3));
        assert_eq!(normalize(&sig(2, &[4, 1], 4)).unwrap(), sig(2, &[3], 4));
        assert_eq!(normalize(&sig(2, &[2, 2], 4)).unwrap(), sig(2, &[2, 2], 4));
        assert_eq!(normalize(&sig(2, &[4, 4], 4)).unwrap(), sig(2, &[], 4));
        assert_eq!(
            normalize(&sig(2, &[3, 1, 2], 4)).unwrap(),
            sig(2, &[1, 2, 3], 4)
        );
        assert!(matches!(
            normalize(&sig(0, &[1, 1, 0], 2)),
            Err(Error::InfeasibleSignature(_))
        ));
        assert!(matches!(
            normalize(&sig(2, &[5], 4)),
            Err(Error::InfeasibleSignature(_))
        ));
    }

    #[test]
    fn trace_records_steps() {
        let (s, trace) = normalize_with_trace(&sig(2, &[4, 0, 1], 4)).unwrap();
        assert_eq!(s, sig(2, &[3], 4));
        assert_eq!(
            trace,
            vec![
                ReductionStep::DropVacuum { count: 1 },
                ReductionStep::Flip {
                    from: (4, 1),
                    to: (0, 3)
                },
                ReductionStep::DropVacuum { count: 1 },
            ]
        );
    }

    #[test]
    fn reduced_forms_are_terminal() {
        for level in 1..=4 {
            for n in 0..=4 {
                for r in weight_grid(n, level) {
                    let s = normalize(&sig(2, &r, level)).unwrap();
                    let generic = s.weights.iter().all(|&x| 0 < x && x < level);
                    let one_marked = s.weights == [level];
                    assert!(generic || one_marked, "{r:?} L={level} -> {s}");
                }
            }
        }
    }

    #[test]
    fn permutations_cover_distinct_orders() {
        let p = permutations(&[2, 1, 1]);
        let mut distinct: Vec<_> = p.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 3);
    }

    struct Faulty(EnumerationOracle);

    impl CountOracle for Faulty {
        fn psi(&self, genus: u32, weights: &[u32], level: u32) -> Result<BigUint> {
            let v = self.0.psi(genus, weights, level)?;
            // break vacuum propagation for one trailing zero
            Ok(if weights.last() == Some(&0) && weights.len() == 2 {
                v + 1u32
            } else {
                v
            })
        }

        fn count(&self, spec: &PolytopeSpec, degree: u32) -> Result<BigUint> {
            self.0.count(spec, degree)
        }
    }

    #[test]
    fn identity_suite_small_grid() {
        let space = SampleSpace {
            max_genus: 2,
            max_leaves: 2,
            max_level: 2,
            max_degree: 2,
            identities: Identity::ALL.to_vec(),
        };
        let report =
            verify_identities(&space, &EnumerationOracle::new(EnumOptions::default())).unwrap();
        assert!(report.is_clean(), "{:?}", report.violations);
        assert_eq!(report.checked.len(), Identity::ALL.len());
        let faulty = Faulty(EnumerationOracle::new(EnumOptions::default()));
        let report = verify_identities(&space, &faulty).unwrap();
        assert!(!report.is_clean());
    }
}
