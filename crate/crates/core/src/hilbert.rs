//! Hilbert functions of the graded semigroup algebras.
//!
//! `ψ_{g,n}(r⃗, L)` counts lattice points of `P_{Γ_{g,n}}(r⃗, L)` and the graded
//! Hilbert function is `φ_{r⃗,L}(N) = ψ_{g,n}(N·r⃗, N·L)`. Two independent routes
//! compute `ψ`: direct enumeration on the caterpillar, and the factorization
//! recursion through the trinode fusion rule down to a base case with at most
//! one leaf.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_caterpillar, signature_is_feasible};
use crate::polytope::{count_lattice_points, for_each_lattice_point, EnumOptions, PolytopeSpec};

/// Trailing zero coefficients required before an h* numerator is accepted.
pub const EXTRACTION_GUARD: usize = 4;

/// Degrees scanned when computing the ring dimension.
pub const RANK_DEGREES: u32 = 4;

/// The level-`L` fusion rule at a trinode: 1 iff `(a, b, c)` is a lattice
/// point of `P_3(L)`.
pub fn fusion_trinode(a: i64, b: i64, c: i64, level: i64) -> u8 {
    let ok = a >= 0
        && b >= 0
        && c >= 0
        && (a + b + c) % 2 == 0
        && a <= b + c
        && b <= a + c
        && c <= a + b
        && a + b + c <= 2 * level;
    ok as u8
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiMethod {
    Enumerate,
    Recurse,
}

/// Canonical memo key: genus, level and the sorted nonzero weights.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PsiKey {
    pub genus: u32,
    pub level: u32,
    pub weights: Vec<u32>,
}

impl PsiKey {
    pub fn canonical(genus: u32, weights: &[u32], level: u32) -> Self {
        let mut w: Vec<u32> = weights.iter().copied().filter(|&x| x != 0).collect();
        w.sort_unstable();
        Self {
            genus,
            level,
            weights: w,
        }
    }
}

/// Appends vacuum weights until `(g, n)` admits a trivalent graph.
pub fn pad_weights(genus: u32, weights: &[u32]) -> Vec<u32> {
    let mut w = weights.to_vec();
    while !signature_is_feasible(genus, w.len() as u32) {
        w.push(0);
    }
    w
}

/// The caterpillar spec for `ψ_{g,n}(r⃗, L)`, padded with vacua if needed.
pub fn caterpillar_spec(genus: u32, weights: &[u32], level: u32) -> Result<PolytopeSpec> {
    let w = pad_weights(genus, weights);
    let graph = build_caterpillar(genus, w.len() as u32)?;
    PolytopeSpec::new(graph, level, Some(w))
}

/// Memoized evaluator for `ψ`.
///
/// The memo only holds values from the recursive route. Inserting a value
/// that differs from a stored one is an integrity failure.
#[derive(Debug, Default)]
pub struct PsiEngine {
    memo: RwLock<HashMap<PsiKey, BigUint>>,
    opts: EnumOptions,
}

impl PsiEngine {
    pub fn new(opts: EnumOptions) -> Self {
        Self {
            memo: RwLock::new(HashMap::new()),
            opts,
        }
    }

    pub fn options(&self) -> &EnumOptions {
        &self.opts
    }

    pub fn psi(
        &self,
        genus: u32,
        weights: &[u32],
        level: u32,
        method: PsiMethod,
    ) -> Result<BigUint> {
        match method {
            PsiMethod::Enumerate => {
                let spec = caterpillar_spec(genus, weights, level)?;
                Ok(BigUint::from(count_lattice_points(
                    &spec, 1, false, &self.opts,
                )?))
            }
            PsiMethod::Recurse => self.recurse(&PsiKey::canonical(genus, weights, level)),
        }
    }

    /// `Σ_a ψ_{g-1}(r⃗, a, a, L)`: cutting a non-separating edge of a genus-`g`
    /// graph. Only meant as a cross-check of [`PsiEngine::psi`].
    pub fn genus_cut_count(
        &self,
        genus: u32,
        weights: &[u32],
        level: u32,
        method: PsiMethod,
    ) -> Result<BigUint> {
        if genus == 0 {
            return Err(Error::NotApplicable("genus cut needs genus >= 1".into()));
        }
        let mut total = BigUint::zero();
        let mut w = weights.to_vec();
        w.extend([0, 0]);
        let n = w.len();
        for a in 0..=level {
            w[n - 2] = a;
            w[n - 1] = a;
            total += self.psi(genus - 1, &w, level, method)?;
        }
        Ok(total)
    }

    fn recurse(&self, key: &PsiKey) -> Result<BigUint> {
        let level = key.level;
        if key.weights.iter().any(|&x| x > level)
            || key.weights.iter().map(|&x| x as u64).sum::<u64>() % 2 == 1
        {
            return Ok(BigUint::zero());
        }
        if let Some(v) = self.memo.read().expect("memo lock").get(key) {
            return Ok(v.clone());
        }
        let w = pad_weights(key.genus, &key.weights);
        let value = if key.genus == 0 && w.len() == 3 {
            BigUint::from(fusion_trinode(
                w[0] as i64,
                w[1] as i64,
                w[2] as i64,
                level as i64,
            ))
        } else if key.genus >= 1 && w.len() <= 1 {
            self.psi(key.genus, &w, level, PsiMethod::Enumerate)?
        } else {
            // factor off the two largest weights through a trinode
            let (r1, r2) = (w[w.len() - 1] as i64, w[w.len() - 2] as i64);
            let mut rest = w[..w.len() - 2].to_vec();
            rest.push(0);
            let last = rest.len() - 1;
            let mut total = BigUint::zero();
            let lo = (r1 - r2).abs();
            let hi = (r1 + r2).min(2 * level as i64 - r1 - r2);
            let mut a = lo;
            while a <= hi {
                debug_assert_eq!(fusion_trinode(a, r1, r2, level as i64), 1);
                rest[last] = a as u32;
                total += self.recurse(&PsiKey::canonical(key.genus, &rest, level))?;
                a += 2;
            }
            total
        };
        self.insert(key.clone(), value.clone())?;
        Ok(value)
    }

    fn insert(&self, key: PsiKey, value: BigUint) -> Result<()> {
        let mut memo = self.memo.write().expect("memo lock");
        match memo.get(&key) {
            Some(old) if *old != value => Err(Error::Integrity(format!(
                "memo divergence for {key:?}: stored {old}, computed {value}"
            ))),
            Some(_) => Ok(()),
            None => {
                memo.insert(key, value);
                Ok(())
            }
        }
    }

    /// Loads previously computed values. Conflicting entries are rejected.
    pub fn seed<I>(&self, entries: I) -> Result<()>
    where
        I: IntoIterator<Item = (PsiKey, BigUint)>,
    {
        for (k, v) in entries {
            self.insert(k, v)?;
        }
        Ok(())
    }

    /// All memo entries in key order.
    pub fn snapshot(&self) -> Vec<(PsiKey, BigUint)> {
        let memo = self.memo.read().expect("memo lock");
        let mut out: Vec<_> = memo.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }

    /// `φ(N) = ψ_{g,n}(N·r⃗, N·L)` for `N = 0..=n_max` via the recursion, with
    /// the ring dimension taken from the caterpillar spec.
    pub fn caterpillar_hilbert(
        &self,
        genus: u32,
        weights: &[u32],
        level: u32,
        n_max: u32,
    ) -> Result<HilbertData> {
        let spec = caterpillar_spec(genus, weights, level)?;
        let ring_dim = ring_dimension(&spec, n_max.min(RANK_DEGREES), &self.opts)?;
        let mut values = Vec::with_capacity(n_max as usize + 1);
        for n in 0..=n_max {
            let scaled: Vec<u32> = weights.iter().map(|&x| x * n).collect();
            values.push(self.psi(genus, &scaled, level * n, PsiMethod::Recurse)?);
        }
        Ok(HilbertData::from_values(values, ring_dim))
    }
}

/// Exact Hilbert function values with derived series data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertData {
    #[serde(with = "crate::decimal::biguint_vec")]
    pub values: Vec<BigUint>,
    pub ring_dim: usize,
    /// Numerator of the series over `(1 - t^period)^ring_dim`.
    #[serde(with = "crate::decimal::bigint_vec_opt")]
    pub hstar: Option<Vec<BigInt>>,
    pub period: Option<u32>,
}

impl HilbertData {
    pub fn from_values(values: Vec<BigUint>, ring_dim: usize) -> Self {
        let (hstar, period) = match extract_hstar(&values, ring_dim) {
            Some((h, p)) => (Some(h), Some(p)),
            None => (None, None),
        };
        Self {
            values,
            ring_dim,
            hstar,
            period,
        }
    }

    pub fn n_max(&self) -> u32 {
        self.values.len() as u32 - 1
    }
}

/// `values · (1 - t^p)^d`, truncated to the length of `values`.
fn times_denominator(values: &[BigUint], d: usize, p: usize) -> Vec<BigInt> {
    let mut cur: Vec<BigInt> = values.iter().map(|x| BigInt::from(x.clone())).collect();
    for _ in 0..d {
        for i in (p..cur.len()).rev() {
            let prev = cur[i - p].clone();
            cur[i] -= prev;
        }
    }
    cur
}

/// Tries denominator periods 1 then 2. Succeeds when the product vanishes on
/// at least [`EXTRACTION_GUARD`] trailing coefficients.
pub fn extract_hstar(values: &[BigUint], ring_dim: usize) -> Option<(Vec<BigInt>, u32)> {
    for p in [1usize, 2] {
        let prod = times_denominator(values, ring_dim, p);
        let Some(last) = prod.iter().rposition(|x| !x.is_zero()) else {
            continue;
        };
        if prod.len() - 1 - last >= EXTRACTION_GUARD {
            let mut h = prod;
            h.truncate(last + 1);
            return Some((h, p as u32));
        }
    }
    None
}

/// Outcome of the palindromicity test on the h* numerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanleyReport {
    pub symmetric: bool,
    pub a_invariant: Option<i64>,
}

pub fn stanley_check(h: &HilbertData) -> Result<StanleyReport> {
    let (Some(hstar), Some(period)) = (&h.hstar, h.period) else {
        return Err(Error::ExtractionFailed(format!(
            "numerator did not stabilize within N_max = {} for period 1 or 2 (ring dimension {})",
            h.n_max(),
            h.ring_dim
        )));
    };
    let symmetric = hstar.iter().eq(hstar.iter().rev());
    let deg = hstar.len() as i64 - 1;
    Ok(StanleyReport {
        symmetric,
        a_invariant: Some(deg - period as i64 * h.ring_dim as i64),
    })
}

/// Hilbert function of `spec` by enumeration at every degree `0..=n_max`.
pub fn hilbert_function(
    spec: &PolytopeSpec,
    n_max: u32,
    opts: &EnumOptions,
) -> Result<HilbertData> {
    let ring_dim = ring_dimension(spec, n_max.min(RANK_DEGREES), opts)?;
    let mut values = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max {
        values.push(BigUint::from(count_lattice_points(spec, n, false, opts)?));
    }
    debug_assert!(values[0].is_one());
    Ok(HilbertData::from_values(values, ring_dim))
}

/// Extends the table one degree at a time until the numerator stabilizes or
/// `n_cap` is reached.
pub fn hilbert_function_adaptive(
    spec: &PolytopeSpec,
    n_cap: u32,
    opts: &EnumOptions,
) -> Result<HilbertData> {
    let ring_dim = ring_dimension(spec, n_cap.min(RANK_DEGREES), opts)?;
    let mut values = Vec::new();
    for n in 0..=n_cap {
        values.push(BigUint::from(count_lattice_points(spec, n, false, opts)?));
        if extract_hstar(&values, ring_dim).is_some() {
            break;
        }
    }
    Ok(HilbertData::from_values(values, ring_dim))
}

/// Krull dimension: rank of the vectors `(w, N)` over all lattice points at
/// degrees `1..=max_degree`.
pub fn ring_dimension(spec: &PolytopeSpec, max_degree: u32, opts: &EnumOptions) -> Result<usize> {
    let free = spec.graph().edge_count() - spec.leaf_fixing().map_or(0, |r| r.len());
    let cap = free + 1;
    let mut echelon = Echelon::default();
    for n in 1..=max_degree {
        for_each_lattice_point(spec, n, false, opts, |w| {
            let mut v: Vec<i128> = w.iter().map(|&x| x as i128).collect();
            v.push(n as i128);
            echelon.insert(v);
            if echelon.rank() >= cap {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        if echelon.rank() >= cap {
            break;
        }
    }
    Ok(echelon.rank())
}

/// Row echelon form over the integers, rows kept primitive.
#[derive(Default)]
struct Echelon {
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, mut v: Vec<i128>) -> bool {
        for (pivot, row) in &self.rows {
            let x = v[*pivot];
            if x == 0 {
                continue;
            }
            let y = row[*pivot];
            let g = x.gcd(&y);
            let (mx, my) = (y / g, x / g);
            for (a, b) in v.iter_mut().zip(row) {
                *a = *a * mx - *b * my;
            }
            primitive(&mut v);
        }
        let Some(pivot) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let at = self.rows.partition_point(|(p, _)| *p < pivot);
        self.rows.insert(at, (pivot, v));
        true
    }
}

fn primitive(v: &mut [i128]) {
    let g = v.iter().fold(0i128, |g, x| g.gcd(x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

/// Signed coefficient list as plain integers, for display.
pub fn hstar_to_string(h: &[BigInt]) -> String {
    let parts: Vec<String> = h.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_named, NamedGraph};
    use crate::polytope::{in_lattice, satisfies, EdgeWeights};

    fn engine() -> PsiEngine {
        PsiEngine::new(EnumOptions::default())
    }

    #[test]
    fn fusion_matches_membership() {
        let tri = build_named(NamedGraph::Trinode);
        for level in 0..=6u32 {
            let spec = PolytopeSpec::free(tri.clone(), level);
            for a in 0..=level + 1 {
                for b in 0..=level + 1 {
                    for c in 0..=level + 1 {
                        let w = EdgeWeights(vec![a, b, c]);
                        let member = in_lattice(&w, &tri) && satisfies(&w, &spec, 1).unwrap();
                        let f = fusion_trinode(a as i64, b as i64, c as i64, level as i64);
                        assert_eq!(f == 1, member, "{a} {b} {c} L={level}");
                    }
                }
            }
        }
        assert_eq!(fusion_trinode(-1, 1, 0, 3), 0);
    }

    #[test]
    fn small_values() {
        let e = engine();
        for m in [PsiMethod::Enumerate, PsiMethod::Recurse] {
            assert_eq!(e.psi(2, &[], 1, m).unwrap(), BigUint::from(4u32));
            assert_eq!(e.psi(0, &[1, 1, 0], 1, m).unwrap(), BigUint::from(1u32));
            assert_eq!(e.psi(2, &[3], 1, m).unwrap(), BigUint::zero());
        }
    }

    #[test]
    fn genus_cut_examples() {
        let e = engine();
        let m = PsiMethod::Recurse;
        assert_eq!(
            e.genus_cut_count(2, &[], 1, m).unwrap(),
            BigUint::from(4u32)
        );
        assert_eq!(
            e.genus_cut_count(1, &[0], 1, m).unwrap(),
            e.psi(1, &[0], 1, PsiMethod::Enumerate).unwrap()
        );
        assert_eq!(
            e.genus_cut_count(2, &[2], 4, PsiMethod::Enumerate).unwrap(),
            e.psi(2, &[2], 4, m).unwrap()
        );
        assert!(e.genus_cut_count(0, &[1, 1, 0], 1, m).is_err());
    }

    #[test]
    fn memo_divergence_is_fatal() {
        let e = engine();
        let key = PsiKey::canonical(2, &[], 1);
        e.seed([(key.clone(), BigUint::from(4u32))]).unwrap();
        assert!(matches!(
            e.seed([(key, BigUint::from(5u32))]),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn theta_a_invariants() {
        let opts = EnumOptions::default();
        for (level, a) in [(1u32, -4i64), (2, -2), (4, -1)] {
            let spec = PolytopeSpec::free(build_named(NamedGraph::Theta), level);
            let h = hilbert_function(&spec, 10, &opts).unwrap();
            assert_eq!(h.ring_dim, 4);
            let s = stanley_check(&h).unwrap();
            assert!(s.symmetric, "L={level} {:?}", h.hstar);
            assert_eq!(s.a_invariant, Some(a));
        }
        let spec = PolytopeSpec::free(build_named(NamedGraph::Theta), 3);
        let h = hilbert_function(&spec, 10, &opts).unwrap();
        assert!(!stanley_check(&h).unwrap().symmetric);
    }

    #[test]
    fn zero_fixing_is_constant_one() {
        let spec =
            PolytopeSpec::new(build_named(NamedGraph::Trinode), 1, Some(vec![0, 0, 0])).unwrap();
        let h = hilbert_function(&spec, 6, &EnumOptions::default()).unwrap();
        assert!(h.values.iter().all(|v| v.is_one()));
        assert_eq!(h.ring_dim, 1);
        assert_eq!(h.hstar, Some(vec![BigInt::one()]));
    }

    #[test]
    fn extraction_failure_is_reported() {
        let spec = PolytopeSpec::free(build_named(NamedGraph::Theta), 1);
        let h = hilbert_function(&spec, 2, &EnumOptions::default()).unwrap();
        assert!(matches!(stanley_check(&h), Err(Error::ExtractionFailed(_))));
    }

    #[test]
    fn period_two_when_odd_degrees_are_empty() {
        let h = engine().caterpillar_hilbert(2, &[1], 2, 16).unwrap();
        assert!(h.values.iter().skip(1).step_by(2).all(|v| v.is_zero()));
        assert_eq!(h.period, Some(2));
    }

    #[test]
    fn rank_of_echelon() {
        let mut e = Echelon::default();
        assert!(e.insert(vec![2, 4, 0]));
        assert!(!e.insert(vec![1, 2, 0]));
        assert!(e.insert(vec![0, 3, 3]));
        assert!(!e.insert(vec![2, 7, 3]));
        assert!(e.insert(vec![0, 0, 5]));
        assert_eq!(e.rank(), 3);
    }
}
