//! Gorenstein decisions with re-checkable certificates.
//!
//! The graded semigroup `S` of lattice points of the cone over the polytope is
//! Gorenstein iff its interior points are `ω_a + S` for a single interior
//! point `ω_a` of minimal degree `a`. Since `u ↦ u + ω_a` injects `S_{N-a}`
//! into the interior points of degree `N`, every interior point decomposes iff
//! the two sets have the same size, which is what the bounded check compares.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_caterpillar, EdgeId, TrivalentGraph};
use crate::hilbert::caterpillar_spec;
use crate::polytope::{
    count_lattice_points, decompose, enumerate_lattice_points, for_each_lattice_point, in_lattice,
    is_interior, omega, satisfies, EdgeWeights, EnumOptions, GradedPoint, InteriorRegime,
    PolytopeSpec,
};
use crate::symmetry::{normalize_with_trace, ReductionStep, WeightSignature};

/// Search bound for the minimal interior degree when none is given.
pub const DEFAULT_SEARCH_DEGREE: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Gorenstein,
    NotGorenstein,
    InconclusiveUpToBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Semigroup,
    OmegaStructure,
    TheoremFastpath,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Two distinct interior points at the minimal interior degree.
    TwoInteriorPoints {
        degree: u32,
        first: EdgeWeights,
        second: EdgeWeights,
    },
    /// An interior point `v` such that `v - generator` is not in the semigroup.
    FailedDecomposition {
        point: GradedPoint,
        generator: GradedPoint,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub original: WeightSignature,
    pub reduced: WeightSignature,
    pub trace: Vec<ReductionStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GorensteinCertificate {
    pub verdict: Verdict,
    pub method: Method,
    pub generator: Option<GradedPoint>,
    pub a_invariant: Option<i64>,
    pub witness: Option<Witness>,
    pub checked_bound: u32,
    pub spec: PolytopeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<Reduction>,
    /// `Some(true)` when the verdict was confirmed by the bounded semigroup
    /// check, `Some(false)` when that check ran out of budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosschecked: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl GorensteinCertificate {
    fn bare(spec: &PolytopeSpec, verdict: Verdict, method: Method, checked_bound: u32) -> Self {
        Self {
            verdict,
            method,
            generator: None,
            a_invariant: None,
            witness: None,
            checked_bound,
            spec: spec.clone(),
            reduction: None,
            crosschecked: None,
            note: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Interior lattice points at `degree`, at most `limit` of them.
fn interior_points(
    spec: &PolytopeSpec,
    degree: u32,
    limit: usize,
    opts: &EnumOptions,
) -> Result<Vec<EdgeWeights>> {
    let mut out = Vec::new();
    for_each_lattice_point(spec, degree, true, opts, |w| {
        out.push(EdgeWeights(w.to_vec()));
        if out.len() >= limit {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(out)
}

/// Smallest degree `a ≤ max_degree` with an interior lattice point, with all
/// interior points there.
pub fn minimal_interior_degree(
    spec: &PolytopeSpec,
    max_degree: u32,
    opts: &EnumOptions,
) -> Result<Option<(u32, Vec<EdgeWeights>)>> {
    spec.interior_regime()?;
    for n in 1..=max_degree {
        if count_lattice_points(spec, n, true, opts)? > 0 {
            return Ok(Some((n, enumerate_lattice_points(spec, n, true, opts)?)));
        }
    }
    Ok(None)
}

/// Bounded check of the semigroup criterion. A positive outcome is only
/// reported as [`Verdict::InconclusiveUpToBound`].
pub fn check_semigroup_criterion(
    spec: &PolytopeSpec,
    max_degree: Option<u32>,
    opts: &EnumOptions,
) -> Result<GorensteinCertificate> {
    spec.interior_regime()?;
    let search = max_degree.unwrap_or(DEFAULT_SEARCH_DEGREE);
    let mut a = None;
    for n in 1..=search {
        let count = count_lattice_points(spec, n, true, opts)?;
        if count > 0 {
            a = Some((n, count));
            break;
        }
    }
    let Some((a, count)) = a else {
        return Ok(GorensteinCertificate::bare(
            spec,
            Verdict::InconclusiveUpToBound,
            Method::Semigroup,
            search,
        ));
    };
    if count >= 2 {
        let pts = interior_points(spec, a, 2, opts)?;
        let mut cert =
            GorensteinCertificate::bare(spec, Verdict::NotGorenstein, Method::Semigroup, a);
        cert.witness = Some(Witness::TwoInteriorPoints {
            degree: a,
            first: pts[0].clone(),
            second: pts[1].clone(),
        });
        return Ok(cert);
    }
    let generator = GradedPoint::new(a, interior_points(spec, a, 1, opts)?.remove(0));
    let bound = max_degree.unwrap_or(2 * a + 8);
    for n in a + 1..=bound {
        let interior = count_lattice_points(spec, n, true, opts)?;
        let shifted = count_lattice_points(spec, n - a, false, opts)?;
        if interior < shifted {
            return Err(Error::Integrity(format!(
                "degree {n}: {shifted} translates of the generator but only {interior} interior points"
            )));
        }
        if interior > shifted {
            let point = find_failed_decomposition(spec, n, &generator, opts)?;
            let mut cert =
                GorensteinCertificate::bare(spec, Verdict::NotGorenstein, Method::Semigroup, n);
            cert.generator = Some(generator.clone());
            cert.witness = Some(Witness::FailedDecomposition { point, generator });
            return Ok(cert);
        }
    }
    let mut cert = GorensteinCertificate::bare(
        spec,
        Verdict::InconclusiveUpToBound,
        Method::Semigroup,
        bound,
    );
    cert.a_invariant = Some(-(a as i64));
    cert.generator = Some(generator);
    Ok(cert)
}

fn find_failed_decomposition(
    spec: &PolytopeSpec,
    degree: u32,
    generator: &GradedPoint,
    opts: &EnumOptions,
) -> Result<GradedPoint> {
    let mut found = None;
    for_each_lattice_point(spec, degree, true, opts, |w| {
        let v = GradedPoint::new(degree, EdgeWeights(w.to_vec()));
        if decompose(&v, generator, spec).is_none() {
            found = Some(v);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    found.ok_or_else(|| {
        Error::Integrity(format!(
            "count mismatch at degree {degree} but every point decomposes"
        ))
    })
}

/// Interior points at `degree` of a leaf-free spec, compared with `ω_Γ`
/// plus the points at level `degree·L - 4`. Returns the interior count.
pub fn check_interior_translate(
    spec: &PolytopeSpec,
    degree: u32,
    opts: &EnumOptions,
) -> Result<usize> {
    if spec.leaf_fixing().is_some() {
        return Err(Error::NotApplicable(
            "interior translate check needs free leaves".into(),
        ));
    }
    let interior: BTreeSet<EdgeWeights> = enumerate_lattice_points(spec, degree, true, opts)?
        .into_iter()
        .collect();
    let total = degree * spec.level();
    let shifted: BTreeSet<EdgeWeights> = if total >= 4 {
        let omega = EdgeWeights::constant(spec.graph().edge_count(), 2);
        enumerate_lattice_points(&spec.with_level(total - 4), 1, false, opts)?
            .into_iter()
            .map(|u| u.add(&omega))
            .collect()
    } else {
        BTreeSet::new()
    };
    if interior != shifted {
        return Err(Error::Integrity(format!(
            "degree {degree}: {} interior points but {} translates of omega",
            interior.len(),
            shifted.len()
        )));
    }
    Ok(interior.len())
}

/// Unconditional verdict for free leaves: interior points are exactly
/// `ω_Γ + P_Γ(ℓ - 4)`, so the ring is Gorenstein iff `L` divides 4.
pub fn check_via_omega_structure(
    graph: &TrivalentGraph,
    level: u32,
    opts: &EnumOptions,
) -> Result<GorensteinCertificate> {
    let spec = PolytopeSpec::free(graph.clone(), level);
    spec.interior_regime()?;
    let a = 4u32.div_ceil(level);
    for n in 1..=a + 2 {
        let count = check_interior_translate(&spec, n, opts)?;
        if n < a && count != 0 {
            return Err(Error::Integrity(format!("interior point below degree {a}")));
        }
    }
    if 4 % level == 0 {
        let generator = omega(graph, level)?;
        let mut cert =
            GorensteinCertificate::bare(&spec, Verdict::Gorenstein, Method::OmegaStructure, a + 2);
        cert.a_invariant = Some(-(a as i64));
        cert.generator = Some(generator);
        return Ok(cert);
    }
    // P_Γ(aL - 4) has the zero point and at least one more
    let rest = enumerate_lattice_points(&spec.with_level(a * level - 4), 1, false, opts)?;
    let omega_w = EdgeWeights::constant(graph.edge_count(), 2);
    let second = rest
        .iter()
        .find(|u| u.as_slice().iter().any(|&x| x != 0))
        .ok_or_else(|| Error::Integrity(format!("P_Γ({}) has a single point", a * level - 4)))?;
    let mut cert =
        GorensteinCertificate::bare(&spec, Verdict::NotGorenstein, Method::OmegaStructure, a);
    cert.witness = Some(Witness::TwoInteriorPoints {
        degree: a,
        first: omega_w.clone(),
        second: second.add(&omega_w),
    });
    Ok(cert)
}

/// The two edges of the digon right after the separating edge.
fn digon_after_separator(graph: &TrivalentGraph) -> Option<(EdgeId, EdgeId)> {
    let sep = graph.separator()?;
    for &(v, _) in graph.incidence(sep) {
        let others: Vec<EdgeId> = graph.slots(v).into_iter().filter(|&e| e != sep).collect();
        let [x, y] = others[..] else { continue };
        if x == y {
            continue;
        }
        let shared = graph
            .incidence(x)
            .iter()
            .any(|&(u, _)| u != v && graph.incidence(y).iter().any(|&(t, _)| t == u));
        if shared {
            return Some((x, y));
        }
    }
    None
}

/// A lattice point of `spec` at `degree` different from `w`, on a caterpillar
/// `Γ_{g,n}` with `g ≥ 2` and `n ≥ 1`.
pub fn two_point_witness(
    spec: &PolytopeSpec,
    w: &EdgeWeights,
    degree: u32,
    opts: &EnumOptions,
) -> Result<EdgeWeights> {
    let graph = spec.graph();
    match graph.caterpillar_signature() {
        Some((g, n)) if g >= 2 && n >= 1 => {}
        _ => {
            return Err(Error::NotApplicable(
                "two-point witness needs a caterpillar with genus >= 2 and at least one leaf"
                    .into(),
            ))
        }
    }
    let valid =
        |x: &EdgeWeights| in_lattice(x, graph) && satisfies(x, spec, degree).unwrap_or(false);
    if !valid(w) {
        return Err(Error::InvalidInput(format!(
            "{w} is not a lattice point at degree {degree}"
        )));
    }
    let sep = graph
        .separator()
        .expect("caterpillar with leaves has a separator");
    if w.get(sep) % 2 == 1 {
        if let Some((x, y)) = digon_after_separator(graph) {
            let mut s = w.clone();
            s.0.swap(x.0, y.0);
            if s != *w && valid(&s) {
                return Ok(s);
            }
        }
    }
    let free: Vec<usize> = graph
        .edges()
        .filter(|&e| spec.fixed_value(e, degree).is_none())
        .map(|e| e.0)
        .collect();
    for &e in &free {
        for delta in [2i64, -2] {
            let mut s = w.clone();
            let x = s.0[e] as i64 + delta;
            if x >= 0 {
                s.0[e] = x as u32;
                if valid(&s) {
                    return Ok(s);
                }
            }
        }
    }
    for (i, &e) in free.iter().enumerate() {
        for &f in &free[i + 1..] {
            for (de, df) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)] {
                let (x, y) = (w.0[e] as i64 + de, w.0[f] as i64 + df);
                if x >= 0 && y >= 0 {
                    let mut s = w.clone();
                    s.0[e] = x as u32;
                    s.0[f] = y as u32;
                    if valid(&s) {
                        return Ok(s);
                    }
                }
            }
        }
    }
    let mut found = None;
    for_each_lattice_point(spec, degree, false, opts, |p| {
        if p != w.as_slice() {
            found = Some(EdgeWeights(p.to_vec()));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    found.ok_or_else(|| {
        Error::WitnessNotFound(format!("{w} is the only lattice point at degree {degree}"))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub enumeration: EnumOptions,
    /// Degree bound for the semigroup cross-check; `None` uses `2a + 8`.
    pub max_degree: Option<u32>,
    pub crosscheck: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            enumeration: EnumOptions::default(),
            max_degree: None,
            crosscheck: true,
        }
    }
}

/// Note attached to certificates for genus below 2.
pub const OUTSIDE_SCOPE: &str =
    "outside classification scope (genus < 2): bounded semigroup check only";

/// Classifies `k[P_{Γ_{g,n}}(r⃗, L)]`.
pub fn classify(
    genus: u32,
    weights: &[u32],
    level: u32,
    opts: &ClassifyOptions,
) -> Result<GorensteinCertificate> {
    if level == 0 {
        return Err(Error::UnsupportedRegime(
            "level 0 has no interior points".into(),
        ));
    }
    let original = WeightSignature::new(genus, weights.to_vec(), level);
    let (reduced, trace) = normalize_with_trace(&original)?;
    let reduction = Reduction {
        original,
        reduced: reduced.clone(),
        trace,
    };
    let spec = if reduced.n() == 0 && genus >= 2 {
        PolytopeSpec::free(build_caterpillar(genus, 0)?, level)
    } else {
        caterpillar_spec(genus, &reduced.weights, level)?
    };
    let eo = &opts.enumeration;

    if genus < 2 {
        let mut cert = check_semigroup_criterion(&spec, opts.max_degree, eo)?;
        cert.reduction = Some(reduction);
        cert.note = Some(OUTSIDE_SCOPE.into());
        return Ok(cert);
    }

    let mut cert = match spec.interior_regime()? {
        InteriorRegime::LeafFree => check_via_omega_structure(spec.graph(), level, eo)?,
        InteriorRegime::OneMarkedAtLevel { .. } => one_marked_point(&spec, opts)?,
        InteriorRegime::GenericLeaves => generic_weights(&spec, opts)?,
    };
    cert.reduction = Some(reduction);
    if opts.crosscheck {
        crosscheck(&mut cert, &spec, opts)?;
    }
    Ok(cert)
}

/// One leaf at weight `L`: Gorenstein iff `L ∈ {1, 2, 4}`.
fn one_marked_point(spec: &PolytopeSpec, opts: &ClassifyOptions) -> Result<GorensteinCertificate> {
    let level = spec.level();
    let gorenstein = matches!(level, 1 | 2 | 4);
    let eo = &opts.enumeration;
    let Some((a, points)) = minimal_interior_degree(spec, DEFAULT_SEARCH_DEGREE, eo)? else {
        return Err(Error::Integrity(format!(
            "no interior point up to degree {DEFAULT_SEARCH_DEGREE} for one marked point at level {level}"
        )));
    };
    if gorenstein {
        let mut cert =
            GorensteinCertificate::bare(spec, Verdict::Gorenstein, Method::TheoremFastpath, a);
        if points.len() == 1 {
            cert.generator = Some(GradedPoint::new(a, points[0].clone()));
            cert.a_invariant = Some(-(a as i64));
        }
        return Ok(cert);
    }
    if points.len() < 2 {
        return Err(Error::Integrity(format!(
            "level {level} with one marked point should be non-Gorenstein, but degree {a} has a unique interior point"
        )));
    }
    let mut cert =
        GorensteinCertificate::bare(spec, Verdict::NotGorenstein, Method::TheoremFastpath, a);
    cert.witness = Some(Witness::TwoInteriorPoints {
        degree: a,
        first: points[0].clone(),
        second: points[1].clone(),
    });
    Ok(cert)
}

/// All `0 < r_i < L`: interior points at degree `N` are `ω_Γ` plus the
/// points of `P(N·r⃗ - 2, N·L - 4)`, which is empty or has two points.
fn generic_weights(spec: &PolytopeSpec, opts: &ClassifyOptions) -> Result<GorensteinCertificate> {
    let eo = &opts.enumeration;
    let r = spec.leaf_fixing().expect("generic regime has fixed leaves");
    let level = spec.level();
    let Some((a, points)) = minimal_interior_degree(spec, DEFAULT_SEARCH_DEGREE, eo)? else {
        return Err(Error::Integrity(format!(
            "no interior point up to degree {DEFAULT_SEARCH_DEGREE} for generic weights"
        )));
    };
    let omega_w = EdgeWeights::constant(spec.graph().edge_count(), 2);
    let first = points[0].clone();
    let u = first
        .checked_sub(&omega_w)
        .ok_or_else(|| Error::Integrity(format!("interior point {first} is not above omega")))?;
    let shifted = PolytopeSpec::new(
        spec.graph().clone(),
        a * level - 4,
        Some(r.iter().map(|&x| a * x - 2).collect()),
    )?;
    let other = match two_point_witness(&shifted, &u, 1, eo) {
        Ok(other) => other,
        Err(Error::WitnessNotFound(detail)) => return Err(Error::Integrity(format!(
            "weights {r:?} at level {level}: expected at least two interior points at degree {a}, \
                 but the shifted polytope has one point ({detail})"
        ))),
        Err(e) => return Err(e),
    };
    let mut cert =
        GorensteinCertificate::bare(spec, Verdict::NotGorenstein, Method::TheoremFastpath, a);
    cert.witness = Some(Witness::TwoInteriorPoints {
        degree: a,
        first,
        second: other.add(&omega_w),
    });
    Ok(cert)
}

fn crosscheck(
    cert: &mut GorensteinCertificate,
    spec: &PolytopeSpec,
    opts: &ClassifyOptions,
) -> Result<()> {
    let check = match check_semigroup_criterion(spec, opts.max_degree, &opts.enumeration) {
        Ok(c) => c,
        Err(Error::BudgetExceeded { .. }) => {
            cert.crosschecked = Some(false);
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let agree = match cert.verdict {
        Verdict::Gorenstein => {
            check.verdict == Verdict::InconclusiveUpToBound && check.generator.is_some()
        }
        Verdict::NotGorenstein => check.verdict == Verdict::NotGorenstein,
        Verdict::InconclusiveUpToBound => true,
    };
    if !agree {
        return Err(Error::Integrity(format!(
            "{:?} verdict {:?} disagrees with the semigroup check ({:?} up to degree {})",
            cert.method, cert.verdict, check.verdict, check.checked_bound
        )));
    }
    if cert.verdict == Verdict::Gorenstein {
        if cert.a_invariant.is_some() && cert.a_invariant != check.a_invariant {
            return Err(Error::Integrity(format!(
                "a-invariant {:?} disagrees with the semigroup check {:?}",
                cert.a_invariant, check.a_invariant
            )));
        }
        cert.a_invariant = check.a_invariant;
        cert.generator = check.generator;
    }
    cert.checked_bound = cert.checked_bound.max(check.checked_bound);
    cert.crosschecked = Some(true);
    Ok(())
}

/// Re-checks a certificate from its own contents.
pub fn revalidate(cert: &GorensteinCertificate) -> Result<()> {
    let spec = &cert.spec;
    let interior = |w: &EdgeWeights, degree: u32| -> Result<bool> {
        Ok(in_lattice(w, spec.graph()) && is_interior(w, spec, degree)?)
    };
    if let Some(g) = &cert.generator {
        if !interior(&g.weights, g.degree)? {
            return Err(Error::Integrity(format!(
                "generator {} is not interior",
                g.weights
            )));
        }
    }
    match (&cert.verdict, &cert.witness) {
        (Verdict::NotGorenstein, None) => {
            Err(Error::Integrity("negative verdict without witness".into()))
        }
        (_, None) => Ok(()),
        (
            _,
            Some(Witness::TwoInteriorPoints {
                degree,
                first,
                second,
            }),
        ) => {
            if first == second {
                return Err(Error::Integrity("witness points coincide".into()));
            }
            for p in [first, second] {
                if !interior(p, *degree)? {
                    return Err(Error::Integrity(format!(
                        "{p} is not interior at degree {degree}"
                    )));
                }
            }
            Ok(())
        }
        (_, Some(Witness::FailedDecomposition { point, generator })) => {
            if !interior(&point.weights, point.degree)?
                || !interior(&generator.weights, generator.degree)?
            {
                return Err(Error::Integrity(
                    "decomposition witness uses a non-interior point".into(),
                ));
            }
            if decompose(point, generator, spec).is_some() {
                return Err(Error::Integrity(format!(
                    "{} does decompose",
                    point.weights
                )));
            }
            Ok(())
        }
    }
}

pub fn revalidate_json(json: &str) -> Result<GorensteinCertificate> {
    let cert: GorensteinCertificate = serde_json::from_str(json)
        .map_err(|e| Error::InvalidInput(format!("certificate JSON: {e}")))?;
    revalidate(&cert)?;
    Ok(cert)
}
