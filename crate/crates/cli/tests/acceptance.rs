//! Acceptance suite. Prints one line per criterion and exits non-zero when a
//! criterion fails that is not listed in `KNOWN_FAILURES`.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use gorenstein_core::gorenstein::{
    check_semigroup_criterion, classify, revalidate_json, ClassifyOptions, Verdict, Witness,
};
use gorenstein_core::graph::{
    build_caterpillar, build_named, signature_is_feasible, NamedGraph, TrivalentGraph,
};
use gorenstein_core::hilbert::{
    caterpillar_spec, fusion_trinode, hilbert_function_adaptive, stanley_check, PsiEngine,
    PsiMethod,
};
use gorenstein_core::polytope::{
    count_lattice_points, enumerate_lattice_points, is_interior, EdgeWeights, EnumOptions,
    PolytopeSpec,
};
use gorenstein_core::symmetry::{verify_identities, EnumerationOracle, SampleSpace};
use gorenstein_core::Error;

/// Criteria expected to fail, with the reason recorded next to the number.
/// Criterion 6 asks for NotGorenstein at r_i = L/2, L in {2, 4}; those rings
/// have palindromic numerators and every interior point decomposes, so the
/// classifier refuses to emit the requested verdict.
const KNOWN_FAILURES: &[u32] = &[6];

const C1_LIMIT: Duration = Duration::from_secs(1);
const C2_LIMIT: Duration = Duration::from_secs(10);
const C3_LIMIT: Duration = Duration::from_secs(120);
const C4_LIMIT: Duration = Duration::from_secs(300);
const C5_LIMIT: Duration = Duration::from_secs(120);
const C6_LIMIT: Duration = Duration::from_secs(300);
const C7_LIMIT: Duration = Duration::from_secs(300);

/// Degree cap for h* extraction in criterion 8.
const HSTAR_DEGREE_CAP: u32 = 16;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn opts() -> EnumOptions {
    EnumOptions::default()
}

fn classify_opts() -> ClassifyOptions {
    ClassifyOptions {
        enumeration: opts(),
        max_degree: None,
        crosscheck: true,
    }
}

fn criterion_1() -> Outcome {
    let mut mismatches = 0;
    let mut checked = 0;
    for level in 0..=6i64 {
        let trinode = build_named(NamedGraph::Trinode);
        for a in 0..=level {
            for b in 0..=level {
                for c in 0..=level {
                    let brute = (a + b + c) % 2 == 0
                        && a <= b + c
                        && b <= a + c
                        && c <= a + b
                        && a + b + c <= 2 * level;
                    let spec = PolytopeSpec::new(
                        trinode.clone(),
                        level as u32,
                        Some(vec![a as u32, b as u32, c as u32]),
                    )
                    .unwrap();
                    let enumerated = count_lattice_points(&spec, 1, false, &opts()).unwrap();
                    let fusion = fusion_trinode(a, b, c, level);
                    checked += 1;
                    if fusion != brute as u8 || enumerated != brute as u64 {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checked} triples, {mismatches} mismatches"),
    )
}

fn criterion_2() -> Outcome {
    let graphs = [
        build_named(NamedGraph::Theta),
        build_named(NamedGraph::Dumbbell),
        build_caterpillar(2, 0).unwrap(),
    ];
    let mut unequal = Vec::new();
    for level in 0..=4 {
        for degree in 0..=4 {
            let counts: Vec<u64> = graphs
                .iter()
                .map(|g| {
                    count_lattice_points(
                        &PolytopeSpec::free(g.clone(), level),
                        degree,
                        false,
                        &opts(),
                    )
                    .unwrap()
                })
                .collect();
            if counts.iter().any(|&c| c != counts[0]) {
                unequal.push(format!("L={level} N={degree} {counts:?}"));
            }
        }
    }
    outcome(
        unequal.is_empty(),
        format!("25 (L, N) pairs, unequal: {unequal:?}"),
    )
}

fn criterion_3() -> Outcome {
    let report =
        verify_identities(&SampleSpace::default(), &EnumerationOracle::new(opts())).unwrap();
    let total: u64 = report.checked.iter().map(|(_, n)| n).sum();
    outcome(
        report.is_clean(),
        format!("{total} equalities, {} violations", report.violations.len()),
    )
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    for g in [2, 3] {
        for level in 1..=6 {
            let expected = match level {
                1 => Some(-4),
                2 => Some(-2),
                4 => Some(-1),
                _ => None,
            };
            match classify(g, &[], level, &classify_opts()) {
                Ok(c) => {
                    let got = (c.verdict == Verdict::Gorenstein)
                        .then_some(c.a_invariant)
                        .flatten();
                    let ok = match expected {
                        Some(_) => c.verdict == Verdict::Gorenstein && got == expected,
                        None => c.verdict == Verdict::NotGorenstein,
                    };
                    if !ok {
                        bad.push(format!(
                            "g={g} L={level}: {:?} a={:?}",
                            c.verdict, c.a_invariant
                        ));
                    }
                }
                Err(e) => bad.push(format!("g={g} L={level}: {e}")),
            }
        }
    }
    outcome(bad.is_empty(), format!("12 cases, wrong: {bad:?}"))
}

fn criterion_5() -> Outcome {
    let graphs = [
        ("theta", build_named(NamedGraph::Theta)),
        ("caterpillar(2,1)", build_caterpillar(2, 1).unwrap()),
    ];
    let mut bad = Vec::new();
    let mut compared = 0;
    for (name, graph) in &graphs {
        for level in [1u32, 2, 4] {
            let spec = PolytopeSpec::free(graph.clone(), level);
            for degree in 1..=8 / level + 2 {
                let interior: BTreeSet<EdgeWeights> =
                    enumerate_lattice_points(&spec, degree, true, &opts())
                        .unwrap()
                        .into_iter()
                        .collect();
                let total = degree * level;
                let omega = EdgeWeights::constant(graph.edge_count(), 2);
                let shifted: BTreeSet<EdgeWeights> = if total >= 4 {
                    enumerate_lattice_points(
                        &PolytopeSpec::free(graph.clone(), total - 4),
                        1,
                        false,
                        &opts(),
                    )
                    .unwrap()
                    .into_iter()
                    .map(|u| u.add(&omega))
                    .collect()
                } else {
                    BTreeSet::new()
                };
                compared += 1;
                if interior != shifted {
                    bad.push(format!("{name} L={level} N={degree}"));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{compared} sets compared, unequal: {bad:?}"),
    )
}

/// Feasible generic signatures for g = 2: `0 < r_i < L`, nondecreasing,
/// with at least one lattice point at degree 1.
fn generic_cases() -> Vec<(Vec<u32>, u32)> {
    let engine = PsiEngine::new(opts());
    let mut out = Vec::new();
    for level in 2..=4u32 {
        for r1 in 1..level {
            if engine.psi(2, &[r1], level, PsiMethod::Enumerate).unwrap() > 0u32.into() {
                out.push((vec![r1], level));
            }
            for r2 in r1..level {
                if engine
                    .psi(2, &[r1, r2], level, PsiMethod::Enumerate)
                    .unwrap()
                    > 0u32.into()
                {
                    out.push((vec![r1, r2], level));
                }
            }
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let mut bad = Vec::new();
    let mut witnesses = 0;
    let cases = generic_cases();
    for (r, level) in &cases {
        match classify(2, r, *level, &classify_opts()) {
            Ok(c) => {
                if c.verdict != Verdict::NotGorenstein {
                    bad.push(format!("{r:?}@{level}: {:?}", c.verdict));
                    continue;
                }
                if let Some(
                    Witness::TwoInteriorPoints { .. } | Witness::FailedDecomposition { .. },
                ) = c.witness
                {
                    witnesses += 1;
                    if let Err(e) = revalidate_json(&c.to_json()) {
                        bad.push(format!("{r:?}@{level}: witness rejected: {e}"));
                    }
                }
            }
            Err(Error::Integrity(_)) => {
                bad.push(format!("{r:?}@{level}: refused (ring is Gorenstein)"))
            }
            Err(e) => bad.push(format!("{r:?}@{level}: {e}")),
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{} cases, {witnesses} witnesses revalidated, failing: {bad:?}",
            cases.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut bad = Vec::new();
    for level in 1..=6 {
        let expected = [1, 2, 4].contains(&level);
        match classify(2, &[level], level, &classify_opts()) {
            Ok(c)
                if (c.verdict == Verdict::Gorenstein) == expected
                    && c.verdict != Verdict::InconclusiveUpToBound => {}
            Ok(c) => bad.push(format!("L={level}: {:?}", c.verdict)),
            Err(e) => bad.push(format!("L={level}: {e}")),
        }
    }
    outcome(bad.is_empty(), format!("6 cases, wrong: {bad:?}"))
}

fn criterion_8() -> Outcome {
    let mut specs: Vec<(String, PolytopeSpec)> = Vec::new();
    for g in [2, 3] {
        for level in 1..=6 {
            specs.push((
                format!("g={g} L={level}"),
                PolytopeSpec::free(build_caterpillar(g, 0).unwrap(), level),
            ));
        }
    }
    for level in [1, 2, 4] {
        specs.push((
            format!("theta L={level}"),
            PolytopeSpec::free(build_named(NamedGraph::Theta), level),
        ));
        specs.push((
            format!("caterpillar(2,1) free L={level}"),
            PolytopeSpec::free(build_caterpillar(2, 1).unwrap(), level),
        ));
    }
    for (r, level) in generic_cases() {
        specs.push((
            format!("g=2 r={r:?} L={level}"),
            caterpillar_spec(2, &r, level).unwrap(),
        ));
    }
    for level in 1..=6 {
        specs.push((
            format!("g=2 r=[{level}] L={level}"),
            caterpillar_spec(2, &[level], level).unwrap(),
        ));
    }
    let mut disagreements = Vec::new();
    let mut compared = 0;
    let mut skipped = 0;
    for (name, spec) in &specs {
        let data = hilbert_function_adaptive(spec, HSTAR_DEGREE_CAP, &opts()).unwrap();
        let Ok(stanley) = stanley_check(&data) else {
            skipped += 1;
            continue;
        };
        let semigroup = check_semigroup_criterion(spec, None, &opts()).unwrap();
        compared += 1;
        if stanley.symmetric != (semigroup.verdict != Verdict::NotGorenstein) {
            disagreements.push(format!(
                "{name}: palindromic={} semigroup={:?}",
                stanley.symmetric, semigroup.verdict
            ));
        }
    }
    outcome(
        disagreements.is_empty(),
        format!("{compared} compared, {skipped} without h*, disagreements: {disagreements:?}"),
    )
}

/// Independent membership test written against the graph's slot table.
fn naive_points(
    graph: &TrivalentGraph,
    level: u32,
    fixing: Option<&[u32]>,
    degree: u32,
) -> BTreeSet<Vec<u32>> {
    let s = degree * level;
    let edges = graph.edge_count();
    let mut fixed: Vec<Option<u32>> = vec![None; edges];
    if let Some(r) = fixing {
        for (e, &ri) in graph.leaf_order().iter().zip(r) {
            fixed[e.0] = Some(degree * ri);
        }
    }
    let triples: Vec<[usize; 3]> = graph
        .vertices()
        .map(|v| graph.slots(v).map(|e| e.0))
        .collect();
    let mut w: Vec<u32> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
    let free: Vec<usize> = (0..edges).filter(|&e| fixed[e].is_none()).collect();
    let mut out = BTreeSet::new();
    loop {
        let ok = w.iter().all(|&x| x <= s)
            && triples.iter().all(|t| {
                let (a, b, c) = (w[t[0]], w[t[1]], w[t[2]]);
                a <= b + c && b <= a + c && c <= a + b && a + b + c <= 2 * s && (a + b + c) % 2 == 0
            });
        if ok {
            out.insert(w.clone());
        }
        let mut i = 0;
        loop {
            if i == free.len() {
                return out;
            }
            if w[free[i]] < s {
                w[free[i]] += 1;
                break;
            }
            w[free[i]] = 0;
            i += 1;
        }
    }
}

fn sorted_fixings(n: usize, level: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                let lo = v.last().copied().unwrap_or(0);
                (lo..=level).map(move |x| {
                    let mut v = v.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

fn criterion_9() -> Outcome {
    let mut graphs: Vec<(String, TrivalentGraph)> = NamedGraph::ALL
        .iter()
        .map(|&n| (n.name().to_string(), build_named(n)))
        .collect();
    for g in 0..=3 {
        for n in 0..=7 {
            if signature_is_feasible(g, n) && 3 * g + n <= 7 {
                graphs.push((
                    format!("caterpillar({g},{n})"),
                    build_caterpillar(g, n).unwrap(),
                ));
            }
        }
    }
    let mut specs = 0;
    let mut bad = Vec::new();
    for (name, graph) in &graphs {
        if graph.internal_edge_count() > 4 {
            continue;
        }
        for level in 0..=4u32 {
            let mut fixings: Vec<Option<Vec<u32>>> = vec![None];
            fixings.extend(
                sorted_fixings(graph.leaf_count(), level)
                    .into_iter()
                    .map(Some),
            );
            for fixing in fixings {
                let spec = PolytopeSpec::new(graph.clone(), level, fixing.clone()).unwrap();
                let interior_ok = spec.interior_regime().is_ok();
                for degree in 0..=4u32 {
                    if degree * level > 4 || (level == 0 && degree > 1) {
                        continue;
                    }
                    specs += 1;
                    let naive = naive_points(graph, level, fixing.as_deref(), degree);
                    let fast: BTreeSet<Vec<u32>> =
                        enumerate_lattice_points(&spec, degree, false, &opts())
                            .unwrap()
                            .into_iter()
                            .map(|w| w.0)
                            .collect();
                    if fast != naive {
                        bad.push(format!("{name} L={level} r={fixing:?} N={degree}"));
                        continue;
                    }
                    if interior_ok && degree > 0 {
                        let naive_interior: BTreeSet<Vec<u32>> = naive
                            .into_iter()
                            .filter(|w| {
                                is_interior(&EdgeWeights(w.clone()), &spec, degree).unwrap()
                            })
                            .collect();
                        let fast_interior: BTreeSet<Vec<u32>> =
                            enumerate_lattice_points(&spec, degree, true, &opts())
                                .unwrap()
                                .into_iter()
                                .map(|w| w.0)
                                .collect();
                        if fast_interior != naive_interior {
                            bad.push(format!("{name} L={level} r={fixing:?} N={degree} interior"));
                        }
                    }
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{specs} (spec, degree) pairs, unequal: {bad:?}"),
    )
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_gorenstein");
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, workers: &str| {
        let o = Command::new(bin)
            .args([
                "sweep",
                "--g",
                "2..3",
                "--n",
                "0",
                "--level",
                "1..6",
                "--workers",
                workers,
            ])
            .arg("--cache")
            .arg(dir.path().join(tag))
            .output()
            .unwrap();
        (o.status.code(), o.stdout)
    };
    let runs = [run("a", "1"), run("b", "1"), run("c", "2")];
    let same = runs.iter().all(|r| r == &runs[0]) && runs[0].0 == Some(0) && !runs[0].1.is_empty();
    outcome(
        same,
        format!("3 cold-cache runs, {} bytes each", runs[0].1.len()),
    )
}

fn main() {
    type Criterion = (u32, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 10] = [
        (1, criterion_1, Some(C1_LIMIT)),
        (2, criterion_2, Some(C2_LIMIT)),
        (3, criterion_3, Some(C3_LIMIT)),
        (4, criterion_4, Some(C4_LIMIT)),
        (5, criterion_5, Some(C5_LIMIT)),
        (6, criterion_6, Some(C6_LIMIT)),
        (7, criterion_7, Some(C7_LIMIT)),
        (8, criterion_8, None),
        (9, criterion_9, None),
        (10, criterion_10, None),
    ];
    let mut failed = Vec::new();
    for (id, f, limit) in criteria {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = o.pass && in_time;
        let limit = limit.map_or("-".to_string(), |l| format!("{}s", l.as_secs()));
        println!(
            "criterion {id:>2}: {}  ({:.3}s, limit {limit})  {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            o.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    let unexpected: Vec<u32> = failed
        .iter()
        .copied()
        .filter(|id| !KNOWN_FAILURES.contains(id))
        .collect();
    let fixed: Vec<u32> = KNOWN_FAILURES
        .iter()
        .copied()
        .filter(|id| !failed.contains(id))
        .collect();
    println!(
        "{} of {} criteria pass; known failures {KNOWN_FAILURES:?}; unexpected failures {unexpected:?}",
        10 - failed.len(),
        10
    );
    if !unexpected.is_empty() || !fixed.is_empty() {
        if !fixed.is_empty() {
            println!("known failures now passing: {fixed:?}; update KNOWN_FAILURES");
        }
        std::process::exit(1);
    }
}
