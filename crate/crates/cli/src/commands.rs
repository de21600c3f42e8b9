use std::io::Write;
use std::str::FromStr;

use gorenstein_core::gorenstein::{
    check_semigroup_criterion, check_via_omega_structure, classify, ClassifyOptions,
    GorensteinCertificate, Method, Verdict,
};
use gorenstein_core::graph::{build_caterpillar, build_named, NamedGraph};
use gorenstein_core::hilbert::{
    hilbert_function, hstar_to_string, stanley_check, HilbertData, PsiEngine, PsiMethod,
};
use gorenstein_core::polytope::{
    count_lattice_points, for_each_lattice_point, EnumOptions, PolytopeSpec,
};
use gorenstein_core::symmetry::{
    verify_identities, weight_grid, CountOracle, EnumerationOracle, Identity, IdentityReport,
    SampleSpace,
};
use gorenstein_core::Error;
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use crate::args::{
    Cli, Command, CommonArgs, CountArgs, Format, GorensteinArgs, GraphArgs, HilbertArgs, MethodArg,
    SweepArgs, VerifyArgs, WeightMode,
};
use crate::memo::MemoStore;
use crate::{exit, report_error, CliError};

/// Runs a parsed command line, writing results to `out` and diagnostics to
/// `err`. Returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Count(a) => cmd_count(a, out),
        Command::Hilbert(a) => cmd_hilbert(a, out, err),
        Command::Gorenstein(a) => cmd_gorenstein(a, out),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            report_error(err, &e);
            e.exit_code()
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Core(Error::InvalidInput(msg.into()))
}

/// The spec selected on the command line plus caterpillar data when present.
struct Target {
    spec: PolytopeSpec,
    caterpillar: Option<(u32, u32)>,
    named: Option<NamedGraph>,
}

impl Target {
    fn leaves(&self) -> Option<&[u32]> {
        self.spec.leaf_fixing()
    }
}

fn parse_leaves(raw: &str, level: u32) -> Result<Vec<u32>, CliError> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|t| match t.trim() {
            "L" => Ok(level),
            s => s
                .parse::<u32>()
                .map_err(|_| invalid(format!("bad leaf weight `{s}`"))),
        })
        .collect()
}

fn resolve(g: &GraphArgs) -> Result<Target, CliError> {
    let leaves = g
        .leaves
        .as_deref()
        .map(|s| parse_leaves(s, g.level))
        .transpose()?;
    if let Some(name) = &g.named {
        let named = NamedGraph::from_str(name)?;
        let spec = PolytopeSpec::new(build_named(named), g.level, leaves)?;
        return Ok(Target {
            spec,
            caterpillar: None,
            named: Some(named),
        });
    }
    let (genus, n) = if let Some(c) = &g.caterpillar {
        let parts: Vec<&str> = c.split(',').map(str::trim).collect();
        let [a, b] = parts[..] else {
            return Err(invalid(format!("--caterpillar expects G,N, got `{c}`")));
        };
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| invalid(format!("bad number `{s}` in --caterpillar")))
        };
        (parse(a)?, parse(b)?)
    } else if let Some(genus) = g.g {
        let n = g.n.unwrap_or(leaves.as_ref().map_or(0, |r| r.len() as u32));
        (genus, n)
    } else {
        return Err(invalid("select a graph with --named, --caterpillar or --g"));
    };
    let spec = PolytopeSpec::new(build_caterpillar(genus, n)?, g.level, leaves)?;
    Ok(Target {
        spec,
        caterpillar: Some((genus, n)),
        named: None,
    })
}

fn enum_options(c: &CommonArgs) -> EnumOptions {
    if let Some(w) = c.workers {
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build_global();
    }
    EnumOptions {
        node_budget: c.budget,
        parallel: c.workers != Some(1),
    }
}

/// A psi engine seeded from the memo store, if one is configured.
fn engine(c: &CommonArgs, opts: EnumOptions) -> Result<(PsiEngine, Option<MemoStore>), CliError> {
    let engine = PsiEngine::new(opts);
    let store = match &c.cache {
        Some(path) => {
            let store = MemoStore::open(path)?;
            engine.seed(store.entries().iter().cloned())?;
            Some(store)
        }
        None => None,
    };
    Ok((engine, store))
}

fn persist(engine: &PsiEngine, store: Option<MemoStore>) -> Result<(), CliError> {
    if let Some(mut store) = store {
        store.save(engine.snapshot())?;
    }
    Ok(())
}

fn caterpillar_leaves<'a>(t: &'a Target, what: &str) -> Result<(u32, &'a [u32]), CliError> {
    match (t.caterpillar, t.leaves()) {
        (Some((g, _)), Some(r)) => Ok((g, r)),
        _ => Err(invalid(format!(
            "{what} needs a caterpillar graph with --leaves"
        ))),
    }
}

fn cmd_count(a: CountArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let target = resolve(&a.graph)?;
    let opts = enum_options(&a.common);
    let degree = a.degree;
    let count = match a.method {
        MethodArg::Recurse => {
            if a.interior || a.list {
                return Err(invalid(
                    "--method recurse only counts all points; drop --interior/--list",
                ));
            }
            let (g, r) = caterpillar_leaves(&target, "--method recurse")?;
            let (engine, store) = engine(&a.common, opts)?;
            let scaled: Vec<u32> = r.iter().map(|x| x * degree).collect();
            let v = engine.psi(g, &scaled, target.spec.level() * degree, PsiMethod::Recurse)?;
            persist(&engine, store)?;
            v
        }
        MethodArg::Enumerate => {
            if a.list {
                let mut io = Ok(());
                let mut n = 0u64;
                for_each_lattice_point(&target.spec, degree, a.interior, &opts, |w| {
                    n += 1;
                    io = writeln!(out, "{}", json!({ "degree": degree, "weights": w }));
                    if io.is_err() {
                        std::ops::ControlFlow::Break(())
                    } else {
                        std::ops::ControlFlow::Continue(())
                    }
                })?;
                io?;
                BigUint::from(n)
            } else {
                BigUint::from(count_lattice_points(
                    &target.spec,
                    degree,
                    a.interior,
                    &opts,
                )?)
            }
        }
    };
    match a.common.format {
        Format::Text => writeln!(out, "{count}")?,
        Format::Json => writeln!(
            out,
            "{}",
            json!({
                "spec": target.spec,
                "degree": degree,
                "interior": a.interior,
                "count": count.to_string(),
            })
        )?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["degree", "interior", "count"])?;
            w.write_record([
                degree.to_string(),
                a.interior.to_string(),
                count.to_string(),
            ])?;
            w.flush()?;
        }
    }
    Ok(exit::OK)
}

#[derive(Serialize)]
struct HilbertReport<'a> {
    spec: &'a PolytopeSpec,
    #[serde(flatten)]
    data: &'a HilbertData,
    a_invariant: Option<i64>,
    symmetric: Option<bool>,
}

fn cmd_hilbert(a: HilbertArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let target = resolve(&a.graph)?;
    let opts = enum_options(&a.common);
    let data = match a.method {
        MethodArg::Recurse => {
            let (g, r) = caterpillar_leaves(&target, "--method recurse")?;
            let (engine, store) = engine(&a.common, opts)?;
            let d = engine.caterpillar_hilbert(g, r, target.spec.level(), a.n_max)?;
            persist(&engine, store)?;
            d
        }
        MethodArg::Enumerate => hilbert_function(&target.spec, a.n_max, &opts)?,
    };
    let stanley = stanley_check(&data);
    let report = HilbertReport {
        spec: &target.spec,
        data: &data,
        a_invariant: stanley.as_ref().ok().and_then(|s| s.a_invariant),
        symmetric: stanley.as_ref().ok().map(|s| s.symmetric),
    };
    write_hilbert(&report, a.common.format, out)?;
    match stanley {
        Ok(_) => Ok(exit::OK),
        Err(e) => {
            report_error(err, &CliError::Core(e));
            Ok(exit::EXTRACTION)
        }
    }
}

fn write_hilbert(r: &HilbertReport, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(r)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["N", "phi"])?;
            for (n, v) in r.data.values.iter().enumerate() {
                w.write_record([n.to_string(), v.to_string()])?;
            }
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "N\tphi(N)")?;
            for (n, v) in r.data.values.iter().enumerate() {
                writeln!(out, "{n}\t{v}")?;
            }
            writeln!(out, "ring_dim\t{}", r.data.ring_dim)?;
            match (&r.data.hstar, r.data.period) {
                (Some(h), Some(p)) => {
                    writeln!(out, "period\t{p}")?;
                    writeln!(out, "hstar\t{}", hstar_to_string(h))?;
                }
                _ => writeln!(out, "hstar\tnot extracted")?,
            }
            if let (Some(a), Some(s)) = (r.a_invariant, r.symmetric) {
                writeln!(out, "a_invariant\t{a}")?;
                writeln!(out, "symmetric\t{s}")?;
            }
        }
    }
    Ok(())
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Gorenstein => exit::OK,
        Verdict::NotGorenstein => exit::NEGATIVE,
        Verdict::InconclusiveUpToBound => exit::INCONCLUSIVE,
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Gorenstein => "gorenstein",
        Verdict::NotGorenstein => "not_gorenstein",
        Verdict::InconclusiveUpToBound => "inconclusive_up_to_bound",
    }
}

fn method_name(m: Method) -> String {
    serde_json::to_value(m)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn cmd_gorenstein(a: GorensteinArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let target = resolve(&a.graph)?;
    let opts = ClassifyOptions {
        enumeration: enum_options(&a.common),
        max_degree: a.max_degree,
        crosscheck: !a.no_crosscheck,
    };
    let cert: GorensteinCertificate = if target.named.is_some() {
        match target.leaves() {
            None => check_via_omega_structure(
                target.spec.graph(),
                target.spec.level(),
                &opts.enumeration,
            )?,
            Some(_) => check_semigroup_criterion(&target.spec, a.max_degree, &opts.enumeration)?,
        }
    } else {
        let (g, n) = target.caterpillar.expect("caterpillar target");
        let r = match target.leaves() {
            Some(r) => r.to_vec(),
            None if n == 0 => Vec::new(),
            None => return Err(invalid("a graph with leaves needs --leaves")),
        };
        classify(g, &r, target.spec.level(), &opts)?
    };
    match a.common.format {
        Format::Json => writeln!(out, "{}", cert.to_json())?,
        Format::Text | Format::Csv => {
            let a_inv = cert.a_invariant.map_or("-".to_string(), |x| x.to_string());
            writeln!(
                out,
                "verdict: {}  a_invariant: {a_inv}  method: {}  checked_bound: {}",
                verdict_name(cert.verdict),
                method_name(cert.method),
                cert.checked_bound
            )?;
            if let Some(note) = &cert.note {
                writeln!(out, "note: {note}")?;
            }
            writeln!(out, "{}", cert.to_json())?;
        }
    }
    Ok(verdict_code(cert.verdict))
}

/// Inclusive ranges `a..b`, lists `a,b,c`, or a single value.
pub fn parse_range(raw: &str) -> Result<Vec<u32>, CliError> {
    let num = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| invalid(format!("bad range `{raw}`")))
    };
    if let Some((a, b)) = raw.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(invalid(format!("empty range `{raw}`")));
        }
        return Ok((a..=b).collect());
    }
    raw.split(',').map(num).collect()
}

fn sweep_weights(mode: WeightMode, n: u32, level: u32) -> Vec<Vec<u32>> {
    match mode {
        WeightMode::Zero => vec![vec![0; n as usize]],
        WeightMode::Level => vec![vec![level; n as usize]],
        WeightMode::Generic => weight_grid(n as usize, level)
            .into_iter()
            .filter(|r| r.iter().all(|&x| 0 < x && x < level) && r.windows(2).all(|p| p[0] <= p[1]))
            .collect(),
    }
}

const SWEEP_HEADER: [&str; 11] = [
    "g",
    "n",
    "weights",
    "level",
    "psi",
    "verdict",
    "a_invariant",
    "method",
    "checked_bound",
    "crosschecked",
    "note",
];

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let genera = parse_range(&a.g)?;
    let leaves = parse_range(&a.n)?;
    let levels = parse_range(&a.level)?;
    let eo = enum_options(&a.common);
    let opts = ClassifyOptions {
        enumeration: eo,
        max_degree: a.max_degree,
        crosscheck: true,
    };
    let (engine, store) = engine(&a.common, eo)?;
    let mut sink: Box<dyn Write + '_> = match &a.output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(&mut *out),
    };
    let mut w = csv::Writer::from_writer(&mut sink);
    w.write_record(SWEEP_HEADER)?;
    let mut code = exit::OK;
    'grid: for &g in &genera {
        for &n in &leaves {
            if !gorenstein_core::graph::signature_is_feasible(g, n) {
                continue;
            }
            for &level in &levels {
                for r in sweep_weights(a.weights, n, level) {
                    let psi = match engine.psi(g, &r, level, PsiMethod::Recurse) {
                        Ok(v) => v,
                        Err(e @ Error::BudgetExceeded { .. }) => {
                            report_error(err, &CliError::Core(e));
                            code = exit::BUDGET;
                            break 'grid;
                        }
                        Err(e) => return Err(e.into()),
                    };
                    if a.weights == WeightMode::Generic && psi == BigUint::from(0u32) {
                        continue;
                    }
                    let weights: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                    let mut row = vec![
                        g.to_string(),
                        n.to_string(),
                        weights.join(","),
                        level.to_string(),
                        psi.to_string(),
                    ];
                    match classify(g, &r, level, &opts) {
                        Ok(c) => row.extend([
                            verdict_name(c.verdict).to_string(),
                            c.a_invariant.map_or(String::new(), |x| x.to_string()),
                            method_name(c.method),
                            c.checked_bound.to_string(),
                            c.crosschecked.map_or(String::new(), |x| x.to_string()),
                            c.note.unwrap_or_default(),
                        ]),
                        Err(e @ Error::BudgetExceeded { .. }) => {
                            report_error(err, &CliError::Core(e));
                            code = exit::BUDGET;
                            break 'grid;
                        }
                        Err(e) => {
                            if matches!(e, Error::Integrity(_)) {
                                code = exit::INTEGRITY;
                            }
                            row.extend([
                                "error".to_string(),
                                String::new(),
                                String::new(),
                                String::new(),
                                String::new(),
                                e.to_string(),
                            ]);
                        }
                    }
                    w.write_record(&row)?;
                }
            }
        }
    }
    w.flush()?;
    drop(w);
    persist(&engine, store)?;
    Ok(code)
}

/// Count oracle with a deliberate off-by-one on vacuum-padded inputs.
struct FaultyOracle(EnumerationOracle);

impl CountOracle for FaultyOracle {
    fn psi(&self, genus: u32, weights: &[u32], level: u32) -> gorenstein_core::Result<BigUint> {
        let v = self.0.psi(genus, weights, level)?;
        Ok(if weights.len() == 2 && weights[1] == 0 {
            v + 1u32
        } else {
            v
        })
    }

    fn count(&self, spec: &PolytopeSpec, degree: u32) -> gorenstein_core::Result<BigUint> {
        self.0.count(spec, degree)
    }
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let identities = if a.identity.is_empty() {
        Identity::ALL.to_vec()
    } else {
        a.identity
            .iter()
            .map(|s| Identity::from_str(s))
            .collect::<Result<Vec<_>, _>>()?
    };
    let space = SampleSpace {
        max_genus: a.g,
        max_leaves: a.max_leaves,
        max_level: a.max_level,
        max_degree: a.max_degree,
        identities,
    };
    let base = EnumerationOracle::new(enum_options(&a.common));
    let report: IdentityReport = if a.inject_fault {
        verify_identities(&space, &FaultyOracle(base))?
    } else {
        verify_identities(&space, &base)?
    };
    match a.common.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["identity", "input", "lhs", "rhs"])?;
            for v in &report.violations {
                w.write_record([
                    v.identity.name(),
                    &v.input,
                    &v.lhs.to_string(),
                    &v.rhs.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => {
            for (identity, n) in &report.checked {
                writeln!(out, "{:<20} {n} checked", identity.name())?;
            }
            for v in &report.violations {
                writeln!(
                    out,
                    "VIOLATION {}: {}  lhs={} rhs={}",
                    v.identity.name(),
                    v.input,
                    v.lhs,
                    v.rhs
                )?;
            }
            writeln!(out, "{} violations", report.violations.len())?;
        }
    }
    Ok(if report.is_clean() {
        exit::OK
    } else {
        exit::NEGATIVE
    })
}
