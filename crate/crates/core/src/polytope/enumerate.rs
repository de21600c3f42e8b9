//! Exact lattice-point enumeration by backtracking over edges.
//!
//! Edges are visited in a fixed elimination order chosen so that vertices
//! close as early as possible. When the last slot of a vertex is assigned its
//! triangle, level and parity constraints collapse into an interval with a
//! step of two, so only lattice points are ever generated. Every edge of a
//! point is bounded by `N·L`.

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::{in_lattice, satisfies, strict_ok, EdgeWeights, InteriorProfile, PolytopeSpec};
use crate::error::{Error, Result};
use crate::graph::EdgeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    /// Maximum number of search nodes (edge assignments) per call.
    pub node_budget: u64,
    /// Split the search tree across the rayon pool.
    pub parallel: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self {
            node_budget: 2_000_000_000,
            parallel: true,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Check {
    /// Non-loop edge closing a vertex whose other slots hold edges `a` and `b`.
    Closing { a: usize, b: usize, margin: i64 },
    /// Loop edge closing its vertex; `other` is the remaining slot.
    LoopClosing { other: usize, margin: i64 },
}

#[derive(Clone, Debug)]
struct Step {
    edge: usize,
    fixed: Option<i64>,
    floor: i64,
    checks: Vec<Check>,
}

struct Plan<'a> {
    spec: &'a PolytopeSpec,
    degree: u32,
    steps: Vec<Step>,
    bound: i64,
    profile: Option<InteriorProfile>,
}

const FLUSH: u64 = 1 << 12;

struct Budget<'a> {
    limit: u64,
    shared: &'a AtomicU64,
    local: u64,
}

impl Budget<'_> {
    #[inline]
    fn tick(&mut self) -> Result<()> {
        self.local += 1;
        if self.local == FLUSH {
            let total = self.shared.fetch_add(self.local, Ordering::Relaxed) + self.local;
            self.local = 0;
            if total > self.limit {
                return Err(Error::BudgetExceeded { limit: self.limit });
            }
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        let total = self.shared.fetch_add(self.local, Ordering::Relaxed) + self.local;
        self.local = 0;
        if total > self.limit {
            return Err(Error::BudgetExceeded { limit: self.limit });
        }
        Ok(())
    }
}

impl<'a> Plan<'a> {
    fn new(spec: &'a PolytopeSpec, degree: u32, interior_only: bool) -> Result<Self> {
        let graph = spec.graph();
        let profile = if interior_only {
            Some(spec.interior_profile()?)
        } else {
            None
        };
        let fixed = spec.fixed_values(degree);
        let edge_count = graph.edge_count();

        let mut order: Vec<usize> = (0..edge_count).filter(|&e| fixed[e].is_some()).collect();
        let mut assigned = vec![false; edge_count];
        let mut bound_slots = vec![0u8; graph.vertex_count()];
        let mark = |e: usize, assigned: &mut [bool], bound_slots: &mut [u8]| {
            assigned[e] = true;
            for &(v, m) in graph.incidence(EdgeId(e)) {
                bound_slots[v.0] += m;
            }
        };
        for &e in &order {
            mark(e, &mut assigned, &mut bound_slots);
        }
        while order.len() < edge_count {
            // prefer edges that close vertices, then edges touching bound slots
            let next = (0..edge_count)
                .filter(|&e| !assigned[e])
                .max_by_key(|&e| {
                    let mut closes = 0u32;
                    let mut touches = 0u32;
                    for &(v, m) in graph.incidence(EdgeId(e)) {
                        let b = bound_slots[v.0];
                        if b + m == 3 {
                            closes += 1;
                        }
                        touches += b as u32;
                    }
                    (closes, touches, std::cmp::Reverse(e))
                })
                .expect("unassigned edge exists");
            order.push(next);
            mark(next, &mut assigned, &mut bound_slots);
        }

        let mut bound_slots = vec![0u8; graph.vertex_count()];
        let mut steps = Vec::with_capacity(edge_count);
        for &e in &order {
            let mut checks = Vec::new();
            for &(v, m) in graph.incidence(EdgeId(e)) {
                bound_slots[v.0] += m;
                if bound_slots[v.0] != 3 {
                    continue;
                }
                let margin = profile.as_ref().map_or(0, |p| p.vertex_margin[v.0] as i64);
                let mut others = graph.slots(v).into_iter().map(|x| x.0).filter(|&x| x != e);
                match m {
                    1 => {
                        let a = others.next().expect("three slots");
                        let b = others.next().expect("three slots");
                        checks.push(Check::Closing { a, b, margin });
                    }
                    _ => {
                        let other = others.next().expect("three slots");
                        checks.push(Check::LoopClosing { other, margin });
                    }
                }
            }
            let floor = profile.as_ref().map_or(0, |p| p.edge_floor[e] as i64);
            steps.push(Step {
                edge: e,
                fixed: fixed[e].map(|x| x as i64),
                floor,
                checks,
            });
        }

        Ok(Self {
            spec,
            degree,
            steps,
            bound: degree as i64 * spec.level() as i64,
            profile,
        })
    }

    /// Candidate values for step `k`: `(lo, hi, step)`, empty when `lo > hi`.
    #[inline]
    fn domain(&self, k: usize, values: &[u32]) -> (i64, i64, i64) {
        let step = &self.steps[k];
        let s = self.bound;
        let (mut lo, mut hi) = match step.fixed {
            Some(x) => (x, x),
            None => (step.floor, s),
        };
        hi = hi.min(s);
        let mut parity: Option<i64> = None;
        for check in &step.checks {
            match *check {
                Check::Closing { a, b, margin } => {
                    let (x, y) = (values[a] as i64, values[b] as i64);
                    lo = lo.max((x - y).abs() + margin);
                    hi = hi.min(x + y - margin).min(2 * s - x - y - margin);
                    let p = (x + y) & 1;
                    if parity.is_some_and(|q| q != p) {
                        return (1, 0, 1);
                    }
                    parity = Some(p);
                }
                Check::LoopClosing { other, margin } => {
                    let p = values[other] as i64;
                    if p & 1 == 1 || p < margin {
                        return (1, 0, 1);
                    }
                    lo = lo.max((p + margin + 1) / 2);
                    hi = hi.min((2 * s - p - margin).div_euclid(2));
                }
            }
        }
        match parity {
            Some(p) => {
                if lo.rem_euclid(2) != p {
                    lo += 1;
                }
                (lo, hi, 2)
            }
            None => (lo, hi, 1),
        }
    }

    fn search<F>(
        &self,
        k: usize,
        values: &mut [u32],
        budget: &mut Budget,
        visit: &mut F,
    ) -> Result<ControlFlow<()>>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        if k == self.steps.len() {
            self.debug_check(values);
            return Ok(visit(values));
        }
        let (lo, hi, stride) = self.domain(k, values);
        let edge = self.steps[k].edge;
        let mut x = lo;
        while x <= hi {
            budget.tick()?;
            values[edge] = x as u32;
            if self.search(k + 1, values, budget, visit)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
            x += stride;
        }
        Ok(ControlFlow::Continue(()))
    }

    /// Like [`Plan::search`] but only counts; the last edge's domain is
    /// counted in closed form.
    fn search_count(&self, k: usize, values: &mut [u32], budget: &mut Budget) -> Result<u64> {
        let last = self.steps.len() - 1;
        let (lo, hi, stride) = self.domain(k, values);
        if lo > hi {
            return Ok(0);
        }
        if k == last {
            budget.tick()?;
            return Ok(((hi - lo) / stride + 1) as u64);
        }
        let edge = self.steps[k].edge;
        let mut total = 0u64;
        let mut x = lo;
        while x <= hi {
            budget.tick()?;
            values[edge] = x as u32;
            total += self.search_count(k + 1, values, budget)?;
            x += stride;
        }
        Ok(total)
    }

    fn debug_check(&self, values: &[u32]) {
        if cfg!(debug_assertions) {
            let w = EdgeWeights(values.to_vec());
            debug_assert!(
                values.iter().all(|&x| x as i64 <= self.bound),
                "edge bound violated"
            );
            debug_assert!(in_lattice(&w, self.spec.graph()));
            debug_assert_eq!(satisfies(&w, self.spec, self.degree), Ok(true));
            if let Some(p) = &self.profile {
                debug_assert!(strict_ok(values, self.spec, self.degree, p));
            }
        }
    }

    /// Position of the first free step and the prefix of fixed values.
    fn split(&self) -> (usize, Vec<u32>) {
        let mut values = vec![0u32; self.steps.len()];
        let mut k = 0;
        while k < self.steps.len() && self.steps[k].fixed.is_some() {
            let (lo, hi, _) = self.domain(k, &values);
            if lo > hi {
                break;
            }
            values[self.steps[k].edge] = lo as u32;
            k += 1;
        }
        (k, values)
    }

    /// Runs `per_branch` over the values of the first free edge, possibly in
    /// parallel, returning branch results in value order.
    fn branches<T, F>(&self, opts: &EnumOptions, per_branch: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, Vec<u32>, &mut Budget) -> Result<T> + Sync,
    {
        let shared = AtomicU64::new(0);
        let (k, prefix) = self.split();
        let run = |k: usize, values: Vec<u32>| -> Result<T> {
            let mut budget = Budget {
                limit: opts.node_budget,
                shared: &shared,
                local: 0,
            };
            let out = per_branch(k, values, &mut budget)?;
            budget.finish()?;
            Ok(out)
        };
        if k >= self.steps.len() || !opts.parallel || self.steps[k].fixed.is_some() {
            return Ok(vec![run(0, vec![0u32; self.steps.len()])?]);
        }
        let (lo, hi, stride) = self.domain(k, &prefix);
        let edge = self.steps[k].edge;
        let mut starts = Vec::new();
        let mut x = lo;
        while x <= hi {
            let mut v = prefix.clone();
            v[edge] = x as u32;
            starts.push(v);
            x += stride;
        }
        starts
            .into_par_iter()
            .map(|v| run(k + 1, v))
            .collect::<Result<Vec<T>>>()
    }
}

/// Visits every lattice point in search order (sequential). The callback may
/// stop the search early.
pub fn for_each_lattice_point<F>(
    spec: &PolytopeSpec,
    degree: u32,
    interior_only: bool,
    opts: &EnumOptions,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&[u32]) -> ControlFlow<()>,
{
    let plan = Plan::new(spec, degree, interior_only)?;
    let shared = AtomicU64::new(0);
    let mut budget = Budget {
        limit: opts.node_budget,
        shared: &shared,
        local: 0,
    };
    let mut values = vec![0u32; plan.steps.len()];
    let _ = plan.search(0, &mut values, &mut budget, &mut visit)?;
    budget.finish()
}

/// All lattice points (or interior lattice points) at `degree`, sorted
/// lexicographically by edge id.
pub fn enumerate_lattice_points(
    spec: &PolytopeSpec,
    degree: u32,
    interior_only: bool,
    opts: &EnumOptions,
) -> Result<Vec<EdgeWeights>> {
    let plan = Plan::new(spec, degree, interior_only)?;
    let parts = plan.branches(opts, |k, mut values, budget| {
        let mut out = Vec::new();
        let _ = plan.search(k, &mut values, budget, &mut |w: &[u32]| {
            out.push(EdgeWeights(w.to_vec()));
            ControlFlow::Continue(())
        })?;
        Ok(out)
    })?;
    let mut points: Vec<EdgeWeights> = parts.into_iter().flatten().collect();
    points.sort_unstable();
    Ok(points)
}

pub fn count_lattice_points(
    spec: &PolytopeSpec,
    degree: u32,
    interior_only: bool,
    opts: &EnumOptions,
) -> Result<u64> {
    let plan = Plan::new(spec, degree, interior_only)?;
    if plan.steps.is_empty() {
        return Ok(1);
    }
    let parts = plan.branches(opts, |k, mut values, budget| {
        if k == plan.steps.len() {
            return Ok(1);
        }
        plan.search_count(k, &mut values, budget)
    })?;
    Ok(parts.into_iter().sum())
}
