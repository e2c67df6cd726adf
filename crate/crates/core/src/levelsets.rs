//! Connected components of lower level sets `Mᵃ = { x : ‖x‖₀ <= s, f(x) <= a }`.
//!
//! `Mᵃ` is the union of the ellipsoids `M_Sᵃ = Mᵃ ∩ X_S` over supports of
//! size exactly `s` (smaller supports are contained in larger ones). Each
//! `M_Sᵃ` is connected and `M_Sᵃ ∩ M_Tᵃ = M_{S∩T}ᵃ`, which is nonempty iff
//! `min_{X_{S∩T}} f <= a`. Components of the union are therefore the
//! components of the intersection graph, which is all this module computes.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::enumeration::{enumerate_supports, values_tie, LandscapeReport};
use crate::error::{Error, Result};
use crate::linalg::{norm2, singular_values, solve_normal_equations};
use crate::model::{objective, Instance, SupportSet};
use crate::parallel::map_ordered;
use crate::stationarity::PointKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportSubspace {
    pub support: SupportSet,
    pub min_value: f64,
    pub argmin: Vec<f64>,
    /// `A_S` had full column rank; otherwise `argmin` is the minimum-norm minimizer.
    pub full_rank: bool,
}

/// Minimum of `f` over vectors supported in `support`.
pub fn subspace_min(inst: &Instance, support: &SupportSet) -> Result<SupportSubspace> {
    if support.len() > inst.s() {
        return Err(Error::OutOfRange(format!(
            "support {support} has more than s = {} entries",
            inst.s()
        )));
    }
    if support.indices().last().is_some_and(|&i| i >= inst.n()) {
        return Err(Error::OutOfRange(format!("support {support} exceeds n")));
    }
    let a_s = inst.a().select_columns(support.indices());
    let ls = solve_normal_equations(&a_s, inst.b(), inst.rank_tol())?;
    let mut argmin = vec![0.0; inst.n()];
    for (&i, v) in support.indices().iter().zip(&ls.x) {
        argmin[i] = *v;
    }
    Ok(SupportSubspace {
        support: support.clone(),
        min_value: objective(inst, &argmin)?,
        argmin,
        full_rank: ls.full_rank,
    })
}

/// `min_value <= a` up to `1e-12 · (1 + |a|)`.
fn at_or_below(min_value: f64, a: f64) -> bool {
    min_value <= a + 1e-12 * (1.0 + a.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetGraph {
    pub level: f64,
    pub nodes: Vec<SupportSet>,
    pub edges: Vec<(SupportSet, SupportSet)>,
    pub q: usize,
}

/// Subspace minima for every support of size `<= s`, computed once and
/// reused across level queries.
#[derive(Debug, Clone)]
pub struct SubspaceTable {
    n: usize,
    s: usize,
    b_norm: f64,
    mins: HashMap<SupportSet, SupportSubspace>,
    /// Size-`s` supports in lexicographic order.
    maximal: Vec<SupportSet>,
    sigma_min: HashMap<SupportSet, f64>,
}

impl SubspaceTable {
    pub fn new(inst: &Instance) -> Result<Self> {
        Self::with_threads(inst, 1)
    }

    pub fn with_threads(inst: &Instance, threads: usize) -> Result<Self> {
        let supports: Vec<SupportSet> = enumerate_supports(inst.n(), inst.s()).collect();
        let computed = map_ordered(supports, threads, |sup| subspace_min(inst, &sup))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let maximal: Vec<SupportSet> = computed
            .iter()
            .filter(|m| m.support.len() == inst.s())
            .map(|m| m.support.clone())
            .collect();
        let sigma_min = maximal
            .iter()
            .map(|sup| {
                let sv = singular_values(&inst.a().select_columns(sup.indices()));
                let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
                (
                    sup.clone(),
                    if sv.is_empty() { f64::INFINITY } else { smin },
                )
            })
            .collect();
        Ok(Self {
            n: inst.n(),
            s: inst.s(),
            b_norm: norm2(inst.b()),
            mins: computed
                .into_iter()
                .map(|m| (m.support.clone(), m))
                .collect(),
            maximal,
            sigma_min,
        })
    }

    pub fn get(&self, support: &SupportSet) -> Option<&SupportSubspace> {
        self.mins.get(support)
    }

    pub fn min_value(&self, support: &SupportSet) -> f64 {
        self.mins[support].min_value
    }

    pub fn component_count(&self, level: f64) -> LevelSetGraph {
        let nodes: Vec<SupportSet> = self
            .maximal
            .iter()
            .filter(|sup| at_or_below(self.min_value(sup), level))
            .cloned()
            .collect();
        let mut uf = UnionFind::<usize>::new(nodes.len());
        let mut edges = Vec::new();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                let common = nodes[i].intersection(&nodes[j]);
                if at_or_below(self.min_value(&common), level) {
                    uf.union(i, j);
                    edges.push((nodes[i].clone(), nodes[j].clone()));
                }
            }
        }
        let mut roots: Vec<usize> = (0..nodes.len()).map(|i| uf.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        LevelSetGraph {
            level,
            q: roots.len(),
            nodes,
            edges,
        }
    }

    /// Bound on `‖x‖` over `M_Sᵃ` for a size-`s` support:
    /// `(‖b‖ + √(2a)) / σ_min(A_S)`. `None` when `A_S` is rank deficient or
    /// the level is negative.
    pub fn radius_bound(&self, support: &SupportSet, level: f64) -> Option<f64> {
        if level < 0.0 {
            return None;
        }
        let smin = *self.sigma_min.get(support)?;
        if self.s == 0 {
            return Some(0.0);
        }
        (smin > 0.0).then(|| (self.b_norm + (2.0 * level).sqrt()) / smin)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }
}

/// Components of `Mᵃ`.
pub fn component_count(inst: &Instance, level: f64) -> Result<LevelSetGraph> {
    Ok(SubspaceTable::new(inst)?.component_count(level))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelInterval {
    pub interval: [f64; 2],
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub value: f64,
    /// Kind of the point(s) at this value, `+`-joined when several share it.
    pub kind: String,
    pub points: usize,
    pub delta: i64,
    pub admissible_min: Option<i64>,
    pub admissible_max: Option<i64>,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub intervals: Vec<LevelInterval>,
    pub transitions: Vec<Transition>,
    /// All points nondegenerate and no continuum; otherwise transitions carry no admissible range.
    pub audit_applicable: bool,
    /// Several stationary points share a value; their transition is audited jointly.
    pub ties_detected: bool,
    /// q agrees at the quarter points of every interval.
    pub interior_constant: bool,
    pub violations: usize,
}

impl SweepReport {
    pub fn q_sequence(&self) -> Vec<usize> {
        self.intervals.iter().map(|i| i.q).collect()
    }
}

fn admissible_range(kind: PointKind, n: usize, s: usize) -> Option<(i64, i64)> {
    match kind {
        PointKind::LocalMinimizer => Some((1, 1)),
        PointKind::SaddlePoint => Some((-((n - s) as i64), 0)),
        PointKind::LowerOrderStationary => Some((0, 0)),
        PointKind::DegeneratePoint => None,
    }
}

/// Sweeps `a` upward through the stationary values of `report`, counting
/// components in each open interval and auditing each crossing.
///
/// Crossing a minimizer must add one component, a saddle may merge up to
/// `n − s` of them, and a lower-order point leaves the count unchanged.
pub fn sweep_levels(inst: &Instance, report: &LandscapeReport) -> Result<SweepReport> {
    sweep_with_table(&SubspaceTable::new(inst)?, report)
}

pub fn sweep_with_table(table: &SubspaceTable, report: &LandscapeReport) -> Result<SweepReport> {
    let (n, s) = (table.n(), table.s());
    let mut values: Vec<(f64, PointKind)> =
        report.points.iter().map(|p| (p.value, p.kind)).collect();
    values.sort_by(|x, y| x.0.total_cmp(&y.0));
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "report has no stationary points".into(),
        ));
    }
    let mut groups: Vec<Vec<(f64, PointKind)>> = Vec::new();
    for v in values {
        match groups.last_mut() {
            Some(g) if values_tie(g[0].0, v.0) => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    let ties_detected = groups.iter().any(|g| g.len() > 1);
    let audit_applicable = report.degenerate == 0 && !report.continuum_detected;

    let reps: Vec<f64> = groups.iter().map(|g| g[0].0).collect();
    let mut bounds = Vec::with_capacity(reps.len() + 1);
    bounds.push([reps[0] - 2.0, reps[0]]);
    for w in reps.windows(2) {
        bounds.push([w[0], w[1]]);
    }
    let last = *reps.last().expect("nonempty");
    bounds.push([last, last + 2.0]);

    let mut interior_constant = true;
    let intervals: Vec<LevelInterval> = bounds
        .iter()
        .map(|&[lo, hi]| {
            let at = |t: f64| table.component_count(lo + t * (hi - lo)).q;
            let q = at(0.5);
            interior_constant &= at(0.25) == q && at(0.75) == q;
            LevelInterval {
                interval: [lo, hi],
                q,
            }
        })
        .collect();

    let mut violations = 0;
    let transitions = groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let delta = intervals[i + 1].q as i64 - intervals[i].q as i64;
            let mut kinds: Vec<PointKind> = g.iter().map(|p| p.1).collect();
            kinds.sort();
            let range = if audit_applicable {
                kinds.iter().try_fold((0i64, 0i64), |(lo, hi), k| {
                    admissible_range(*k, n, s).map(|(a, b)| (lo + a, hi + b))
                })
            } else {
                None
            };
            let admissible = range.is_some_and(|(lo, hi)| lo <= delta && delta <= hi);
            if audit_applicable && !admissible {
                violations += 1;
            }
            kinds.dedup();
            Transition {
                value: g[0].0,
                kind: kinds
                    .iter()
                    .map(|k| k.as_str())
                    .collect::<Vec<_>>()
                    .join("+"),
                points: g.len(),
                delta,
                admissible_min: range.map(|r| r.0),
                admissible_max: range.map(|r| r.1),
                admissible,
            }
        })
        .collect();
    if !interior_constant {
        violations += 1;
    }
    Ok(SweepReport {
        intervals,
        transitions,
        audit_applicable,
        ties_detected,
        interior_constant,
        violations,
    })
}
