//! Exhaustive enumeration of M-stationary points.
//!
//! Every M-stationary point `x̄` solves the least-squares problem on its own
//! support, so solving on every support `S` with `|S| <= s` and padding with
//! zeros reaches all of them. A solve on `S` may land on a point whose
//! support is a strict subset of `S`; those duplicates are merged.

use std::cmp::Ordering;

use itertools::Itertools;
use serde::Serialize;

use crate::error::Result;
use crate::io::instance_to_json;
use crate::linalg::{numerical_rank, solve_normal_equations, DenseMatrix};
use crate::model::{support_of, Instance, SupportSet};
use crate::parallel::map_ordered;
use crate::sampling::{gaussian_instance, trial_rng};
use crate::stationarity::{classify, PointKind, StationaryPoint};

/// All `S ⊆ {0..n}` with `|S| <= s`, by size and then lexicographically.
pub fn enumerate_supports(n: usize, s: usize) -> impl Iterator<Item = SupportSet> {
    (0..=s.min(n)).flat_map(move |k| (0..n).combinations(k).map(SupportSet::from_sorted))
}

/// Whether every `s`-column submatrix has numerical rank `s`; on failure the
/// lexicographically first offending column set.
pub fn check_s_regularity(
    a: &DenseMatrix,
    s: usize,
    rank_tol: f64,
) -> Result<(bool, Option<SupportSet>)> {
    for cols in (0..a.cols()).combinations(s) {
        if numerical_rank(&a.select_columns(&cols), rank_tol)? < s {
            return Ok((false, Some(SupportSet::from_sorted(cols))));
        }
    }
    Ok((true, None))
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    pub threads: usize,
    /// Visit supports in reverse order; the report must not change.
    pub reverse: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            threads: 1,
            reverse: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LandscapeReport {
    /// Sorted by value, then support.
    pub points: Vec<StationaryPoint>,
    pub r: usize,
    pub r1: usize,
    pub lower_order: usize,
    pub degenerate: usize,
    pub s_regular: bool,
    pub s_regularity_witness: Option<SupportSet>,
    pub morse_lhs: i64,
    pub morse_rhs: i64,
    pub morse_holds: bool,
    /// The relation holds with equality.
    pub morse_equality: bool,
    /// Some support solve was rank deficient: the stationary set contains a continuum.
    pub continuum_detected: bool,
    /// Two stationary values coincide within `1e-9 · (1 + |v|)`.
    pub hypothesis_violated: bool,
    /// s-regular, all points nondegenerate, values pairwise distinct.
    pub morse_applicable: bool,
    /// Solutions that failed the stationarity check and were dropped.
    pub unverified_candidates: usize,
}

impl LandscapeReport {
    pub fn all_nondegenerate(&self) -> bool {
        self.degenerate == 0
    }

    pub fn count(&self, kind: PointKind) -> usize {
        self.points.iter().filter(|p| p.kind == kind).count()
    }
}

pub(crate) fn values_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

struct Candidate {
    source: SupportSet,
    canonical: SupportSet,
    x: Vec<f64>,
    full_rank: bool,
}

fn solve_on_support(inst: &Instance, support: SupportSet) -> Result<Candidate> {
    let a_s = inst.a().select_columns(support.indices());
    let ls = solve_normal_equations(&a_s, inst.b(), inst.rank_tol())?;
    let mut x = vec![0.0; inst.n()];
    for (&i, v) in support.indices().iter().zip(&ls.x) {
        x[i] = *v;
    }
    let canonical = support_of(&x, inst.tol().zero_tol);
    for (i, v) in x.iter_mut().enumerate() {
        if !canonical.contains(i) {
            *v = 0.0;
        }
    }
    Ok(Candidate {
        source: support,
        canonical,
        x,
        full_rank: ls.full_rank,
    })
}

fn max_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

pub fn enumerate_stationary(inst: &Instance) -> Result<LandscapeReport> {
    enumerate_stationary_with(inst, &EnumerateOptions::default())
}

pub fn enumerate_stationary_with(
    inst: &Instance,
    opts: &EnumerateOptions,
) -> Result<LandscapeReport> {
    inst.validate()?;
    let (n, s) = (inst.n(), inst.s());
    let mut supports: Vec<SupportSet> = enumerate_supports(n, s).collect();
    if opts.reverse {
        supports.reverse();
    }
    let mut candidates = map_ordered(supports, opts.threads, |sup| solve_on_support(inst, sup))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let continuum_detected = candidates.iter().any(|c| !c.full_rank);

    // A canonical order makes the merge independent of visiting order; the
    // smallest source support (normally the canonical support itself) wins.
    candidates.sort_by(|p, q| {
        p.canonical
            .cmp(&q.canonical)
            .then(p.source.len().cmp(&q.source.len()))
            .then(p.source.cmp(&q.source))
    });
    let dedupe_tol = inst.tol().dedupe_tol;
    let mut reps: Vec<Candidate> = Vec::new();
    for c in candidates {
        let dup = reps
            .iter()
            .rev()
            .take_while(|r| r.canonical == c.canonical)
            .any(|r| max_dist(&r.x, &c.x) <= dedupe_tol);
        if !dup {
            reps.push(c);
        }
    }

    let classified: Vec<Result<StationaryPoint>> =
        map_ordered(reps, opts.threads, |c| classify(inst, &c.x));
    let mut points = Vec::with_capacity(classified.len());
    let mut unverified_candidates = 0;
    for p in classified {
        match p {
            Ok(p) => points.push(p),
            Err(crate::Error::NotStationary { .. }) => unverified_candidates += 1,
            Err(e) => return Err(e),
        }
    }
    points.sort_by(|p, q| {
        p.value
            .total_cmp(&q.value)
            .then_with(|| p.support().cmp(q.support()))
            .then_with(|| {
                p.x()
                    .iter()
                    .zip(q.x())
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
    });

    let count = |k: PointKind| points.iter().filter(|p| p.kind == k).count();
    let r = count(PointKind::LocalMinimizer);
    let r1 = count(PointKind::SaddlePoint);
    let lower_order = count(PointKind::LowerOrderStationary);
    let degenerate = count(PointKind::DegeneratePoint);
    let (s_regular, s_regularity_witness) = check_s_regularity(inst.a(), s, inst.rank_tol())?;
    let hypothesis_violated = points
        .windows(2)
        .any(|w| values_tie(w[0].value, w[1].value));
    let morse_lhs = ((n - s) * r1) as i64;
    let morse_rhs = r as i64 - 1;
    Ok(LandscapeReport {
        r,
        r1,
        lower_order,
        degenerate,
        s_regular,
        s_regularity_witness,
        morse_lhs,
        morse_rhs,
        morse_holds: morse_lhs >= morse_rhs,
        morse_equality: morse_lhs == morse_rhs,
        continuum_detected,
        hypothesis_violated,
        morse_applicable: s_regular
            && degenerate == 0
            && !hypothesis_violated
            && !continuum_detected,
        unverified_candidates,
        points,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericityFailure {
    pub trial: u64,
    pub reasons: Vec<String>,
    pub instance: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericityReport {
    pub trials: u64,
    pub all_nondegenerate_fraction: f64,
    pub minimizers_active_fraction: f64,
    pub s_regular_fraction: f64,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub s: usize,
    pub failures: Vec<GenericityFailure>,
}

struct TrialOutcome {
    all_nondegenerate: bool,
    minimizers_active: bool,
    s_regular: bool,
    failure: Option<GenericityFailure>,
}

fn genericity_trial(m: usize, n: usize, s: usize, seed: u64, trial: u64) -> Result<TrialOutcome> {
    let mut rng = trial_rng(seed, trial);
    let inst = gaussian_instance(&mut rng, m, n, s)?;
    let report = enumerate_stationary(&inst)?;
    let all_nondegenerate = report.all_nondegenerate() && report.unverified_candidates == 0;
    // Minimizer candidates live on full supports; none of them may be degenerate.
    let minimizers_active = !report
        .points
        .iter()
        .any(|p| p.sparsity() == s && p.kind == PointKind::DegeneratePoint);
    let s_regular = report.s_regular;

    let mut reasons = Vec::new();
    if !all_nondegenerate {
        reasons.push(format!(
            "{} degenerate point(s), {} unverified",
            report.degenerate, report.unverified_candidates
        ));
    }
    if !minimizers_active {
        reasons.push("degenerate point with full support".into());
    }
    if !s_regular {
        reasons.push(format!(
            "not s-regular, witness {}",
            report
                .s_regularity_witness
                .as_ref()
                .map_or_else(String::new, |w| w.to_string())
        ));
    }
    let failure = (!reasons.is_empty()).then(|| GenericityFailure {
        trial,
        reasons,
        instance: instance_to_json(&inst),
    });
    Ok(TrialOutcome {
        all_nondegenerate,
        minimizers_active,
        s_regular,
        failure,
    })
}

/// Samples Gaussian `(A, b)` and measures how often the landscape is fully
/// nondegenerate, free of degenerate full-support points, and s-regular.
pub fn run_genericity_experiment(
    m: usize,
    n: usize,
    s: usize,
    trials: u64,
    seed: u64,
) -> Result<GenericityReport> {
    run_genericity_experiment_threaded(m, n, s, trials, seed, 1)
}

pub fn run_genericity_experiment_threaded(
    m: usize,
    n: usize,
    s: usize,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<GenericityReport> {
    // shape errors surface even when trials = 0
    Instance::new(DenseMatrix::zeros(m, n), vec![0.0; m], s)?;
    let outcomes = map_ordered((0..trials).collect(), threads, |t| {
        genericity_trial(m, n, s, seed, t)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let frac = |f: &dyn Fn(&TrialOutcome) -> bool| {
        if trials == 0 {
            1.0
        } else {
            outcomes.iter().filter(|o| f(o)).count() as f64 / trials as f64
        }
    };
    Ok(GenericityReport {
        trials,
        all_nondegenerate_fraction: frac(&|o| o.all_nondegenerate),
        minimizers_active_fraction: frac(&|o| o.minimizers_active),
        s_regular_fraction: frac(&|o| o.s_regular),
        seed,
        m,
        n,
        s,
        failures: outcomes.into_iter().filter_map(|o| o.failure).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::gaussian_matrix;
    use approx::assert_abs_diff_eq;

    fn eye2(b: [f64; 2]) -> Instance {
        Instance::new(DenseMatrix::identity(2), b.to_vec(), 1).unwrap()
    }

    fn support(idx: &[usize]) -> SupportSet {
        SupportSet::from_sorted(idx.to_vec())
    }

    #[test]
    fn support_listing() {
        let all: Vec<SupportSet> = enumerate_supports(2, 1).collect();
        assert_eq!(all, vec![support(&[]), support(&[0]), support(&[1])]);
        assert_eq!(enumerate_supports(4, 2).count(), 11);
    }

    #[test]
    fn support_count_matches_independent_loop() {
        // count subsets of size <= 2 by bitmask popcount
        let brute = (0u32..1 << 6).filter(|m| m.count_ones() <= 2).count();
        assert_eq!(brute, 22);
        assert_eq!(enumerate_supports(6, 2).count(), brute);
        let listed: Vec<SupportSet> = enumerate_supports(6, 2).collect();
        let unique: std::collections::BTreeSet<_> = listed.iter().cloned().collect();
        assert_eq!(unique.len(), listed.len());
    }

    #[test]
    fn instability_original() {
        let rep = enumerate_stationary(&eye2([0.0, 0.0])).unwrap();
        assert_eq!(rep.points.len(), 1);
        let p = &rep.points[0];
        assert_eq!(p.x(), &[0.0, 0.0]);
        assert_eq!(p.kind, PointKind::DegeneratePoint);
        assert!(!p.cert.nd1_holds);
        assert!(!rep.morse_applicable);
    }

    #[test]
    fn instability_perturbed() {
        let rep = enumerate_stationary(&eye2([0.1, 0.1])).unwrap();
        assert_eq!(rep.points.len(), 3);
        assert_eq!((rep.r, rep.r1, rep.degenerate), (2, 1, 0));
        let close = |x: &[f64], y: [f64; 2]| (x[0] - y[0]).abs().max((x[1] - y[1]).abs()) <= 1e-12;
        assert!(close(rep.points[0].x(), [0.1, 0.0]));
        assert!(close(rep.points[1].x(), [0.0, 0.1]));
        assert_eq!(rep.points[2].x(), &[0.0, 0.0]);
        assert_eq!(rep.points[2].kind, PointKind::SaddlePoint);
        // the two minimizers share their value
        assert!(rep.hypothesis_violated);
    }

    #[test]
    fn complementarity_example() {
        let rep = enumerate_stationary(&eye2([-1.0, 0.0])).unwrap();
        assert_eq!(rep.points.len(), 2);
        assert_eq!(rep.points[0].x(), &[-1.0, 0.0]);
        assert_eq!(rep.points[0].kind, PointKind::LocalMinimizer);
        assert_eq!(rep.points[1].x(), &[0.0, 0.0]);
        assert_eq!(rep.points[1].kind, PointKind::DegeneratePoint);
    }

    #[test]
    fn s_regularity_examples() {
        assert_eq!(
            check_s_regularity(&DenseMatrix::identity(2), 1, 1e-10).unwrap(),
            (true, None)
        );
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(
            check_s_regularity(&a, 1, 1e-10).unwrap(),
            (false, Some(support(&[1])))
        );
        assert_eq!(check_s_regularity(&a, 0, 1e-10).unwrap(), (true, None));
    }

    #[test]
    fn s_regularity_matches_exhaustive_rank_oracle() {
        let mut rng = trial_rng(99, 0);
        let a = gaussian_matrix(&mut rng, 4, 6);
        // independent loop over all pairs via 2x2 minors: rank 2 iff some minor is nonzero
        let mut all_rank_two = true;
        let mut checked = 0;
        for i in 0..6 {
            for j in i + 1..6 {
                checked += 1;
                let mut max_minor: f64 = 0.0;
                for p in 0..4 {
                    for q in p + 1..4 {
                        let minor = a[(p, i)] * a[(q, j)] - a[(q, i)] * a[(p, j)];
                        max_minor = max_minor.max(minor.abs());
                    }
                }
                all_rank_two &= max_minor > 1e-9;
            }
        }
        assert_eq!(checked, 15);
        assert!(all_rank_two);
        assert_eq!(check_s_regularity(&a, 2, 6e-10).unwrap(), (true, None));
    }

    #[test]
    fn duplicated_columns_flag_continuum() {
        let a = DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let inst = Instance::new(a, vec![1.0, 0.5], 2).unwrap();
        let rep = enumerate_stationary(&inst).unwrap();
        assert!(rep.continuum_detected);
        assert!(!rep.s_regular);
        assert_eq!(rep.s_regularity_witness, Some(support(&[0, 1])));
        let degenerate_pair = rep
            .points
            .iter()
            .find(|p| p.support() == &support(&[0, 1]))
            .expect("min-norm representative on {1,2}");
        assert_eq!(degenerate_pair.kind, PointKind::DegeneratePoint);
        assert!(!degenerate_pair.cert.nd2_holds);
        assert_abs_diff_eq!(degenerate_pair.x()[0], 0.5, epsilon = 1e-12);
        assert!(!rep.morse_applicable);
    }

    #[test]
    fn reverse_order_and_threads_give_same_report() {
        for t in 0..20 {
            let mut rng = trial_rng(7, t);
            let inst = gaussian_instance(&mut rng, 5, 7, 3).unwrap();
            let fwd = serde_json::to_string(&enumerate_stationary(&inst).unwrap()).unwrap();
            let rev = enumerate_stationary_with(
                &inst,
                &EnumerateOptions {
                    threads: 1,
                    reverse: true,
                },
            )
            .unwrap();
            let par = enumerate_stationary_with(
                &inst,
                &EnumerateOptions {
                    threads: 4,
                    reverse: false,
                },
            )
            .unwrap();
            assert_eq!(fwd, serde_json::to_string(&rev).unwrap());
            assert_eq!(fwd, serde_json::to_string(&par).unwrap());
        }
    }

    #[test]
    fn genericity_edge_cases() {
        let empty = run_genericity_experiment(4, 6, 2, 0, 1).unwrap();
        assert_eq!(empty.trials, 0);
        assert_eq!(empty.all_nondegenerate_fraction, 1.0);
        assert_eq!(empty.minimizers_active_fraction, 1.0);
        assert_eq!(empty.s_regular_fraction, 1.0);
        assert!(run_genericity_experiment(1, 3, 2, 5, 1).is_err());
    }

    #[test]
    fn genericity_minimal_shape() {
        let rep = run_genericity_experiment(2, 2, 1, 100, 7).unwrap();
        assert_eq!(rep.all_nondegenerate_fraction, 1.0);
        assert_eq!(rep.minimizers_active_fraction, 1.0);
        assert_eq!(rep.s_regular_fraction, 1.0);
        assert!(rep.failures.is_empty());
    }
}
