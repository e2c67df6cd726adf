//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use petgraph::unionfind::UnionFind;
use rand::Rng;
use sparsemorse_core::linalg::largest_eigenvalue_gram;
use sparsemorse_core::sampling::{gaussian_instance, gaussian_vec, trial_rng};
use sparsemorse_core::stationarity::PointKind;
use sparsemorse_core::{
    enumerate_stationary, iht_solve, probe_strong_stability, run_genericity_experiment,
    sweep_levels, DenseMatrix, Instance, LandscapeReport, StabilityProbeConfig, SubspaceTable,
};

const COORD_TOL: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn eye2(b: [f64; 2]) -> Instance {
    Instance::new(DenseMatrix::identity(2), b.to_vec(), 1).unwrap()
}

fn close(x: &[f64], y: &[f64]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() <= COORD_TOL)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let rep = enumerate_stationary(&eye2([0.0, 0.0])).unwrap();
    let elapsed = start.elapsed();
    let ok = rep.points.len() == 1
        && close(rep.points[0].x(), &[0.0, 0.0])
        && rep.points[0].kind == PointKind::DegeneratePoint
        && !rep.points[0].cert.nd1_holds
        && elapsed < Duration::from_millis(100);
    Outcome::new(
        ok,
        format!(
            "points={} kind={:?} nd1={} time={:.3}ms",
            rep.points.len(),
            rep.points.first().map(|p| p.kind),
            rep.points.first().is_some_and(|p| p.cert.nd1_holds),
            elapsed.as_secs_f64() * 1e3
        ),
    )
}

fn criterion_2() -> Outcome {
    let rep = enumerate_stationary(&eye2([0.1, 0.1])).unwrap();
    let expect = [
        ([0.1, 0.0], PointKind::LocalMinimizer),
        ([0.0, 0.1], PointKind::LocalMinimizer),
        ([0.0, 0.0], PointKind::SaddlePoint),
    ];
    let ok = rep.points.len() == 3
        && rep.r == 2
        && rep.r1 == 1
        && rep
            .points
            .iter()
            .zip(&expect)
            .all(|(p, (x, k))| close(p.x(), x) && p.kind == *k && p.is_nondegenerate());
    Outcome::new(
        ok,
        format!("points={} r={} r1={}", rep.points.len(), rep.r, rep.r1),
    )
}

fn criterion_3() -> Outcome {
    let rep = enumerate_stationary(&eye2([1.0, 1.0])).unwrap();
    let ok =
        rep.r == 2 && rep.r1 == 1 && rep.morse_holds && rep.morse_lhs == 1 && rep.morse_rhs == 1;
    Outcome::new(
        ok,
        format!(
            "r={} r1={} (n-s)r1={} r-1={}",
            rep.r, rep.r1, rep.morse_lhs, rep.morse_rhs
        ),
    )
}

fn criterion_4() -> Outcome {
    let rep = enumerate_stationary(&eye2([-1.0, 0.0])).unwrap();
    let ok = rep.points.len() == 2
        && close(rep.points[0].x(), &[-1.0, 0.0])
        && rep.points[0].kind == PointKind::LocalMinimizer
        && rep.points[0].is_nondegenerate()
        && close(rep.points[1].x(), &[0.0, 0.0])
        && rep.points[1].kind == PointKind::DegeneratePoint;
    Outcome::new(
        ok,
        format!(
            "kinds={:?}",
            rep.points.iter().map(|p| p.kind).collect::<Vec<_>>()
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let rep = run_genericity_experiment(4, 6, 2, 1000, 42).unwrap();
    let elapsed = start.elapsed();
    let ok = rep.all_nondegenerate_fraction == 1.0
        && rep.s_regular_fraction == 1.0
        && rep.failures.is_empty()
        && elapsed < Duration::from_secs(60);
    Outcome::new(
        ok,
        format!(
            "nondegenerate={} s_regular={} failures={} time={:.2}s",
            rep.all_nondegenerate_fraction,
            rep.s_regular_fraction,
            rep.failures.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Random Gaussian instance with `s` in `s_range`, `s < n <= n_max`, `s <= m <= n`.
fn random_shape_instance(seed: u64, idx: u64, s_max: usize, n_max: usize) -> Instance {
    let mut rng = trial_rng(seed, idx);
    let s = rng.random_range(1..=s_max);
    let n = rng.random_range(s + 1..=n_max);
    let m = rng.random_range(s..=n);
    gaussian_instance(&mut rng, m, n, s).unwrap()
}

fn criterion_6() -> Outcome {
    let (mut accepted, mut drawn, mut failures) = (0, 0u64, 0);
    while accepted < 500 {
        let inst = random_shape_instance(6, drawn, 3, 8);
        drawn += 1;
        let rep = enumerate_stationary(&inst).unwrap();
        if !rep.morse_applicable {
            continue;
        }
        accepted += 1;
        let lhs = (inst.n() - inst.s()) as i64 * rep.r1 as i64;
        if lhs < rep.r as i64 - 1 || !rep.morse_holds {
            failures += 1;
        }
    }
    Outcome::new(
        failures == 0,
        format!("instances={accepted} drawn={drawn} violations={failures}"),
    )
}

/// Components of the sublevel set `{x : ‖x‖₀ <= s, f(x) <= level}` on a grid
/// of step `h` over `[-R, R]ⁿ`, 4-connected inside each coordinate
/// `s`-plane, with grid points shared between planes identified.
struct GridOracle {
    n: usize,
    half: i32,
    /// Per size-`s` support: its indices and `f` on the grid, row-major.
    planes: Vec<(Vec<usize>, Vec<f64>)>,
}

impl GridOracle {
    fn new(inst: &Instance, h: f64, radius: f64) -> Self {
        let (n, s, m) = (inst.n(), inst.s(), inst.m());
        let half = (radius / h).ceil() as i32;
        let side = (2 * half + 1) as usize;
        let mut planes = Vec::new();
        for sup in sparsemorse_core::enumerate_supports(n, s).filter(|p| p.len() == s) {
            let cols: Vec<Vec<f64>> = sup.indices().iter().map(|&j| inst.a().column(j)).collect();
            let mut vals = Vec::with_capacity(side.pow(s as u32));
            for lin in 0..side.pow(s as u32) {
                let mut r: Vec<f64> = inst.b().iter().map(|v| -v).collect();
                let mut rest = lin;
                for col in cols.iter().rev() {
                    let t = (rest % side) as i32 - half;
                    rest /= side;
                    let x = h * t as f64;
                    for i in 0..m {
                        r[i] += col[i] * x;
                    }
                }
                vals.push(0.5 * r.iter().map(|v| v * v).sum::<f64>());
            }
            planes.push((sup.indices().to_vec(), vals));
        }
        Self { n, half, planes }
    }

    fn count(&self, level: f64) -> usize {
        let side = (2 * self.half + 1) as usize;
        let per = self.planes[0].1.len();
        let mut uf = UnionFind::<u32>::new(per * self.planes.len());
        let mut shared: HashMap<Vec<i32>, u32> = HashMap::new();
        for (p, (idx, vals)) in self.planes.iter().enumerate() {
            let s = idx.len();
            let base = p * per;
            for lin in 0..per {
                if vals[lin] > level {
                    continue;
                }
                let mut coords = vec![0i32; s];
                let mut rest = lin;
                for c in coords.iter_mut().rev() {
                    *c = (rest % side) as i32 - self.half;
                    rest /= side;
                }
                // forward neighbours along each in-plane axis
                let mut stride = 1;
                for d in (0..s).rev() {
                    if coords[d] < self.half && vals[lin + stride] <= level {
                        uf.union((base + lin) as u32, (base + lin + stride) as u32);
                    }
                    stride *= side;
                }
                if coords.contains(&0) {
                    let mut key = vec![0i32; self.n];
                    for (&j, &c) in idx.iter().zip(&coords) {
                        key[j] = c;
                    }
                    let me = (base + lin) as u32;
                    let first = *shared.entry(key).or_insert(me);
                    uf.union(first, me);
                }
            }
        }
        let mut roots: Vec<u32> = self
            .planes
            .iter()
            .enumerate()
            .flat_map(|(p, (_, vals))| {
                vals.iter()
                    .enumerate()
                    .filter(move |(_, v)| **v <= level)
                    .map(move |(lin, _)| (p * per + lin) as u32)
            })
            .map(|i| uf.find(i))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

fn distinct_values(rep: &LandscapeReport) -> Vec<f64> {
    let mut v: Vec<f64> = rep.points.iter().map(|p| p.value).collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    v
}

/// Five probe levels, preferring interval midpoints so every level sits well
/// away from a stationary value.
fn oracle_levels(values: &[f64]) -> Vec<f64> {
    let last = *values.last().unwrap();
    let mut out: Vec<f64> = values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    out.push(last + 0.5);
    out.extend(
        values
            .windows(2)
            .flat_map(|w| [0.75 * w[0] + 0.25 * w[1], 0.25 * w[0] + 0.75 * w[1]]),
    );
    if values[0] > 0.1 {
        out.push(0.5 * values[0]);
    }
    out.extend([last + 1.0, last + 1.5, last + 2.0]);
    out.truncate(5);
    out
}

fn criterion_7() -> Outcome {
    const STEP: f64 = 0.01;
    const MAX_RADIUS: f64 = 4.0;
    const MIN_GAP: f64 = 0.05;
    let (mut accepted, mut drawn, mut mismatches, mut checks) = (0, 0u64, 0, 0);
    let mut notes = Vec::new();
    while accepted < 20 {
        let mut rng = trial_rng(7, drawn);
        drawn += 1;
        // cycle through the shapes (n, s) = (2, 1), (3, 1), (3, 2)
        let (n, s) = [(2, 1), (3, 1), (3, 2)][accepted % 3];
        let m = rng.random_range(s..=3);
        let inst = gaussian_instance(&mut rng, m, n, s).unwrap();
        let rep = enumerate_stationary(&inst).unwrap();
        // resolution filters: a grid of step 0.01 must resolve every
        // component and every gap between them at the chosen levels
        if !rep.all_nondegenerate() || rep.continuum_detected {
            continue;
        }
        let values = distinct_values(&rep);
        if values.windows(2).any(|w| w[1] - w[0] < MIN_GAP) {
            continue;
        }
        if largest_eigenvalue_gram(inst.a(), 1e-14).unwrap() > 16.0 {
            continue;
        }
        let levels = oracle_levels(&values);
        let table = SubspaceTable::new(&inst).unwrap();
        let top = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let radius = sparsemorse_core::enumerate_supports(n, s)
            .filter(|p| p.len() == s)
            .map(|p| table.radius_bound(&p, top).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        if radius > MAX_RADIUS {
            continue;
        }
        accepted += 1;
        let grid = GridOracle::new(&inst, STEP, radius + 2.0 * STEP);
        for &a in &levels {
            checks += 1;
            let exact = table.component_count(a).q;
            let oracle = grid.count(a);
            if exact != oracle {
                mismatches += 1;
                notes.push(format!(
                    "draw {} level {a:.4}: {exact} vs {oracle}",
                    drawn - 1
                ));
            }
        }
    }
    let mut detail =
        format!("instances={accepted} drawn={drawn} levels={checks} mismatches={mismatches}");
    if !notes.is_empty() {
        detail.push_str(&format!(" [{}]", notes.join("; ")));
    }
    Outcome::new(mismatches == 0 && checks == 100, detail)
}

fn criterion_8() -> Outcome {
    let (mut accepted, mut drawn) = (0, 0u64);
    let (mut violations, mut crossings, mut bad_interior) = (0, 0, 0);
    while accepted < 100 {
        let inst = random_shape_instance(8, drawn, 2, 8);
        drawn += 1;
        let rep = enumerate_stationary(&inst).unwrap();
        if !rep.all_nondegenerate() || rep.continuum_detected {
            continue;
        }
        accepted += 1;
        let sweep = sweep_levels(&inst, &rep).unwrap();
        crossings += sweep.transitions.len();
        violations += sweep.transitions.iter().filter(|t| !t.admissible).count();
        if !sweep.interior_constant {
            bad_interior += 1;
        }
    }
    Outcome::new(
        violations == 0 && bad_interior == 0,
        format!(
            "instances={accepted} crossings={crossings} inadmissible={violations} nonconstant_intervals={bad_interior}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = StabilityProbeConfig::new(0.02, 1e-3, 50, 9);
    let (mut probed, mut disagree) = (0, Vec::new());
    for b in [[0.0, 0.0], [0.1, 0.1], [1.0, 1.0], [-1.0, 0.0]] {
        let inst = eye2(b);
        for p in &enumerate_stationary(&inst).unwrap().points {
            probed += 1;
            let rep = probe_strong_stability(&inst, p, &cfg).unwrap();
            if !rep.agreement {
                disagree.push(format!("b={b:?} x={:?} {:?}", p.x(), rep.verdict));
            }
        }
    }
    Outcome::new(
        disagree.is_empty(),
        format!(
            "points={probed} disagreements={} {}",
            disagree.len(),
            disagree.join("; ")
        ),
    )
}

fn criterion_10() -> Outcome {
    let (mut runs, mut converged, mut not_stationary, mut ascents) = (0, 0, 0, 0);
    for idx in 0..100 {
        let inst = random_shape_instance(10, idx, 3, 8);
        let mut rng = trial_rng(1010, idx);
        let x0 = gaussian_vec(&mut rng, inst.n());
        let res = iht_solve(&inst, &x0, 20_000, 1e-12).unwrap();
        runs += 1;
        if !res.converged {
            continue;
        }
        converged += 1;
        if res.stationarity_residual > 10.0 * inst.tol().stat_tol || !res.is_m_stationary {
            not_stationary += 1;
        }
        if res
            .objective_history
            .windows(2)
            .any(|w| w[1] > w[0] + 1e-12)
        {
            ascents += 1;
        }
    }
    Outcome::new(
        not_stationary == 0 && ascents == 0 && converged > 0,
        format!(
            "runs={runs} converged={converged} not_stationary={not_stationary} ascents={ascents}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("identity, b = 0: single degenerate point", criterion_1),
        (
            "identity, b = (0.1, 0.1): two minimizers and a saddle",
            criterion_2,
        ),
        (
            "identity, b = (1, 1): Morse relation with equality",
            criterion_3,
        ),
        (
            "identity, b = (-1, 0): minimizer and degenerate origin",
            criterion_4,
        ),
        ("genericity m=4 n=6 s=2, 1000 trials", criterion_5),
        ("Morse relation on 500 random instances", criterion_6),
        ("component count vs grid flood fill", criterion_7),
        ("sweep transition audit on 100 instances", criterion_8),
        ("probe verdict agrees with nondegeneracy", criterion_9),
        (
            "IHT limits are M-stationary with monotone descent",
            criterion_10,
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {} - {name} ({}; {:.2}s)",
            i + 1,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
