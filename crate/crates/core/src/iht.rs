//! Iterative hard thresholding baseline.
//!
//! `x⁺ = H_s(x − ∇f(x) / L)` with `L = λ_max(AᵀA)`, where `H_s` keeps the
//! `s` largest-magnitude entries. A fixed point has vanishing gradient on
//! its support, i.e. it is M-stationary.

use serde::Serialize;

use crate::enumeration::LandscapeReport;
use crate::error::Result;
use crate::linalg::{largest_eigenvalue_gram, max_abs, norm2};
use crate::model::{objective, FeasiblePoint, Instance};
use crate::stationarity::{gradient, stationarity_residual, PointKind};

/// Keeps the `s` largest `|xᵢ|`, lower index first on ties; zeroes the rest.
pub fn hard_threshold(x: &[f64], s: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    let mut out = vec![0.0; x.len()];
    for &i in order.iter().take(s) {
        out[i] = x[i];
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct IhtResult {
    #[serde(serialize_with = "serialize_point")]
    pub x: FeasiblePoint,
    pub iterations: usize,
    pub converged: bool,
    pub final_step: f64,
    pub is_m_stationary: bool,
    pub stationarity_residual: f64,
    /// `f` at the projected start and after every iteration.
    pub objective_history: Vec<f64>,
}

fn serialize_point<S: serde::Serializer>(
    p: &FeasiblePoint,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    p.x().serialize(serializer)
}

/// Runs IHT from `x0` (projected onto the feasible set first).
///
/// Stops once `‖x⁺ − x‖ <= step_tol · (1 + ‖x‖)` at a point whose support
/// gradient is within `10 · stat_tol`, or after `max_iter` iterations.
pub fn iht_solve(inst: &Instance, x0: &[f64], max_iter: usize, step_tol: f64) -> Result<IhtResult> {
    inst.validate()?;
    inst.check_len(x0)?;
    let s = inst.s();
    let accept = 10.0 * inst.tol().stat_tol;
    let lipschitz = largest_eigenvalue_gram(inst.a(), 1e-15)?;

    let mut x = hard_threshold(x0, s);
    let mut history = vec![objective(inst, &x)?];
    let mut iterations = 0;
    let mut final_step = 0.0;
    let mut converged = false;

    if lipschitz == 0.0 {
        // A = 0: f is constant and every feasible point is stationary
        converged = true;
    } else {
        while iterations < max_iter {
            let g = gradient(inst, &x)?;
            let y: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| xi - gi / lipschitz)
                .collect();
            let next = hard_threshold(&y, s);
            let diff: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
            final_step = norm2(&diff);
            let scale = 1.0 + norm2(&x);
            x = next;
            iterations += 1;
            history.push(objective(inst, &x)?);
            if final_step <= step_tol * scale {
                let p = FeasiblePoint::new(inst, x.clone())?;
                if stationarity_residual(inst, &p)? <= accept {
                    converged = true;
                    break;
                }
            }
        }
    }

    let point = FeasiblePoint::new(inst, x)?;
    let residual = stationarity_residual(inst, &point)?;
    Ok(IhtResult {
        x: point,
        iterations,
        converged,
        final_step,
        is_m_stationary: residual <= accept,
        stationarity_residual: residual,
        objective_history: history,
    })
}

/// Where IHT runs ended relative to the enumerated landscape.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IhtComparison {
    pub runs: usize,
    pub converged: usize,
    pub global_minimizer: usize,
    pub nonglobal_minimizer: usize,
    pub saddle: usize,
    pub other_stationary: usize,
    /// Converged runs that match no enumerated point.
    pub unmatched: usize,
    /// `(saddle + nonglobal_minimizer) / converged`.
    pub bad_fraction: f64,
}

/// Runs IHT from every start and matches each limit against `report`.
pub fn compare_with_landscape(
    inst: &Instance,
    report: &LandscapeReport,
    starts: &[Vec<f64>],
    max_iter: usize,
    step_tol: f64,
) -> Result<IhtComparison> {
    let runs = starts
        .iter()
        .map(|x0| iht_solve(inst, x0, max_iter, step_tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_runs(report, &runs))
}

/// Matches finished runs against the enumerated points of `report`.
pub fn summarize_runs(report: &LandscapeReport, runs: &[IhtResult]) -> IhtComparison {
    let global = report
        .points
        .iter()
        .map(|p| p.value)
        .fold(f64::INFINITY, f64::min);
    let mut out = IhtComparison {
        runs: runs.len(),
        ..Default::default()
    };
    for res in runs.iter().filter(|r| r.converged) {
        out.converged += 1;
        let x = res.x.x();
        let tol = 1e-6 * (1.0 + norm2(x));
        let hit = report.points.iter().find(|p| {
            let d: Vec<f64> = p.x().iter().zip(x).map(|(a, b)| a - b).collect();
            max_abs(&d) <= tol
        });
        match hit {
            None => out.unmatched += 1,
            Some(p) => match p.kind {
                PointKind::LocalMinimizer if p.value <= global + 1e-9 * (1.0 + global.abs()) => {
                    out.global_minimizer += 1
                }
                PointKind::LocalMinimizer => out.nonglobal_minimizer += 1,
                PointKind::SaddlePoint => out.saddle += 1,
                _ => out.other_stationary += 1,
            },
        }
    }
    out.bad_fraction = if out.converged == 0 {
        0.0
    } else {
        (out.saddle + out.nonglobal_minimizer) as f64 / out.converged as f64
    };
    out
}
