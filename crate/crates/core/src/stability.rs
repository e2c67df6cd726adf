//! Empirical strong-stability probe.
//!
//! A stationary point `x̄` is probed by perturbing the data `(A, b)` at a
//! fixed radius, enumerating the stationary points of each perturbed
//! problem, and checking that exactly one of them stays close to `x̄`.
//! Sampling finitely many perturbations can only give evidence; the exact
//! criterion is nondegeneracy, which the report carries for comparison.
//!
//! Data-space norm: `‖(E, e)‖ = sqrt(‖E‖_F² + ‖e‖²)`. The uniqueness ball
//! has radius `r = 2ε`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumeration::{enumerate_stationary, LandscapeReport};
use crate::error::{Error, Result};
use crate::linalg::{norm2, singular_values};
use crate::model::Instance;
use crate::parallel::map_ordered;
use crate::sampling::{gaussian_vec, trial_rng};
use crate::stationarity::StationaryPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PerturbationMode {
    /// Gaussian direction in `(A, b)` space scaled to norm `delta`.
    Gaussian,
    /// `A` unchanged, every entry of `b` shifted by `+delta`.
    UniformShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityProbeConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub mode: PerturbationMode,
    #[serde(skip)]
    pub threads: usize,
}

impl StabilityProbeConfig {
    pub fn new(epsilon: f64, delta: f64, trials: usize, seed: u64) -> Self {
        Self {
            epsilon,
            delta,
            trials,
            seed,
            mode: PerturbationMode::Gaussian,
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "epsilon = {} must be > 0",
                self.epsilon
            )));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "delta = {} must be >= 0",
                self.delta
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("at least one trial is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityVerdict {
    StableEvidence,
    UnstableEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub trials: usize,
    /// Trials with at least one stationary point in `B(x̄, ε)`.
    pub exists_count: usize,
    /// Trials with such a point and exactly one stationary point in `B(x̄, 2ε)`.
    pub unique_count: usize,
    /// Unique trials whose nearby point has the support of `x̄`.
    pub support_preserved_count: usize,
    pub verdict: StabilityVerdict,
    pub nondegenerate_expected: bool,
    pub agreement: bool,
    pub epsilon: f64,
    pub radius: f64,
    pub delta: f64,
    /// Stationary points within `2ε` for the first trials (at most 10).
    pub perturbed_points_sample: Vec<Vec<Vec<f64>>>,
}

/// `(A + E, b + e)` with Gaussian `(E, e)` scaled to `‖(E, e)‖ = delta`.
pub fn perturb_instance(inst: &Instance, delta: f64, sub_seed: u64) -> Instance {
    if delta == 0.0 {
        return inst.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
    let (m, n) = (inst.m(), inst.n());
    let mut dir = gaussian_vec(&mut rng, m * n + m);
    let norm = norm2(&dir);
    if norm == 0.0 {
        dir[0] = 1.0;
    } else {
        dir.iter_mut().for_each(|v| *v /= norm);
    }
    let mut a = inst.a().clone();
    for (x, d) in a.data_mut().iter_mut().zip(&dir[..m * n]) {
        *x += delta * d;
    }
    let b = inst
        .b()
        .iter()
        .zip(&dir[m * n..])
        .map(|(x, d)| x + delta * d)
        .collect();
    inst.with_data(a, b)
}

/// `(A, b + delta·(1, …, 1))`.
pub fn perturb_instance_shift(inst: &Instance, delta: f64) -> Instance {
    let b = inst.b().iter().map(|x| x + delta).collect();
    inst.with_data(inst.a().clone(), b)
}

fn sub_seed(seed: u64, trial: usize) -> u64 {
    trial_rng(seed, trial as u64).next_u64()
}

fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

struct TrialCounts {
    exists: bool,
    unique: bool,
    support_preserved: bool,
    nearby: Vec<Vec<f64>>,
}

pub fn probe_strong_stability(
    inst: &Instance,
    point: &StationaryPoint,
    cfg: &StabilityProbeConfig,
) -> Result<StabilityReport> {
    cfg.validate()?;
    if point.x().len() != inst.n() {
        return Err(Error::InvalidInput(
            "point does not match the instance".into(),
        ));
    }
    let radius = 2.0 * cfg.epsilon;
    let run = |t: usize| -> Result<TrialCounts> {
        let perturbed = match cfg.mode {
            PerturbationMode::Gaussian => perturb_instance(inst, cfg.delta, sub_seed(cfg.seed, t)),
            PerturbationMode::UniformShift => perturb_instance_shift(inst, cfg.delta),
        };
        let landscape = enumerate_stationary(&perturbed)?;
        let near: Vec<&StationaryPoint> = landscape
            .points
            .iter()
            .filter(|p| euclid(p.x(), point.x()) <= radius)
            .collect();
        let exists = near.iter().any(|p| euclid(p.x(), point.x()) <= cfg.epsilon);
        let unique = exists && near.len() == 1;
        Ok(TrialCounts {
            exists,
            unique,
            support_preserved: unique && near[0].support() == point.support(),
            nearby: near.iter().map(|p| p.x().to_vec()).collect(),
        })
    };
    let outcomes = map_ordered((0..cfg.trials).collect(), cfg.threads, run)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let exists_count = outcomes.iter().filter(|o| o.exists).count();
    let unique_count = outcomes.iter().filter(|o| o.unique).count();
    let support_preserved_count = outcomes.iter().filter(|o| o.support_preserved).count();
    let verdict = if unique_count == cfg.trials {
        StabilityVerdict::StableEvidence
    } else {
        StabilityVerdict::UnstableEvidence
    };
    let nondegenerate_expected = point.is_nondegenerate();
    Ok(StabilityReport {
        trials: cfg.trials,
        exists_count,
        unique_count,
        support_preserved_count,
        verdict,
        nondegenerate_expected,
        agreement: (verdict == StabilityVerdict::StableEvidence) == nondegenerate_expected,
        epsilon: cfg.epsilon,
        radius,
        delta: cfg.delta,
        perturbed_points_sample: outcomes.into_iter().take(10).map(|o| o.nearby).collect(),
    })
}

/// A quarter of the smallest distance between distinct stationary points,
/// or `1e-2` when there is only one.
pub fn default_epsilon(report: &LandscapeReport) -> f64 {
    let pts = &report.points;
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.min(euclid(pts[i].x(), pts[j].x()));
        }
    }
    if best.is_finite() && best > 0.0 {
        0.25 * best
    } else {
        1e-2
    }
}

/// A perturbation radius small enough for the probe on a nondegenerate
/// landscape: `1e-3` times the smallest nonzero `|x̄ᵢ|`, ND1 entry or
/// distance between points, divided by the largest first-order sensitivity
/// `(1 + ‖x̄‖) / σ_min(A_S) + ‖Ax̄ − b‖ / σ_min(A_S)²` of a point to the data.
pub fn safe_delta(inst: &Instance, report: &LandscapeReport) -> f64 {
    let mut gap = f64::INFINITY;
    let mut sensitivity: f64 = 1.0;
    for (k, p) in report.points.iter().enumerate() {
        for &i in p.support().indices() {
            gap = gap.min(p.x()[i].abs());
        }
        if let Some(v) = p.cert.nd1_min_abs {
            gap = gap.min(v);
        }
        for q in &report.points[k + 1..] {
            gap = gap.min(euclid(p.x(), q.x()));
        }
        if p.support().is_empty() {
            continue;
        }
        let smin = singular_values(&inst.a().select_columns(p.support().indices()))
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if smin > 0.0 {
            let r = norm2(&inst.residual(p.x()));
            sensitivity = sensitivity.max((1.0 + norm2(p.x())) / smin + r / (smin * smin));
        }
    }
    let gap = if gap.is_finite() && gap > 0.0 {
        gap
    } else {
        1.0
    };
    1e-3 * gap / sensitivity
}

/// Data-space distance `‖(A₁ − A₂, b₁ − b₂)‖` between two instances of the same shape.
pub fn perturbation_norm(a: &Instance, b: &Instance) -> f64 {
    let da: Vec<f64> = a
        .a()
        .as_slice()
        .iter()
        .zip(b.a().as_slice())
        .map(|(x, y)| x - y)
        .collect();
    let db: Vec<f64> = a.b().iter().zip(b.b()).map(|(x, y)| x - y).collect();
    (norm2(&da).powi(2) + norm2(&db).powi(2)).sqrt()
}
