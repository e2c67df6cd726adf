//! Pointwise tests: M-stationarity, the two nondegeneracy conditions,
//! classification, and the cell counts attached when a level sweep
//! crosses a stationary value.
//!
//! For a feasible `x̄` with support `I₁` and zero set `I₀`:
//!
//! * M-stationary: `∇f(x̄)ᵢ = 0` for `i ∈ I₁`.
//! * ND1: if `‖x̄‖₀ < s`, every `∇f(x̄)ᵢ`, `i ∈ I₀`, is nonzero.
//! * ND2: `A_{I₁}` has full column rank.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{dot, numerical_rank, pseudoinverse_apply};
use crate::model::{objective, FeasiblePoint, Instance, SupportSet};

/// `Aᵀ(Ax − b)`
pub fn gradient(inst: &Instance, x: &[f64]) -> Result<Vec<f64>> {
    inst.check_len(x)?;
    Ok(inst.a().tr_mul_vec(&inst.residual(x)))
}

/// Max-norm of the gradient over the support of `p`.
pub fn stationarity_residual(inst: &Instance, p: &FeasiblePoint) -> Result<f64> {
    let g = gradient(inst, p.x())?;
    Ok(p.support()
        .indices()
        .iter()
        .fold(0.0, |m, &i| m.max(g[i].abs())))
}

pub fn is_m_stationary(inst: &Instance, x: &[f64]) -> Result<bool> {
    let p = FeasiblePoint::new(inst, x.to_vec())?;
    Ok(stationarity_residual(inst, &p)? <= inst.tol().stat_tol)
}

fn stationary_point(inst: &Instance, x: &[f64]) -> Result<(FeasiblePoint, f64)> {
    let p = FeasiblePoint::new(inst, x.to_vec())?;
    let residual = stationarity_residual(inst, &p)?;
    let tol = inst.tol().stat_tol;
    if residual > tol {
        return Err(Error::NotStationary { residual, tol });
    }
    Ok((p, residual))
}

/// Gradient entries on `I₀(x)` in increasing index order; empty when `‖x‖₀ = s`.
pub fn nd1_vector_direct(inst: &Instance, x: &[f64]) -> Result<Vec<f64>> {
    let (p, _) = stationary_point(inst, x)?;
    if p.sparsity() == inst.s() {
        return Ok(Vec::new());
    }
    let g = gradient(inst, p.x())?;
    Ok(p.support()
        .complement(inst.n())
        .into_iter()
        .map(|i| g[i])
        .collect())
}

/// The same vector as [`nd1_vector_direct`], computed from the data alone as
/// `−((I − A_S A_S⁺) A_{Sᶜ})ᵀ b` with `S = I₁(x)`.
///
/// With `S = ∅` the projector `A_S A_S⁺` is the zero map and the result is `−Aᵀb`.
pub fn nd1_vector_projection(inst: &Instance, x: &[f64]) -> Result<Vec<f64>> {
    let (p, _) = stationary_point(inst, x)?;
    if p.sparsity() == inst.s() {
        return Ok(Vec::new());
    }
    let a = inst.a();
    let a_s = a.select_columns(p.support().indices());
    let rank = numerical_rank(&a_s, inst.rank_tol())?;
    if rank < a_s.cols() {
        return Err(Error::RankDeficient {
            rank,
            cols: a_s.cols(),
        });
    }
    p.support()
        .complement(inst.n())
        .into_iter()
        .map(|i| {
            let col = a.column(i);
            let coeffs = pseudoinverse_apply(&a_s, &col)?;
            let proj = a_s.mul_vec(&coeffs);
            let perp: Vec<f64> = col.iter().zip(&proj).map(|(c, q)| c - q).collect();
            Ok(-dot(&perp, inst.b()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyCertificate {
    pub nd1_holds: bool,
    /// Gradient over `I₀`; empty when `‖x̄‖₀ = s`.
    pub nd1_vector: Vec<f64>,
    /// `None` when ND1 is vacuous.
    pub nd1_min_abs: Option<f64>,
    /// Some ND1 entry is nonzero but within `stat_tol`.
    pub near_degenerate: bool,
    pub nd2_holds: bool,
    pub rank_i1: usize,
}

impl NondegeneracyCertificate {
    pub fn nondegenerate(&self) -> bool {
        self.nd1_holds && self.nd2_holds
    }
}

pub fn certify(inst: &Instance, x: &[f64]) -> Result<NondegeneracyCertificate> {
    let (p, _) = stationary_point(inst, x)?;
    certify_point(inst, &p)
}

fn certify_point(inst: &Instance, p: &FeasiblePoint) -> Result<NondegeneracyCertificate> {
    let stat_tol = inst.tol().stat_tol;
    let nd1_vector = if p.sparsity() < inst.s() {
        let g = gradient(inst, p.x())?;
        p.support()
            .complement(inst.n())
            .into_iter()
            .map(|i| g[i])
            .collect()
    } else {
        Vec::new()
    };
    let nd1_min_abs = (!nd1_vector.is_empty())
        .then(|| nd1_vector.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())));
    let nd1_holds = nd1_min_abs.is_none_or(|v| v > stat_tol);
    let near_degenerate = nd1_vector.iter().any(|v| *v != 0.0 && v.abs() <= stat_tol);

    let a_s = inst.a().select_columns(p.support().indices());
    let rank_i1 = numerical_rank(&a_s, inst.rank_tol())?;
    Ok(NondegeneracyCertificate {
        nd1_holds,
        nd1_vector,
        nd1_min_abs,
        near_degenerate,
        nd2_holds: rank_i1 == p.sparsity(),
        rank_i1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PointKind {
    /// Nondegenerate, `‖x̄‖₀ = s`.
    LocalMinimizer,
    /// Nondegenerate, `‖x̄‖₀ = s − 1`.
    SaddlePoint,
    /// Nondegenerate, `‖x̄‖₀ < s − 1`.
    LowerOrderStationary,
    /// ND1 or ND2 fails; the certificate says which.
    DegeneratePoint,
}

impl PointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointKind::LocalMinimizer => "LocalMinimizer",
            PointKind::SaddlePoint => "SaddlePoint",
            PointKind::LowerOrderStationary => "LowerOrderStationary",
            PointKind::DegeneratePoint => "DegeneratePoint",
        }
    }
}

/// A classified M-stationary point.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPoint {
    pub point: FeasiblePoint,
    pub value: f64,
    pub stationarity_residual: f64,
    pub cert: NondegeneracyCertificate,
    pub kind: PointKind,
}

impl StationaryPoint {
    pub fn x(&self) -> &[f64] {
        self.point.x()
    }

    pub fn support(&self) -> &SupportSet {
        self.point.support()
    }

    pub fn sparsity(&self) -> usize {
        self.point.sparsity()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.kind != PointKind::DegeneratePoint
    }
}

#[derive(Serialize)]
struct PointRecord<'a> {
    x: &'a [f64],
    support: &'a SupportSet,
    kind: &'static str,
    value: f64,
    nd1: bool,
    nd2: bool,
    stationarity_residual: f64,
    nd1_vector: &'a [f64],
    nd1_min_abs: Option<f64>,
    near_degenerate: bool,
    rank_i1: usize,
}

impl Serialize for StationaryPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PointRecord {
            x: self.x(),
            support: self.support(),
            kind: self.kind.as_str(),
            value: self.value,
            nd1: self.cert.nd1_holds,
            nd2: self.cert.nd2_holds,
            stationarity_residual: self.stationarity_residual,
            nd1_vector: &self.cert.nd1_vector,
            nd1_min_abs: self.cert.nd1_min_abs,
            near_degenerate: self.cert.near_degenerate,
            rank_i1: self.cert.rank_i1,
        }
        .serialize(serializer)
    }
}

pub fn classify(inst: &Instance, x: &[f64]) -> Result<StationaryPoint> {
    let (point, stationarity_residual) = stationary_point(inst, x)?;
    let cert = certify_point(inst, &point)?;
    let k = point.sparsity();
    let s = inst.s();
    let kind = if !cert.nondegenerate() {
        PointKind::DegeneratePoint
    } else if k == s {
        PointKind::LocalMinimizer
    } else if k + 1 == s {
        PointKind::SaddlePoint
    } else {
        PointKind::LowerOrderStationary
    };
    let value = objective(inst, point.x())?;
    Ok(StationaryPoint {
        point,
        value,
        stationarity_residual,
        cert,
        kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellAttachment {
    pub cell_count: u64,
    pub cell_dim: usize,
}

/// Cells attached when the sweep crosses a nondegenerate point with `‖x̄‖₀ = k`:
/// `C(n − k − 1, s − k)` cells of dimension `s − k`.
pub fn cell_attachment(n: usize, s: usize, k: usize) -> Result<CellAttachment> {
    if !(k <= s && s < n) {
        return Err(Error::OutOfRange(format!(
            "need k <= s <= n - 1, got n = {n}, s = {s}, k = {k}"
        )));
    }
    Ok(CellAttachment {
        cell_count: num_integer::binomial((n - k - 1) as u64, (s - k) as u64),
        cell_dim: s - k,
    })
}
