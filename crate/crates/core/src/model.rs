//! Problem data, tolerance policy, supports and feasible points.
//!
//! Column indices are 0-based inside the crate. Everything that leaves the
//! crate through serde (reports, instance files) uses 1-based indices.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result, ValidationError};
use crate::linalg::{default_rank_tol, DenseMatrix};

/// Floating-point policy for zero tests, stationarity, rank and point identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// `|xᵢ| <= zero_tol` counts as zero.
    pub zero_tol: f64,
    /// Max-norm bound on the gradient over the support.
    pub stat_tol: f64,
    /// Relative rank threshold. `None` means `1e-10 · max(m, n)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    /// Max-norm radius under which two points are the same point.
    pub dedupe_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            zero_tol: 1e-9,
            stat_tol: 1e-8,
            rank_tol: None,
            dedupe_tol: 1e-7,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let named = [
            ("zero_tol", self.zero_tol),
            ("stat_tol", self.stat_tol),
            ("dedupe_tol", self.dedupe_tol),
            ("rank_tol", self.rank_tol.unwrap_or(0.0)),
        ];
        for (name, v) in named {
            if !v.is_finite() || v < 0.0 {
                return Err(ValidationError::Tolerance(format!(
                    "{name} = {v} must be finite and >= 0"
                )));
            }
        }
        if self.zero_tol >= self.dedupe_tol {
            return Err(ValidationError::Tolerance(format!(
                "zero_tol = {} must be below dedupe_tol = {}",
                self.zero_tol, self.dedupe_tol
            )));
        }
        Ok(())
    }
}

/// A validated sparse recovery instance `(A, b, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    a: DenseMatrix,
    b: Vec<f64>,
    s: usize,
    tol: ToleranceConfig,
}

impl Instance {
    /// Validates and builds an instance with default tolerances.
    pub fn new(a: DenseMatrix, b: Vec<f64>, s: usize) -> Result<Self> {
        Self::with_tolerances(a, b, s, ToleranceConfig::default())
    }

    pub fn with_tolerances(
        a: DenseMatrix,
        b: Vec<f64>,
        s: usize,
        tol: ToleranceConfig,
    ) -> Result<Self> {
        let inst = Self { a, b, s, tol };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks dimensions, `s <= n - 1`, `s <= m`, finiteness and tolerances.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let (m, n) = (self.a.rows(), self.a.cols());
        if n == 0 {
            return Err(ValidationError::NoColumns);
        }
        if self.b.len() != m {
            return Err(ValidationError::RowMismatch {
                rows: m,
                b_len: self.b.len(),
            });
        }
        if self.a.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(ValidationError::NonFinite("A"));
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(ValidationError::NonFinite("b"));
        }
        if self.s > n - 1 {
            return Err(ValidationError::SparsityNotBelowColumns { s: self.s, n });
        }
        if self.s > m {
            return Err(ValidationError::SparsityExceedsMeasurements { s: self.s, m });
        }
        self.tol.validate()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn tol(&self) -> &ToleranceConfig {
        &self.tol
    }

    /// Replaces the tolerance policy, re-validating it.
    pub fn set_tolerances(&mut self, tol: ToleranceConfig) -> Result<()> {
        tol.validate()?;
        self.tol = tol;
        Ok(())
    }

    /// Effective relative rank threshold.
    pub fn rank_tol(&self) -> f64 {
        self.tol
            .rank_tol
            .unwrap_or_else(|| default_rank_tol(self.m(), self.n()))
    }

    /// Same tolerances and sparsity with new data; skips re-validating shape.
    pub(crate) fn with_data(&self, a: DenseMatrix, b: Vec<f64>) -> Self {
        debug_assert_eq!((a.rows(), a.cols()), (self.m(), self.n()));
        Self {
            a,
            b,
            s: self.s,
            tol: self.tol,
        }
    }

    /// Residual `Ax − b`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .mul_vec(x)
            .iter()
            .zip(&self.b)
            .map(|(p, q)| p - q)
            .collect()
    }

    pub(crate) fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "point has length {} but n = {}",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }
}

/// `½‖Ax − b‖²`
pub fn objective(inst: &Instance, x: &[f64]) -> Result<f64> {
    inst.check_len(x)?;
    Ok(0.5 * inst.residual(x).iter().map(|r| r * r).sum::<f64>())
}

/// Strictly increasing set of column indices (0-based).
///
/// Serializes as a 1-based JSON array.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "support indices must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidInput(format!(
                    "support index {} out of range 1..={n}",
                    last + 1
                )));
            }
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds from already sorted, deduplicated indices.
    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Indices in `0..n` not in the set, ascending.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.contains(*i)).collect()
    }

    pub fn intersection(&self, other: &SupportSet) -> SupportSet {
        SupportSet(
            self.0
                .iter()
                .copied()
                .filter(|i| other.contains(*i))
                .collect(),
        )
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.0.iter().all(|i| other.contains(*i))
    }

    /// 1-based indices, as used in reports.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for SupportSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SupportSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(deserializer)?;
        if raw.contains(&0) {
            return Err(serde::de::Error::custom("support indices are 1-based"));
        }
        let idx: Vec<usize> = raw.into_iter().map(|i| i - 1).collect();
        if idx.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom(
                "support indices must be strictly increasing",
            ));
        }
        Ok(SupportSet(idx))
    }
}

/// `{ i : |xᵢ| > zero_tol }`
pub fn support_of(x: &[f64], zero_tol: f64) -> SupportSet {
    SupportSet(
        x.iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > zero_tol)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// A point with at most `s` entries above `zero_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint {
    x: Vec<f64>,
    support: SupportSet,
}

impl FeasiblePoint {
    pub fn new(inst: &Instance, x: Vec<f64>) -> Result<Self> {
        inst.check_len(&x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("point has non-finite entries".into()));
        }
        let support = support_of(&x, inst.tol().zero_tol);
        if support.len() > inst.s() {
            return Err(Error::Infeasible {
                support_size: support.len(),
                s: inst.s(),
            });
        }
        Ok(Self { x, support })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    /// `‖x‖₀` under the zero tolerance.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.x
    }
}
