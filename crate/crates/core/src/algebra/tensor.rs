use serde::{Deserialize, Serialize};

use super::form::{check_dim, SymForm};
use crate::error::{Error, Result};

/// Relative tolerance for the curvature symmetry check.
pub const CURVATURE_SYMMETRY_TOL: f64 = 1e-12;

/// A dense (0,4) tensor on `ℝⁿ`, entry `T(eᵢ, eⱼ, eₖ, eₗ)` stored at
/// `((i·n + j)·n + k)·n + l`.
///
/// The Frobenius norm is the plain sum of squares over all `n⁴` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct CurvTensor {
    n: usize,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    n: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawTensor> for CurvTensor {
    type Error = Error;
    fn try_from(raw: RawTensor) -> Result<Self> {
        CurvTensor::from_entries(raw.n, raw.entries)
    }
}

impl From<CurvTensor> for RawTensor {
    fn from(t: CurvTensor) -> Self {
        RawTensor { n: t.n, entries: t.entries }
    }
}

impl CurvTensor {
    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![0.0; n.pow(4)] }
    }

    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        if entries.len() != n.pow(4) {
            return Err(Error::DimensionMismatch { expected: n.pow(4), found: entries.len() });
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let idx = t.index(i, j, k, l);
                        t.entries[idx] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.entries[self.index(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let idx = self.index(i, j, k, l);
        self.entries[idx] = v;
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|v| c * v).collect() }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: f64, other: &CurvTensor) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + c * b).collect();
        Ok(Self { n: self.n, entries })
    }

    pub fn add(&self, other: &CurvTensor) -> Result<Self> {
        self.add_scaled(1.0, other)
    }

    pub fn sub(&self, other: &CurvTensor) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &CurvTensor) -> Result<f64> {
        check_dim(self.n, other.n)?;
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest violation of the skew / pair symmetries on basis indices.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let t = self.get(i, j, k, l);
                        worst = worst
                            .max((t + self.get(j, i, k, l)).abs())
                            .max((t + self.get(i, j, l, k)).abs())
                            .max((t - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn check_curvature_symmetries(&self) -> Result<()> {
        let defect = self.symmetry_defect();
        if defect <= CURVATURE_SYMMETRY_TOL * self.max_abs().max(f64::MIN_POSITIVE) {
            Ok(())
        } else {
            Err(Error::SymmetryViolation { defect })
        }
    }

    /// `Ric(x, y) = trace T(·, x, ·, y)`.
    pub fn ricci(&self) -> SymForm {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = (0..n).map(|k| self.get(k, i, k, j)).sum();
            }
        }
        // Pair symmetry makes the contraction symmetric; average away round-off.
        let sym: Vec<f64> =
            (0..n * n).map(|idx| 0.5 * (entries[idx] + entries[(idx % n) * n + idx / n])).collect();
        SymForm::new(n, sym).expect("explicitly symmetrized")
    }

    /// Sectional-type value `T(eᵢ, eⱼ, eᵢ, eⱼ)`.
    pub fn sectional(&self, i: usize, j: usize) -> f64 {
        self.get(i, j, i, j)
    }
}
