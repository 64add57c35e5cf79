use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when accepting nearly symmetric input.
const SYMMETRY_TOL: f64 = 1e-12;

/// A symmetric bilinear form on `ℝⁿ`, stored as a dense row-major matrix.
///
/// Construction symmetrizes entries that agree up to round-off, so
/// `get(i, j) == get(j, i)` holds exactly afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawForm", into = "RawForm")]
pub struct SymForm {
    n: usize,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawForm {
    n: usize,
    entries: Vec<f64>,
}

impl TryFrom<RawForm> for SymForm {
    type Error = Error;
    fn try_from(raw: RawForm) -> Result<Self> {
        SymForm::new(raw.n, raw.entries)
    }
}

impl From<SymForm> for RawForm {
    fn from(f: SymForm) -> Self {
        RawForm { n: f.n, entries: f.entries }
    }
}

impl SymForm {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entry in symmetric form".into()));
        }
        let scale = 1.0 + entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut entries = entries;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "form is not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                let m = 0.5 * (a + b);
                entries[i * n + j] = m;
                entries[j * n + i] = m;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 2, "dimension must be at least 2");
        Self { n, entries: vec![0.0; n * n] }
    }

    /// The Euclidean inner product `⟨·,·⟩` itself.
    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut f = Self::zeros(n);
        for (i, v) in values.iter().enumerate() {
            f.entries[i * n + i] = *v;
        }
        f
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self::new(n, entries)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|v| c * v).collect() }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: f64, other: &SymForm) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + c * b).collect();
        Ok(Self { n: self.n, entries })
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Matrix square `β♯∘β♯` as a form.
    pub fn squared(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = (0..n).map(|k| self.get(i, k) * self.get(k, j)).sum();
            }
        }
        Self::new(n, entries).expect("square of a symmetric matrix is symmetric")
    }

    /// Eigenvalues of the self-adjoint endomorphism `β♯`, sorted descending.
    pub fn spectrum(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.to_matrix());
        Spectrum::from_unsorted(eig.eigenvalues.iter().copied().collect())
    }

    /// Conjugates by an orthogonal matrix: returns `Q diag(values) Qᵀ`.
    pub fn with_spectrum(values: &[f64], q: &DMatrix<f64>) -> Result<Self> {
        let n = values.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: q.nrows() });
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values));
        Self::from_matrix(&(q * d * q.transpose()))
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Eigenvalues of `β♯` in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts descending; the sort is stable so ties keep their original order.
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// A symmetric bilinear form with values in `ℝᵏ`, where `ℝᵏ` carries the
/// diagonal inner product `diag(signature)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorValuedForm {
    n: usize,
    k: usize,
    signature: Vec<i8>,
    /// Index `(i * n + j) * k + a`.
    entries: Vec<f64>,
}

impl VectorValuedForm {
    pub fn new(n: usize, k: usize, signature: Vec<i8>, entries: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, min: 2 });
        }
        if signature.len() != k || signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::SignatureMismatch);
        }
        if entries.len() != n * n * k {
            return Err(Error::DimensionMismatch { expected: n * n * k, found: entries.len() });
        }
        let scale = 1.0 + entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                for a in 0..k {
                    let (x, y) = (entries[(i * n + j) * k + a], entries[(j * n + i) * k + a]);
                    if (x - y).abs() > SYMMETRY_TOL * scale {
                        return Err(Error::InvalidInput(format!(
                            "vector-valued form is not symmetric at ({i},{j},{a})"
                        )));
                    }
                }
            }
        }
        Ok(Self { n, k, signature, entries })
    }

    /// Builds `x, y ↦ (φ₁(x,y), …, φₖ(x,y))` from scalar components.
    pub fn from_components(components: &[SymForm], signature: Vec<i8>) -> Result<Self> {
        let k = components.len();
        let n = components.first().map(SymForm::dim).ok_or(Error::SignatureMismatch)?;
        for c in components {
            check_dim(n, c.dim())?;
        }
        let mut entries = vec![0.0; n * n * k];
        for i in 0..n {
            for j in 0..n {
                for (a, c) in components.iter().enumerate() {
                    entries[(i * n + j) * k + a] = c.get(i, j);
                }
            }
        }
        Self::new(n, k, signature, entries)
    }

    pub fn from_scalar(form: &SymForm) -> Self {
        Self::from_components(std::slice::from_ref(form), vec![1]).expect("scalar embedding")
    }

    /// `x, y ↦ φ(x,y)·e` for a fixed codomain vector `e`.
    pub fn from_form_times_vector(form: &SymForm, e: &[f64], signature: Vec<i8>) -> Result<Self> {
        let comps: Vec<SymForm> = e.iter().map(|c| form.scaled(*c)).collect();
        Self::from_components(&comps, signature)
    }

    /// The Lorentzian lift `β̃ = (β, ⟨·,·⟩, −L(β))` used in the Cartan
    /// multiplicity argument, valued in `ℝ³` with the inner product
    /// `x₁y₁ + x₂y₃ + x₃y₂`.
    ///
    /// That inner product is stored in its diagonal null basis
    /// `u = (x₂+x₃)/√2`, `v = (x₂−x₃)/√2`, i.e. signature `(+, +, −)`, so the
    /// components returned are `(β, (g − L)/√2, (g + L)/√2)`.
    pub fn lorentz_lift(beta: &SymForm, schouten_like: &SymForm) -> Result<Self> {
        check_dim(beta.dim(), schouten_like.dim())?;
        let g = SymForm::identity(beta.dim());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = g.add_scaled(-1.0, schouten_like)?.scaled(s);
        let v = g.add_scaled(1.0, schouten_like)?.scaled(s);
        Self::from_components(&[beta.clone(), u, v], vec![1, 1, -1])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn codim(&self) -> usize {
        self.k
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, a: usize) -> f64 {
        self.entries[(i * self.n + j) * self.k + a]
    }

    /// `⟨β(i,j), γ(k,l)⟩_W` on basis vectors.
    #[inline]
    pub(crate) fn pair(&self, other: &Self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        (0..self.k)
            .map(|a| f64::from(self.signature[a]) * self.get(i, j, a) * other.get(k, l, a))
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_and_small() {
        assert!(SymForm::new(2, vec![1.0, 2.0, 3.0, 1.0]).is_err());
        assert!(SymForm::new(1, vec![1.0]).is_err());
        assert!(SymForm::new(2, vec![1.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn spectrum_is_descending() {
        let f = SymForm::diag(&[1.0, 4.0, -2.0, 4.0]);
        assert_eq!(f.spectrum().values(), &[4.0, 4.0, 1.0, -2.0]);
    }

    #[test]
    fn json_roundtrip() {
        let f = SymForm::diag(&[1.0, 2.0, 3.0]);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.starts_with("{\"n\":3,\"entries\":["));
        let back: SymForm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<SymForm>(r#"{"n":2,"entries":[1,2,3,4]}"#).is_err());
    }

    #[test]
    fn vector_form_signature_checked() {
        let g = SymForm::identity(3);
        assert!(VectorValuedForm::from_components(&[g.clone()], vec![2]).is_err());
        assert!(VectorValuedForm::from_components(&[g.clone(), g], vec![1]).is_err());
    }
}
