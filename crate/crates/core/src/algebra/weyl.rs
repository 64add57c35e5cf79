use serde::Serialize;

use super::form::{SymForm, VectorValuedForm};
use super::kn::kn_product;
use super::tensor::CurvTensor;
use crate::error::{Error, Result};

/// Default spectral clustering tolerance, relative to `1 + spectral radius`.
pub const CARTAN_CLUSTER_TOL: f64 = 1e-8;
/// A Weyl residual counts as zero when `‖W(β)‖ ≤ CARTAN_RESIDUAL_TOL·(1 + ‖β‖²)`.
pub const CARTAN_RESIDUAL_TOL: f64 = 1e-9;

fn require_n4(beta: &SymForm) -> Result<()> {
    if beta.dim() < 4 {
        Err(Error::DimensionTooSmall { n: beta.dim(), min: 4 })
    } else {
        Ok(())
    }
}

/// `L(β) = 1/(n−2)·(Ric(β) − scal(β)/(2(n−1))·⟨·,·⟩)` where `Ric`, `scal` are
/// the contractions of `R(β) = ½β⊼β`.
pub fn schouten_of_form(beta: &SymForm) -> Result<SymForm> {
    require_n4(beta)?;
    let nf = beta.dim() as f64;
    let r = kn_product(beta, beta)?.scaled(0.5);
    let ric = r.ricci();
    let scal = ric.trace();
    Ok(ric.add_scaled(-scal / (2.0 * (nf - 1.0)), &SymForm::identity(beta.dim()))?.scaled(1.0 / (nf - 2.0)))
}

/// `W(β) = R(β) − L(β)⊼⟨·,·⟩`.
pub fn weyl_map(beta: &SymForm) -> Result<CurvTensor> {
    require_n4(beta)?;
    let r = kn_product(beta, beta)?.scaled(0.5);
    let l = schouten_of_form(beta)?;
    let lg = kn_product(&l, &SymForm::identity(beta.dim()))?;
    r.sub(&lg)
}

/// The Lorentzian lift `β̃ = (β, ⟨·,·⟩, −L(β))`; `β̃⊼β̃ = 2·W(β)`, so `β̃` is
/// flat exactly when `W(β)` vanishes.
pub fn cartan_lift(beta: &SymForm) -> Result<VectorValuedForm> {
    let l = schouten_of_form(beta)?;
    VectorValuedForm::lorentz_lift(beta, &l)
}

/// Outcome of the eigenvalue-multiplicity test for `W(β) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartanVerdict {
    pub degenerate: bool,
    pub repeated_value: Option<f64>,
    pub multiplicity: usize,
    pub residual_weyl_norm: f64,
    /// Threshold below which the residual counts as zero.
    pub residual_tolerance: f64,
}

impl CartanVerdict {
    /// The spectral verdict agrees with the tensor residual.
    pub fn consistent(&self) -> bool {
        self.degenerate == (self.residual_weyl_norm <= self.residual_tolerance)
    }
}

pub fn cartan_check(beta: &SymForm, tol: f64) -> Result<CartanVerdict> {
    cartan_check_with(beta, tol, CARTAN_RESIDUAL_TOL)
}

/// Clusters the spectrum (single linkage, gap `tol·(1 + spectral radius)`)
/// and reports whether some eigenvalue has multiplicity at least `n − 1`,
/// alongside the residual `‖W(β)‖`.
pub fn cartan_check_with(beta: &SymForm, tol: f64, residual_tol: f64) -> Result<CartanVerdict> {
    require_n4(beta)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("cluster tolerance must be positive".into()));
    }
    let n = beta.dim();
    let spectrum = beta.spectrum();
    let values = spectrum.values();
    let gap = tol * (1.0 + spectrum.spectral_radius());

    let mut best = (0usize, 0usize); // (start, len)
    let mut start = 0;
    for i in 1..=n {
        if i == n || values[i - 1] - values[i] > gap {
            if i - start > best.1 {
                best = (start, i - start);
            }
            start = i;
        }
    }
    let (s, len) = best;
    let degenerate = len + 1 >= n;
    let repeated_value = degenerate.then(|| values[s..s + len].iter().sum::<f64>() / len as f64);
    let residual_weyl_norm = weyl_map(beta)?.norm();
    Ok(CartanVerdict {
        degenerate,
        repeated_value,
        multiplicity: len,
        residual_weyl_norm,
        residual_tolerance: residual_tol * (1.0 + beta.norm_sq()),
    })
}
