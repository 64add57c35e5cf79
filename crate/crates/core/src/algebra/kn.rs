use nalgebra::DMatrix;
use serde::Serialize;

use super::form::{check_dim, SymForm, VectorValuedForm};
use super::tensor::CurvTensor;
use crate::error::{Error, Result};

/// Kulkarni–Nomizu product
///
/// ```text
/// (φ⊼ψ)(x₁,x₂,x₃,x₄) = φ(x₁,x₃)ψ(x₂,x₄) + φ(x₂,x₄)ψ(x₁,x₃)
///                    − φ(x₁,x₄)ψ(x₂,x₃) − φ(x₂,x₃)ψ(x₁,x₄)
/// ```
///
/// The raw formula value is returned; no symmetrization is applied.
pub fn kn_product(phi: &SymForm, psi: &SymForm) -> Result<CurvTensor> {
    check_dim(phi.dim(), psi.dim())?;
    let n = phi.dim();
    Ok(CurvTensor::from_fn(n, |i, j, k, l| {
        phi.get(i, k) * psi.get(j, l) + phi.get(j, l) * psi.get(i, k)
            - phi.get(i, l) * psi.get(j, k)
            - phi.get(j, k) * psi.get(i, l)
    }))
}

/// Kulkarni–Nomizu product of two `W`-valued forms, pairing values with the
/// codomain inner product.
pub fn kn_product_valued(beta: &VectorValuedForm, gamma: &VectorValuedForm) -> Result<CurvTensor> {
    check_dim(beta.dim(), gamma.dim())?;
    check_dim(beta.codim(), gamma.codim())?;
    if beta.signature() != gamma.signature() {
        return Err(Error::SignatureMismatch);
    }
    Ok(CurvTensor::from_fn(beta.dim(), |i, j, k, l| {
        beta.pair(gamma, i, k, j, l) - beta.pair(gamma, i, l, j, k) + beta.pair(gamma, j, l, i, k)
            - beta.pair(gamma, j, k, i, l)
    }))
}

/// `β` is flat when `β⊼β` vanishes; tested as
/// `max |β⊼β| ≤ tol·(1 + max|β|²)`.
pub fn is_flat(beta: &VectorValuedForm, tol: f64) -> bool {
    let t = kn_product_valued(beta, beta).expect("self product always matches");
    let scale = beta.max_abs();
    t.max_abs() <= tol * (1.0 + scale * scale)
}

/// Orthonormal basis of the nullity space `{x : β(x, y) = 0 ∀y}`.
#[derive(Debug, Clone, Serialize)]
pub struct Nullity {
    pub dim: usize,
    pub basis: Vec<Vec<f64>>,
}

/// Computes the (numerical) kernel of the stacked contraction
/// `x ↦ (β(x, eⱼ)_a)_{j,a}` via a singular value decomposition. A right
/// singular vector spans part of the nullity when its singular value is at
/// most `tol`.
pub fn nullity_space(beta: &VectorValuedForm, tol: f64) -> Nullity {
    let (n, k) = (beta.dim(), beta.codim());
    let m = DMatrix::from_fn(n * k, n, |row, i| {
        let (j, a) = (row / k, row % k);
        beta.get(i, j, a)
    });
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut basis = Vec::new();
    // V^T has one row per singular value; n·k ≥ n so all n are present.
    for (idx, s) in svd.singular_values.iter().enumerate() {
        if *s <= tol {
            basis.push(v_t.row(idx).iter().copied().collect());
        }
    }
    Nullity { dim: basis.len(), basis }
}

/// Gauss equation for a hypersurface with second fundamental form `β` in the
/// space form of constant curvature `ambient_c`:
/// `R = (c/2)·g⊼g + ½·β⊼β`.
pub fn curvature_of_form(beta: &SymForm, ambient_c: f64) -> CurvTensor {
    let n = beta.dim();
    let g = SymForm::identity(n);
    let intrinsic = kn_product(beta, beta).expect("same dimension").scaled(0.5);
    if ambient_c == 0.0 {
        return intrinsic;
    }
    let ambient = kn_product(&g, &g).expect("same dimension").scaled(0.5 * ambient_c);
    intrinsic.add(&ambient).expect("same dimension")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_product_value() {
        let g = SymForm::identity(4);
        let t = kn_product(&g, &g).unwrap();
        assert_eq!(t.get(0, 1, 0, 1), 2.0);
        assert_eq!(t.get(0, 1, 1, 0), -2.0);
        assert_eq!(t.get(0, 0, 1, 1), 0.0);
    }

    #[test]
    fn rank_one_with_metric() {
        let e = SymForm::diag(&[1.0, 0.0, 0.0, 0.0]);
        let g = SymForm::identity(4);
        assert_eq!(kn_product(&e, &g).unwrap().get(0, 1, 0, 1), 1.0);
    }

    #[test]
    fn bilinearity_in_scale() {
        let g = SymForm::identity(4);
        let c = 3.5;
        let lhs = kn_product(&g.scaled(c), &g.scaled(c)).unwrap();
        let rhs = kn_product(&g, &g).unwrap().scaled(c * c);
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(kn_product(&SymForm::identity(3), &SymForm::identity(4)).is_err());
        let a = VectorValuedForm::from_scalar(&SymForm::identity(4));
        let b = VectorValuedForm::from_components(
            &[SymForm::identity(4), SymForm::identity(4)],
            vec![1, -1],
        )
        .unwrap();
        assert!(kn_product_valued(&a, &b).is_err());
        let c = VectorValuedForm::from_components(
            &[SymForm::identity(4), SymForm::identity(4)],
            vec![1, 1],
        )
        .unwrap();
        assert_eq!(kn_product_valued(&b, &c), Err(Error::SignatureMismatch));
    }

    #[test]
    fn scalar_valued_reduces_to_plain_product() {
        let g = SymForm::identity(4);
        let v = VectorValuedForm::from_scalar(&g);
        let a = kn_product_valued(&v, &v).unwrap();
        let b = kn_product(&g, &g).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn isotropic_codomain_cancels() {
        let g = SymForm::identity(4);
        let v = VectorValuedForm::from_components(&[g.clone(), g], vec![1, -1]).unwrap();
        assert_eq!(kn_product_valued(&v, &v).unwrap().max_abs(), 0.0);
        assert!(is_flat(&v, 1e-12));
    }

    #[test]
    fn flatness() {
        let g = SymForm::identity(4);
        assert!(!is_flat(&VectorValuedForm::from_scalar(&g), 1e-10));
        let phi = SymForm::diag(&[1.0, -2.0, 3.0, 0.5]);
        let e = VectorValuedForm::from_form_times_vector(&phi, &[2.0, 2.0], vec![1, -1]).unwrap();
        assert!(is_flat(&e, 1e-12));
    }

    #[test]
    fn nullity_examples() {
        let b = VectorValuedForm::from_scalar(&SymForm::diag(&[1.0, 1.0, 0.0, 0.0]));
        let nl = nullity_space(&b, 1e-10);
        assert_eq!(nl.dim, 2);
        for v in &nl.basis {
            assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert_eq!(nullity_space(&VectorValuedForm::from_scalar(&SymForm::identity(4)), 1e-10).dim, 0);
        assert_eq!(nullity_space(&VectorValuedForm::from_scalar(&SymForm::zeros(4)), 1e-10).dim, 4);
    }

    #[test]
    fn gauss_equation_examples() {
        let g = SymForm::identity(4);
        assert!((curvature_of_form(&g, 0.0).sectional(0, 1) - 1.0).abs() < 1e-15);
        let round = curvature_of_form(&SymForm::zeros(4), 1.0);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.0 } else { 1.0 };
                assert_eq!(round.sectional(i, j), want);
            }
        }
        let lam = [1.0, 1.0, -1.0, -1.0];
        let t = curvature_of_form(&SymForm::diag(&lam), 0.0);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(t.sectional(i, j), lam[i] * lam[j]);
                }
            }
        }
    }
}
