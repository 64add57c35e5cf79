use super::form::SymForm;
use super::kn::kn_product;
use super::tensor::CurvTensor;
use crate::error::{Error, Result};

/// Orthogonal splitting of an algebraic curvature tensor
///
/// ```text
/// T = W + scal/(2n(n−1))·g⊼g + 1/(n−2)·(Ric − scal/n·g)⊼g
///   = W + Sh⊼g
/// ```
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub weyl: CurvTensor,
    pub ricci: SymForm,
    pub scal: f64,
    pub schouten: SymForm,
    pub scalar_part: CurvTensor,
    pub traceless_ricci_part: CurvTensor,
}

impl Decomposition {
    /// Largest pairwise Frobenius inner product between the three parts,
    /// relative to the product of their norms (0 when a part vanishes).
    pub fn orthogonality_defect(&self) -> f64 {
        let parts = [&self.weyl, &self.scalar_part, &self.traceless_ricci_part];
        let mut worst = 0.0_f64;
        for a in 0..3 {
            for b in (a + 1)..3 {
                let scale = parts[a].norm() * parts[b].norm();
                if scale > 0.0 {
                    let d = parts[a].dot(parts[b]).expect("same dimension").abs() / scale;
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    /// `W + scalar_part + traceless_ricci_part`.
    pub fn reassemble(&self) -> CurvTensor {
        self.weyl
            .add(&self.scalar_part)
            .and_then(|t| t.add(&self.traceless_ricci_part))
            .expect("same dimension")
    }

    /// `W + Sh⊼g`.
    pub fn reassemble_schouten(&self) -> CurvTensor {
        let g = SymForm::identity(self.weyl.dim());
        let sg = kn_product(&self.schouten, &g).expect("same dimension");
        self.weyl.add(&sg).expect("same dimension")
    }
}

/// Splits `t` into Weyl, scalar and trace-free Ricci parts.
///
/// For `n = 2` the Weyl and trace-free Ricci parts vanish identically and
/// `Sh = scal/4·g`.
pub fn decompose(t: &CurvTensor) -> Result<Decomposition> {
    t.check_curvature_symmetries()?;
    let n = t.dim();
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    let nf = n as f64;
    let g = SymForm::identity(n);
    let gg = kn_product(&g, &g)?;
    let ricci = t.ricci();
    let scal = ricci.trace();
    let scalar_part = gg.scaled(scal / (2.0 * nf * (nf - 1.0)));

    if n == 2 {
        return Ok(Decomposition {
            weyl: CurvTensor::zeros(2),
            schouten: g.scaled(scal / 4.0),
            traceless_ricci_part: CurvTensor::zeros(2),
            scalar_part,
            ricci,
            scal,
        });
    }

    let traceless = ricci.add_scaled(-scal / nf, &g)?;
    let traceless_ricci_part = kn_product(&traceless, &g)?.scaled(1.0 / (nf - 2.0));
    let schouten = ricci.add_scaled(-scal / (2.0 * (nf - 1.0)), &g)?.scaled(1.0 / (nf - 2.0));
    let weyl = t.sub(&scalar_part)?.sub(&traceless_ricci_part)?;
    Ok(Decomposition { weyl, ricci, scal, schouten, scalar_part, traceless_ricci_part })
}
