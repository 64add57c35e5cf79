use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::spec::{Family, HypersurfaceSpec};
use crate::algebra::SymForm;
use crate::error::{Error, Result};
use crate::sphere::{uniform_on_sphere, vol_sphere};

/// Which stereographic chart of the sphere factor is in use. `North`
/// projects from the north pole (its origin is the south pole).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Chart {
    North,
    South,
}

impl Chart {
    fn sign(self) -> f64 {
        match self {
            Chart::North => 1.0,
            Chart::South => -1.0,
        }
    }

    fn other(self) -> Self {
        match self {
            Chart::North => Chart::South,
            Chart::South => Chart::North,
        }
    }
}

/// Chart coordinates. For a tube `coords[0]` is the circle angle and the rest
/// parametrize the sphere fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coords: Vec<f64>,
}

/// Position with first and second chart derivatives.
#[derive(Debug, Clone)]
pub struct Jet {
    pub p: DVector<f64>,
    /// `(n+1) × n`.
    pub jac: DMatrix<f64>,
    /// One `n × n` Hessian per ambient component.
    pub hess: Vec<DMatrix<f64>>,
}

impl Jet {
    /// `Σᵢ vᵢ·∂²pᵢ`.
    pub fn hessian_along(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let d = self.jac.ncols();
        self.hess.iter().zip(v.iter()).fold(DMatrix::zeros(d, d), |acc, (h, vi)| acc + h * *vi)
    }
}

/// Stereographic parametrization of the unit sphere `S^d ⊂ ℝ^{d+1}`.
fn stereo_jet(c: &[f64], chart: Chart) -> Jet {
    let d = c.len();
    let s = chart.sign();
    let cc: f64 = c.iter().map(|v| v * v).sum();
    let dd = 1.0 + cc;
    let (d2, d3) = (dd * dd, dd * dd * dd);
    let mut p = DVector::zeros(d + 1);
    let mut jac = DMatrix::zeros(d + 1, d);
    let mut hess = vec![DMatrix::zeros(d, d); d + 1];
    let kd = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for i in 0..d {
        p[i] = 2.0 * c[i] / dd;
        for j in 0..d {
            jac[(i, j)] = 2.0 * kd(i, j) / dd - 4.0 * c[i] * c[j] / d2;
            for k in 0..d {
                hess[i][(j, k)] = -4.0 * (kd(i, j) * c[k] + kd(i, k) * c[j] + kd(j, k) * c[i]) / d2
                    + 16.0 * c[i] * c[j] * c[k] / d3;
            }
        }
    }
    p[d] = s * (1.0 - 2.0 / dd);
    for j in 0..d {
        jac[(d, j)] = 4.0 * s * c[j] / d2;
        for k in 0..d {
            hess[d][(j, k)] = s * (4.0 * kd(j, k) / d2 - 16.0 * c[j] * c[k] / d3);
        }
    }
    Jet { p, jac, hess }
}

/// Chart point of a unit vector, choosing the chart that keeps `|c| ≤ 1`.
fn stereo_inverse(x: &[f64]) -> (Chart, Vec<f64>) {
    let d = x.len() - 1;
    let last = x[d];
    let (chart, denom) = if last <= 0.0 { (Chart::North, 1.0 - last) } else { (Chart::South, 1.0 + last) };
    (chart, x[..d].iter().map(|v| v / denom).collect())
}

/// Density of the round metric in stereographic coordinates.
fn stereo_density(c: &[f64]) -> f64 {
    let dd = 1.0 + c.iter().map(|v| v * v).sum::<f64>();
    (2.0 / dd).powi(c.len() as i32)
}

impl HypersurfaceSpec {
    /// Number of chart coordinates that belong to the stereographic factor.
    fn sphere_offset(&self) -> usize {
        match self.family {
            Family::Tube { .. } => 1,
            _ => 0,
        }
    }

    /// Switches charts when the stereographic part leaves the unit ball and
    /// wraps the tube angle into `[0, 2π)`.
    pub fn normalize(&self, q: &ChartPoint) -> ChartPoint {
        let off = self.sphere_offset();
        let mut coords = q.coords.clone();
        let mut chart = q.chart;
        let cc: f64 = coords[off..].iter().map(|v| v * v).sum();
        if cc > 1.0 {
            coords[off..].iter_mut().for_each(|v| *v /= cc);
            chart = chart.other();
        }
        if off == 1 {
            coords[0] = coords[0].rem_euclid(2.0 * PI);
        }
        ChartPoint { chart, coords }
    }

    pub fn jet(&self, q: &ChartPoint) -> Result<Jet> {
        if q.coords.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: q.coords.len() });
        }
        match &self.family {
            Family::Ellipsoid { axes } => {
                let mut j = stereo_jet(&q.coords, q.chart);
                for (i, a) in axes.iter().enumerate() {
                    j.p[i] *= a;
                    j.jac.row_mut(i).scale_mut(*a);
                    j.hess[i].scale_mut(*a);
                }
                Ok(j)
            }
            Family::RadialGraph { eps, poly } => {
                let x = stereo_jet(&q.coords, q.chart);
                let rho = 1.0 + eps * poly.value(&x.p);
                if !(rho > 0.0) {
                    return Err(Error::IrregularPoint);
                }
                let gp = poly.gradient(&x.p);
                let hp = poly.hessian(&x.p);
                let drho = x.jac.transpose() * &gp * *eps;
                let mut d2rho = x.jac.transpose() * &hp * &x.jac;
                for (i, h) in x.hess.iter().enumerate() {
                    d2rho += h * gp[i];
                }
                d2rho *= *eps;
                let m = self.n + 1;
                let p = &x.p * rho;
                let jac = &x.p * drho.transpose() + &x.jac * rho;
                let hess = (0..m)
                    .map(|i| {
                        let row = x.jac.row(i).transpose();
                        &d2rho * x.p[i] + &drho * row.transpose() + &row * drho.transpose() + &x.hess[i] * rho
                    })
                    .collect();
                Ok(Jet { p, jac, hess })
            }
            Family::Tube { big_r, r } => {
                let n = self.n;
                let theta = q.coords[0];
                let (sn, cs) = theta.sin_cos();
                let w = stereo_jet(&q.coords[1..], q.chart);
                let last = n - 1;
                let rho = big_r + r * w.p[last];
                let mut p = DVector::zeros(n + 1);
                let mut jac = DMatrix::zeros(n + 1, n);
                let mut hess = vec![DMatrix::zeros(n, n); n + 1];
                p[0] = rho * cs;
                p[1] = rho * sn;
                jac[(0, 0)] = -rho * sn;
                jac[(1, 0)] = rho * cs;
                hess[0][(0, 0)] = -rho * cs;
                hess[1][(0, 0)] = -rho * sn;
                for j in 0..n - 1 {
                    let dl = r * w.jac[(last, j)];
                    jac[(0, j + 1)] = dl * cs;
                    jac[(1, j + 1)] = dl * sn;
                    hess[0][(0, j + 1)] = -dl * sn;
                    hess[0][(j + 1, 0)] = -dl * sn;
                    hess[1][(0, j + 1)] = dl * cs;
                    hess[1][(j + 1, 0)] = dl * cs;
                    for k in 0..n - 1 {
                        let hl = r * w.hess[last][(j, k)];
                        hess[0][(j + 1, k + 1)] = hl * cs;
                        hess[1][(j + 1, k + 1)] = hl * sn;
                    }
                }
                for i in 0..n - 1 {
                    p[i + 2] = r * w.p[i];
                    for j in 0..n - 1 {
                        jac[(i + 2, j + 1)] = r * w.jac[(i, j)];
                        for k in 0..n - 1 {
                            hess[i + 2][(j + 1, k + 1)] = r * w.hess[i][(j, k)];
                        }
                    }
                }
                Ok(Jet { p, jac, hess })
            }
        }
    }

    /// A transversal vector pointing to the inside.
    fn inward_reference(&self, q: &ChartPoint, p: &DVector<f64>) -> DVector<f64> {
        match self.family {
            Family::Tube { big_r, .. } => {
                let mut core = DVector::zeros(self.n + 1);
                core[0] = big_r * q.coords[0].cos();
                core[1] = big_r * q.coords[0].sin();
                core - p
            }
            _ => -p,
        }
    }

    /// Volume of the reference domain (`Sⁿ`, or `S¹ × S^{n−1}` for tubes)
    /// that chart samples are drawn from.
    pub fn reference_volume(&self) -> f64 {
        match self.family {
            Family::Tube { .. } => 2.0 * PI * vol_sphere(self.n - 1),
            _ => vol_sphere(self.n),
        }
    }

    /// Density of the reference measure in chart coordinates.
    pub fn reference_density(&self, q: &ChartPoint) -> f64 {
        stereo_density(&q.coords[self.sphere_offset()..])
    }

    /// Chart point drawn from the normalized reference measure.
    pub fn sample_reference<R: Rng + ?Sized>(&self, rng: &mut R) -> ChartPoint {
        match self.family {
            Family::Tube { .. } => {
                let theta = rng.random_range(0.0..2.0 * PI);
                let (chart, c) = stereo_inverse(&uniform_on_sphere(rng, self.n));
                let mut coords = vec![theta];
                coords.extend(c);
                ChartPoint { chart, coords }
            }
            _ => {
                let (chart, coords) = stereo_inverse(&uniform_on_sphere(rng, self.n + 1));
                ChartPoint { chart, coords }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfacePoint {
    pub chart_point: ChartPoint,
    pub position: Vec<f64>,
    /// Inward unit normal.
    pub normal: Vec<f64>,
    /// Orthonormal tangent frame, one vector per entry.
    pub frame: Vec<Vec<f64>>,
    /// `A` in the frame; positive definite on convex surfaces.
    pub shape_operator: SymForm,
    /// `√det G` in chart coordinates.
    pub area_weight: f64,
    #[serde(skip)]
    pub(crate) first_form: DMatrix<f64>,
    #[serde(skip)]
    pub(crate) second_form: DMatrix<f64>,
}

impl SurfacePoint {
    pub fn first_fundamental_form(&self) -> &DMatrix<f64> {
        &self.first_form
    }

    pub fn second_fundamental_form(&self) -> &DMatrix<f64> {
        &self.second_form
    }
}

const REGULARITY_TOL: f64 = 1e-12;

pub(crate) fn surface_from_jet(spec: &HypersurfaceSpec, q: &ChartPoint, jet: &Jet) -> Result<SurfacePoint> {
    let g = jet.jac.transpose() * &jet.jac;
    let scale = g.diagonal().max();
    let chol = g.clone().cholesky().ok_or(Error::IrregularPoint)?;
    let l = chol.l();
    let det_g: f64 = l.diagonal().iter().map(|v| v * v).product();
    if !(det_g > (REGULARITY_TOL * scale).powi(spec.n as i32)) {
        return Err(Error::IrregularPoint);
    }
    let reference = spec.inward_reference(q, &jet.p);
    let coeff = chol.solve(&(jet.jac.transpose() * &reference));
    let mut nu = &reference - &jet.jac * coeff;
    let len = nu.norm();
    if !(len > REGULARITY_TOL * reference.norm()) {
        return Err(Error::IrregularPoint);
    }
    nu /= len;
    let h = jet.hessian_along(&nu);
    // A = L⁻¹ h L⁻ᵀ; frame E = J L⁻ᵀ.
    let linv = l.clone().try_inverse().ok_or(Error::IrregularPoint)?;
    let a = &linv * &h * linv.transpose();
    let frame_m = &jet.jac * linv.transpose();
    let frame = (0..spec.n).map(|k| frame_m.column(k).iter().cloned().collect()).collect();
    Ok(SurfacePoint {
        chart_point: q.clone(),
        position: jet.p.iter().cloned().collect(),
        normal: nu.iter().cloned().collect(),
        frame,
        shape_operator: SymForm::from_matrix(&(0.5 * (&a + a.transpose())))?,
        area_weight: det_g.sqrt(),
        first_form: g,
        second_form: h,
    })
}

/// Position, inward normal, and shape operator at a chart point.
pub fn geometry_at(spec: &HypersurfaceSpec, q: &ChartPoint) -> Result<SurfacePoint> {
    let jet = spec.jet(q)?;
    surface_from_jet(spec, q, &jet)
}
