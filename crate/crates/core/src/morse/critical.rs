use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spec::HypersurfaceSpec;
use super::surface::{geometry_at, ChartPoint, Jet};
use super::{Side, TauEstimate};
use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::rng::{stream, Domain};
use crate::sphere::uniform_on_sphere;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseConfig {
    /// Newton starts per direction, taken from the seed cloud points whose
    /// normal is closest to `±u`.
    pub grid_starts: usize,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Distance in `ℝ^{n+1}` below which two solutions are the same point.
    pub dedupe_radius: f64,
    /// Relative to the local `‖A‖ⁿ` scale.
    pub degeneracy_tol: f64,
    pub seed_cloud: usize,
}

impl Default for MorseConfig {
    fn default() -> Self {
        Self {
            grid_starts: 24,
            newton_tol: 1e-10,
            max_newton_iters: 60,
            dedupe_radius: 1e-5,
            degeneracy_tol: 1e-8,
            seed_cloud: 1024,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub chart_point: ChartPoint,
    pub position: Vec<f64>,
    pub index: usize,
    pub height: f64,
    /// `det Hess / det G`, i.e. `det(±A)` in an orthonormal frame.
    pub hessian_det: f64,
    /// `+1` where the inward normal equals `u`.
    pub normal_sign: i8,
    pub gradient_norm: f64,
}

const SEED_CLOUD_SEED: u64 = 0xc10d;

/// Newton solver for `∇h_u = 0` with a precomputed seed cloud.
pub struct MorseSolver {
    spec: HypersurfaceSpec,
    cfg: MorseConfig,
    seeds: Vec<(ChartPoint, DVector<f64>)>,
}

impl MorseSolver {
    pub fn new(spec: &HypersurfaceSpec, cfg: MorseConfig) -> Result<Self> {
        if cfg.grid_starts == 0 || cfg.seed_cloud == 0 {
            return Err(Error::InvalidInput("grid_starts and seed_cloud must be positive".into()));
        }
        let mut seeds = Vec::with_capacity(cfg.seed_cloud);
        let mut rng = stream(SEED_CLOUD_SEED, Domain::SeedCloud, 0);
        while seeds.len() < cfg.seed_cloud {
            let q = spec.sample_reference(&mut rng);
            if let Ok(s) = geometry_at(spec, &q) {
                seeds.push((q, DVector::from_vec(s.normal)));
            }
        }
        Ok(Self { spec: spec.clone(), cfg, seeds })
    }

    pub fn spec(&self) -> &HypersurfaceSpec {
        &self.spec
    }

    pub fn config(&self) -> &MorseConfig {
        &self.cfg
    }

    fn newton(&self, start: &ChartPoint, u: &DVector<f64>) -> Option<(ChartPoint, Jet, f64)> {
        let mut q = self.spec.normalize(start);
        for _ in 0..self.cfg.max_newton_iters {
            let jet = self.spec.jet(&q).ok()?;
            let g = jet.jac.transpose() * u;
            let gn = g.norm();
            if gn <= self.cfg.newton_tol {
                return Some((q, jet, gn));
            }
            let h = jet.hessian_along(u);
            let mut step = h.lu().solve(&(-g))?;
            let len = step.norm();
            if !len.is_finite() {
                return None;
            }
            if len > 0.5 {
                step *= 0.5 / len;
            }
            q.coords.iter_mut().zip(step.iter()).for_each(|(c, s)| *c += s);
            q = self.spec.normalize(&q);
        }
        None
    }

    fn classify(&self, q: ChartPoint, jet: &Jet, u: &DVector<f64>, gn: f64) -> Result<CriticalPoint> {
        let s = geometry_at(&self.spec, &q)?;
        let hess = jet.hessian_along(u);
        let g = s.first_fundamental_form();
        let det = hess.determinant() / g.determinant();
        let n = self.spec.n;
        let a_scale = (s.shape_operator.norm_sq() / n as f64).sqrt().max(f64::MIN_POSITIVE);
        if det.abs() < self.cfg.degeneracy_tol * a_scale.powi(n as i32) {
            return Err(Error::DegenerateDirection { hessian_det: det });
        }
        let index = hess.symmetric_eigenvalues().iter().filter(|v| **v < 0.0).count();
        let nu = DVector::from_vec(s.normal.clone());
        Ok(CriticalPoint {
            chart_point: q,
            height: jet.p.dot(u),
            position: s.position,
            index,
            hessian_det: det,
            normal_sign: if nu.dot(u) > 0.0 { 1 } else { -1 },
            gradient_norm: gn,
        })
    }

    fn solve_from(&self, starts: &[usize], u: &DVector<f64>) -> Result<Vec<CriticalPoint>> {
        let mut found: Vec<CriticalPoint> = Vec::new();
        let mut any = false;
        for &k in starts {
            let Some((q, jet, gn)) = self.newton(&self.seeds[k].0, u) else { continue };
            any = true;
            let pos = &jet.p;
            let dup = found.iter().any(|c| {
                c.position.iter().zip(pos.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
                    <= self.cfg.dedupe_radius
            });
            if !dup {
                found.push(self.classify(q, &jet, u, gn)?);
            }
        }
        if !any {
            return Err(Error::NewtonFailed);
        }
        found.sort_by(|a, b| a.height.total_cmp(&b.height));
        Ok(found)
    }

    /// All critical points of `h_u(p) = ⟨p, u⟩`, sorted by height.
    ///
    /// The alternating index count must reproduce the Euler characteristic
    /// and a minimum and maximum must be present; otherwise the search is
    /// repeated from more seeds.
    pub fn critical_points(&self, u: &[f64]) -> Result<Vec<CriticalPoint>> {
        let m = self.spec.n + 1;
        if u.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: u.len() });
        }
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput("direction must be a unit vector".into()));
        }
        let u = DVector::from_column_slice(u);
        let mut order: Vec<(f64, usize)> =
            self.seeds.iter().enumerate().map(|(k, (_, nu))| (-nu.dot(&u).abs(), k)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let expected = self.spec.euler_characteristic();
        let mut budget = self.cfg.grid_starts.min(order.len());
        loop {
            let starts: Vec<usize> = order[..budget].iter().map(|x| x.1).collect();
            let pts = self.solve_from(&starts, &u)?;
            let found = pts.iter().map(|c| if c.index % 2 == 0 { 1i64 } else { -1 }).sum::<i64>();
            let has_extrema = pts.iter().any(|c| c.index == 0) && pts.iter().any(|c| c.index == self.spec.n);
            if found == expected && has_extrema {
                return Ok(pts);
            }
            if budget == order.len() {
                return Err(Error::IncompleteCriticalSet { found, expected });
            }
            budget = (budget * 4).min(order.len());
        }
    }
}

/// `μᵢ(u)`: number of index-`i` critical points of `h_u`.
pub fn index_counts(points: &[CriticalPoint], n: usize) -> Vec<usize> {
    let mut mu = vec![0; n + 1];
    for c in points {
        mu[c.index] += 1;
    }
    mu
}

pub fn critical_points(spec: &HypersurfaceSpec, u: &[f64], cfg: MorseConfig) -> Result<Vec<CriticalPoint>> {
    MorseSolver::new(spec, cfg)?.critical_points(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionConfig {
    pub num_directions: usize,
    pub seed: u64,
    pub morse: MorseConfig,
    /// Rejected directions over all attempts, above which the estimate fails.
    pub max_rejection_rate: f64,
}

impl Default for DirectionConfig {
    fn default() -> Self {
        Self { num_directions: 20_000, seed: 0, morse: MorseConfig::default(), max_rejection_rate: 0.1 }
    }
}

/// Each slot redraws until it gets a usable direction; this cap only stops
/// pathological specs from looping.
const MAX_DRAWS_PER_SLOT: usize = 64;

/// `τᵢ = E_u[μᵢ(u)]` over uniformly random unit directions.
pub fn tau_direction_side(spec: &HypersurfaceSpec, cfg: &DirectionConfig) -> Result<TauEstimate> {
    if cfg.num_directions < 2 {
        return Err(Error::InvalidInput("need at least two directions".into()));
    }
    let solver = MorseSolver::new(spec, cfg.morse)?;
    let n = spec.n;
    let slots = map_indexed(cfg.num_directions, |j| {
        let mut rng = stream(cfg.seed, Domain::Direction, j as u64);
        let mut rejected = 0usize;
        for _ in 0..MAX_DRAWS_PER_SLOT {
            let u = uniform_on_sphere(&mut rng, n + 1);
            match solver.critical_points(&u) {
                Ok(pts) => return (Some(index_counts(&pts, n)), rejected),
                Err(_) => rejected += 1,
            }
        }
        (None, rejected)
    });
    let rejected: usize = slots.iter().map(|s| s.1).sum();
    let rate = rejected as f64 / (rejected + cfg.num_directions) as f64;
    if rate > cfg.max_rejection_rate || slots.iter().any(|s| s.0.is_none()) {
        return Err(Error::ExcessiveRejection { rate, limit: cfg.max_rejection_rate });
    }
    let mut sum = vec![0.0; n + 1];
    let mut sum_sq = vec![0.0; n + 1];
    for (mu, _) in &slots {
        for (i, &m) in mu.as_ref().expect("checked above").iter().enumerate() {
            sum[i] += m as f64;
            sum_sq[i] += (m * m) as f64;
        }
    }
    Ok(TauEstimate::from_moments(&sum, &sum_sq, 1.0, cfg.num_directions, Side::DirectionSide, rejected))
}

/// Gradient of `h_u` in chart coordinates by a five-point stencil.
pub fn height_gradient_fd(spec: &HypersurfaceSpec, q: &ChartPoint, u: &[f64], step: f64) -> Result<Vec<f64>> {
    let u = DVector::from_column_slice(u);
    let h = |q: &ChartPoint| spec.jet(q).map(|j| j.p.dot(&u));
    (0..spec.n)
        .map(|j| {
            let at = |t: f64| {
                let mut x = q.clone();
                x.coords[j] += t;
                h(&x)
            };
            Ok((-at(2.0 * step)? + 8.0 * at(step)? - 8.0 * at(-step)? + at(-2.0 * step)?) / (12.0 * step))
        })
        .collect()
}

/// Hessian of `h_u` in chart coordinates by central second differences of
/// function values.
pub fn height_hessian_fd(spec: &HypersurfaceSpec, q: &ChartPoint, u: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let u = DVector::from_column_slice(u);
    let n = spec.n;
    let at = |di: usize, si: f64, dj: usize, sj: f64| -> Result<f64> {
        let mut x = q.clone();
        x.coords[di] += si;
        x.coords[dj] += sj;
        spec.jet(&x).map(|j| j.p.dot(&u))
    };
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                (at(i, step, i, 0.0)? - 2.0 * at(i, 0.0, i, 0.0)? + at(i, -step, i, 0.0)?) / (step * step)
            } else {
                (at(i, step, j, step)? - at(i, step, j, -step)? - at(i, -step, j, step)? + at(i, -step, j, -step)?)
                    / (4.0 * step * step)
            };
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Analytic Hessian `Σ uᵢ ∂²pᵢ` of `h_u` at a chart point.
pub fn height_hessian(spec: &HypersurfaceSpec, q: &ChartPoint, u: &[f64]) -> Result<DMatrix<f64>> {
    Ok(spec.jet(q)?.hessian_along(&DVector::from_column_slice(u)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn north(n: usize) -> Vec<f64> {
        let mut u = vec![0.0; n + 1];
        u[n] = 1.0;
        u
    }

    #[test]
    fn unit_sphere_has_min_and_max() {
        let spec = HypersurfaceSpec::sphere(4, 1.0).unwrap();
        let pts = critical_points(&spec, &north(4), MorseConfig::default()).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].index, pts[1].index), (0, 4));
        assert!((pts[0].height + 1.0).abs() < 1e-12 && (pts[1].height - 1.0).abs() < 1e-12);
    }

    #[test]
    fn torus_has_four_critical_points() {
        let spec: HypersurfaceSpec = "tube:R=2,r=1,n=2".parse().unwrap();
        let solver = MorseSolver::new(&spec, MorseConfig::default()).unwrap();
        let mut rng = stream(9, Domain::Direction, 0);
        for _ in 0..50 {
            let u = uniform_on_sphere(&mut rng, 3);
            let pts = solver.critical_points(&u).unwrap();
            assert_eq!(index_counts(&pts, 2), vec![1, 2, 1]);
        }
    }

    #[test]
    fn ellipsoid_generic_direction() {
        let spec: HypersurfaceSpec = "ellipsoid:1,1.3,0.7,1.1,2".parse().unwrap();
        let solver = MorseSolver::new(&spec, MorseConfig::default()).unwrap();
        let mut rng = stream(10, Domain::Direction, 0);
        for _ in 0..50 {
            let pts = solver.critical_points(&uniform_on_sphere(&mut rng, 5)).unwrap();
            assert_eq!(index_counts(&pts, 4), vec![1, 0, 0, 0, 1]);
        }
    }

    #[test]
    fn rejects_bad_directions() {
        let spec = HypersurfaceSpec::sphere(2, 1.0).unwrap();
        let s = MorseSolver::new(&spec, MorseConfig::default()).unwrap();
        assert!(s.critical_points(&[1.0, 1.0, 0.0]).is_err());
        assert!(s.critical_points(&[1.0, 0.0]).is_err());
    }
}
