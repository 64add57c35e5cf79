use serde::{Deserialize, Serialize};

use super::spec::HypersurfaceSpec;
use super::surface::{geometry_at, SurfacePoint};
use super::{Side, TauEstimate};
use crate::algebra::{weyl_map, SymForm};
use crate::error::{Error, Result};
use crate::par::map_indexed;
use crate::rng::{stream, Domain};
use crate::sphere::vol_sphere;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub num_samples: usize,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { num_samples: 20_000, seed: 0 }
    }
}

const BLOCK: usize = 4096;

/// Runs `fold` over `num_samples` reference-measure draws in fixed blocks
/// and merges block results in block order. The weight passed along is
/// `area_weight / reference_density`, so that `∫_M F = Vol_ref · E[F·w]`.
fn sample_surface<A, F, M>(spec: &HypersurfaceSpec, cfg: &SampleConfig, fold: F, merge: M) -> (A, usize)
where
    A: Default + Send,
    F: Fn(&mut A, &SurfacePoint, f64) + Sync + Send,
    M: Fn(&mut A, A),
{
    let blocks = cfg.num_samples.div_ceil(BLOCK);
    let parts = map_indexed(blocks, |b| {
        let mut rng = stream(cfg.seed, Domain::SurfaceSample, b as u64);
        let count = BLOCK.min(cfg.num_samples - b * BLOCK);
        let mut acc = A::default();
        let mut skipped = 0;
        for _ in 0..count {
            let q = spec.sample_reference(&mut rng);
            match geometry_at(spec, &q) {
                Ok(s) => {
                    let w = s.area_weight / spec.reference_density(&q);
                    fold(&mut acc, &s, w);
                }
                Err(_) => skipped += 1,
            }
        }
        (acc, skipped)
    });
    let mut total = A::default();
    let mut skipped = 0;
    for (a, s) in parts {
        merge(&mut total, a);
        skipped += s;
    }
    (total, skipped)
}

fn require_samples(cfg: &SampleConfig) -> Result<()> {
    if cfg.num_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    Ok(())
}

#[derive(Default)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn add(&mut self, values: &[f64]) {
        if self.sum.is_empty() {
            self.sum = vec![0.0; values.len()];
            self.sum_sq = vec![0.0; values.len()];
        }
        for (i, v) in values.iter().enumerate() {
            self.sum[i] += v;
            self.sum_sq[i] += v * v;
        }
    }

    fn merge(&mut self, other: Moments) {
        if self.sum.is_empty() {
            *self = other;
        } else if !other.sum.is_empty() {
            for i in 0..self.sum.len() {
                self.sum[i] += other.sum[i];
                self.sum_sq[i] += other.sum_sq[i];
            }
        }
    }

    fn padded(mut self, len: usize) -> Self {
        self.sum.resize(len, 0.0);
        self.sum_sq.resize(len, 0.0);
        self
    }
}

/// Number of negative eigenvalues and `|det|` of a shape operator.
fn index_and_det(a: &SymForm) -> (usize, usize, f64) {
    let spec = a.spectrum();
    let v = spec.values();
    let neg = v.iter().filter(|x| **x < 0.0).count();
    let pos = v.iter().filter(|x| **x > 0.0).count();
    (neg, pos, v.iter().product::<f64>().abs())
}

/// `τᵢ = (1/|Sⁿ|) ∫_{UN} [index(A_ξ) = i]·|det A_ξ| dΣ`, summing both normals.
pub fn tau_normal_bundle_side(spec: &HypersurfaceSpec, cfg: &SampleConfig) -> Result<TauEstimate> {
    require_samples(cfg)?;
    let n = spec.n;
    let (m, skipped) = sample_surface(
        spec,
        cfg,
        |acc: &mut Moments, s, w| {
            let (neg, pos, det) = index_and_det(&s.shape_operator);
            let mut bins = vec![0.0; n + 1];
            // A_{−ν} = −A_ν: its negative eigenvalues are the positive ones of A_ν.
            bins[neg] += det * w;
            bins[pos] += det * w;
            acc.add(&bins);
        },
        Moments::merge,
    );
    let m = m.padded(n + 1);
    let factor = spec.reference_volume() / vol_sphere(n);
    let mut est = TauEstimate::from_moments(&m.sum, &m.sum_sq, factor, cfg.num_samples, Side::NormalBundleSide, 0);
    est.skipped = skipped;
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseGapReport {
    pub epsilon_hat: f64,
    /// Sampled surface points.
    pub checked: usize,
    /// `2 × checked`: both unit normals at every point.
    pub normal_directions: usize,
    pub middle_index_points: usize,
    pub middle_index_fraction: f64,
    pub violations: usize,
    /// `min ‖W‖²/|det A_ξ|^{4/n}` over middle-index normals.
    pub min_ratio: Option<f64>,
    pub max_weyl_norm: f64,
    pub skipped: usize,
}

#[derive(Default)]
struct GapTally {
    checked: usize,
    middle: usize,
    violations: usize,
    min_ratio: Option<f64>,
    max_weyl: f64,
}

/// Tests `‖W(A_ξ)‖² ≥ ε̂·|det A_ξ|^{4/n}` at sampled `(p, ξ)` with
/// `2 ≤ index(A_ξ) ≤ n − 2`.
pub fn pointwise_gap_check(spec: &HypersurfaceSpec, epsilon_hat: f64, cfg: &SampleConfig) -> Result<PointwiseGapReport> {
    require_samples(cfg)?;
    let n = spec.n;
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    if !(epsilon_hat > 0.0) {
        return Err(Error::InvalidInput("epsilon_hat must be positive".into()));
    }
    let (t, skipped) = sample_surface(
        spec,
        cfg,
        |acc: &mut GapTally, s, _w| {
            acc.checked += 1;
            let a = &s.shape_operator;
            let w2 = weyl_map(a).map(|w| w.norm_sq()).unwrap_or(f64::NAN);
            acc.max_weyl = acc.max_weyl.max(w2.sqrt());
            let (neg, pos, det) = index_and_det(a);
            for idx in [neg, pos] {
                if (2..=n - 2).contains(&idx) {
                    acc.middle += 1;
                    let bound = epsilon_hat * det.powf(4.0 / n as f64);
                    if !(w2 >= bound - 1e-9 * bound) {
                        acc.violations += 1;
                    }
                    if det > 0.0 {
                        let r = w2 / det.powf(4.0 / n as f64);
                        acc.min_ratio = Some(acc.min_ratio.map_or(r, |m| m.min(r)));
                    }
                }
            }
        },
        |total: &mut GapTally, b| {
            total.checked += b.checked;
            total.middle += b.middle;
            total.violations += b.violations;
            total.max_weyl = total.max_weyl.max(b.max_weyl);
            total.min_ratio = match (total.min_ratio, b.min_ratio) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
        },
    );
    Ok(PointwiseGapReport {
        epsilon_hat,
        checked: t.checked,
        normal_directions: 2 * t.checked,
        middle_index_points: t.middle,
        middle_index_fraction: t.middle as f64 / (2 * t.checked).max(1) as f64,
        violations: t.violations,
        min_ratio: t.min_ratio,
        max_weyl_norm: t.max_weyl,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylEnergyEstimate {
    /// `∫_M ‖W‖^{n/2} dM`.
    pub energy: f64,
    pub stderr: f64,
    /// Normal-bundle integral over both normals divided by twice the base integral.
    pub double_cover_check: f64,
    pub samples: usize,
}

pub fn weyl_energy_mc(spec: &HypersurfaceSpec, cfg: &SampleConfig) -> Result<WeylEnergyEstimate> {
    require_samples(cfg)?;
    let n = spec.n;
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    let p = n as f64 / 4.0;
    let (m, _) = sample_surface(
        spec,
        cfg,
        |acc: &mut Moments, s, w| {
            let a = &s.shape_operator;
            let base = weyl_map(a).map(|t| t.norm_sq().powf(p)).unwrap_or(f64::NAN);
            let flipped = weyl_map(&a.scaled(-1.0)).map(|t| t.norm_sq().powf(p)).unwrap_or(f64::NAN);
            acc.add(&[base * w, (base + flipped) * w]);
        },
        Moments::merge,
    );
    let m = m.padded(2);
    let est = TauEstimate::from_moments(&m.sum, &m.sum_sq, spec.reference_volume(), cfg.num_samples, Side::NormalBundleSide, 0);
    let ratio = if m.sum[0] == 0.0 && m.sum[1] == 0.0 { 1.0 } else { m.sum[1] / (2.0 * m.sum[0]) };
    Ok(WeylEnergyEstimate { energy: est.tau[0], stderr: est.stderr[0], double_cover_check: ratio, samples: cfg.num_samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sphere_normal_bundle_is_exact() {
        let spec = HypersurfaceSpec::sphere(4, 1.0).unwrap();
        let t = tau_normal_bundle_side(&spec, &SampleConfig { num_samples: 2000, seed: 1 }).unwrap();
        for (i, want) in [1.0, 0.0, 0.0, 0.0, 1.0].iter().enumerate() {
            assert!((t.tau[i] - want).abs() < 1e-10, "{:?}", t.tau);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec: HypersurfaceSpec = "ellipsoid:1,1.5,2".parse().unwrap();
        let cfg = SampleConfig { num_samples: 5000, seed: 4 };
        assert_eq!(tau_normal_bundle_side(&spec, &cfg).unwrap(), tau_normal_bundle_side(&spec, &cfg).unwrap());
    }

    #[test]
    fn tube_is_conformally_flat() {
        let spec: HypersurfaceSpec = "tube:R=2,r=1,n=4".parse().unwrap();
        let cfg = SampleConfig { num_samples: 2000, seed: 2 };
        let g = pointwise_gap_check(&spec, 1.0, &cfg).unwrap();
        assert_eq!(g.middle_index_points, 0);
        assert!(g.max_weyl_norm <= 1e-8);
        let e = weyl_energy_mc(&spec, &cfg).unwrap();
        assert!(e.energy < 1e-20);
        assert!((e.double_cover_check - 1.0).abs() <= 1e-12);
    }
}
