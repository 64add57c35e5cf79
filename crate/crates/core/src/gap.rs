//! The eigenvalue polynomials `φ`, `ψ` behind the Weyl gap inequality
//!
//! ```text
//! ‖W(β)‖² ≥ ε(n)·|det β♯|^{4/n}   for β with 2..=n−2 negative eigenvalues
//! ```
//!
//! and a numerical estimate of the best constant `ε(n)`.
//!
//! `ε(n)` is the minimum of `φ` over the level set `Σₙ = {x ∈ Uₙ : |ψ(x)| = 1}`.
//! Each sign stratum (a fixed number `k` of negative coordinates) is a
//! connected component; on it we write `xᵢ = sᵢ·exp(yᵢ)` with `Σ yᵢ = 0`, which
//! keeps `|ψ| = 1` exactly, and minimise the smooth restriction by projected
//! BFGS from many random starts. Estimates are empirical: every
//! [`GapEstimate`] carries a sampling certificate from [`verify_gap`].

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::SymForm;
use crate::error::{Error, Result};
use crate::models::fit_tw1_coefficients;
use crate::par::map_indexed;
use crate::rng::{stream, Domain};
use crate::sphere::vol_sphere;

/// Iterates with `‖y‖∞` beyond this bound are treated as escaping to infinity.
pub const ESCAPE_BOUND: f64 = 50.0;
/// Relative slack applied before a sampled ratio counts as a violation.
pub const VIOLATION_SLACK: f64 = 1e-9;
const SAMPLE_CHUNK: usize = 4096;
const MAX_WITNESSES: usize = 8;

fn require_n4(n: usize) -> Result<()> {
    if n < 4 {
        Err(Error::DimensionTooSmall { n, min: 4 })
    } else {
        Ok(())
    }
}

pub fn sigma1(x: &[f64]) -> f64 {
    x.iter().sum()
}

/// `Σ_{i<j} xᵢxⱼ`.
pub fn sigma2(x: &[f64]) -> f64 {
    let s1 = sigma1(x);
    let sq: f64 = x.iter().map(|v| v * v).sum();
    // (σ₁² − Σx²)/2 rounds differently from the pair sum; use the pair sum for small n.
    if x.len() <= 16 {
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                s += x[i] * x[j];
            }
        }
        s
    } else {
        0.5 * (s1 * s1 - sq)
    }
}

pub fn psi(x: &[f64]) -> f64 {
    x.iter().product()
}

/// The pair terms `tᵢⱼ = xᵢxⱼ − (σ₁(xᵢ+xⱼ) − (xᵢ²+xⱼ²) − 2σ₂/(n−1))/(n−2)`;
/// these are the sectional values `W(eᵢ,eⱼ,eᵢ,eⱼ)` of a diagonal form.
fn pair_terms(x: &[f64], mut f: impl FnMut(usize, usize, f64)) {
    let n = x.len() as f64;
    let s1 = sigma1(x);
    let s2 = sigma2(x);
    let a = 1.0 / (n - 2.0);
    let b = 2.0 * s2 / (n - 1.0);
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let t = x[i] * x[j] - a * (s1 * (x[i] + x[j]) - (x[i] * x[i] + x[j] * x[j]) - b);
            f(i, j, t);
        }
    }
}

fn phi_unchecked(x: &[f64]) -> f64 {
    let mut acc = 0.0;
    pair_terms(x, |_, _, t| acc += t * t);
    4.0 * acc
}

/// `φ(x) = 4 Σ_{i<j} tᵢⱼ²`, equal to `‖W(diag x)‖²`.
pub fn phi(x: &[f64]) -> Result<f64> {
    require_n4(x.len())?;
    Ok(phi_unchecked(x))
}

/// Analytic gradient of `φ`.
pub fn phi_gradient(x: &[f64]) -> Result<Vec<f64>> {
    require_n4(x.len())?;
    Ok(phi_gradient_unchecked(x))
}

fn phi_gradient_unchecked(x: &[f64]) -> Vec<f64> {
    let nn = x.len();
    let n = nn as f64;
    let s1 = sigma1(x);
    let a = 1.0 / (n - 2.0);
    let ab = a * 2.0 / (n - 1.0);
    // ∂tᵢⱼ/∂x_k = −a(xᵢ+xⱼ) + ab·σ₁ − ab·x_k
    //            + [k=i](xⱼ − aσ₁ + 2a·xᵢ) + [k=j](xᵢ − aσ₁ + 2a·xⱼ)
    let mut grad = vec![0.0; nn];
    let mut common = 0.0;
    let mut t_sum = 0.0;
    pair_terms(x, |i, j, t| {
        common += t * (-a * (x[i] + x[j]) + ab * s1);
        t_sum += t;
        grad[i] += t * (x[j] - a * s1 + 2.0 * a * x[i]);
        grad[j] += t * (x[i] - a * s1 + 2.0 * a * x[j]);
    });
    for k in 0..nn {
        grad[k] = 8.0 * (grad[k] + common - ab * x[k] * t_sum);
    }
    grad
}

/// Scale-invariant ratio `φ(x)/|ψ(x)|^{4/n}`; `None` when `ψ(x) = 0`.
pub fn gap_ratio(x: &[f64]) -> Result<Option<f64>> {
    require_n4(x.len())?;
    let p = psi(x);
    if p == 0.0 {
        return Ok(None);
    }
    Ok(Some(phi_unchecked(x) / p.abs().powf(4.0 / x.len() as f64)))
}

/// `x/|ψ(x)|^{1/n}`, which lies on `|ψ| = 1`.
pub fn normalize_to_level(x: &[f64]) -> Option<Vec<f64>> {
    let p = psi(x);
    if p == 0.0 || !p.is_finite() {
        return None;
    }
    let s = p.abs().powf(1.0 / x.len() as f64);
    Some(x.iter().map(|v| v / s).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stratum {
    KPlus,
    KMinus,
    Admissible,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub n: usize,
    pub x: Vec<f64>,
    pub phi_value: f64,
    pub psi_value: f64,
    pub stratum: Stratum,
    pub neg_count: usize,
}

/// Sorts a point into `K₊`, `K₋` (at least `n−1` strictly positive / negative
/// coordinates), the admissible open strata, or their boundary.
pub fn classify_stratum(x: &[f64]) -> Result<GapPoint> {
    require_n4(x.len())?;
    let n = x.len();
    let pos = x.iter().filter(|v| **v > 0.0).count();
    let neg = x.iter().filter(|v| **v < 0.0).count();
    let stratum = if pos + 1 >= n {
        Stratum::KPlus
    } else if neg + 1 >= n {
        Stratum::KMinus
    } else if pos + neg < n {
        Stratum::Boundary
    } else {
        Stratum::Admissible
    };
    Ok(GapPoint {
        n,
        x: x.to_vec(),
        phi_value: phi_unchecked(x),
        psi_value: psi(x),
        stratum,
        neg_count: neg,
    })
}

/// The point `(1,…,1,−1,…,−1)` with `⌊n/2⌋` negative entries; it lies on
/// `Σₙ` and bounds `ε(n)` from above.
pub fn symmetric_candidate(n: usize) -> Vec<f64> {
    let k = n / 2;
    (0..n).map(|i| if i < n - k { 1.0 } else { -1.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleDistribution {
    /// Magnitudes log-uniform on `[e⁻³, e³]`, sign stratum uniform.
    LogUniform,
    /// I.i.d. standard normal coordinates, rejected outside the strata.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub distribution: SampleDistribution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 0, distribution: SampleDistribution::LogUniform }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapVerification {
    pub samples: usize,
    pub checked: usize,
    pub skipped: usize,
    pub violations: usize,
    pub min_ratio: f64,
    pub min_ratio_point: Vec<f64>,
    pub witnesses: Vec<Vec<f64>>,
}

#[derive(Default)]
struct Tally {
    checked: usize,
    skipped: usize,
    violations: usize,
    min_ratio: f64,
    min_point: Vec<f64>,
    witnesses: Vec<Vec<f64>>,
}

impl Tally {
    fn new() -> Self {
        Self { min_ratio: f64::INFINITY, ..Default::default() }
    }

    fn record(&mut self, x: &[f64], epsilon_hat: f64) {
        let neg = x.iter().filter(|v| **v < 0.0).count();
        let n = x.len();
        let ratio = match gap_ratio(x).expect("n checked by caller") {
            Some(r) if (2..=n - 2).contains(&neg) => r,
            _ => {
                self.skipped += 1;
                return;
            }
        };
        self.checked += 1;
        if ratio < self.min_ratio {
            self.min_ratio = ratio;
            self.min_point = x.to_vec();
        }
        if ratio < epsilon_hat * (1.0 - VIOLATION_SLACK) {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(x.to_vec());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.violations += other.violations;
        if other.min_ratio < self.min_ratio {
            self.min_ratio = other.min_ratio;
            self.min_point = other.min_point;
        }
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
    }

    fn finish(self, samples: usize) -> GapVerification {
        GapVerification {
            samples,
            checked: self.checked,
            skipped: self.skipped,
            violations: self.violations,
            min_ratio: self.min_ratio,
            min_ratio_point: self.min_point,
            witnesses: self.witnesses,
        }
    }
}

/// Draws one spectrum in the admissible strata (`2..=n−2` negatives).
pub fn sample_admissible<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    distribution: SampleDistribution,
) -> Vec<f64> {
    match distribution {
        SampleDistribution::LogUniform => {
            let k = rng.random_range(2..=n - 2);
            let mut signs: Vec<f64> = (0..n).map(|i| if i < k { -1.0 } else { 1.0 }).collect();
            signs.shuffle(rng);
            let x: Vec<f64> = signs.iter().map(|s| s * rng.random_range(-3.0..3.0_f64).exp()).collect();
            normalize_to_level(&x).unwrap_or(x)
        }
        SampleDistribution::Gaussian => loop {
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let neg = x.iter().filter(|v| **v < 0.0).count();
            if (2..=n - 2).contains(&neg) {
                return x;
            }
        },
    }
}

/// Checks `φ(x) ≥ ε̂·|ψ(x)|^{4/n}` on explicit points. Points outside the
/// admissible strata or with `ψ(x) = 0` are skipped.
pub fn verify_gap_points(points: &[Vec<f64>], epsilon_hat: f64) -> Result<GapVerification> {
    let mut tally = Tally::new();
    for x in points {
        require_n4(x.len())?;
        tally.record(x, epsilon_hat);
    }
    Ok(tally.finish(points.len()))
}

/// Random-sample audit of the gap inequality for a claimed `ε̂`.
pub fn verify_gap(n: usize, epsilon_hat: f64, cfg: &VerifyConfig) -> Result<GapVerification> {
    require_n4(n)?;
    if !(epsilon_hat > 0.0) {
        return Err(Error::InvalidInput("epsilon_hat must be positive".into()));
    }
    let chunks = cfg.samples.div_ceil(SAMPLE_CHUNK);
    let tallies = map_indexed(chunks, |c| {
        let mut rng = stream(cfg.seed, Domain::GapSample, c as u64);
        let count = SAMPLE_CHUNK.min(cfg.samples - c * SAMPLE_CHUNK);
        let mut tally = Tally::new();
        for _ in 0..count {
            let x = sample_admissible(&mut rng, n, cfg.distribution);
            tally.record(&x, epsilon_hat);
        }
        tally
    });
    let mut total = Tally::new();
    for t in tallies {
        total.merge(t);
    }
    Ok(total.finish(cfg.samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonConfig {
    pub starts_per_stratum: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
    /// Sample count for the certificate run of [`verify_gap`].
    pub certificate_samples: usize,
    pub distribution: SampleDistribution,
}

impl Default for EpsilonConfig {
    fn default() -> Self {
        Self {
            starts_per_stratum: 64,
            max_iters: 2000,
            grad_tol: 1e-10,
            seed: 0,
            certificate_samples: 1_000_000,
            distribution: SampleDistribution::LogUniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCertificate {
    pub samples: usize,
    pub min_ratio: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSummary {
    pub neg_count: usize,
    pub starts: usize,
    pub converged: usize,
    pub escaped: usize,
    pub best_phi: Option<f64>,
    /// Smallest `φ` seen along any iterate of a converged run.
    pub min_iterate_phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub n: usize,
    pub epsilon_hat: f64,
    pub argmin: GapPoint,
    pub sheet: i8,
    pub starts_used: usize,
    pub converged_fraction: f64,
    pub sample_certificate: SampleCertificate,
    pub strata: Vec<StratumSummary>,
    pub config: EpsilonConfig,
}

/// Outcome of one optimizer run on the log-magnitude hyperplane.
#[derive(Debug, Clone)]
pub struct StartOutcome {
    pub y: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub escaped: bool,
    pub iterations: usize,
    pub min_iterate_value: f64,
}

/// Objective on one sign stratum: `y ↦ φ(s ∘ exp(y))`, restricted to the
/// hyperplane `Σ yᵢ = 0`.
#[derive(Debug, Clone)]
pub struct StratumObjective {
    signs: Vec<f64>,
}

impl StratumObjective {
    /// Stratum with the last `neg_count` coordinates negative.
    pub fn new(n: usize, neg_count: usize) -> Result<Self> {
        require_n4(n)?;
        if !(2..=n - 2).contains(&neg_count) {
            return Err(Error::InvalidInput(format!(
                "stratum with {neg_count} negatives is not admissible for n = {n}"
            )));
        }
        Ok(Self { signs: (0..n).map(|i| if i + neg_count < n { 1.0 } else { -1.0 }).collect() })
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn point(&self, y: &[f64]) -> Vec<f64> {
        self.signs.iter().zip(y).map(|(s, v)| s * v.exp()).collect()
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        phi_unchecked(&self.point(y))
    }

    /// Gradient in `y`, projected onto the hyperplane `Σ yᵢ = 0`.
    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let x = self.point(y);
        let gx = phi_gradient_unchecked(&x);
        let g: Vec<f64> = gx.iter().zip(&x).map(|(a, b)| a * b).collect();
        project(&g)
    }

    /// Projected BFGS with Armijo backtracking from `y0` (projected first).
    pub fn minimize(&self, y0: &[f64], max_iters: usize, grad_tol: f64) -> StartOutcome {
        let n = self.dim();
        let projector = DMatrix::from_fn(n, n, |i, j| {
            (if i == j { 1.0 } else { 0.0 }) - 1.0 / n as f64
        });
        let mut h = projector.clone();
        let mut y = DVector::from_vec(project(y0));
        let mut f = self.value(y.as_slice());
        let mut g = DVector::from_vec(self.gradient(y.as_slice()));
        let mut min_seen = f;
        let out = |y: &DVector<f64>, f: f64, converged, escaped, it, min_seen| StartOutcome {
            y: y.iter().copied().collect(),
            value: f,
            converged,
            escaped,
            iterations: it,
            min_iterate_value: min_seen,
        };
        for it in 0..max_iters {
            if g.amax() <= grad_tol * (1.0 + f) {
                return out(&y, f, true, false, it, min_seen);
            }
            let mut d = -(&h * &g);
            let mut slope = g.dot(&d);
            if slope >= 0.0 {
                h = projector.clone();
                d = -&g;
                slope = -g.norm_squared();
            }
            // Cap the step so exp() stays well conditioned.
            let dmax = d.amax();
            let mut t = if dmax > 2.0 { 2.0 / dmax } else { 1.0 };
            let mut accepted = None;
            for _ in 0..60 {
                let y_new = &y + t * &d;
                let f_new = self.value(y_new.as_slice());
                if f_new.is_finite() && f_new <= f + 1e-4 * t * slope {
                    accepted = Some((y_new, f_new));
                    break;
                }
                t *= 0.5;
            }
            let Some((y_new, f_new)) = accepted else {
                // No decrease available at machine precision: stationary to within round-off.
                let converged = g.amax() <= grad_tol.sqrt() * (1.0 + f);
                return out(&y, f, converged, false, it, min_seen);
            };
            if y_new.amax() > ESCAPE_BOUND {
                return out(&y_new, f_new, false, true, it, min_seen);
            }
            let g_new = DVector::from_vec(self.gradient(y_new.as_slice()));
            let s = &y_new - &y;
            let yv = &g_new - &g;
            let sy = s.dot(&yv);
            if sy > 1e-12 * s.norm() * yv.norm() {
                let rho = 1.0 / sy;
                let hy = &h * &yv;
                let yhy = yv.dot(&hy);
                h += (rho * rho * yhy + rho) * (&s * s.transpose())
                    - rho * (&hy * s.transpose() + &s * hy.transpose());
            } else {
                h = projector.clone();
            }
            y = y_new;
            f = f_new;
            g = g_new;
            min_seen = min_seen.min(f);
        }
        let converged = g.amax() <= grad_tol * (1.0 + f);
        out(&y, f, converged, false, max_iters, min_seen)
    }
}

fn project(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Start `index` on a stratum: index 0 is the symmetric point `y = 0`,
/// the rest are uniform in `[−2, 2]ⁿ` with each sign block sorted.
fn start_point(n: usize, neg_count: usize, seed: u64, stratum_id: usize, index: usize) -> Vec<f64> {
    if index == 0 {
        return vec![0.0; n];
    }
    let mut rng = stream(seed, Domain::OptimizerStart, ((stratum_id as u64) << 32) | index as u64);
    let mut y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let (pos, neg) = y.split_at_mut(n - neg_count);
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| b.total_cmp(a));
    y
}

/// Admissible strata up to the symmetry `x ↦ −x`: `k ∈ 2..=⌊n/2⌋` negatives.
pub fn strata(n: usize) -> Vec<usize> {
    (2..=n / 2).collect()
}

/// Estimates `ε(n) = min φ` over `Σₙ` and certifies it by sampling.
pub fn estimate_epsilon(n: usize, cfg: &EpsilonConfig) -> Result<GapEstimate> {
    require_n4(n)?;
    if cfg.starts_per_stratum == 0 {
        return Err(Error::InvalidInput("at least one start per stratum is required".into()));
    }
    let ks = strata(n);
    let per = cfg.starts_per_stratum;
    let runs = map_indexed(ks.len() * per, |task| {
        let (sid, idx) = (task / per, task % per);
        let k = ks[sid];
        let obj = StratumObjective::new(n, k).expect("admissible stratum");
        let y0 = start_point(n, k, cfg.seed, sid, idx);
        obj.minimize(&y0, cfg.max_iters, cfg.grad_tol)
    });

    let mut best: Option<(f64, usize, usize)> = None; // (value, stratum id, task)
    let mut summaries = Vec::new();
    let mut converged_total = 0;
    for (sid, k) in ks.iter().enumerate() {
        let slice = &runs[sid * per..(sid + 1) * per];
        let mut summary = StratumSummary {
            neg_count: *k,
            starts: per,
            converged: 0,
            escaped: 0,
            best_phi: None,
            min_iterate_phi: None,
        };
        for (idx, run) in slice.iter().enumerate() {
            summary.escaped += usize::from(run.escaped);
            if !run.converged {
                continue;
            }
            summary.converged += 1;
            summary.best_phi = Some(summary.best_phi.map_or(run.value, |b: f64| b.min(run.value)));
            summary.min_iterate_phi = Some(
                summary.min_iterate_phi.map_or(run.min_iterate_value, |b: f64| b.min(run.min_iterate_value)),
            );
            if best.is_none_or(|(v, _, _)| run.value < v) {
                best = Some((run.value, sid, sid * per + idx));
            }
        }
        converged_total += summary.converged;
        summaries.push(summary);
    }
    let Some((_, sid, task)) = best else {
        return Err(Error::NoConvergedStart { starts: ks.len() * per });
    };
    let obj = StratumObjective::new(n, ks[sid])?;
    let x = obj.point(&runs[task].y);
    let argmin = classify_stratum(&x)?;
    let epsilon_hat = argmin.phi_value;
    let cert = verify_gap(
        n,
        epsilon_hat,
        &VerifyConfig { samples: cfg.certificate_samples, seed: cfg.seed, distribution: cfg.distribution },
    )?;
    Ok(GapEstimate {
        n,
        epsilon_hat,
        sheet: if argmin.psi_value > 0.0 { 1 } else { -1 },
        argmin,
        starts_used: ks.len() * per,
        converged_fraction: converged_total as f64 / (ks.len() * per) as f64,
        sample_certificate: SampleCertificate {
            samples: cert.samples,
            min_ratio: cert.min_ratio,
            violations: cert.violations,
        },
        strata: summaries,
        config: *cfg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenSignature {
    pub pos: usize,
    pub neg: usize,
    pub zero: usize,
    pub in_e_plus: bool,
    pub in_e_minus: bool,
}

/// Counts eigenvalues of `β♯` above `tol`, below `−tol`, and in between.
pub fn eigen_signature(beta: &SymForm, tol: f64) -> EigenSignature {
    let n = beta.dim();
    let spec = beta.spectrum();
    let pos = spec.values().iter().filter(|v| **v > tol).count();
    let neg = spec.values().iter().filter(|v| **v < -tol).count();
    EigenSignature {
        pos,
        neg,
        zero: n - pos - neg,
        in_e_plus: pos + 1 >= n,
        in_e_minus: neg + 1 >= n,
    }
}

/// `(γ, δ, a = nγ − δ)` in `‖W‖² = γ‖A‖⁴ − δ‖Ric − (n−1)g‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tw1Coefficients {
    pub gamma: f64,
    pub delta: f64,
    pub a: f64,
}

impl Tw1Coefficients {
    pub fn new(n: usize, gamma: f64, delta: f64) -> Self {
        Self { gamma, delta, a: n as f64 * gamma - delta }
    }

    /// `γ = 2(n²−3n+5)/((n−1)(n−2))`, `δ = 2(n+1)/(n−2)` as printed with the identity.
    pub fn printed(n: usize) -> Self {
        let nf = n as f64;
        Self::new(
            n,
            2.0 * (nf * nf - 3.0 * nf + 5.0) / ((nf - 1.0) * (nf - 2.0)),
            2.0 * (nf + 1.0) / (nf - 2.0),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalConstants {
    pub n: usize,
    pub epsilon_hat: f64,
    pub vol_sphere_n: f64,
    pub printed: Tw1Coefficients,
    pub fitted: Tw1Coefficients,
    /// Max relative fit residual on held-out trace-free spectra.
    pub fitted_holdout_residual: f64,
    /// Printed and fitted coefficients differ beyond fit accuracy.
    pub coefficients_disagree: bool,
    /// `ε̂^{n/4}·|Sⁿ|/2`.
    pub c_n: f64,
    /// `c(n)/a^{n/4}` with the fitted `a`.
    pub c1_n: f64,
    /// `c(n)/a^{n/4}` with the printed `a`.
    pub c1_n_printed: f64,
}

/// Sample size and seed of the identity fit that backs [`universal_constants`].
pub const CONSTANTS_FIT_SAMPLES: usize = 256;
pub const CONSTANTS_FIT_SEED: u64 = 0x5eed;

pub fn universal_constants(n: usize, epsilon_hat: f64) -> Result<UniversalConstants> {
    require_n4(n)?;
    if !(epsilon_hat > 0.0) {
        return Err(Error::InvalidInput("epsilon_hat must be positive".into()));
    }
    let nf = n as f64;
    let vol = vol_sphere(n);
    let printed = Tw1Coefficients::printed(n);
    let fit = fit_tw1_coefficients(n, CONSTANTS_FIT_SAMPLES, CONSTANTS_FIT_SEED)?;
    let fitted = fit.coefficients;
    let c_n = epsilon_hat.powf(nf / 4.0) * vol / 2.0;
    let disagree = (printed.gamma - fitted.gamma).abs() > 1e-6 * printed.gamma.abs()
        || (printed.delta - fitted.delta).abs() > 1e-6 * printed.delta.abs();
    Ok(UniversalConstants {
        n,
        epsilon_hat,
        vol_sphere_n: vol,
        printed,
        fitted,
        fitted_holdout_residual: fit.holdout_residual,
        coefficients_disagree: disagree,
        c_n,
        c1_n: c_n / fitted.a.powf(nf / 4.0),
        c1_n_printed: c_n / printed.a.powf(nf / 4.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!((phi(&[1.0, 1.0, -1.0, -1.0]).unwrap() - 64.0 / 3.0).abs() < 1e-12);
        for t in [-3.0, 0.5, 7.0] {
            assert!(phi(&[2.0 * t; 4]).unwrap().abs() < 1e-9 * t.powi(4).max(1.0));
        }
        assert!(phi(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn symmetric_functions() {
        assert_eq!(psi(&[1.0, 2.0, 3.0, 4.0]), 24.0);
        assert_eq!(sigma1(&[1.0, 1.0, -1.0, -1.0]), 0.0);
        assert_eq!(sigma2(&[1.0, 1.0, -1.0, -1.0]), -2.0);
        let x = normalize_to_level(&[0.3, -2.0, 5.0, -0.7, 1.1]).unwrap();
        assert!((psi(&x).abs() - 1.0).abs() < 1e-12);
        assert!(normalize_to_level(&[0.0, 1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn strata_examples() {
        assert_eq!(classify_stratum(&[1.0, 1.0, 1.0, -1.0]).unwrap().stratum, Stratum::KPlus);
        let p = classify_stratum(&[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert_eq!((p.stratum, p.neg_count), (Stratum::Admissible, 2));
        assert_eq!(classify_stratum(&[1.0, -1.0, -1.0, -1.0]).unwrap().stratum, Stratum::KMinus);
        assert_eq!(classify_stratum(&[1.0, 0.0, -1.0, -1.0]).unwrap().stratum, Stratum::Boundary);
        assert_eq!(classify_stratum(&[1.0, 1.0, 1.0, 0.0]).unwrap().stratum, Stratum::KPlus);
    }

    #[test]
    fn signature_examples() {
        let s = eigen_signature(&SymForm::diag(&[1.0, 1.0, -1.0, -1.0]), 1e-10);
        assert_eq!((s.pos, s.neg, s.zero, s.in_e_plus, s.in_e_minus), (2, 2, 0, false, false));
        let s = eigen_signature(&SymForm::diag(&[1.0, 1.0, 1.0, -1.0]), 1e-10);
        assert_eq!((s.pos, s.neg, s.zero), (3, 1, 0));
        assert!(s.in_e_plus);
        let s = eigen_signature(&SymForm::zeros(4), 1e-10);
        assert_eq!((s.pos, s.neg, s.zero), (0, 0, 4));
    }

    #[test]
    fn zero_coordinate_is_skipped() {
        let v = verify_gap_points(&[vec![1.0, 0.0, -1.0, -2.0], vec![1.0, 1.0, 1.0, -1.0]], 1.0).unwrap();
        assert_eq!((v.checked, v.skipped, v.violations), (0, 2, 0));
    }

    #[test]
    fn printed_coefficients_at_four() {
        let p = Tw1Coefficients::printed(4);
        assert!((p.gamma - 3.0).abs() < 1e-15);
        assert!((p.delta - 5.0).abs() < 1e-15);
        assert!((p.a - 7.0).abs() < 1e-14);
    }

    #[test]
    fn stratum_objective_rejects_inadmissible() {
        assert!(StratumObjective::new(4, 1).is_err());
        assert!(StratumObjective::new(4, 3).is_err());
        assert!(StratumObjective::new(5, 3).is_ok());
    }
}
