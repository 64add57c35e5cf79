//! Homogeneous products of round spheres and flat tori.
//!
//! Every point of such a product has the same curvature tensor, so the
//! `L^{n/2}` energies reduce to `‖·‖^{n/2} × volume`. Of the tori only the
//! dimension and total volume matter; their homology is torsion-free and the
//! middle Betti sum is the same over every coefficient field.
//!
//! The second half of the module audits the minimal-hypersurface identities:
//! the per-pair formula for `‖W‖²` of a trace-free shape operator, the
//! coefficients `(γ, δ)` that express it through `‖A‖⁴` and `‖A²‖²`, and the
//! resulting chain of Ricci inequalities.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{curvature_of_form, decompose, kn_product, CurvTensor, SymForm};
use crate::error::{Error, Result};
use crate::gap::{Tw1Coefficients, UniversalConstants};
use crate::rng::{stream, Domain};
use crate::sphere::vol_sphere;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Factor {
    Sphere { dim: usize, radius: f64 },
    Flat { dim: usize, volume: f64 },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Sphere { dim, .. } | Factor::Flat { dim, .. } => dim,
        }
    }

    /// Constant sectional curvature of the factor; a circle is flat.
    pub fn curvature(&self) -> f64 {
        match *self {
            Factor::Sphere { dim, radius } if dim >= 2 => 1.0 / (radius * radius),
            _ => 0.0,
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Factor::Sphere { dim, radius } => vol_sphere(dim) * radius.powi(dim as i32),
            Factor::Flat { volume, .. } => volume,
        }
    }

    /// Poincaré polynomial coefficients: `1 + t^d` for spheres, `(1 + t)^d` for tori.
    fn poincare(&self) -> Vec<usize> {
        match *self {
            Factor::Sphere { dim, .. } => {
                let mut p = vec![0; dim + 1];
                p[0] += 1;
                p[dim] += 1;
                p
            }
            Factor::Flat { dim, .. } => {
                let mut p = vec![1usize];
                for _ in 0..dim {
                    p = poly_mul(&p, &[1, 1]);
                }
                p
            }
        }
    }

    /// The same factor under the metric rescaling `g ↦ c²g`.
    fn rescaled(&self, c: f64) -> Self {
        match *self {
            Factor::Sphere { dim, radius } => Factor::Sphere { dim, radius: radius * c },
            Factor::Flat { dim, volume } => Factor::Flat { dim, volume: volume * c.powi(dim as i32) },
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Sphere { dim, radius } => write!(f, "S{dim}(r={radius})"),
            Factor::Flat { dim, volume } => write!(f, "T{dim}(vol={volume})"),
        }
    }
}

fn poly_mul(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// A product manifold such as `S1(1)xS1(1)xS2(r=10)` or `T2(vol=5)xS2(r=3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub factors: Vec<Factor>,
}

impl ModelSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        for fct in &factors {
            match *fct {
                Factor::Sphere { dim, radius } if dim == 0 || !(radius > 0.0) || !radius.is_finite() => {
                    return Err(Error::InvalidInput(format!("invalid sphere factor {fct}")))
                }
                Factor::Flat { dim, volume } if dim == 0 || !(volume > 0.0) || !volume.is_finite() => {
                    return Err(Error::InvalidInput(format!("invalid flat factor {fct}")))
                }
                _ => {}
            }
        }
        let spec = Self { factors };
        if spec.dim() < 2 {
            return Err(Error::DimensionTooSmall { n: spec.dim(), min: 2 });
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).sum()
    }

    pub fn rescaled(&self, c: f64) -> Self {
        Self { factors: self.factors.iter().map(|f| f.rescaled(c)).collect() }
    }

    /// Replaces the radius of sphere factor `index`.
    pub fn with_radius(&self, index: usize, radius: f64) -> Result<Self> {
        let mut factors = self.factors.clone();
        match factors.get_mut(index) {
            Some(Factor::Sphere { radius: r, .. }) => *r = radius,
            _ => return Err(Error::InvalidInput(format!("factor {index} is not a sphere"))),
        }
        Self::new(factors)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("x"))
    }
}

fn parse_factor(text: &str) -> Result<Factor> {
    let err = || Error::Parse(format!("bad factor `{text}`"));
    let text = text.trim();
    let (head, args) = match text.find('(') {
        Some(i) => {
            let inner = text[i + 1..].strip_suffix(')').ok_or_else(err)?;
            (&text[..i], Some(inner.trim()))
        }
        None => (text, None),
    };
    let mut chars = head.chars();
    let kind = chars.next().ok_or_else(err)?;
    let dim: usize = chars.as_str().parse().map_err(|_| err())?;
    let value = |key: &str, default: f64| -> Result<f64> {
        match args {
            None | Some("") => Ok(default),
            Some(a) => {
                let v = match a.split_once('=') {
                    Some((k, v)) if k.trim() == key => v,
                    Some(_) => return Err(err()),
                    None => a,
                };
                v.trim().parse().map_err(|_| err())
            }
        }
    };
    match kind {
        'S' | 's' => Ok(Factor::Sphere { dim, radius: value("r", 1.0)? }),
        'T' | 't' => Ok(Factor::Flat { dim, volume: value("vol", 1.0)? }),
        _ => Err(err()),
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// Factors separated by `x`; `S<d>(<r>)`, `S<d>(r=<r>)` for round spheres
    /// (radius 1 when omitted) and `T<d>(vol=<V>)` for flat tori.
    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split(['x', '×'])
            .filter(|p| !p.trim().is_empty())
            .map(parse_factor)
            .collect::<Result<Vec<_>>>()?;
        if factors.is_empty() {
            return Err(Error::Parse("empty model spec".into()));
        }
        Self::new(factors)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelGeometry {
    pub spec: ModelSpec,
    pub n: usize,
    pub block_curvatures: Vec<f64>,
    /// Curvature tensor in the product orthonormal frame, shared by every point.
    pub curvature: CurvTensor,
    pub weyl_norm_sq: f64,
    pub total_volume: f64,
    pub betti: Vec<usize>,
}

/// Block projector `g_f` onto coordinates `offset..offset + dim`.
fn block_metric(n: usize, offset: usize, dim: usize) -> SymForm {
    SymForm::diag(&(0..n).map(|i| if (offset..offset + dim).contains(&i) { 1.0 } else { 0.0 }).collect::<Vec<_>>())
}

pub fn build_model(spec: &ModelSpec) -> Result<ModelGeometry> {
    let n = spec.dim();
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    let mut curvature = CurvTensor::zeros(n);
    let mut offset = 0;
    let mut betti = vec![1usize];
    for fct in &spec.factors {
        let k = fct.curvature();
        if k != 0.0 {
            let gf = block_metric(n, offset, fct.dim());
            curvature = curvature.add_scaled(0.5 * k, &kn_product(&gf, &gf)?)?;
        }
        betti = poly_mul(&betti, &fct.poincare());
        offset += fct.dim();
    }
    let weyl_norm_sq = decompose(&curvature)?.weyl.norm_sq();
    Ok(ModelGeometry {
        spec: spec.clone(),
        n,
        block_curvatures: spec.factors.iter().map(Factor::curvature).collect(),
        curvature,
        weyl_norm_sq,
        total_volume: spec.factors.iter().map(Factor::volume).product(),
        betti,
    })
}

/// `∫‖W‖^{n/2} dV = ‖W‖^{n/2}·Vol` for a homogeneous model.
pub fn weyl_energy(geom: &ModelGeometry) -> f64 {
    homogeneous_energy(geom.weyl_norm_sq, geom.n, geom.total_volume)
}

fn homogeneous_energy(norm_sq: f64, n: usize, volume: f64) -> f64 {
    norm_sq.powf(n as f64 / 4.0) * volume
}

/// `Σ_{i=lo}^{hi} βᵢ`.
pub fn betti_middle_sum(geom: &ModelGeometry, lo: usize, hi: usize) -> usize {
    geom.betti.iter().enumerate().filter(|(i, _)| (lo..=hi).contains(i)).map(|(_, b)| *b).sum()
}

/// `Σ_{i=2}^{n−2} βᵢ`.
pub fn betti_default_middle_sum(geom: &ModelGeometry) -> usize {
    if geom.n < 4 {
        return 0;
    }
    betti_middle_sum(geom, 2, geom.n - 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Theorem {
    /// Weyl energy against `c(n)`.
    Main,
    /// `∫‖Ric − (n−1)g‖^{n/2}` against `c₁(n)`, for minimal hypersurfaces of the unit sphere.
    Mhs,
    /// `∫‖R − scal/(n(n−1))·R₁‖^{n/2}` against `c(n)`.
    Th3,
}

impl FromStr for Theorem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "main" => Ok(Theorem::Main),
            "mhs" => Ok(Theorem::Mhs),
            "th3" => Ok(Theorem::Th3),
            _ => Err(Error::Parse(format!("unknown theorem `{s}` (main|mhs|th3)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ViolatesW1,
    SatisfiesW1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsUsed {
    pub epsilon_hat: f64,
    /// `c(n)` or `c₁(n)` depending on the theorem.
    pub constant: f64,
    pub constant_name: String,
    /// Set when the constant depends on the disputed identity coefficients.
    pub coefficient_discrepancy_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub theorem: Theorem,
    pub lhs_energy: f64,
    pub rhs: f64,
    pub betti_middle_sum: usize,
    pub verdict: Verdict,
    /// `lhs − rhs`.
    pub margin: f64,
    pub constants_used: ConstantsUsed,
}

/// Energy of the quantity compared by `theorem`.
pub fn theorem_energy(geom: &ModelGeometry, theorem: Theorem) -> Result<f64> {
    let n = geom.n;
    let nf = n as f64;
    let norm_sq = match theorem {
        Theorem::Main => geom.weyl_norm_sq,
        Theorem::Mhs => {
            let ric = geom.curvature.ricci();
            ric.add_scaled(-(nf - 1.0), &SymForm::identity(n))?.norm_sq()
        }
        Theorem::Th3 => {
            let d = decompose(&geom.curvature)?;
            let g = SymForm::identity(n);
            let r1 = kn_product(&g, &g)?.scaled(0.5);
            geom.curvature.add_scaled(-d.scal / (nf * (nf - 1.0)), &r1)?.norm_sq()
        }
    };
    Ok(homogeneous_energy(norm_sq, n, geom.total_volume))
}

/// Evaluates the Betti-number obstruction. `VIOLATES_W1` means the model
/// cannot be conformally immersed as a hypersurface of `ℝ^{n+1}` (for `MAIN`;
/// likewise for the sphere and hyperbolic space).
pub fn obstruction_report(
    geom: &ModelGeometry,
    constants: &UniversalConstants,
    theorem: Theorem,
) -> Result<ObstructionReport> {
    if geom.n < 4 {
        return Err(Error::DimensionTooSmall { n: geom.n, min: 4 });
    }
    if constants.n != geom.n {
        return Err(Error::DimensionMismatch { expected: geom.n, found: constants.n });
    }
    let lhs = theorem_energy(geom, theorem)?;
    let (constant, name, flag) = match theorem {
        Theorem::Main | Theorem::Th3 => (constants.c_n, "c_n", false),
        Theorem::Mhs => (constants.c1_n, "c1_n", constants.coefficients_disagree),
    };
    let sum = betti_default_middle_sum(geom);
    let rhs = constant * sum as f64;
    Ok(ObstructionReport {
        theorem,
        lhs_energy: lhs,
        rhs,
        betti_middle_sum: sum,
        verdict: if lhs < rhs { Verdict::ViolatesW1 } else { Verdict::SatisfiesW1 },
        margin: lhs - rhs,
        constants_used: ConstantsUsed {
            epsilon_hat: constants.epsilon_hat,
            constant,
            constant_name: name.into(),
            coefficient_discrepancy_flag: flag,
        },
    })
}

/// Radius of sphere factor `index` at which the Weyl energy equals
/// `c·Σβᵢ`. All other factors must be flat so that
/// `energy(r) = energy(1)·r^{d−n}`.
pub fn threshold_radius(spec: &ModelSpec, index: usize, c_n: f64) -> Result<f64> {
    let d = match spec.factors.get(index) {
        Some(Factor::Sphere { dim, .. }) => *dim,
        _ => return Err(Error::InvalidInput(format!("factor {index} is not a sphere"))),
    };
    if spec.factors.iter().enumerate().any(|(i, f)| i != index && f.curvature() != 0.0) {
        return Err(Error::InvalidInput("threshold radius needs all other factors flat".into()));
    }
    let unit = build_model(&spec.with_radius(index, 1.0)?)?;
    let n = unit.n;
    let rhs = c_n * betti_default_middle_sum(&unit) as f64;
    if rhs <= 0.0 || n == d {
        return Err(Error::InvalidInput("no finite threshold for this model".into()));
    }
    Ok((weyl_energy(&unit) / rhs).powf(1.0 / (n - d) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalCheck {
    pub energy_before: f64,
    pub energy_after: f64,
    pub holds: bool,
}

/// Rescales the metric by the constant `c²`: orthonormal-frame curvature
/// entries scale by `c⁻²`, the volume by `cⁿ`; the Weyl energy must not move.
pub fn conformal_scale_check(geom: &ModelGeometry, c: f64) -> Result<ConformalCheck> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput("conformal factor must be positive".into()));
    }
    let before = weyl_energy(geom);
    let scaled = geom.curvature.scaled(c.powi(-2));
    let w = decompose(&scaled)?.weyl.norm_sq();
    let after = homogeneous_energy(w, geom.n, geom.total_volume * c.powi(geom.n as i32));
    // Roundoff in W is measured against the whole curvature tensor.
    let floor = homogeneous_energy(geom.curvature.norm_sq(), geom.n, geom.total_volume);
    let holds = (after - before).abs() <= 1e-10 * before.max(floor).max(f64::MIN_POSITIVE);
    Ok(ConformalCheck { energy_before: before, energy_after: after, holds })
}

// ---------------------------------------------------------------------------
// Minimal hypersurfaces of the unit sphere
// ---------------------------------------------------------------------------

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn require_trace_free(lambda: &[f64]) -> Result<()> {
    let trace: f64 = lambda.iter().sum();
    let scale: f64 = lambda.iter().map(|v| v.abs()).sum();
    if trace.abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) && trace != 0.0 {
        return Err(Error::NotTraceFree { trace: trace.abs() });
    }
    if lambda.len() < 4 {
        return Err(Error::DimensionTooSmall { n: lambda.len(), min: 4 });
    }
    Ok(())
}

/// `4 Σ_{i<j} (λᵢλⱼ + (λᵢ²+λⱼ²)/(n−2) − ‖A‖²/((n−1)(n−2)))²`.
pub fn minimal_weyl_formula(lambda: &[f64]) -> f64 {
    let n = lambda.len() as f64;
    let a2 = norm_sq(lambda);
    let mut acc = 0.0;
    for i in 0..lambda.len() {
        for j in (i + 1)..lambda.len() {
            let t = lambda[i] * lambda[j] + (lambda[i].powi(2) + lambda[j].powi(2)) / (n - 2.0)
                - a2 / ((n - 1.0) * (n - 2.0));
            acc += t * t;
        }
    }
    4.0 * acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalIdentity {
    pub w_from_formula: f64,
    pub w_from_pipeline: f64,
    pub printed_rhs: f64,
    pub fitted_rhs: f64,
    /// `‖A‖²`.
    pub norm_a_sq: f64,
    /// `‖Ric − (n−1)g‖² = ‖A²‖²`.
    pub ric_deviation_sq: f64,
}

/// Evaluates `‖W‖²` of a minimal hypersurface of the unit sphere with
/// principal curvatures `lambda` two ways (per-pair formula and the full
/// Gauss-equation tensor pipeline) and compares both identity variants.
pub fn minimal_identity_check_with(lambda: &[f64], fitted: &Tw1Coefficients) -> Result<MinimalIdentity> {
    require_trace_free(lambda)?;
    let n = lambda.len();
    let beta = SymForm::diag(lambda);
    let d = decompose(&curvature_of_form(&beta, 1.0))?;
    let ric_dev = d.ricci.add_scaled(-(n as f64 - 1.0), &SymForm::identity(n))?;
    let a_sq = beta.squared();
    debug_assert!(ric_dev.add_scaled(1.0, &a_sq).map(|f| f.max_abs()).unwrap_or(0.0) < 1e-9 * (1.0 + a_sq.max_abs()));
    let norm_a_sq = norm_sq(lambda);
    let ric_deviation_sq = a_sq.norm_sq();
    let printed = Tw1Coefficients::printed(n);
    Ok(MinimalIdentity {
        w_from_formula: minimal_weyl_formula(lambda),
        w_from_pipeline: d.weyl.norm_sq(),
        printed_rhs: printed.gamma * norm_a_sq * norm_a_sq - printed.delta * ric_deviation_sq,
        fitted_rhs: fitted.gamma * norm_a_sq * norm_a_sq - fitted.delta * ric_deviation_sq,
        norm_a_sq,
        ric_deviation_sq,
    })
}

pub fn minimal_identity_check(lambda: &[f64]) -> Result<MinimalIdentity> {
    let fit = fit_tw1_coefficients(lambda.len(), CHECK_FIT_SAMPLES, CHECK_FIT_SEED)?;
    minimal_identity_check_with(lambda, &fit.coefficients)
}

const CHECK_FIT_SAMPLES: usize = 256;
const CHECK_FIT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tw1Fit {
    pub n: usize,
    pub coefficients: Tw1Coefficients,
    pub samples: usize,
    /// Max relative residual `|fit − formula|/max(1, formula)` on the fitting set.
    pub fit_residual: f64,
    /// Same on an independent held-out set of equal size.
    pub holdout_residual: f64,
}

/// Random trace-free spectrum with `‖λ‖` uniform in `[0.5, 2]`.
pub fn random_trace_free<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = norm_sq(&x).sqrt();
        if norm > 1e-6 {
            let scale = rng.random_range(0.5..2.0) / norm;
            return x.into_iter().map(|v| v * scale).collect();
        }
    }
}

fn tw1_features(lambda: &[f64]) -> (f64, f64) {
    let a2 = norm_sq(lambda);
    let a4: f64 = lambda.iter().map(|v| v.powi(4)).sum();
    (a2 * a2, -a4)
}

/// Least-squares fit of `(γ, δ)` in `‖W‖² = γ‖A‖⁴ − δ‖A²‖²` against the
/// per-pair formula over random trace-free spectra.
pub fn fit_tw1_coefficients(n: usize, samples: usize, seed: u64) -> Result<Tw1Fit> {
    if n < 4 {
        return Err(Error::DimensionTooSmall { n, min: 4 });
    }
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two fit samples".into()));
    }
    let mut rng = stream(seed, Domain::Sweep, n as u64);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..samples).map(|_| random_trace_free(rng, n)).collect()
    };
    let fit_set = draw(&mut rng);
    let holdout = draw(&mut rng);

    let design = DMatrix::from_fn(samples, 2, |r, c| {
        let (f0, f1) = tw1_features(&fit_set[r]);
        if c == 0 { f0 } else { f1 }
    });
    let target = DVector::from_iterator(samples, fit_set.iter().map(|l| minimal_weyl_formula(l)));
    let sol = design
        .svd(true, true)
        .solve(&target, 1e-14)
        .map_err(|e| Error::InvalidInput(format!("least squares failed: {e}")))?;
    let coefficients = Tw1Coefficients::new(n, sol[0], sol[1]);
    let residual = |set: &[Vec<f64>]| {
        set.iter()
            .map(|l| {
                let (f0, f1) = tw1_features(l);
                let want = minimal_weyl_formula(l);
                (coefficients.gamma * f0 + coefficients.delta * f1 - want).abs() / want.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    };
    Ok(Tw1Fit {
        n,
        coefficients,
        samples,
        fit_residual: residual(&fit_set),
        holdout_residual: residual(&holdout),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InRicCheck {
    /// `‖A‖⁴`.
    pub norm_a_4: f64,
    /// `n‖A²‖²`.
    pub n_ric_deviation_sq: f64,
    pub weyl_sq: f64,
    /// `a·‖Ric − (n−1)g‖²` with the fitted `a = nγ − δ`.
    pub a_ric_deviation_sq: f64,
    pub cauchy_schwarz_holds: bool,
    pub inric_holds: bool,
    pub holds: bool,
}

/// `‖A‖⁴ ≤ n‖A²‖²` and `‖W‖² ≤ a·‖Ric − (n−1)g‖²`, each with `1e-9` slack.
pub fn inric_chain_check(lambda: &[f64], fitted: &Tw1Coefficients) -> Result<InRicCheck> {
    require_trace_free(lambda)?;
    let n = lambda.len() as f64;
    let a2 = norm_sq(lambda);
    let a4: f64 = lambda.iter().map(|v| v.powi(4)).sum();
    let w = minimal_weyl_formula(lambda);
    let slack = |x: f64| 1e-9 * (1.0 + x.abs());
    let cs = a2 * a2 <= n * a4 + slack(n * a4);
    let inric = w <= fitted.a * a4 + slack(fitted.a * a4);
    Ok(InRicCheck {
        norm_a_4: a2 * a2,
        n_ric_deviation_sq: n * a4,
        weyl_sq: w,
        a_ric_deviation_sq: fitted.a * a4,
        cauchy_schwarz_holds: cs,
        inric_holds: inric,
        holds: cs && inric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Th3Check {
    pub lhs: f64,
    pub weyl_norm: f64,
    pub holds: bool,
}

/// `‖T − scal/(n(n−1))·½g⊼g‖ ≥ ‖W(T)‖`.
pub fn th3_bound_check(t: &CurvTensor) -> Result<Th3Check> {
    let d = decompose(t)?;
    let n = t.dim() as f64;
    let g = SymForm::identity(t.dim());
    let r1 = kn_product(&g, &g)?.scaled(0.5);
    let lhs = t.add_scaled(-d.scal / (n * (n - 1.0)), &r1)?.norm();
    let weyl_norm = d.weyl.norm();
    Ok(Th3Check { lhs, weyl_norm, holds: lhs + 1e-12 * (1.0 + lhs) >= weyl_norm })
}

/// Random symmetric form with standard normal entries, scaled by `scale`.
pub fn random_form<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> SymForm {
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.sample(StandardNormal);
            m[(i, j)] = scale * v;
            m[(j, i)] = scale * v;
        }
    }
    SymForm::from_matrix(&m).expect("symmetric by construction")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySweep {
    pub n: usize,
    pub samples: usize,
    pub printed: Tw1Coefficients,
    pub fitted: Tw1Coefficients,
    pub fit_residual: f64,
    pub holdout_residual: f64,
    pub coefficients_disagree: bool,
    /// Max relative gap between the per-pair formula and the tensor pipeline.
    pub formula_vs_pipeline: f64,
    /// Max relative gap between the per-pair formula and the printed identity.
    pub formula_vs_printed: f64,
    pub inric_violations: usize,
    pub th3_violations: usize,
}

/// Runs the minimal-hypersurface identity, the Ricci chain and the
/// curvature-norm bound over `samples` random instances each.
pub fn identity_sweep(n: usize, samples: usize, seed: u64) -> Result<IdentitySweep> {
    let fit = fit_tw1_coefficients(n, CHECK_FIT_SAMPLES, CHECK_FIT_SEED)?;
    let printed = Tw1Coefficients::printed(n);
    let coefficients = fit.coefficients;
    const CHUNK: usize = 1024;
    let chunks = samples.div_ceil(CHUNK);
    let parts = crate::par::map_indexed(chunks, |c| -> Result<(f64, f64, usize, usize)> {
        let mut rng = stream(seed, Domain::Sweep, ((n as u64) << 32) | (c as u64 + 1));
        let (mut fp, mut fpr, mut inric, mut th3) = (0.0f64, 0.0f64, 0, 0);
        for _ in 0..CHUNK.min(samples - c * CHUNK) {
            let lambda = random_trace_free(&mut rng, n);
            let m = minimal_identity_check_with(&lambda, &coefficients)?;
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            fp = fp.max(rel(m.w_from_formula, m.w_from_pipeline));
            fpr = fpr.max(rel(m.w_from_formula, m.printed_rhs));
            inric += usize::from(!inric_chain_check(&lambda, &coefficients)?.holds);
            let beta = random_form(&mut rng, n, 1.0);
            let c: f64 = rng.random_range(-1.0..1.0);
            th3 += usize::from(!th3_bound_check(&curvature_of_form(&beta, c))?.holds);
        }
        Ok((fp, fpr, inric, th3))
    });
    let mut out = IdentitySweep {
        n,
        samples,
        printed,
        fitted: coefficients,
        fit_residual: fit.fit_residual,
        holdout_residual: fit.holdout_residual,
        coefficients_disagree: (printed.gamma - coefficients.gamma).abs() > 1e-6 * printed.gamma
            || (printed.delta - coefficients.delta).abs() > 1e-6 * printed.delta,
        formula_vs_pipeline: 0.0,
        formula_vs_printed: 0.0,
        inric_violations: 0,
        th3_violations: 0,
    };
    for part in parts {
        let (fp, fpr, inric, th3) = part?;
        out.formula_vs_pipeline = out.formula_vs_pipeline.max(fp);
        out.formula_vs_printed = out.formula_vs_printed.max(fpr);
        out.inric_violations += inric;
        out.th3_violations += th3;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let s: ModelSpec = "S1(1)xS1(1)xS2(r=10)".parse().unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.factors[2], Factor::Sphere { dim: 2, radius: 10.0 });
        let t: ModelSpec = "T2(vol=5)xS2(r=3)".parse().unwrap();
        assert_eq!(t.factors[0], Factor::Flat { dim: 2, volume: 5.0 });
        assert_eq!("S4".parse::<ModelSpec>().unwrap().factors[0], Factor::Sphere { dim: 4, radius: 1.0 });
        assert_eq!(s.to_string().parse::<ModelSpec>().unwrap(), s);
        for bad in ["", "Q2(1)", "S2(r=-1)", "S(1)", "S2(vol=3)", "S1", "T2(vol=0)"] {
            assert!(bad.parse::<ModelSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn betti_numbers() {
        let g = build_model(&"S1(1)xS1(1)xS2(r=2)".parse().unwrap()).unwrap();
        assert_eq!(g.betti, vec![1, 2, 2, 2, 1]);
        assert_eq!(betti_default_middle_sum(&g), 2);
        let g = build_model(&"S4(1)".parse().unwrap()).unwrap();
        assert_eq!(g.betti, vec![1, 0, 0, 0, 1]);
        assert_eq!(betti_default_middle_sum(&g), 0);
        let g = build_model(&"T2(vol=3)xS2(2)".parse().unwrap()).unwrap();
        assert_eq!(betti_default_middle_sum(&g), 2);
    }

    #[test]
    fn space_forms_are_conformally_flat() {
        let g = build_model(&"S4(r=3)".parse().unwrap()).unwrap();
        assert!(g.weyl_norm_sq < 1e-24);
        assert_eq!(weyl_energy(&g), g.weyl_norm_sq.powf(1.0) * g.total_volume);
        let t = build_model(&"T4(vol=2)".parse().unwrap()).unwrap();
        assert_eq!(t.curvature.max_abs(), 0.0);
        assert_eq!(weyl_energy(&t), 0.0);
    }

    #[test]
    fn identity_examples() {
        let fit = fit_tw1_coefficients(4, 128, 1).unwrap().coefficients;
        let m = minimal_identity_check_with(&[1.0, 1.0, -1.0, -1.0], &fit).unwrap();
        assert!((m.w_from_formula - 64.0 / 3.0).abs() < 1e-12);
        assert!((m.w_from_pipeline - 64.0 / 3.0).abs() < 1e-11);
        assert!((m.printed_rhs - 28.0).abs() < 1e-12);
        assert!((m.norm_a_sq.powi(2) - 16.0).abs() < 1e-12);
        assert!((m.ric_deviation_sq - 4.0).abs() < 1e-12);
        let m = minimal_identity_check_with(&[2.0, -1.0, -1.0, 0.0], &fit).unwrap();
        assert!((m.w_from_formula - 12.0).abs() < 1e-12);
        assert!((m.w_from_pipeline - 12.0).abs() < 1e-11);
        let m = minimal_identity_check_with(&[0.0; 4], &fit).unwrap();
        assert_eq!((m.w_from_formula, m.printed_rhs, m.fitted_rhs), (0.0, 0.0, 0.0));
        assert!(m.w_from_pipeline.abs() < 1e-24);
        assert!(matches!(
            minimal_identity_check_with(&[1.0, 1.0, 1.0, 0.0], &fit),
            Err(Error::NotTraceFree { .. })
        ));
    }

    #[test]
    fn inric_examples() {
        let fit = fit_tw1_coefficients(4, 128, 1).unwrap().coefficients;
        let c = inric_chain_check(&[1.0, 1.0, -1.0, -1.0], &fit).unwrap();
        assert!(c.holds);
        assert!((c.norm_a_4 - 16.0).abs() < 1e-12 && (c.n_ric_deviation_sq - 16.0).abs() < 1e-12);
        let c = inric_chain_check(&[2.0, -1.0, -1.0, 0.0], &fit).unwrap();
        assert!(c.holds);
        assert!((c.norm_a_4 - 36.0).abs() < 1e-12 && (c.n_ric_deviation_sq - 72.0).abs() < 1e-12);
    }

    #[test]
    fn th3_examples() {
        let g = SymForm::identity(4);
        let round = kn_product(&g, &g).unwrap().scaled(0.5);
        let c = th3_bound_check(&round).unwrap();
        assert!(c.lhs < 1e-13 && c.weyl_norm < 1e-13 && c.holds);
        let t = curvature_of_form(&SymForm::diag(&[1.0, 2.0, 3.0, 4.0]), 1.0);
        let c = th3_bound_check(&t).unwrap();
        assert!(c.holds && c.lhs > c.weyl_norm + 1e-3);
    }

    #[test]
    fn sweep_is_clean_and_flags_the_printed_coefficients() {
        let s = identity_sweep(5, 500, 3).unwrap();
        assert!(s.formula_vs_pipeline < 1e-9);
        assert!(s.holdout_residual < 1e-8);
        assert_eq!((s.inric_violations, s.th3_violations), (0, 0));
        assert!(s.coefficients_disagree && s.formula_vs_printed > 1e-3);
        assert_eq!(s, identity_sweep(5, 500, 3).unwrap());
    }

    #[test]
    fn conformal_examples() {
        for spec in ["S1(1)xS1(1)xS2(r=2)", "T4(vol=3)", "S4(r=2)"] {
            let g = build_model(&spec.parse().unwrap()).unwrap();
            assert!(conformal_scale_check(&g, 3.0).unwrap().holds, "{spec}");
        }
        let g = build_model(&"S4".parse().unwrap()).unwrap();
        assert!(conformal_scale_check(&g, 0.0).is_err());
    }
}
