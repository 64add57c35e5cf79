use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use weylgap::gap::{estimate_epsilon, universal_constants, verify_gap, EpsilonConfig, GapEstimate, VerifyConfig};
use weylgap::models::{
    build_model, identity_sweep, obstruction_report, theorem_energy, threshold_radius, weyl_energy, ModelSpec, Theorem,
};
use weylgap::morse::{
    morse_audit, pointwise_gap_check, sides_agree, tau_direction_side, tau_normal_bundle_side, tau_table_csv,
    weyl_energy_mc, DirectionConfig, HypersurfaceSpec, MorseConfig, SampleConfig,
};
use weylgap::report::{Meta, Report, Violation};

use crate::{
    ConstantsArgs, EpsilonArgs, EpsilonSource, GapcheckArgs, IdentitiesArgs, ModelArgs, MorseArgs, Outcome, SideArg,
    TheoremArg,
};

type CmdResult = Result<Outcome, String>;

fn finish<C: Serialize, R: Serialize>(
    command: &str,
    config: &C,
    result: &R,
    violations: Vec<Violation>,
    csv: Option<String>,
) -> CmdResult {
    let violated = !violations.is_empty();
    let report = Report::new(command, config, result, violations, Meta::new(0.0, 0));
    Ok(Outcome { json: serde_json::to_value(report).map_err(|e| e.to_string())?, csv, violated })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct ResolvedEpsilon {
    epsilon_hat: f64,
    source: String,
    /// Present when the value was estimated by this run.
    estimate: Option<GapEstimate>,
}

fn read_epsilon_file(path: &Path, n: usize) -> Result<f64, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let body = v.get("result").unwrap_or(&v);
    let eps = body
        .get("epsilon_hat")
        .and_then(Value::as_f64)
        .ok_or_else(|| format!("{}: no epsilon_hat field", path.display()))?;
    if let Some(found) = body.get("n").and_then(Value::as_u64) {
        if found as usize != n {
            return Err(format!("{}: estimate is for n = {found}, need n = {n}", path.display()));
        }
    }
    Ok(eps)
}

fn resolve_epsilon(src: &EpsilonSource, n: usize) -> Result<ResolvedEpsilon, String> {
    if let Some(path) = &src.epsilon_file {
        return Ok(ResolvedEpsilon {
            epsilon_hat: read_epsilon_file(path, n)?,
            source: format!("file:{}", path.display()),
            estimate: None,
        });
    }
    if let Some(eps) = src.epsilon_hat {
        return Ok(ResolvedEpsilon { epsilon_hat: eps, source: "flag".into(), estimate: None });
    }
    let est = estimate_epsilon(n, &EpsilonConfig { seed: src.seed, ..EpsilonConfig::default() }).map_err(err)?;
    Ok(ResolvedEpsilon { epsilon_hat: est.epsilon_hat, source: "estimated".into(), estimate: Some(est) })
}

pub fn epsilon(a: &EpsilonArgs) -> CmdResult {
    let cfg = EpsilonConfig {
        starts_per_stratum: a.starts,
        max_iters: a.max_iters,
        grad_tol: a.grad_tol,
        seed: a.seed,
        certificate_samples: a.samples,
        distribution: a.distribution.into(),
    };
    let est = estimate_epsilon(a.n, &cfg).map_err(err)?;
    let mut violations = Vec::new();
    if est.sample_certificate.violations > 0 {
        violations.push(Violation::new(
            "gap_inequality",
            est.sample_certificate.violations,
            "sampled spectra below epsilon_hat",
        ));
    }
    #[derive(Serialize)]
    struct Out<'a> {
        #[serde(flatten)]
        estimate: &'a GapEstimate,
        violations: usize,
    }
    finish("epsilon", a, &Out { estimate: &est, violations: est.sample_certificate.violations }, violations, None)
}

pub fn constants(a: &ConstantsArgs) -> CmdResult {
    let eps = resolve_epsilon(&a.source, a.n)?;
    let c = universal_constants(a.n, eps.epsilon_hat).map_err(err)?;
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        constants: weylgap::gap::UniversalConstants,
        epsilon: ResolvedEpsilon,
    }
    finish("constants", a, &Out { constants: c, epsilon: eps }, vec![], None)
}

pub fn model(a: &ModelArgs) -> CmdResult {
    let spec: ModelSpec = a.spec.parse().map_err(err)?;
    let geom = build_model(&spec).map_err(err)?;
    let n = geom.n;
    let eps = resolve_epsilon(&a.source, n)?;
    let consts = universal_constants(n, eps.epsilon_hat).map_err(err)?;
    let theorems = match a.theorem {
        TheoremArg::Main => vec![Theorem::Main],
        TheoremArg::Mhs => vec![Theorem::Mhs],
        TheoremArg::Th3 => vec![Theorem::Th3],
        TheoremArg::All => vec![Theorem::Main, Theorem::Mhs, Theorem::Th3],
    };
    let reports =
        theorems.iter().map(|t| obstruction_report(&geom, &consts, *t)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let threshold = spec
        .factors
        .iter()
        .enumerate()
        .find_map(|(i, _)| threshold_radius(&spec, i, consts.c_n).ok().map(|r| (i, r)));
    #[derive(Serialize)]
    struct Threshold {
        factor: usize,
        radius: f64,
    }
    #[derive(Serialize)]
    struct Out {
        spec: String,
        n: usize,
        betti: Vec<usize>,
        block_curvatures: Vec<f64>,
        weyl_norm_sq: f64,
        total_volume: f64,
        weyl_energy: f64,
        mhs_energy: f64,
        obstructions: Vec<weylgap::models::ObstructionReport>,
        threshold_radius: Option<Threshold>,
        epsilon: ResolvedEpsilon,
        coefficients_disagree: bool,
    }
    let out = Out {
        spec: spec.to_string(),
        n,
        betti: geom.betti.clone(),
        block_curvatures: geom.block_curvatures.clone(),
        weyl_norm_sq: geom.weyl_norm_sq,
        total_volume: geom.total_volume,
        weyl_energy: weyl_energy(&geom),
        mhs_energy: theorem_energy(&geom, Theorem::Mhs).map_err(err)?,
        obstructions: reports,
        threshold_radius: threshold.map(|(factor, radius)| Threshold { factor, radius }),
        epsilon: eps,
        coefficients_disagree: consts.coefficients_disagree,
    };
    finish("model", a, &out, vec![], None)
}

pub fn morse(a: &MorseArgs) -> CmdResult {
    let spec: HypersurfaceSpec = a.spec.parse().map_err(err)?;
    let betti = spec.betti();
    let morse_cfg = MorseConfig {
        grid_starts: a.grid_starts,
        newton_tol: a.newton_tol,
        dedupe_radius: a.dedupe_radius,
        degeneracy_tol: a.degeneracy_tol,
        ..MorseConfig::default()
    };
    let direction = match a.side {
        SideArg::Both | SideArg::Direction => Some(
            tau_direction_side(
                &spec,
                &DirectionConfig {
                    num_directions: a.directions,
                    seed: a.seed,
                    morse: morse_cfg,
                    max_rejection_rate: a.max_rejection_rate,
                },
            )
            .map_err(err)?,
        ),
        SideArg::Normal => None,
    };
    let normal = match a.side {
        SideArg::Both | SideArg::Normal => Some(
            tau_normal_bundle_side(&spec, &SampleConfig { num_samples: a.samples.unwrap_or(a.directions), seed: a.seed })
                .map_err(err)?,
        ),
        SideArg::Direction => None,
    };
    let audit_direction = direction.as_ref().map(|t| morse_audit(t, &betti)).transpose().map_err(err)?;
    let audit_normal = normal.as_ref().map(|t| morse_audit(t, &betti)).transpose().map_err(err)?;
    let agree = match (&direction, &normal) {
        (Some(d), Some(nb)) => Some(sides_agree(d, nb, 3.0)),
        _ => None,
    };
    let mut violations = Vec::new();
    for (name, audit) in [("morse_inequality_direction", &audit_direction), ("morse_inequality_normal", &audit_normal)] {
        if let Some(au) = audit {
            let bad = au.table.iter().filter(|r| !r.ok).count();
            if bad > 0 {
                violations.push(Violation::new(name, bad, "tau_i < beta_i - 3 stderr"));
            }
        }
    }
    if agree == Some(false) {
        violations.push(Violation::new("two_sided_agreement", 1, "direction and normal-bundle tau differ beyond 3 stderr"));
    }
    let csv = tau_table_csv(direction.as_ref(), normal.as_ref(), &betti);
    #[derive(Serialize)]
    struct Out {
        spec: String,
        n: usize,
        betti: Vec<usize>,
        direction_side: Option<weylgap::morse::TauEstimate>,
        normal_bundle_side: Option<weylgap::morse::TauEstimate>,
        audit_direction: Option<weylgap::morse::MorseAudit>,
        audit_normal: Option<weylgap::morse::MorseAudit>,
        sides_agree: Option<bool>,
    }
    let out = Out {
        spec: spec.to_string(),
        n: spec.n,
        betti,
        direction_side: direction,
        normal_bundle_side: normal,
        audit_direction,
        audit_normal,
        sides_agree: agree,
    };
    finish("morse", a, &out, violations, Some(csv))
}

pub fn gapcheck(a: &GapcheckArgs) -> CmdResult {
    match &a.spec {
        Some(text) => {
            let spec: HypersurfaceSpec = text.parse().map_err(err)?;
            if let Some(n) = a.n {
                if n != spec.n {
                    return Err(format!("--n {n} does not match the hypersurface dimension {}", spec.n));
                }
            }
            let eps = resolve_epsilon(&a.source, spec.n)?;
            let cfg = SampleConfig { num_samples: a.samples, seed: a.source.seed };
            let gap = pointwise_gap_check(&spec, eps.epsilon_hat, &cfg).map_err(err)?;
            let energy = weyl_energy_mc(&spec, &cfg).map_err(err)?;
            let mut violations = Vec::new();
            if gap.violations > 0 {
                violations.push(Violation::new("pointwise_gap", gap.violations, "middle-index normals below the gap bound"));
            }
            if (energy.double_cover_check - 1.0).abs() > 1e-12 {
                violations.push(Violation::new("double_cover", 1, "bundle integral is not twice the base integral"));
            }
            #[derive(Serialize)]
            struct Out {
                spec: String,
                pointwise: weylgap::morse::PointwiseGapReport,
                weyl_energy: weylgap::morse::WeylEnergyEstimate,
                epsilon: ResolvedEpsilon,
            }
            finish("gapcheck", a, &Out { spec: spec.to_string(), pointwise: gap, weyl_energy: energy, epsilon: eps }, violations, None)
        }
        None => {
            let n = a.n.ok_or("gapcheck needs --n or --spec")?;
            let eps = resolve_epsilon(&a.source, n)?;
            let v = verify_gap(
                n,
                eps.epsilon_hat,
                &VerifyConfig { samples: a.samples, seed: a.source.seed, distribution: a.distribution.into() },
            )
            .map_err(err)?;
            let violations = if v.violations > 0 {
                vec![Violation::new("gap_inequality", v.violations, "sampled spectra below epsilon_hat")]
            } else {
                vec![]
            };
            #[derive(Serialize)]
            struct Out {
                n: usize,
                verification: weylgap::gap::GapVerification,
                epsilon: ResolvedEpsilon,
            }
            finish("gapcheck", a, &Out { n, verification: v, epsilon: eps }, violations, None)
        }
    }
}

pub fn identities(a: &IdentitiesArgs) -> CmdResult {
    let sweeps = a.dims.iter().map(|&n| identity_sweep(n, a.samples, a.seed)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let mut violations = Vec::new();
    for s in &sweeps {
        let mut push = |prop: &str, count: usize, detail: String| violations.push(Violation::new(prop, count, detail));
        if s.formula_vs_pipeline > 1e-9 {
            push("formula_vs_pipeline", 1, format!("n={}: max relative gap {:e}", s.n, s.formula_vs_pipeline));
        }
        if s.holdout_residual > 1e-8 {
            push("identity_fit", 1, format!("n={}: held-out residual {:e}", s.n, s.holdout_residual));
        }
        if s.inric_violations > 0 {
            push("ricci_chain", s.inric_violations, format!("n={}", s.n));
        }
        if s.th3_violations > 0 {
            push("curvature_norm_bound", s.th3_violations, format!("n={}", s.n));
        }
    }
    let mut csv = String::from(
        "n,samples,gamma_printed,delta_printed,gamma_fitted,delta_fitted,holdout_residual,formula_vs_pipeline,formula_vs_printed,coefficients_disagree,inric_violations,th3_violations\n",
    );
    for s in &sweeps {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.n,
            s.samples,
            s.printed.gamma,
            s.printed.delta,
            s.fitted.gamma,
            s.fitted.delta,
            s.holdout_residual,
            s.formula_vs_pipeline,
            s.formula_vs_printed,
            s.coefficients_disagree,
            s.inric_violations,
            s.th3_violations
        );
    }
    finish("identities", a, &sweeps, violations, Some(csv))
}
