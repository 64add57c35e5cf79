//! Closed hypersurfaces of `ℝ^{n+1}` and their total curvature by index.
//!
//! Three families are supported, each with closed-form chart derivatives:
//! ellipsoids, tubes around a planar circle and radial graphs over the unit
//! sphere. `τᵢ` is estimated two ways: by averaging Morse counts of height
//! functions over random directions, and by integrating `|det A_ξ|` over the
//! unit normal bundle split by the index of `A_ξ`.

mod critical;
mod mc;
mod spec;
mod surface;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use critical::{
    critical_points, height_gradient_fd, height_hessian, height_hessian_fd, index_counts, tau_direction_side,
    CriticalPoint, DirectionConfig, MorseConfig, MorseSolver,
};
pub use mc::{pointwise_gap_check, tau_normal_bundle_side, weyl_energy_mc, PointwiseGapReport, SampleConfig, WeylEnergyEstimate};
pub use spec::{Family, HypersurfaceSpec, Polynomial};
pub use surface::{geometry_at, Chart, ChartPoint, Jet, SurfacePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    DirectionSide,
    NormalBundleSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauEstimate {
    pub tau: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
    pub side: Side,
    /// Directions redrawn because the height function was degenerate or the
    /// critical set failed the Euler check.
    pub rejected: usize,
    /// Sample points dropped as irregular.
    pub skipped: usize,
}

impl TauEstimate {
    pub(crate) fn from_moments(
        sum: &[f64],
        sum_sq: &[f64],
        factor: f64,
        samples: usize,
        side: Side,
        rejected: usize,
    ) -> Self {
        let nf = samples as f64;
        let (tau, stderr) = sum
            .iter()
            .zip(sum_sq)
            .map(|(s, q)| {
                let mean = s / nf;
                let var = ((q / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
                (factor * mean, factor * (var / nf).sqrt())
            })
            .unzip();
        Self { tau, stderr, samples, side, rejected, skipped: 0 }
    }

    pub fn total(&self) -> f64 {
        self.tau.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub index: usize,
    pub tau: f64,
    pub stderr: f64,
    pub betti: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseAudit {
    pub ok: bool,
    pub table: Vec<AuditRow>,
}

/// Weak Morse inequalities `τᵢ ≥ βᵢ − 3σᵢ`.
pub fn morse_audit(tau: &TauEstimate, betti: &[usize]) -> crate::Result<MorseAudit> {
    if betti.len() != tau.tau.len() {
        return Err(crate::Error::DimensionMismatch { expected: tau.tau.len(), found: betti.len() });
    }
    let table: Vec<AuditRow> = (0..betti.len())
        .map(|i| AuditRow {
            index: i,
            tau: tau.tau[i],
            stderr: tau.stderr[i],
            betti: betti[i],
            ok: tau.tau[i] >= betti[i] as f64 - 3.0 * tau.stderr[i],
        })
        .collect();
    Ok(MorseAudit { ok: table.iter().all(|r| r.ok), table })
}

/// `|τ_dir − τ_nb| ≤ k·√(σ_dir² + σ_nb²)` for every bin.
pub fn sides_agree(a: &TauEstimate, b: &TauEstimate, k: f64) -> bool {
    a.tau.len() == b.tau.len()
        && (0..a.tau.len()).all(|i| {
            let sigma = (a.stderr[i].powi(2) + b.stderr[i].powi(2)).sqrt();
            (a.tau[i] - b.tau[i]).abs() <= k * sigma || (a.tau[i] - b.tau[i]).abs() <= 1e-12
        })
}

/// One row per index bin.
pub fn tau_table_csv(direction: Option<&TauEstimate>, normal: Option<&TauEstimate>, betti: &[usize]) -> String {
    let mut out = String::from("index,tau_direction,stderr_direction,tau_normal_bundle,stderr_normal_bundle,betti\n");
    let cell = |t: Option<&TauEstimate>, i: usize| match t {
        Some(t) => format!("{},{}", t.tau[i], t.stderr[i]),
        None => ",".into(),
    };
    for (i, b) in betti.iter().enumerate() {
        let _ = writeln!(out, "{i},{},{},{b}", cell(direction, i), cell(normal, i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_and_csv() {
        let t = TauEstimate {
            tau: vec![1.0, 1.9, 1.0],
            stderr: vec![0.0, 0.05, 0.0],
            samples: 10,
            side: Side::NormalBundleSide,
            rejected: 0,
            skipped: 0,
        };
        let a = morse_audit(&t, &[1, 2, 1]).unwrap();
        assert!(a.ok);
        assert!(!morse_audit(&t, &[1, 3, 1]).unwrap().ok);
        assert!(morse_audit(&t, &[1, 2]).is_err());
        let csv = tau_table_csv(None, Some(&t), &[1, 2, 1]);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(2).unwrap().starts_with("1,,,1.9,0.05,2"));
    }
}
