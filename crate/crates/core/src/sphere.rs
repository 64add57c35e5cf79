//! Round-sphere helpers.

use rand::Rng;
use rand_distr::StandardNormal;

/// Volume of the unit sphere `Sⁿ ⊂ ℝⁿ⁺¹`, `2π^{(n+1)/2} / Γ((n+1)/2)`,
/// evaluated by the exact two-step recursion `|Sⁿ| = 2π/(n−1)·|Sⁿ⁻²|`.
pub fn vol_sphere(n: usize) -> f64 {
    use std::f64::consts::PI;
    let mut v = if n % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut d = if n % 2 == 0 { 0 } else { 1 };
    while d < n {
        d += 2;
        v *= 2.0 * PI / (d as f64 - 1.0);
    }
    v
}

/// Uniform point on `S^{dim-1} ⊂ ℝ^dim`.
pub fn uniform_on_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn known_volumes() {
        assert!((vol_sphere(0) - 2.0).abs() < 1e-15);
        assert!((vol_sphere(1) - 2.0 * PI).abs() < 1e-14);
        assert!((vol_sphere(2) - 4.0 * PI).abs() < 1e-13);
        assert!((vol_sphere(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((vol_sphere(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }
}
