#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use weylgap::algebra::{kn_product, CurvTensor, SymForm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Haar-ish orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = m.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn random_form<R: Rng>(rng: &mut R, n: usize) -> SymForm {
    let m = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    SymForm::from_matrix(&(0.5 * (&m + m.transpose()))).unwrap()
}

pub fn form_with_spectrum<R: Rng>(rng: &mut R, values: &[f64]) -> SymForm {
    let q = random_orthogonal(rng, values.len());
    SymForm::with_spectrum(values, &q).unwrap()
}

/// Random algebraic curvature tensor as a sum of Kulkarni–Nomizu products.
pub fn random_curvature<R: Rng>(rng: &mut R, n: usize) -> CurvTensor {
    let mut t = CurvTensor::zeros(n);
    for _ in 0..3 {
        let (a, b) = (random_form(rng, n), random_form(rng, n));
        t = t.add(&kn_product(&a, &b).unwrap()).unwrap();
    }
    t
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
