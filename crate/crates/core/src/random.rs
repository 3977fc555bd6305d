//! Seedable random matrices, states, channels and ensembles.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::{Ensemble, KrausChannel};
use crate::matcore::{c, polar_factor, re, CMatrix, CVector, DensityMatrix, PureStateVector};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        c(a, b) * re(std::f64::consts::FRAC_1_SQRT_2)
    })
}

/// Haar-distributed isometry `C^cols -> C^rows` (`rows >= cols`).
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    polar_factor(&ginibre(rng, rows, cols), None).expect("svd of a Gaussian matrix")
}

pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    isometry(rng, dim, dim)
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureStateVector {
    let g = ginibre(rng, dim, 1);
    PureStateVector::normalized(CVector::from_column_slice(g.as_slice())).expect("nonzero Gaussian vector")
}

/// Induced-measure density matrix of rank at most `rank`.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, rank.max(1));
    DensityMatrix::from_positive(&(&g * g.adjoint())).expect("Wishart matrix is positive")
}

/// Channel from a Haar isometry `C^d_in -> C^d_out ⊗ C^kraus_count`. The Kraus count
/// is raised to `⌈d_in / d_out⌉` when smaller, since no isometry exists below it.
pub fn channel<R: Rng + ?Sized>(rng: &mut R, dim_in: usize, dim_out: usize, kraus_count: usize) -> KrausChannel {
    let kraus_count = kraus_count.max(dim_in.div_ceil(dim_out));
    let v = isometry(rng, dim_out * kraus_count, dim_in);
    let ops = (0..kraus_count)
        .map(|k| CMatrix::from_fn(dim_out, dim_in, |b, i| v[(b * kraus_count + k, i)]))
        .collect();
    KrausChannel::new(ops).expect("slices of an isometry form a Kraus set")
}

pub fn probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Ensemble of `n` random states of rank at most `rank`.
pub fn ensemble<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize, rank: usize) -> Ensemble {
    let probs = probabilities(rng, n);
    let items = probs.into_iter().map(|p| (p, density_matrix(rng, dim, rank))).collect();
    Ensemble::new(items).expect("valid random ensemble")
}

pub fn pure_ensemble<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> Ensemble {
    let probs = probabilities(rng, n);
    let items = probs.into_iter().map(|p| (p, pure_state(rng, dim).projector())).collect();
    Ensemble::new(items).expect("valid random ensemble")
}
