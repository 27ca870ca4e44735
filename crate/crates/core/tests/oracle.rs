//! Eigen and singular value routines against nalgebra.

use nalgebra::DMatrix;
use stabcert_core::eigen::{operator_norm, spectral_decompose, symmetric_eigenvalues};
use stabcert_core::randmat::{sample_rectangular_stream, sample_wigner_stream, NoiseDistribution, NoiseModel};
use stabcert_core::rectangular::{symmetric_embedding, symmetrize};
use stabcert_core::svd::singular_values;
use stabcert_core::DenseMatrix;

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn symmetric_eigenvalues_match_nalgebra() {
    for (seed, n) in (0..40u64).zip((1..=80).step_by(2)) {
        let model = NoiseModel::new(NoiseDistribution::Gaussian, 1.0, seed);
        let a = sample_wigner_stream(n, &model, 0);
        let ours = symmetric_eigenvalues(&a).unwrap();
        let theirs = sorted_desc(to_na(&a).symmetric_eigenvalues().as_slice().to_vec());
        let scale = ours[0].abs().max(ours[n - 1].abs()).max(1.0);
        assert!(max_diff(&ours, &theirs) <= 1e-12 * scale * n as f64, "n = {n}");
    }
}

#[test]
fn decomposition_reconstructs_and_is_orthonormal() {
    for seed in 0..20u64 {
        let n = 3 + (seed as usize * 7) % 40;
        let model = NoiseModel::new(NoiseDistribution::Rademacher, 1.0, seed);
        let a = sample_wigner_stream(n, &model, 1);
        let d = spectral_decompose(&a).unwrap();
        assert!(d.reconstruct().max_abs_diff(&a) <= 1e-11 * n as f64);
        let utu = d.vectors().transpose().matmul(d.vectors()).unwrap();
        assert!(utu.max_abs_diff(&DenseMatrix::identity(n)) <= 1e-12 * n as f64);
    }
}

#[test]
fn singular_values_match_nalgebra() {
    for seed in 0..40u64 {
        let m = 1 + (seed as usize * 5) % 23;
        let n = 1 + (seed as usize * 11) % 29;
        let model = NoiseModel::new(NoiseDistribution::Gaussian, 1.0, seed);
        let a = sample_rectangular_stream(m, n, &model, 0);
        let ours = singular_values(&a).unwrap();
        let theirs = sorted_desc(to_na(&a).singular_values().as_slice().to_vec());
        assert!(max_diff(&ours, &theirs) <= 1e-12 * ours[0].max(1.0), "{m}x{n}");
        let norm = operator_norm(&a).unwrap();
        assert!((norm - theirs[0]).abs() <= 1e-11 * theirs[0].max(1.0));
    }
}

#[test]
fn symmetrization_matches_doubled_eigensolve() {
    for seed in 0..20u64 {
        let m = 1 + (seed as usize * 3) % 12;
        let n = 1 + (seed as usize * 7) % 15;
        let model = NoiseModel::new(NoiseDistribution::UniformPm, 1.0, seed);
        let a = sample_rectangular_stream(m, n, &model, 0);
        let pair = symmetrize(&a).unwrap();
        let oracle = sorted_desc(to_na(&symmetric_embedding(&a)).symmetric_eigenvalues().as_slice().to_vec());
        let ours = pair.decomposition.eigenvalues();
        assert!(max_diff(ours, &oracle) <= 1e-11, "{m}x{n}");
        assert!(pair.decomposition.reconstruct().max_abs_diff(&pair.script_a) <= 1e-11);
    }
}
