//! Seeded random matrices: Wigner noise, Haar-like orthogonal frames and
//! ground-truth matrices with a prescribed spectrum.
//!
//! Every sampler is a pure function of `(spec, seed, stream)`. Streams come
//! from ChaCha's 64-bit stream selector, so trial `t` of a run seeded with `s`
//! always draws the same numbers no matter which thread evaluates it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{operator_norm, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

/// Independent generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-entry distribution of a noise matrix. All variants have mean 0 and
/// unit variance before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDistribution {
    Gaussian,
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformPm,
}

impl std::str::FromStr for NoiseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::Gaussian),
            "rademacher" | "sign" => Ok(Self::Rademacher),
            "uniform_pm" | "uniform" => Ok(Self::UniformPm),
            other => Err(Error::Parse(format!("unknown noise distribution {other:?}"))),
        }
    }
}

/// Draws one standardized entry from a stream. Implement this to plug in other
/// sub-Gaussian laws; implementations must only consume randomness from `rng`.
pub trait EntrySampler: Sync {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64;
}

impl EntrySampler for NoiseDistribution {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Self::Gaussian => rng.sample(StandardNormal),
            Self::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::UniformPm => {
                let s3 = 3f64.sqrt();
                rng.random_range(-s3..=s3)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub dist: NoiseDistribution,
    pub scale: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(dist: NoiseDistribution, scale: f64, seed: u64) -> Self {
        Self { dist, scale, seed }
    }
}

/// Symmetric matrix whose upper triangle (diagonal included) is drawn iid from
/// `sampler` and multiplied by `scale`; the lower triangle is an exact mirror.
pub fn sample_symmetric_with(
    n: usize,
    sampler: &dyn EntrySampler,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = scale * sampler.sample(rng);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Stream 0 of [`sample_wigner_stream`].
pub fn sample_wigner(n: usize, model: &NoiseModel) -> DenseMatrix {
    sample_wigner_stream(n, model, 0)
}

pub fn sample_wigner_stream(n: usize, model: &NoiseModel, stream: u64) -> DenseMatrix {
    let mut rng = stream_rng(model.seed, stream);
    sample_symmetric_with(n, &model.dist, model.scale, &mut rng)
}

/// Rectangular `m × n` matrix with iid entries (no symmetry).
pub fn sample_rectangular_stream(m: usize, n: usize, model: &NoiseModel, stream: u64) -> DenseMatrix {
    let mut rng = stream_rng(model.seed, stream);
    DenseMatrix::from_fn(m, n, |_, _| model.scale * model.dist.sample(&mut rng))
}

/// Orthogonal matrix from Gram–Schmidt (applied twice) on a Gaussian matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = stream_rng(seed, u64::MAX);
    random_orthogonal_with(n, &mut rng)
}

pub fn random_orthogonal_with(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &cols {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let norm = dot(&v, &v).sqrt();
        // A Gaussian draw landing in the span is a probability-zero event, but
        // resample rather than divide by a tiny norm.
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
    }
    DenseMatrix::from_fn(n, n, |i, j| cols[j][i])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruthKind {
    ExplicitSpectrum {
        eigenvalues: Vec<f64>,
    },
    /// `rank` eigenvalues drawn uniformly from `[lo, hi]`, the rest zero.
    LowRankPsd {
        n: usize,
        rank: usize,
        lo: f64,
        hi: f64,
    },
    /// Positive spectrum `σ_n = λ_n < … < λ_1` with consecutive gaps in `[δ, 1.5δ)`.
    MinGap {
        n: usize,
        delta: f64,
        sigma_min: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSpec {
    #[serde(flatten)]
    pub kind: GroundTruthKind,
    pub seed: u64,
}

impl GroundTruthSpec {
    /// The spectrum the construction realises, descending.
    pub fn target_spectrum(&self) -> Result<Vec<f64>> {
        let mut rng = stream_rng(self.seed, 1);
        let mut ev = match &self.kind {
            GroundTruthKind::ExplicitSpectrum { eigenvalues } => {
                if eigenvalues.is_empty() || eigenvalues.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "explicit spectrum must be non-empty and finite".into(),
                    ));
                }
                eigenvalues.clone()
            }
            &GroundTruthKind::LowRankPsd { n, rank, lo, hi } => {
                if rank > n || n == 0 || !(0.0 < lo && lo <= hi) {
                    return Err(Error::InvalidArgument(format!(
                        "low_rank_psd needs 0 < lo <= hi and rank <= n (got n={n}, rank={rank}, lo={lo}, hi={hi})"
                    )));
                }
                let mut v: Vec<f64> = (0..rank)
                    .map(|_| if lo == hi { lo } else { rng.random_range(lo..hi) })
                    .collect();
                v.resize(n, 0.0);
                v
            }
            &GroundTruthKind::MinGap {
                n,
                delta,
                sigma_min,
            } => {
                if n == 0 || !(delta > 0.0) || !(sigma_min > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "min_gap needs n >= 1, delta > 0, sigma_min > 0 (got {n}, {delta}, {sigma_min})"
                    )));
                }
                let mut v = Vec::with_capacity(n);
                let mut cur = sigma_min;
                v.push(cur);
                for _ in 1..n {
                    cur += delta * (1.0 + 0.5 * rng.random::<f64>());
                    v.push(cur);
                }
                v
            }
        };
        ev.sort_by(|a, b| b.total_cmp(a));
        Ok(ev)
    }
}

/// `A = Q Λ Qᵀ` with a seeded random orthogonal `Q`, together with its exact
/// decomposition.
pub fn make_ground_truth_decomposed(spec: &GroundTruthSpec) -> Result<(DenseMatrix, SpectralDecomposition)> {
    let ev = spec.target_spectrum()?;
    let n = ev.len();
    let q = random_orthogonal(n, spec.seed);
    let a = DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * ev[k] * q[(j, k)]).sum())
        .symmetrized();
    let dec = SpectralDecomposition::from_parts(ev, q)?;
    Ok((a, dec))
}

pub fn make_ground_truth(spec: &GroundTruthSpec) -> Result<DenseMatrix> {
    make_ground_truth_decomposed(spec).map(|(a, _)| a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerLawReport {
    pub n: usize,
    /// `‖E‖/√n` per trial.
    pub norm_ratios: Vec<f64>,
    /// `x/√(ln n)` per trial, with `x = max_{i,j} |u_iᵀ E u_j|` over a fixed
    /// seeded orthonormal basis.
    pub x_ratios: Vec<f64>,
    pub mean_norm_ratio: f64,
    pub max_norm_ratio: f64,
    pub mean_x_ratio: f64,
    pub max_x_ratio: f64,
}

pub fn wigner_law_check(n: usize, trials: usize, model: &NoiseModel) -> Result<WignerLawReport> {
    if trials == 0 || n < 2 {
        return Err(Error::InvalidArgument(
            "wigner_law_check needs trials >= 1 and n >= 2".into(),
        ));
    }
    let basis = random_orthogonal(n, model.seed ^ 0x5eed_ba5e);
    let basis_t = basis.transpose();
    let per_trial: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let e = sample_wigner_stream(n, model, t);
            let norm = operator_norm(&e)?;
            let forms = basis_t.matmul(&e)?.matmul(&basis)?;
            Ok((norm / (n as f64).sqrt(), forms.max_abs() / (n as f64).ln().sqrt()))
        })
        .collect::<Result<_>>()?;
    let norm_ratios: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    let x_ratios: Vec<f64> = per_trial.iter().map(|p| p.1).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(WignerLawReport {
        n,
        mean_norm_ratio: mean(&norm_ratios),
        max_norm_ratio: max(&norm_ratios),
        mean_x_ratio: mean(&x_ratios),
        max_x_ratio: max(&x_ratios),
        norm_ratios,
        x_ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::symmetric_eigenvalues;

    #[test]
    fn wigner_is_deterministic_and_exactly_symmetric() {
        let model = NoiseModel::new(NoiseDistribution::Gaussian, 1.0, 7);
        let a = sample_wigner(12, &model);
        let b = sample_wigner(12, &model);
        assert_eq!(a, b);
        assert_eq!(a.max_asymmetry(), 0.0);
        assert_ne!(a, sample_wigner_stream(12, &model, 1));
    }

    #[test]
    fn rademacher_entries_are_signs() {
        let model = NoiseModel::new(NoiseDistribution::Rademacher, 1.0, 3);
        let e = sample_wigner(20, &model);
        assert!(e.as_slice().iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn uniform_entries_are_bounded() {
        let model = NoiseModel::new(NoiseDistribution::UniformPm, 2.0, 3);
        let e = sample_wigner(20, &model);
        assert!(e.max_abs() <= 2.0 * 3f64.sqrt());
    }

    #[test]
    fn entry_means_are_centred() {
        // 10^4 upper-triangle draws per law; sample mean within 4 standard errors.
        for dist in [
            NoiseDistribution::Gaussian,
            NoiseDistribution::Rademacher,
            NoiseDistribution::UniformPm,
        ] {
            let mut rng = stream_rng(11, 0);
            let draws: Vec<f64> = (0..10_000).map(|_| dist.sample(&mut rng)).collect();
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
            assert!(mean.abs() <= 4.0 * (var / draws.len() as f64).sqrt(), "{dist:?} mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "{dist:?} variance {var}");
        }
    }

    #[test]
    fn orthogonal_frame_is_orthonormal() {
        let q = random_orthogonal(15, 99);
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.max_abs_diff(&DenseMatrix::identity(15)) < 1e-13);
    }

    #[test]
    fn explicit_spectrum_round_trip() {
        let spec = GroundTruthSpec {
            kind: GroundTruthKind::ExplicitSpectrum {
                eigenvalues: vec![3.0, 1.0, -2.0],
            },
            seed: 5,
        };
        let a = make_ground_truth(&spec).unwrap();
        let ev = symmetric_eigenvalues(&a).unwrap();
        for (got, want) in ev.iter().zip([3.0, 1.0, -2.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn low_rank_has_exact_rank() {
        let spec = GroundTruthSpec {
            kind: GroundTruthKind::LowRankPsd {
                n: 50,
                rank: 3,
                lo: 10.0,
                hi: 20.0,
            },
            seed: 1,
        };
        let a = make_ground_truth(&spec).unwrap();
        let ev = symmetric_eigenvalues(&a).unwrap();
        assert_eq!(ev.iter().filter(|v| v.abs() < 1e-9).count(), 47);
        assert!(ev.iter().all(|&v| v > -1e-9));
    }

    #[test]
    fn min_gap_construction() {
        let spec = GroundTruthSpec {
            kind: GroundTruthKind::MinGap {
                n: 10,
                delta: 5.0,
                sigma_min: 20.0,
            },
            seed: 2,
        };
        let (a, _) = make_ground_truth_decomposed(&spec).unwrap();
        let ev = symmetric_eigenvalues(&a).unwrap();
        assert!(ev.windows(2).all(|w| w[0] - w[1] >= 5.0 - 1e-10));
        let smin = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        assert!((smin - 20.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_specs_error() {
        let bad = GroundTruthSpec {
            kind: GroundTruthKind::MinGap {
                n: 4,
                delta: 0.0,
                sigma_min: 1.0,
            },
            seed: 0,
        };
        assert!(make_ground_truth(&bad).is_err());
        let bad = GroundTruthSpec {
            kind: GroundTruthKind::LowRankPsd {
                n: 3,
                rank: 4,
                lo: 1.0,
                hi: 2.0,
            },
            seed: 0,
        };
        assert!(make_ground_truth(&bad).is_err());
    }

    #[test]
    fn zero_scale_noise_is_zero() {
        let model = NoiseModel::new(NoiseDistribution::Gaussian, 0.0, 1);
        let rep = wigner_law_check(30, 2, &model).unwrap();
        assert!(rep.norm_ratios.iter().all(|&v| v == 0.0));
        assert!(rep.x_ratios.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ground_truth_spec_toml_shape() {
        let spec: GroundTruthSpec =
            serde_json::from_str(r#"{"kind":"min_gap","n":4,"delta":1.0,"sigma_min":2.0,"seed":3}"#).unwrap();
        assert_eq!(spec.seed, 3);
        assert!(matches!(spec.kind, GroundTruthKind::MinGap { n: 4, .. }));
    }
}
