//! Side-by-side comparison of the projector, Davis–Kahan, Weyl and
//! least-singular-value bounds on one instance.

use serde::{Deserialize, Serialize};
use stabcert_core::certify::{
    davis_kahan_bound, h_parameter, json_f64, least_singular_certificate, projector_bound_for,
    projector_difference, refined_bound_diagnostic, tv_exponent, weyl_stable,
};
use stabcert_core::contour::{build_contour, ContourOptions};
use stabcert_core::eigen::{operator_norm, spectral_decompose};
use stabcert_core::region::{interaction_x, region_stats};
use stabcert_core::{DenseMatrix, Region, Result, SpectralDecomposition};

/// Constant for the refined diagnostic, which the estimate leaves unspecified.
pub const DIAGNOSTIC_C_REF: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: usize,
    #[serde(with = "json_f64")]
    pub e_norm: f64,
    #[serde(with = "json_f64")]
    pub k: f64,
    #[serde(with = "json_f64")]
    pub delta_d: f64,
    #[serde(with = "json_f64")]
    pub measured_delta_pi: f64,
    #[serde(with = "json_f64")]
    pub main_rhs: f64,
    pub main_applicable: bool,
    #[serde(with = "json_f64")]
    pub dk_rhs: f64,
    pub dk_applicable: bool,
    pub weyl_stable: bool,
    #[serde(with = "json_f64")]
    pub h: f64,
    #[serde(with = "json_f64")]
    pub epsilon_gamma: f64,
    #[serde(with = "json_f64")]
    pub sigma_n: f64,
    #[serde(with = "json_f64")]
    pub sigma_n_tilde: f64,
    /// `σ_n/2`, when the least-singular certificate fires.
    #[serde(with = "json_f64")]
    pub certified_floor: f64,
    pub least_singular_certified: bool,
    /// `σ_n − ‖E‖`.
    #[serde(with = "json_f64")]
    pub weyl_floor: f64,
    #[serde(with = "json_f64")]
    pub tv_exponent: f64,
    /// `n^{−C₃}`.
    #[serde(with = "json_f64")]
    pub tv_floor: f64,
}

impl CompareRow {
    /// `(name, value)` pairs in column order, booleans as 0/1.
    pub fn columns(&self) -> Vec<(&'static str, f64)> {
        let b = |v: bool| if v { 1.0 } else { 0.0 };
        vec![
            ("n", self.n as f64),
            ("e_norm", self.e_norm),
            ("k", self.k),
            ("delta_d", self.delta_d),
            ("measured_delta_pi", self.measured_delta_pi),
            ("main_rhs", self.main_rhs),
            ("main_applicable", b(self.main_applicable)),
            ("dk_rhs", self.dk_rhs),
            ("dk_applicable", b(self.dk_applicable)),
            ("weyl_stable", b(self.weyl_stable)),
            ("h", self.h),
            ("epsilon_gamma", self.epsilon_gamma),
            ("sigma_n", self.sigma_n),
            ("sigma_n_tilde", self.sigma_n_tilde),
            ("certified_floor", self.certified_floor),
            ("least_singular_certified", b(self.least_singular_certified)),
            ("weyl_floor", self.weyl_floor),
            ("tv_exponent", self.tv_exponent),
            ("tv_floor", self.tv_floor),
        ]
    }
}

/// One comparison row; `(c1, c2)` are the exponents of the smoothed-analysis
/// baseline (`σ₁ ≤ n^{C₁}`, `‖E‖ ≤ n^{C₂}`).
pub fn compare_bounds(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    region: &Region,
    k: f64,
    c1: f64,
    c2: f64,
) -> Result<CompareRow> {
    let n = decomp.n();
    let e_norm = operator_norm(e)?;
    let noisy = spectral_decompose(&decomp.reconstruct().add(e)?.symmetrized())?;
    let stats = region_stats(decomp, region, k, e_norm)?;
    let x = interaction_x(decomp, e, &stats.neighborhood)?;
    let main = projector_bound_for(decomp, e, region, k)?;
    let dk = davis_kahan_bound(e_norm, stats.delta_d);
    let diff = projector_difference(decomp, &noisy, region)?;
    let opts = ContourOptions {
        reach: k * e_norm,
        ..ContourOptions::default()
    };
    let contour = build_contour(decomp, region, &opts)?;
    let diag = refined_bound_diagnostic(decomp, e, region, k, DIAGNOSTIC_C_REF, &contour)?;
    let least = least_singular_certificate(decomp, e, k)?;
    let c3 = tv_exponent(c1, c2)?;
    let sigma_n = decomp.sigma_min();
    Ok(CompareRow {
        n,
        e_norm,
        k,
        delta_d: stats.delta_d,
        measured_delta_pi: diff.norm,
        main_rhs: main.rhs,
        main_applicable: main.applicable,
        dk_rhs: dk.rhs,
        dk_applicable: dk.applicable,
        weyl_stable: weyl_stable(&stats).certified,
        h: h_parameter(stats.r, x, e_norm, stats.delta_d, k).h,
        epsilon_gamma: diag.epsilon_gamma,
        sigma_n,
        sigma_n_tilde: noisy.sigma_min(),
        certified_floor: if least.certified { sigma_n / 2.0 } else { 0.0 },
        least_singular_certified: least.certified,
        weyl_floor: sigma_n - e_norm,
        tv_exponent: c3,
        tv_floor: (n as f64).powf(-c3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabcert_core::randmat::{sample_wigner_stream, NoiseDistribution, NoiseModel};

    fn decomp() -> SpectralDecomposition {
        spectral_decompose(&DenseMatrix::from_diag(&[10.0, 6.0, 1.0, -4.0])).unwrap()
    }

    #[test]
    fn zero_noise_row() {
        let d = decomp();
        let region = Region::single(3.0, 8.0).unwrap();
        let row = compare_bounds(&d, &DenseMatrix::zeros(4, 4), &region, 50.0, 3.0, 1.0).unwrap();
        assert_eq!(row.measured_delta_pi, 0.0);
        assert!(row.main_rhs >= 0.0 && row.dk_rhs >= 0.0);
        assert!(row.weyl_stable && row.dk_applicable);
        assert_eq!(row.tv_exponent, 18.5);
    }

    #[test]
    fn measured_below_both_bounds() {
        let d = decomp();
        let region = Region::single(3.0, 8.0).unwrap();
        let model = NoiseModel::new(NoiseDistribution::Gaussian, 1e-4, 3);
        let e = sample_wigner_stream(4, &model, 0);
        let row = compare_bounds(&d, &e, &region, 50.0, 3.0, 1.0).unwrap();
        assert!(row.main_applicable && row.dk_applicable);
        assert!(row.measured_delta_pi <= row.main_rhs.min(row.dk_rhs));
    }
}
