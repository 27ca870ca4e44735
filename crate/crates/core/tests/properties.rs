//! Invariants of the decompositions, regions, projectors and certificates.

use num_complex::Complex64;
use proptest::prelude::*;
use stabcert_core::certify::{gap_rhs, stability_certificate, tv_exponent, Certificate};
use stabcert_core::contour::{build_contour, contour_projector, ContourOptions, QuadratureRule};
use stabcert_core::eigen::{spectral_decompose, spectral_decompose_rotated};
use stabcert_core::randmat::random_orthogonal;
use stabcert_core::region::{interaction_x, region_stats};
use stabcert_core::{DenseMatrix, Region};

fn sym_matrix(n: usize) -> impl Strategy<Value = DenseMatrix> {
    proptest::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| {
        let m = DenseMatrix::new(n, n, v).unwrap();
        m.add(&m.transpose()).unwrap().scale(0.5)
    })
}

fn with_spectrum(ev: &[f64], seed: u64) -> DenseMatrix {
    let n = ev.len();
    let q = random_orthogonal(n, seed);
    DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * ev[k] * q[(j, k)]).sum()).symmetrized()
}

/// Spectrum with integer-spaced, well separated values, so regions with
/// half-integer ends stay clear of every eigenvalue.
fn spaced_spectrum() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::btree_set(-12i32..12, 2..8).prop_map(|s| s.into_iter().rev().map(|v| 2.0 * v as f64).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shift_moves_eigenvalues_only(a in sym_matrix(6), t in -20.0f64..20.0) {
        let d = spectral_decompose(&a).unwrap();
        let ds = spectral_decompose(&a.shift_diagonal(t)).unwrap();
        for (x, y) in d.eigenvalues().iter().zip(ds.eigenvalues()) {
            prop_assert!((x + t - y).abs() <= 1e-11 * (1.0 + t.abs() + x.abs()));
        }
    }

    #[test]
    fn region_stats_are_translation_invariant(ev in spaced_spectrum(), t in -50.0f64..50.0, lo in -12i32..10, w in 1i32..6) {
        let d = spectral_decompose(&DenseMatrix::from_diag(&ev)).unwrap();
        let region = Region::single(2.0 * lo as f64 + 1.0, 2.0 * (lo + w) as f64 + 1.0).unwrap();
        let a = region_stats(&d, &region, 10.0, 0.05).unwrap();
        let b = region_stats(&d.shifted(t), &region.shifted(t), 10.0, 0.05).unwrap();
        prop_assert_eq!(&a.inside, &b.inside);
        prop_assert_eq!(&a.neighborhood, &b.neighborhood);
        prop_assert!((a.delta_d - b.delta_d).abs() <= 1e-12 * (1.0 + t.abs()));
        for x in [-30.0, -1.0, 0.5, 7.0] {
            let (p, q) = (region.distance_to_boundary(x), region.shifted(t).distance_to_boundary(x + t));
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + t.abs() + x.abs()));
        }
    }

    #[test]
    fn stability_certificate_is_scale_invariant(ev in spaced_spectrum(), seed in 0u64..1000, c in 0.01f64..100.0) {
        let n = ev.len();
        let a = with_spectrum(&ev, seed);
        let e = with_spectrum(&vec![1e-4; n], seed ^ 1).add(&DenseMatrix::from_fn(n, n, |i, j| 1e-5 * ((i + 2 * j) % 3) as f64)).unwrap().symmetrized();
        let region = Region::single(-3.0, 5.0).unwrap();
        let eval = |s: f64| {
            let d = spectral_decompose(&a.scale(s)).unwrap();
            let es = e.scale(s);
            let norm = stabcert_core::operator_norm(&es).unwrap();
            let stats = region_stats(&d, &region.scaled(s), 200.0, norm).unwrap();
            let x = interaction_x(&d, &es, &stats.neighborhood).unwrap();
            stability_certificate(&stats, x, d.sigma_max())
        };
        let (p, q) = (eval(1.0), eval(c));
        prop_assert_eq!(p.certified, q.certified);
        prop_assert!((q.rhs / c - p.rhs).abs() <= 1e-8 * p.rhs.abs().max(1e-300));
    }

    #[test]
    fn projector_is_additive_over_components(ev in spaced_spectrum(), seed in 0u64..1000, split in 0usize..6) {
        let a = with_spectrum(&ev, seed);
        let d = spectral_decompose(&a).unwrap();
        let cut = 2.0 * (-6 + 2 * split as i32) as f64 + 1.0;
        let (lo, hi) = (Region::single(-25.0, cut).unwrap(), Region::single(cut + 2.0, 25.0).unwrap());
        let both = Region::new(vec![lo.intervals()[0], hi.intervals()[0]]).unwrap();
        let opts = ContourOptions { nodes_per_edge: 256, rule: QuadratureRule::GaussLegendre8, ..Default::default() };
        let p = |r: &Region| contour_projector(&a, &build_contour(&d, r, &opts).unwrap()).unwrap();
        let sum = p(&lo).add(&p(&hi)).unwrap();
        let err = p(&both).max_abs_diff(&sum);
        prop_assert!(err <= 1e-9, "err {err}");
    }

    #[test]
    fn cluster_projectors_ignore_the_basis(seed in 0u64..1000, rot in 0u64..1000) {
        let a = with_spectrum(&[5.0, 2.0, 2.0, 2.0, -1.0, -1.0], seed);
        let d = spectral_decompose(&a).unwrap();
        let r = spectral_decompose_rotated(&a, rot).unwrap();
        prop_assert_eq!(d.clusters(), r.clusters());
        for c in d.clusters() {
            prop_assert!(d.projector(&c).unwrap().max_abs_diff(&r.projector(&c).unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn resolvent_conjugate_symmetry(a in sym_matrix(5), re in -20.0f64..20.0, im in 0.1f64..10.0) {
        let d = spectral_decompose(&a).unwrap();
        let z = Complex64::new(re, im);
        let r = d.resolvent(z).unwrap();
        let rc = d.resolvent(z.conj()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                prop_assert!((r[(i, j)].conj() - rc[(i, j)]).norm() <= 1e-12);
                prop_assert!((r[(i, j)] - r[(j, i)]).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn tv_exponent_is_affine(c1 in 0.1f64..10.0, c2 in 0.1f64..10.0, t in 0.1f64..5.0) {
        let f = |a: f64, b: f64| tv_exponent(a, b).unwrap();
        let mid = f(c1 + t, c2) - f(c1, c2);
        prop_assert!((f(c1 + 2.0 * t, c2) - f(c1 + t, c2) - mid).abs() <= 1e-9 * f(c1 + 2.0 * t, c2));
        let mid2 = f(c1, c2 + t) - f(c1, c2);
        prop_assert!((f(c1, c2 + 2.0 * t) - f(c1, c2 + t) - mid2).abs() <= 1e-9 * f(c1, c2 + 2.0 * t));
    }

    #[test]
    fn gap_rhs_grows_with_noise(e1 in 0.0f64..1.0, de in 0.0f64..1.0, x in 0.0f64..0.1, r in 0usize..10) {
        let lo = gap_rhs(40.0, 5.0, 1.0, 100.0, 1.0, r as f64, x, e1, 50.0);
        let hi = gap_rhs(40.0, 5.0, 1.0, 100.0, 1.0, r as f64, x, e1 + de, 50.0);
        prop_assert!(hi >= lo);
    }

    #[test]
    fn certificates_round_trip_through_json(ev in spaced_spectrum(), k in 2.0f64..1e4) {
        let d = spectral_decompose(&DenseMatrix::from_diag(&ev)).unwrap();
        let region = Region::single(-5.0, 3.0).unwrap();
        let stats = region_stats(&d, &region, k, 1e-3).unwrap();
        let c = stability_certificate(&stats, 1e-4, d.sigma_max());
        let back = Certificate::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.certified, c.certified);
        prop_assert_eq!(back.inputs, c.inputs.clone());
        let recomputed = c.recompute_rhs().unwrap();
        prop_assert!(recomputed == c.rhs || (recomputed.is_nan() && c.rhs.is_nan()));
    }
}
