//! Seeded instance families for the experiments and the acceptance suite.
//!
//! Each generator is a pure function of its seed. Families that must make a
//! certificate fire either scale the noise analytically below the predicate
//! threshold or shrink it by halving until the predicate holds; the latter
//! is recorded in the instance label.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stabcert_core::certify::{
    k_threshold, least_singular_certificate, projector_bound_for, stability_certificate, Certificate,
};
use stabcert_core::eigen::{operator_norm, spectral_decompose};
use stabcert_core::randmat::{
    random_orthogonal_with, sample_rectangular_stream, sample_symmetric_with, stream_rng, NoiseDistribution,
    NoiseModel,
};
use stabcert_core::rectangular::{rect_certificates, RectMode};
use stabcert_core::region::{interaction_x, region_stats, Interval, Region};
use stabcert_core::{DenseMatrix, Result, SpectralDecomposition};

const LOG_FACTOR_40: f64 = 40.0 / std::f64::consts::PI;

/// A symmetric test instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub a: DenseMatrix,
    pub decomp: SpectralDecomposition,
    pub e: DenseMatrix,
    pub region: Option<Region>,
    pub k: f64,
}

impl Instance {
    pub fn noisy(&self) -> DenseMatrix {
        self.a.add(&self.e).expect("shapes match").symmetrized()
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }
}

/// A rectangular test instance.
#[derive(Debug, Clone)]
pub struct RectInstance {
    pub label: String,
    pub a: DenseMatrix,
    pub e: DenseMatrix,
    pub region: Option<Region>,
    pub k: f64,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    stream_rng(seed, stream)
}

/// `U diag(λ) Uᵀ` for a random orthogonal `U`.
pub fn with_spectrum(eigenvalues: &[f64], rng: &mut ChaCha8Rng) -> DenseMatrix {
    let n = eigenvalues.len();
    let q = random_orthogonal_with(n, rng);
    DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * eigenvalues[k] * q[(j, k)]).sum())
        .symmetrized()
}

fn wigner(n: usize, rng: &mut ChaCha8Rng, dist: NoiseDistribution) -> DenseMatrix {
    sample_symmetric_with(n, &dist, 1.0, rng)
}

/// Rescales `m` to operator norm `target`.
fn normalized(m: &DenseMatrix, target: f64) -> DenseMatrix {
    let norm = operator_norm(m).expect("non-empty");
    if norm == 0.0 {
        m.clone()
    } else {
        m.scale(target / norm)
    }
}

/// Sorted random spectrum in `[lo, hi]` with consecutive gaps of at least `gap`.
fn spaced_spectrum(n: usize, lo: f64, hi: f64, gap: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let slack = (hi - lo) - gap * (n as f64 - 1.0);
    assert!(slack > 0.0, "spectrum does not fit");
    let mut cuts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..slack)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut ev: Vec<f64> = cuts.iter().enumerate().map(|(i, c)| lo + c + gap * i as f64).collect();
    ev.reverse();
    ev
}

/// Interval between two consecutive-gap midpoints of a descending spectrum,
/// containing eigenvalues `top..=bottom`.
fn gap_interval(ev: &[f64], top: usize, bottom: usize) -> Interval {
    let n = ev.len();
    let hi = if top == 0 { ev[0] + (ev[0] - ev[1]).max(1.0) / 2.0 } else { 0.5 * (ev[top - 1] + ev[top]) };
    let lo = if bottom + 1 == n {
        ev[n - 1] - (ev[n - 2] - ev[n - 1]).max(1.0) / 2.0
    } else {
        0.5 * (ev[bottom] + ev[bottom + 1])
    };
    Interval::new(lo, hi)
}

fn random_region(ev: &[f64], components: usize, rng: &mut ChaCha8Rng) -> Region {
    let n = ev.len();
    loop {
        let mut picks: Vec<usize> = (0..2 * components).map(|_| rng.random_range(0..n)).collect();
        picks.sort_unstable();
        let mut intervals = Vec::new();
        for c in 0..components {
            intervals.push(gap_interval(ev, picks[2 * c], picks[2 * c + 1]));
        }
        if let Ok(r) = Region::new(intervals) {
            return r;
        }
    }
}

/// Stability predicate evaluated on measured `‖E‖` and `x`.
pub fn stability_cert(inst: &Instance) -> Result<Certificate> {
    let region = inst.region.as_ref().expect("stability instance has a region");
    let e_norm = operator_norm(&inst.e)?;
    let stats = region_stats(&inst.decomp, region, inst.k, e_norm)?;
    let x = interaction_x(&inst.decomp, &inst.e, &stats.neighborhood)?;
    Ok(stability_certificate(&stats, x, inst.decomp.sigma_max()))
}

// ---------------------------------------------------------------------------
// Weyl

pub fn weyl_instance(seed: u64) -> Instance {
    let mut r = rng(seed, 1);
    let n = r.random_range(2..=20);
    let scale = 10f64.powf(r.random_range(-1.0..1.0));
    let a = wigner(n, &mut r, NoiseDistribution::Gaussian).scale(scale);
    let e = wigner(n, &mut r, NoiseDistribution::Rademacher).scale(scale * r.random_range(0.01..1.0));
    let decomp = spectral_decompose(&a).expect("symmetric");
    Instance {
        label: format!("weyl n={n}"),
        a,
        decomp,
        e,
        region: None,
        k: 1.0,
    }
}

// ---------------------------------------------------------------------------
// Regional stability

/// Three families, by `seed % 3`: noise scaled below the threshold (Weyl
/// regime), structured noise that is large but nearly invisible on the
/// eigenvectors near `D` (beyond Weyl), and two-component regions.
pub fn stability_instance(seed: u64) -> Instance {
    match seed % 3 {
        0 => stability_scaled(seed, 1),
        1 => stability_far_noise(seed),
        _ => stability_scaled(seed, 2),
    }
}

fn stability_scaled(seed: u64, components: usize) -> Instance {
    let mut r = rng(seed, 2);
    let n = r.random_range(2 * components + 2..=16);
    let ev = spaced_spectrum(n, -10.0, 10.0, 0.2, &mut r);
    let region = random_region(&ev, components, &mut r);
    let a = with_spectrum(&ev, &mut r);
    let decomp = spectral_decompose(&a).expect("symmetric");
    let sigma1 = decomp.sigma_max();
    let delta = ev.iter().map(|&l| region.distance_to_boundary(l)).fold(f64::INFINITY, f64::min);
    let c_d = components as f64;
    let k = 1.25 * k_threshold(26.0, 3.0, delta, sigma1, c_d).max(1.0);
    // With r ≤ n and x ≤ ‖E‖ every term of the max is at most n²‖E‖.
    let budget = delta / (LOG_FACTOR_40 * (5.0 * sigma1 / delta).ln() * c_d * (n * n) as f64);
    let target = budget * r.random_range(0.2..0.9);
    let e = normalized(&wigner(n, &mut r, NoiseDistribution::Gaussian), target);
    Instance {
        label: format!("stability scaled C_D={components} n={n}"),
        a,
        decomp,
        e,
        region: Some(region),
        k,
    }
}

/// Block noise in the eigenbasis: tiny on the eigenvectors near `D`, a
/// moderate coupling to far eigenvectors, and a large far block. `‖E‖`
/// exceeds `δ_D`, so Weyl alone cannot certify these.
fn stability_far_noise(seed: u64) -> Instance {
    let mut r = rng(seed, 3);
    let near = r.random_range(1..=3);
    let outside_near = r.random_range(0..=2);
    let far = r.random_range(3..=14);
    let n = near + outside_near + far;
    let sigma1: f64 = 1e4;
    let delta: f64 = 0.5;
    // D = (0, 4); near eigenvalues in [0.5, 3.5], neighbours in [-3, -0.5] ∪ [4.5, 7].
    let mut ev: Vec<f64> = spaced_spectrum(near, 0.5, 3.5, 0.2, &mut r);
    for _ in 0..outside_near {
        ev.push(if r.random::<bool>() { r.random_range(-3.0..-0.5) } else { r.random_range(4.5..7.0) });
    }
    let e_norm = r.random_range(1.5..2.5);
    let budget = delta / (LOG_FACTOR_40 * (5.0 * sigma1 / delta).ln());
    let k = (1.25 * k_threshold(26.0, 3.0, delta, sigma1, 1.0)).max(1.5 * e_norm / budget);
    let far_lo = 1.5 * k * e_norm + 10.0;
    assert!(far_lo < sigma1);
    ev.push(sigma1);
    for _ in 1..far {
        let mag = r.random_range(far_lo..sigma1);
        ev.push(if r.random::<bool>() { mag } else { -mag });
    }
    let nn = near + outside_near;
    let r_max = nn as f64;
    // r²x and √(r x ‖E‖) both below budget/1.5.
    let x_cap = ((budget / 1.5).powi(2) / (r_max * e_norm)).min(budget / (1.5 * r_max * r_max));
    let mut e_hat = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = match (i < nn, j < nn) {
                (true, true) => x_cap * r.random_range(-0.5..0.5),
                (true, false) => 0.3 * r.random_range(-1.0..1.0) / (n as f64).sqrt(),
                _ => r.random_range(-1.0..1.0),
            };
            e_hat[(i, j)] = v;
            e_hat[(j, i)] = v;
        }
    }
    // Scale only the far block so the near block stays below x_cap.
    let far_block = DenseMatrix::from_fn(n, n, |i, j| if i >= nn && j >= nn { e_hat[(i, j)] } else { 0.0 });
    let far_norm = operator_norm(&far_block).expect("non-empty").max(1e-300);
    let e_hat = DenseMatrix::from_fn(n, n, |i, j| {
        if i >= nn && j >= nn {
            e_hat[(i, j)] * e_norm / far_norm
        } else {
            e_hat[(i, j)]
        }
    });
    let q = random_orthogonal_with(n, &mut r);
    let a = DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * ev[k] * q[(j, k)]).sum()).symmetrized();
    let e = q.matmul(&e_hat).unwrap().matmul(&q.transpose()).unwrap().symmetrized();
    let decomp = spectral_decompose(&a).expect("symmetric");
    Instance {
        label: format!("stability far-noise n={n} near={nn}"),
        a,
        decomp,
        e,
        region: Some(Region::single(0.0, 4.0).expect("valid")),
        k,
    }
}

// ---------------------------------------------------------------------------
// Least singular value

/// Halves `s` from `start` until `fires(s)`; `None` after 80 halvings.
pub fn halve_until<F: FnMut(f64) -> Result<bool>>(start: f64, mut fires: F) -> Result<Option<f64>> {
    let mut s = start;
    for _ in 0..80 {
        if fires(s)? {
            return Ok(Some(s));
        }
        s *= 0.5;
    }
    Ok(None)
}

/// Families by `seed % 3`: spread spectrum with `|λ|` log-uniform in
/// `[20, 2000]` and Rademacher noise; the same with a dense block of
/// eigenvalues near `σ_n`; and structured noise with `‖E‖ > σ_n`.
pub fn least_singular_instance(seed: u64) -> Instance {
    match seed % 3 {
        0 => least_singular_spread(seed, false),
        1 => least_singular_spread(seed, true),
        _ => least_singular_far_noise(seed),
    }
}

fn least_singular_spread(seed: u64, clustered: bool) -> Instance {
    let mut r = rng(seed, 4);
    let n = r.random_range(10..=60);
    let mut ev: Vec<f64> = (0..n)
        .map(|i| {
            let mag = if clustered && i < n / 4 {
                20.0 * r.random_range(1.0..1.5)
            } else {
                20.0 * 100f64.powf(r.random_range(0.0..1.0))
            };
            if r.random::<bool>() { mag } else { -mag }
        })
        .collect();
    ev[0] = 20.0;
    let a = with_spectrum(&ev, &mut r);
    let decomp = spectral_decompose(&a).expect("symmetric");
    let w = wigner(n, &mut r, NoiseDistribution::Rademacher);
    let k = 1.25 * k_threshold(26.0, 6.0, decomp.sigma_min(), decomp.sigma_max(), 1.0);
    let s = halve_until(1.0, |s| Ok(least_singular_certificate(&decomp, &w.scale(s), k)?.certified))
        .expect("certificate evaluates")
        .expect("zero noise certifies");
    Instance {
        label: format!("least-singular {} n={n} scale={s:e}", if clustered { "clustered" } else { "spread" }),
        a,
        decomp,
        e: w.scale(s),
        region: None,
        k,
    }
}

fn least_singular_far_noise(seed: u64) -> Instance {
    let mut r = rng(seed, 5);
    let n = r.random_range(6..=40);
    let sigma1: f64 = 1e5;
    let sigma_n = r.random_range(1.0..3.0);
    let e_norm = r.random_range(2.0..4.0) * sigma_n;
    let budget = sigma_n / (80.0 / std::f64::consts::PI * (10.0 * sigma1 / sigma_n).ln());
    let k = (1.25 * k_threshold(26.0, 6.0, sigma_n, sigma1, 1.0)).max(1.5 * e_norm / budget);
    let far_lo = 1.5 * k * e_norm + sigma_n;
    assert!(far_lo < sigma1, "{far_lo}");
    let mut ev = vec![if r.random::<bool>() { sigma_n } else { -sigma_n }, sigma1];
    for _ in 2..n {
        let mag = r.random_range(far_lo..sigma1);
        ev.push(if r.random::<bool>() { mag } else { -mag });
    }
    // N_D = {σ_n, augmented zero}, so r = 2.
    let x_cap = ((budget / 1.5).powi(2) / (2.0 * e_norm)).min(budget / 6.0);
    let mut e_hat = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = match (i, j) {
                (0, 0) => x_cap * r.random_range(-0.9..0.9),
                (0, _) => 0.2 * r.random_range(-1.0..1.0) / (n as f64).sqrt(),
                _ => r.random_range(-1.0..1.0),
            };
            e_hat[(i, j)] = v;
            e_hat[(j, i)] = v;
        }
    }
    let far_block = DenseMatrix::from_fn(n, n, |i, j| if i > 0 && j > 0 { e_hat[(i, j)] } else { 0.0 });
    let far_norm = operator_norm(&far_block).expect("non-empty").max(1e-300);
    let e_hat = DenseMatrix::from_fn(n, n, |i, j| if i > 0 && j > 0 { e_hat[(i, j)] * e_norm / far_norm } else { e_hat[(i, j)] });
    let q = random_orthogonal_with(n, &mut r);
    let a = DenseMatrix::from_fn(n, n, |i, j| (0..n).map(|k| q[(i, k)] * ev[k] * q[(j, k)]).sum()).symmetrized();
    let e = q.matmul(&e_hat).unwrap().matmul(&q.transpose()).unwrap().symmetrized();
    let decomp = spectral_decompose(&a).expect("symmetric");
    Instance {
        label: format!("least-singular far-noise n={n}"),
        a,
        decomp,
        e,
        region: None,
        k,
    }
}

/// The introductory example: `σ_n = n^{1/3}`, `σ₁ = n³`, Rademacher noise.
/// The remaining eigenvalues are log-uniform in `[n², n³]`. Returns the
/// instance with unit-scale noise; callers pick the scale.
pub fn intro_example(n: usize, seed: u64) -> (DenseMatrix, SpectralDecomposition, DenseMatrix) {
    let mut r = rng(seed, 6);
    let nf = n as f64;
    let mut ev = vec![nf.powf(1.0 / 3.0), nf.powi(3)];
    for _ in 2..n {
        ev.push(nf.powi(2) * nf.powf(r.random_range(0.0..1.0)));
    }
    let a = with_spectrum(&ev, &mut r);
    let decomp = spectral_decompose(&a).expect("symmetric");
    let w = wigner(n, &mut r, NoiseDistribution::Rademacher);
    (a, decomp, w)
}

// ---------------------------------------------------------------------------
// Projector bounds

/// Spectrum in `[-10, 10]`, a one-interval region between gaps, Gaussian
/// noise halved from `‖E‖ = δ_D` until the projector bound applies.
pub fn projector_instance(seed: u64) -> Instance {
    let mut r = rng(seed, 7);
    let n = r.random_range(4..=20);
    let ev = spaced_spectrum(n, -10.0, 10.0, 0.3, &mut r);
    let region = random_region(&ev, 1, &mut r);
    let a = with_spectrum(&ev, &mut r);
    let decomp = spectral_decompose(&a).expect("symmetric");
    let delta = ev.iter().map(|&l| region.distance_to_boundary(l)).fold(f64::INFINITY, f64::min);
    let k = [5.0, 10.0, 20.0, 50.0][r.random_range(0..4)];
    let w = normalized(&wigner(n, &mut r, NoiseDistribution::Gaussian), delta);
    let s = halve_until(1.0, |s| Ok(projector_bound_for(&decomp, &w.scale(s), &region, k)?.applicable))
        .expect("bound evaluates")
        .expect("small noise applies");
    Instance {
        label: format!("projector n={n} K={k}"),
        a,
        decomp,
        e: w.scale(s),
        region: Some(region),
        k,
    }
}

/// `‖E‖ = u·δ_D` with `u ∈ [0.05, 1]`.
pub fn davis_kahan_instance(seed: u64) -> Instance {
    let mut r = rng(seed, 8);
    let n = r.random_range(3..=20);
    let ev = spaced_spectrum(n, -10.0, 10.0, 0.3, &mut r);
    let components = if n >= 6 && r.random::<bool>() { 2 } else { 1 };
    let region = random_region(&ev, components, &mut r);
    let a = with_spectrum(&ev, &mut r);
    let decomp = spectral_decompose(&a).expect("symmetric");
    let delta = ev.iter().map(|&l| region.distance_to_boundary(l)).fold(f64::INFINITY, f64::min);
    let u = r.random_range(0.05..1.0);
    let e = normalized(&wigner(n, &mut r, NoiseDistribution::Gaussian), u * delta);
    Instance {
        label: format!("davis-kahan n={n} u={u:.3}"),
        a,
        decomp,
        e,
        region: Some(region),
        k: 10.0,
    }
}

// ---------------------------------------------------------------------------
// Contour instances

/// `n ≤ 12`, gaps at least 0.3, every fourth seed with a repeated eigenvalue
/// inside the region.
pub fn contour_instance(seed: u64) -> Instance {
    let mut r = rng(seed, 9);
    let n = r.random_range(3..=12);
    let mut ev = spaced_spectrum(n, -5.0, 5.0, 0.3, &mut r);
    let region = random_region(&ev, 1, &mut r);
    if seed % 4 == 0 {
        if let Some(i) = (0..n - 1).find(|&i| region.contains(ev[i]) && region.contains(ev[i + 1])) {
            ev[i + 1] = ev[i];
        }
    }
    let a = with_spectrum(&ev, &mut r);
    let decomp = spectral_decompose(&a).expect("symmetric");
    Instance {
        label: format!("contour n={n}"),
        a,
        decomp,
        e: DenseMatrix::zeros(n, n),
        region: Some(region),
        k: 1.0,
    }
}

/// Small instance inside the premises of the contour estimates, with noise
/// halved until `h < 1/2` and the projector bound applies.
pub fn diagnostics_instance(seed: u64) -> Instance {
    let mut r = rng(seed, 10);
    let n = r.random_range(3..=8);
    let ev = spaced_spectrum(n, -10.0, 10.0, 1.0, &mut r);
    let sigma1 = ev[0].abs().max(ev[n - 1].abs());
    // Keep the region inside [-σ₁, σ₁] so its width is at most 2σ₁.
    let region = loop {
        let reg = random_region(&ev, 1, &mut r);
        let iv = reg.intervals()[0];
        if iv.lo >= -sigma1 && iv.hi <= sigma1 {
            break reg;
        }
        if n >= 3 {
            let i = r.random_range(1..n - 1);
            break Region::new(vec![gap_interval(&ev, i, i)]).expect("valid");
        }
    };
    let a = with_spectrum(&ev, &mut r);
    let decomp = spectral_decompose(&a).expect("symmetric");
    let delta = ev.iter().map(|&l| region.distance_to_boundary(l)).fold(f64::INFINITY, f64::min);
    let k = r.random_range(4.0..40.0);
    let w = normalized(&wigner(n, &mut r, NoiseDistribution::Gaussian), delta);
    let s = halve_until(1.0, |s| {
        let e = w.scale(s);
        let e_norm = operator_norm(&e)?;
        let c = projector_bound_for(&decomp, &e, &region, k)?;
        Ok(c.applicable && 2.0 * sigma1 >= k * e_norm + delta)
    })
    .expect("bound evaluates")
    .expect("small noise applies");
    Instance {
        label: format!("diagnostics n={n} K={k:.2}"),
        a,
        decomp,
        e: w.scale(s),
        region: Some(region),
        k,
    }
}

// ---------------------------------------------------------------------------
// Rectangular

/// Random `m × n` matrix with `1 ≤ m, n ≤ 20`.
pub fn random_rectangle(seed: u64) -> DenseMatrix {
    let mut r = rng(seed, 11);
    let m = r.random_range(1..=20);
    let n = r.random_range(1..=20);
    let model = NoiseModel::new(NoiseDistribution::Gaussian, 1.0, seed);
    sample_rectangular_stream(m, n, &model, 11)
}

/// `U diag(σ) Vᵀ` with prescribed singular values.
fn with_singular_values(m: usize, n: usize, sv: &[f64], r: &mut ChaCha8Rng) -> DenseMatrix {
    let u = random_orthogonal_with(m, r);
    let v = random_orthogonal_with(n, r);
    DenseMatrix::from_fn(m, n, |i, j| (0..sv.len()).map(|k| u[(i, k)] * sv[k] * v[(j, k)]).sum())
}

/// Alternates stability and least-singular modes; shapes vary around the
/// 30×45 reference size, sometimes tall. Rademacher noise is halved until the
/// certificate fires.
pub fn rect_instance(seed: u64) -> (RectInstance, RectMode) {
    let mut r = rng(seed, 12);
    let mode = if seed % 2 == 0 { RectMode::Stability } else { RectMode::LeastSingular };
    let (mut m, mut n) = (r.random_range(4..=30), r.random_range(4..=45));
    if m > n {
        std::mem::swap(&mut m, &mut n);
    }
    let p = m.min(n);
    let sv = spaced_spectrum(p, 5.0, 500.0, 1.0, &mut r);
    let a0 = with_singular_values(m, n, &sv, &mut r);
    let tall = seed % 5 == 0;
    let a = if tall { a0.transpose() } else { a0 };
    let (rows, cols) = (a.rows(), a.cols());
    let region = match mode {
        RectMode::Stability => {
            let top = r.random_range(0..p);
            let bottom = r.random_range(top..p);
            let mut iv = gap_interval(&sv, top, bottom);
            iv.lo = iv.lo.max(sv[p - 1] / 2.0).max(1e-3);
            Some(Region::new(vec![iv]).expect("valid"))
        }
        RectMode::LeastSingular => None,
    };
    let k = match mode {
        RectMode::Stability => 1000.0,
        RectMode::LeastSingular => 1.25 * k_threshold(52.0, 6.0, sv[p - 1], sv[0], 1.0),
    };
    let model = NoiseModel::new(NoiseDistribution::Rademacher, 1.0, seed);
    let w = sample_rectangular_stream(rows, cols, &model, 12);
    let s = halve_until(1.0, |s| Ok(rect_certificates(&a, &w.scale(s), region.as_ref(), k, mode)?.certified))
        .expect("certificate evaluates")
        .expect("zero noise certifies");
    (
        RectInstance {
            label: format!("rect {mode:?} {rows}x{cols} scale={s:e}"),
            a,
            e: w.scale(s),
            region,
            k,
        },
        mode,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        for seed in 0..6 {
            let (a, b) = (stability_instance(seed), stability_instance(seed));
            assert_eq!(a.a, b.a);
            assert_eq!(a.e, b.e);
        }
    }

    #[test]
    fn stability_families_fire() {
        for seed in 0..30 {
            let inst = stability_instance(seed);
            let c = stability_cert(&inst).unwrap();
            assert!(c.certified, "{} {}", inst.label, c.to_text());
        }
    }

    #[test]
    fn far_noise_exceeds_the_gap() {
        let inst = stability_instance(1);
        let e_norm = operator_norm(&inst.e).unwrap();
        let c = stability_cert(&inst).unwrap();
        assert!(e_norm > c.inputs["delta_d"]);
    }
}
