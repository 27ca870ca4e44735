//! Rectangular contours around a region, resolvent quadrature for spectral
//! projectors, and sampled verification of the contour-integral estimates
//! used by the projector bound.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certify::h_parameter;
use crate::eigen::{complex_operator_norm, spectral_decompose, symmetric_eigenvalues, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DenseMatrix};
use crate::region::{interaction_x, region_stats, Region};

/// Largest node count per edge the adaptive refinement will try.
pub const MAX_NODES_PER_EDGE: usize = 1 << 16;
/// Default operator-norm change between refinements accepted as converged.
pub const DEFAULT_TARGET: f64 = 1e-6;
/// Relative cushion for sampled `LHS ≤ RHS` checks.
pub const CUSHION: f64 = 1e-6;

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Composite midpoint, second order.
    #[default]
    Midpoint,
    /// Composite 8-point Gauss–Legendre panels.
    GaussLegendre8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourOptions {
    pub nodes_per_edge: usize,
    pub rule: QuadratureRule,
    /// `K‖E‖`; unbounded intervals are clipped at `±(2σ₁ + reach + 1)`.
    pub reach: f64,
    /// Overrides the default half-height `T = 2σ₁`.
    pub height: Option<f64>,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            nodes_per_edge: 256,
            rule: QuadratureRule::Midpoint,
            reach: 0.0,
            height: None,
        }
    }
}

/// `[x0, x1] × [−height, height]`, traversed counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x0: f64,
    pub x1: f64,
    pub height: f64,
}

impl Rectangle {
    fn corners(&self) -> [Complex64; 4] {
        let t = self.height;
        [
            Complex64::new(self.x0, -t),
            Complex64::new(self.x1, -t),
            Complex64::new(self.x1, t),
            Complex64::new(self.x0, t),
        ]
    }

    /// Distance from a real point to the rectangle's boundary.
    pub fn distance_to_boundary(&self, x: f64) -> f64 {
        let horizontal = if x < self.x0 {
            self.x0 - x
        } else if x > self.x1 {
            x - self.x1
        } else {
            0.0
        };
        let vertical = (x - self.x0).abs().min((x - self.x1).abs());
        vertical.min(horizontal.hypot(self.height))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub z: Complex64,
    /// Oriented weight `dz`.
    pub dz: Complex64,
    /// `|dz|`.
    pub abs_dz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub region: Region,
    pub rectangles: Vec<Rectangle>,
    pub nodes_per_edge: usize,
    pub rule: QuadratureRule,
}

impl Contour {
    pub fn height(&self) -> f64 {
        self.rectangles[0].height
    }

    pub fn with_nodes(&self, nodes_per_edge: usize) -> Self {
        Self {
            nodes_per_edge,
            ..self.clone()
        }
    }

    pub fn with_height(&self, height: f64) -> Self {
        let mut c = self.clone();
        c.rectangles.iter_mut().for_each(|r| r.height = height);
        c
    }

    pub fn refined(&self) -> Self {
        self.with_nodes(self.nodes_per_edge * 2)
    }

    fn panels(&self) -> usize {
        match self.rule {
            QuadratureRule::Midpoint => self.nodes_per_edge,
            QuadratureRule::GaussLegendre8 => self.nodes_per_edge.div_ceil(8).max(1),
        }
    }

    /// Largest panel width over all edges.
    pub fn node_spacing(&self) -> f64 {
        let longest = self
            .rectangles
            .iter()
            .map(|r| (r.x1 - r.x0).max(2.0 * r.height))
            .fold(0.0, f64::max);
        longest / self.panels() as f64
    }

    pub fn distance_to(&self, x: f64) -> f64 {
        self.rectangles
            .iter()
            .map(|r| r.distance_to_boundary(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn node_count(&self) -> usize {
        let per_edge = match self.rule {
            QuadratureRule::Midpoint => self.nodes_per_edge,
            QuadratureRule::GaussLegendre8 => 8 * self.panels(),
        };
        4 * per_edge * self.rectangles.len()
    }

    pub fn nodes(&self) -> Vec<Node> {
        let panels = self.panels();
        let mut out = Vec::with_capacity(self.node_count());
        for rect in &self.rectangles {
            let c = rect.corners();
            for e in 0..4 {
                let (a, b) = (c[e], c[(e + 1) % 4]);
                let step = (b - a) / panels as f64;
                for p in 0..panels {
                    let start = a + step * p as f64;
                    match self.rule {
                        QuadratureRule::Midpoint => out.push(Node {
                            z: start + step * 0.5,
                            dz: step,
                            abs_dz: step.norm(),
                        }),
                        QuadratureRule::GaussLegendre8 => {
                            for (&x, &w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
                                for s in [-x, x] {
                                    let dz = step * (0.5 * w);
                                    out.push(Node {
                                        z: start + step * (0.5 * (1.0 + s)),
                                        dz,
                                        abs_dz: dz.norm(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// One rectangle per component of `region`, vertical edges on its boundary,
/// half-height `2σ₁` unless overridden.
pub fn build_contour(decomp: &SpectralDecomposition, region: &Region, opts: &ContourOptions) -> Result<Contour> {
    let sigma1 = decomp.sigma_max();
    if !(sigma1 > 0.0) {
        return Err(Error::Precondition("contour needs sigma1 > 0".into()));
    }
    if opts.nodes_per_edge == 0 {
        return Err(Error::InvalidArgument("nodes_per_edge must be positive".into()));
    }
    if !(opts.reach >= 0.0) {
        return Err(Error::InvalidArgument(format!("reach must be non-negative, got {}", opts.reach)));
    }
    let height = opts.height.unwrap_or(2.0 * sigma1);
    if !(height > 0.0) || !height.is_finite() {
        return Err(Error::InvalidArgument(format!("contour height must be positive, got {height}")));
    }
    let clip = 2.0 * sigma1 + opts.reach + 1.0;
    let rectangles = region
        .clipped(clip)?
        .into_iter()
        .map(|(x0, x1)| Rectangle { x0, x1, height })
        .collect();
    Ok(Contour {
        region: region.clone(),
        rectangles,
        nodes_per_edge: opts.nodes_per_edge,
        rule: opts.rule,
    })
}

/// Deterministic pairwise reduction of `f` over `range`; large halves run
/// in parallel but the tree shape depends only on the range.
fn tree_reduce<T, F, C>(range: Range<usize>, f: &F, combine: &C) -> T
where
    T: Send,
    F: Fn(usize) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    let len = range.end - range.start;
    if len <= 8 {
        let mut it = range.map(f);
        let first = it.next().expect("non-empty range");
        return it.fold(first, |a, b| combine(a, b));
    }
    let mid = range.start + len / 2;
    let (a, b) = if len >= 256 {
        rayon::join(
            || tree_reduce(range.start..mid, f, combine),
            || tree_reduce(mid..range.end, f, combine),
        )
    } else {
        (
            tree_reduce(range.start..mid, f, combine),
            tree_reduce(mid..range.end, f, combine),
        )
    };
    combine(a, b)
}

fn add_matrices(mut a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix {
    a.add_assign_scaled(&b, Complex64::new(1.0, 0.0));
    a
}

/// Gauss–Jordan inverse with partial pivoting.
fn complex_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .expect("non-empty");
        let p = a[(pivot, col)];
        if p.norm() == 0.0 || !p.norm().is_finite() {
            return Err(Error::Numerical("singular shifted matrix on the contour".into()));
        }
        if pivot != col {
            for j in 0..n {
                let t = a[(col, j)];
                a[(col, j)] = a[(pivot, j)];
                a[(pivot, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(pivot, j)];
                inv[(pivot, j)] = t;
            }
        }
        let pinv = p.inv();
        for j in 0..n {
            a[(col, j)] *= pinv;
            inv[(col, j)] *= pinv;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[(i, col)];
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for j in 0..n {
                let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                a[(i, j)] -= f * ac;
                inv[(i, j)] -= f * ic;
            }
        }
    }
    Ok(inv)
}

fn check_poles(eigenvalues: &[f64], gamma: &Contour) -> Result<()> {
    let sigma1 = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tol = 1e-9 * sigma1.max(1.0);
    for &l in eigenvalues {
        let d = gamma.distance_to(l);
        if d < tol {
            return Err(Error::Pole {
                point: format!("contour of {}", gamma.region),
                eigenvalue: l,
                distance: d,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourProjection {
    pub projector: DenseMatrix,
    /// Largest `|Im|` entry of the quadrature sum.
    pub imag_residue: f64,
    pub nodes_per_edge: usize,
    /// Operator-norm change from the previous refinement level.
    pub refinement_change: f64,
}

/// `(1/2πi)∮(z − A)⁻¹dz` by quadrature with a fixed node set.
pub fn contour_integral(a: &DenseMatrix, gamma: &Contour) -> Result<ComplexMatrix> {
    let n = a.rows();
    let nodes = gamma.nodes();
    let base = a.to_complex();
    let scale = Complex64::new(0.0, -1.0 / (2.0 * PI));
    let term = |i: usize| -> Result<ComplexMatrix> {
        let node = nodes[i];
        let shifted = ComplexMatrix::from_fn(n, n, |r, c| {
            let d = if r == c { node.z } else { Complex64::new(0.0, 0.0) };
            d - base[(r, c)]
        });
        Ok(complex_inverse(&shifted)?.scale(node.dz * scale))
    };
    tree_reduce(0..nodes.len(), &term, &|x: Result<ComplexMatrix>, y: Result<ComplexMatrix>| {
        Ok(add_matrices(x?, y?))
    })
}

/// Spectral projector of `A` onto the eigenvalues enclosed by `gamma`,
/// refined by doubling until successive levels differ by at most
/// [`DEFAULT_TARGET`] in operator norm.
pub fn contour_projector(a: &DenseMatrix, gamma: &Contour) -> Result<DenseMatrix> {
    Ok(contour_projector_with(a, gamma, DEFAULT_TARGET)?.projector)
}

pub fn contour_projector_with(a: &DenseMatrix, gamma: &Contour, target: f64) -> Result<ContourProjection> {
    a.check_symmetric()?;
    check_poles(&symmetric_eigenvalues(a)?, gamma)?;
    let mut level = gamma.clone();
    let mut prev = contour_integral(a, &level)?;
    loop {
        if level.nodes_per_edge * 2 > MAX_NODES_PER_EDGE {
            return Err(Error::Convergence {
                achieved: f64::NAN,
                nodes: level.nodes_per_edge,
            });
        }
        level = level.refined();
        let next = contour_integral(a, &level)?;
        let mut diff = next.clone();
        diff.add_assign_scaled(&prev, Complex64::new(-1.0, 0.0));
        let change = complex_operator_norm(&diff)?;
        if change <= target {
            let imag_residue = next.as_slice().iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
            return Ok(ContourProjection {
                projector: next.real_part().symmetrized(),
                imag_residue,
                nodes_per_edge: level.nodes_per_edge,
                refinement_change: change,
            });
        }
        if level.nodes_per_edge * 2 > MAX_NODES_PER_EDGE {
            return Err(Error::Convergence {
                achieved: change,
                nodes: level.nodes_per_edge,
            });
        }
        prev = next;
    }
}

// ---------------------------------------------------------------------------
// Diagnostics

/// Premises the contour estimates silently use. When one fails the
/// estimates are reported but not expected to hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub delta_le_sigma1: bool,
    pub width_le_2sigma1: bool,
    pub height_covers_reach: bool,
    pub k_gt_1: bool,
}

impl Regime {
    pub fn holds(&self) -> bool {
        self.delta_le_sigma1 && self.width_le_2sigma1 && self.height_covers_reach && self.k_gt_1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticChecks {
    /// `max ‖E R E R‖ ≤ h`.
    pub erer_le_h: bool,
    /// `(1/2π)∮‖R E R‖ ≤ rhs_aea`.
    pub rer_le_aea: bool,
    /// `(1/2π)∮‖R‖ ≤ rhs_r`.
    pub r_le_bound: bool,
    /// Double-jump envelope per `s`.
    pub envelope: Vec<bool>,
    /// Partial-sum tail check; `None` unless `h < 1/2`.
    pub partial_sum: Option<bool>,
}

impl DiagnosticChecks {
    pub fn all(&self) -> bool {
        self.erer_le_h
            && self.rer_le_aea
            && self.r_le_bound
            && self.envelope.iter().all(|&b| b)
            && self.partial_sum.unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourDiagnostics {
    pub max_erer: f64,
    pub int_rer: f64,
    pub int_r: f64,
    pub epsilon_gamma: f64,
    /// `‖F_s‖` for `s = 1..=s_max`.
    pub fs_norms: Vec<f64>,
    pub series_sum: f64,
    /// `‖Σ_{s≤s_max} F_s − (Π_H̃ − Π_H)‖`.
    pub partial_sum_error: f64,
    pub measured_delta_pi: f64,
    pub rhs_aea: f64,
    pub rhs_r: f64,
    pub h: f64,
    pub delta_d: f64,
    pub r: usize,
    pub x: f64,
    pub e_norm: f64,
    pub k: f64,
    pub c_d: usize,
    pub node_spacing: f64,
    pub nodes_per_edge: usize,
    pub regime: Regime,
    pub checks: DiagnosticChecks,
    /// Set when the first pass failed a check and the reported values come
    /// from a doubled node count.
    pub refined: bool,
}

struct NodeAccum {
    fs: Vec<ComplexMatrix>,
    int_rer: f64,
    int_r: f64,
    max_erer: f64,
    max_eps: f64,
}

fn combine_accum(mut a: NodeAccum, b: NodeAccum) -> NodeAccum {
    for (x, y) in a.fs.iter_mut().zip(b.fs) {
        x.add_assign_scaled(&y, Complex64::new(1.0, 0.0));
    }
    a.int_rer += b.int_rer;
    a.int_r += b.int_r;
    a.max_erer = a.max_erer.max(b.max_erer);
    a.max_eps = a.max_eps.max(b.max_eps);
    a
}

/// `E(z)` in the eigenbasis: `(Ê D)` with `D = diag(1/(z − λ_i))`.
fn e_times_d(e_hat: &DenseMatrix, d: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(e_hat.rows(), e_hat.cols(), |i, j| d[j] * e_hat[(i, j)])
}

fn resolvent_diagonal(ev: &[f64], z: Complex64, tol: f64) -> Result<Vec<Complex64>> {
    ev.iter()
        .map(|&l| {
            let w = z - l;
            if w.norm() < tol {
                Err(Error::Pole {
                    point: format!("{z}"),
                    eigenvalue: l,
                    distance: w.norm(),
                })
            } else {
                Ok(w.inv())
            }
        })
        .collect()
}

/// Evaluates every contour estimate on one instance, in the eigenbasis of
/// `A` (all norms involved are unitarily invariant).
pub fn contour_diagnostics(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    gamma: &Contour,
    s_max: usize,
    k: f64,
) -> Result<ContourDiagnostics> {
    let n = decomp.n();
    if e.rows() != n || e.cols() != n {
        return Err(Error::Shape(format!("noise is {}x{} but A is {n}x{n}", e.rows(), e.cols())));
    }
    e.check_symmetric()?;
    if s_max == 0 {
        return Err(Error::InvalidArgument("s_max must be at least 1".into()));
    }
    let e_norm = crate::eigen::operator_norm(e)?;
    let stats = region_stats(decomp, &gamma.region, k, e_norm)?;
    if !(stats.delta_d > 0.0) {
        return Err(Error::Precondition("delta_D must be positive".into()));
    }
    if !(k > 1.0) {
        return Err(Error::Precondition(format!("K must exceed 1, got {k}")));
    }
    let x = interaction_x(decomp, e, &stats.neighborhood)?;
    let sigma1 = decomp.sigma_max();
    let ev = decomp.eigenvalues();
    check_poles(ev, gamma)?;
    let e_hat = decomp.in_eigenbasis(e)?.symmetrized();
    let nodes = gamma.nodes();
    let tol = 1e-9 * sigma1.max(1.0);
    let scale = Complex64::new(0.0, -1.0 / (2.0 * PI));
    let in_n: Vec<bool> = (0..n).map(|i| stats.neighborhood.contains(&i)).collect();

    let term = |idx: usize| -> Result<NodeAccum> {
        let node = nodes[idx];
        let d = resolvent_diagonal(ev, node.z, tol)?;
        let ed = e_times_d(&e_hat, &d);
        // R E R = D Ê D
        let rer = ComplexMatrix::from_fn(n, n, |i, j| d[i] * ed[(i, j)]);
        let erer = ed.matmul(&ed);
        let r_norm = d.iter().fold(0.0f64, |m, w| m.max(w.norm()));
        let eps: f64 = (0..n).filter(|&i| in_n[i]).map(|i| d[i].norm_sqr()).sum();
        let w = node.dz * scale;
        let mut fs = Vec::with_capacity(s_max);
        let mut cur = rer.clone();
        for s in 1..=s_max {
            if s > 1 {
                cur = cur.matmul(&ed);
            }
            fs.push(cur.scale(w));
        }
        Ok(NodeAccum {
            fs,
            int_rer: complex_operator_norm(&rer)? * node.abs_dz / (2.0 * PI),
            int_r: r_norm * node.abs_dz / (2.0 * PI),
            max_erer: complex_operator_norm(&erer)?,
            max_eps: eps,
        })
    };
    let acc = tree_reduce(0..nodes.len(), &term, &|a: Result<NodeAccum>, b: Result<NodeAccum>| {
        Ok(combine_accum(a?, b?))
    })?;

    let fs_norms = acc
        .fs
        .iter()
        .map(complex_operator_norm)
        .collect::<Result<Vec<f64>>>()?;
    let series_sum = fs_norms.iter().sum();

    // Measured ΔΠ, expressed in the eigenbasis of A.
    let noisy = spectral_decompose(&decomp.reconstruct().add(e)?.symmetrized())?;
    let inside_t: Vec<usize> = (0..n).filter(|&i| gamma.region.contains(noisy.eigenvalues()[i])).collect();
    let pi_t = decomp.in_eigenbasis(&noisy.projector(&inside_t)?)?;
    let pi_h = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j && stats.inside.contains(&i) {
            1.0
        } else {
            0.0
        }
    });
    let delta_pi = pi_t.sub(&pi_h)?.symmetrized();
    let measured_delta_pi = crate::eigen::operator_norm(&delta_pi)?;
    let mut partial = ComplexMatrix::zeros(n, n);
    for f in &acc.fs {
        partial.add_assign_scaled(f, Complex64::new(1.0, 0.0));
    }
    partial.add_assign_scaled(&delta_pi.to_complex(), Complex64::new(-1.0, 0.0));
    let partial_sum_error = complex_operator_norm(&partial)?;

    let c_d = stats.c_d as f64;
    let rf = stats.r as f64;
    let delta = stats.delta_d;
    let h = h_parameter(stats.r, x, e_norm, delta, k).h;
    let rhs_aea = c_d
        * (rf * rf * x / delta
            + (1.0 + 1.0 / PI) / k
            + 16.0 / (2.0 * PI) / (k - 1.0) * (3.0 * sigma1 / delta).ln());
    let rhs_r = c_d * (2.0 + 4.0 * (5.0 * sigma1 / delta).ln()) / (2.0 * PI);

    let m = acc.int_r.max(acc.int_rer);
    let envelope = fs_norms
        .iter()
        .enumerate()
        .map(|(i, &f)| f <= h.powi(((i + 1) / 2) as i32) * m * (1.0 + CUSHION))
        .collect();
    let tail_power = (s_max as i32 + 1) / 2;
    let partial_sum = (h < 0.5).then(|| partial_sum_error <= h.powi(tail_power) * m + 1e-6);
    let height = gamma.height();
    let regime = Regime {
        delta_le_sigma1: delta <= sigma1,
        width_le_2sigma1: gamma.rectangles.iter().all(|r| r.x1 - r.x0 <= 2.0 * sigma1),
        height_covers_reach: height >= k * e_norm + delta,
        k_gt_1: k > 1.0,
    };
    let checks = DiagnosticChecks {
        erer_le_h: acc.max_erer <= h * (1.0 + CUSHION),
        rer_le_aea: acc.int_rer <= rhs_aea * (1.0 + CUSHION),
        r_le_bound: acc.int_r <= rhs_r * (1.0 + CUSHION),
        envelope,
        partial_sum,
    };
    Ok(ContourDiagnostics {
        max_erer: acc.max_erer,
        int_rer: acc.int_rer,
        int_r: acc.int_r,
        epsilon_gamma: acc.max_eps.sqrt(),
        fs_norms,
        series_sum,
        partial_sum_error,
        measured_delta_pi,
        rhs_aea,
        rhs_r,
        h,
        delta_d: delta,
        r: stats.r,
        x,
        e_norm,
        k,
        c_d: stats.c_d,
        node_spacing: gamma.node_spacing(),
        nodes_per_edge: gamma.nodes_per_edge,
        regime,
        checks,
        refined: false,
    })
}

/// [`contour_diagnostics`], rerun once with doubled nodes if any check
/// fails, since node sampling can miss the true maximum.
pub fn contour_diagnostics_verified(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    gamma: &Contour,
    s_max: usize,
    k: f64,
) -> Result<ContourDiagnostics> {
    let first = contour_diagnostics(decomp, e, gamma, s_max, k)?;
    if first.checks.all() {
        return Ok(first);
    }
    let mut second = contour_diagnostics(decomp, e, &gamma.refined(), s_max, k)?;
    second.refined = true;
    Ok(second)
}

/// Norms of the four pieces of `E R E R` when `R` is split into its part on
/// the eigenvectors in `neighborhood` and the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MSplit {
    pub direct: f64,
    pub parts: [f64; 4],
}

pub fn m_split(decomp: &SpectralDecomposition, e: &DenseMatrix, z: Complex64, neighborhood: &[usize]) -> Result<MSplit> {
    let n = decomp.n();
    let e_hat = decomp.in_eigenbasis(e)?.symmetrized();
    let tol = 1e-12 * decomp.sigma_max().max(1.0);
    let d = resolvent_diagonal(decomp.eigenvalues(), z, tol)?;
    let zero = Complex64::new(0.0, 0.0);
    let d_n: Vec<Complex64> = (0..n).map(|i| if neighborhood.contains(&i) { d[i] } else { zero }).collect();
    let d_p: Vec<Complex64> = (0..n).map(|i| if neighborhood.contains(&i) { zero } else { d[i] }).collect();
    let direct = complex_operator_norm(&e_times_d(&e_hat, &d).matmul(&e_times_d(&e_hat, &d)))?;
    let (en, ep) = (e_times_d(&e_hat, &d_n), e_times_d(&e_hat, &d_p));
    let parts = [
        complex_operator_norm(&en.matmul(&en))?,
        complex_operator_norm(&en.matmul(&ep))?,
        complex_operator_norm(&ep.matmul(&en))?,
        complex_operator_norm(&ep.matmul(&ep))?,
    ];
    Ok(MSplit { direct, parts })
}

/// `m_split` at `count` seeded random contour nodes.
pub fn m_split_sample(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    gamma: &Contour,
    neighborhood: &[usize],
    count: usize,
    seed: u64,
) -> Result<Vec<MSplit>> {
    let nodes = gamma.nodes();
    let mut rng = crate::randmat::stream_rng(seed, 0x5_1171);
    (0..count)
        .map(|_| m_split(decomp, e, nodes[rng.random_range(0..nodes.len())].z, neighborhood))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyKernel {
    /// `(2/a)·arctan(T/a)`.
    pub closed_form: f64,
    pub quadrature: f64,
    /// `π/a`.
    pub bound: f64,
    /// `closed_form ≤ π/a`; only claimed when `a ≤ T`.
    pub within_bound: bool,
}

/// `∫_{−T}^{T} dt/(a² + t²)`, closed form and by graded Gauss–Legendre.
pub fn cauchy_kernel_integral(a: f64, t: f64) -> Result<CauchyKernel> {
    if !(a > 0.0) || !(t > 0.0) || !a.is_finite() || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("a and T must be positive, got a = {a}, T = {t}")));
    }
    let f = |s: f64| 1.0 / (a * a + s * s);
    let mut edges = vec![0.0];
    let mut x = a.min(t);
    while x < t {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(t);
    let mut half = 0.0;
    for w in edges.windows(2) {
        let sub = 4;
        let h = (w[1] - w[0]) / sub as f64;
        for p in 0..sub {
            let mid = w[0] + h * (p as f64 + 0.5);
            for (&xn, &wn) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
                half += 0.5 * h * wn * (f(mid - 0.5 * h * xn) + f(mid + 0.5 * h * xn));
            }
        }
    }
    let closed_form = 2.0 / a * (t / a).atan();
    let bound = PI / a;
    Ok(CauchyKernel {
        closed_form,
        quadrature: 2.0 * half,
        bound,
        within_bound: closed_form <= bound,
    })
}
