//! Symmetric eigensolver (Householder tridiagonalization followed by implicit
//! QL with Wilkinson-style shifts) and everything derived from a spectral
//! decomposition: singular values, gaps, projectors, resolvents and norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DenseMatrix};

/// Eigenvalues closer than `CLUSTER_TOL * max(1, σ₁)` are one cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Ordered eigenvalues (descending) and matching orthonormal eigenvectors,
/// stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    vectors: DenseMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// `σ₁/σ_n`; `f64::INFINITY` when the matrix is singular.
    pub kappa: f64,
    pub kappa_infinite: bool,
    pub min_gap: f64,
    /// `λ_i − λ_{i+1}` for consecutive eigenvalues.
    pub gaps: Vec<f64>,
}

impl SpectralDecomposition {
    /// Assembles a decomposition from parts, sorting descending. Intended for
    /// constructions where the eigenpairs are known analytically.
    pub fn from_parts(eigenvalues: Vec<f64>, vectors: DenseMatrix) -> Result<Self> {
        let n = eigenvalues.len();
        if vectors.rows() != n || vectors.cols() != n {
            return Err(Error::Shape(format!(
                "{n} eigenvalues but a {}x{} eigenvector matrix",
                vectors.rows(),
                vectors.cols()
            )));
        }
        Ok(finalize(eigenvalues, vectors))
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector matrix `U` (column `i` pairs with `eigenvalues()[i]`).
    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// `σ₁ ≥ … ≥ σ_n`, the sorted absolute eigenvalues.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.eigenvalues.iter().map(|v| v.abs()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn sigma_max(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sigma_min(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// `δ_i = λ_i − λ_{i+1}` (0-based `i`, so `gaps()[0]` is `δ_1`).
    pub fn gaps(&self) -> Vec<f64> {
        self.eigenvalues.windows(2).map(|w| w[0] - w[1]).collect()
    }

    pub fn summary(&self) -> SpectrumSummary {
        spectrum_summary(self)
    }

    /// `U Λ Uᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.n();
        let u = &self.vectors;
        DenseMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| u[(i, k)] * self.eigenvalues[k] * u[(j, k)])
                .sum()
        })
    }

    /// Decomposition of `A + tI` (same eigenvectors).
    pub fn shifted(&self, t: f64) -> Self {
        Self {
            eigenvalues: self.eigenvalues.iter().map(|v| v + t).collect(),
            vectors: self.vectors.clone(),
        }
    }

    /// Groups indices of numerically equal eigenvalues.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let tol = CLUSTER_TOL * self.sigma_max().max(1.0);
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, &v) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some(c) if self.eigenvalues[*c.last().unwrap()] - v <= tol => c.push(i),
                _ => out.push(vec![i]),
            }
        }
        out
    }

    /// `Σ_{i∈idx} u_i u_iᵀ` for 0-based indices.
    pub fn projector(&self, idx: &[usize]) -> Result<DenseMatrix> {
        projector(self, idx)
    }

    pub fn resolvent(&self, z: Complex64) -> Result<ComplexMatrix> {
        resolvent(self, z)
    }

    /// `Uᵀ M U`, the matrix of bilinear forms `u_iᵀ M u_j`.
    pub fn in_eigenbasis(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.rows() != self.n() || m.cols() != self.n() {
            return Err(Error::Shape(format!(
                "expected {}x{} matrix, got {}x{}",
                self.n(),
                self.n(),
                m.rows(),
                m.cols()
            )));
        }
        self.vectors.transpose().matmul(m)?.matmul(&self.vectors)
    }
}

/// Full spectral decomposition of a symmetric matrix, eigenvalues descending.
///
/// Eigenvectors are normalised so their first non-negligible component is
/// positive; exact ties are ordered lexicographically by eigenvector so the
/// output is a deterministic function of the input bits.
pub fn spectral_decompose(a: &DenseMatrix) -> Result<SpectralDecomposition> {
    a.check_symmetric()?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let mut v = a.symmetrized();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, Some(&mut v))?;
    Ok(finalize(d, v))
}

/// Decomposition computed in a seeded random orthonormal frame, then mapped
/// back. Inside a degenerate cluster the returned basis depends on `seed`;
/// everything basis-free (eigenvalues, cluster projectors) does not.
pub fn spectral_decompose_rotated(a: &DenseMatrix, seed: u64) -> Result<SpectralDecomposition> {
    a.check_symmetric()?;
    let q = crate::randmat::random_orthogonal(a.rows(), seed);
    let b = q.transpose().matmul(a)?.matmul(&q)?.symmetrized();
    let inner = spectral_decompose(&b)?;
    let vectors = q.matmul(inner.vectors())?;
    Ok(finalize(inner.eigenvalues, vectors))
}

/// Eigenvalues only, descending.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    a.check_symmetric()?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    let mut v = a.symmetrized();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, None)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Largest singular value of an arbitrary real matrix.
///
/// Symmetric input uses `max |λ_i|`; anything else uses the top eigenvalue of
/// the smaller Gram matrix.
pub fn operator_norm(m: &DenseMatrix) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::Shape("operator norm of an empty matrix".into()));
    }
    if m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    if m.is_symmetric() {
        let ev = symmetric_eigenvalues(m)?;
        return Ok(ev[0].abs().max(ev[ev.len() - 1].abs()));
    }
    let gram = if m.rows() <= m.cols() {
        m.matmul(&m.transpose())?
    } else {
        m.transpose().matmul(m)?
    };
    let ev = symmetric_eigenvalues(&gram.symmetrized())?;
    Ok(ev[0].max(0.0).sqrt())
}

/// Largest singular value of a complex matrix, via the Hermitian Gram matrix
/// `MᴴM` and its real symmetric embedding.
pub fn complex_operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::Shape("operator norm of an empty matrix".into()));
    }
    let gram = m.conj_transpose().matmul(m);
    let scale = gram.as_slice().iter().fold(0.0f64, |s, z| s.max(z.norm()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let emb = gram.real_embedding().symmetrized();
    let ev = symmetric_eigenvalues(&emb)?;
    Ok(ev[0].max(0.0).sqrt())
}

pub fn projector(decomp: &SpectralDecomposition, idx: &[usize]) -> Result<DenseMatrix> {
    let n = decomp.n();
    if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, dim: n });
    }
    let u = decomp.vectors();
    let mut p = DenseMatrix::zeros(n, n);
    for &k in idx {
        for i in 0..n {
            let ui = u[(i, k)];
            if ui == 0.0 {
                continue;
            }
            for j in 0..n {
                p[(i, j)] += ui * u[(j, k)];
            }
        }
    }
    Ok(p)
}

/// `(zI − A)⁻¹ = Σ u_i u_iᵀ / (z − λ_i)`.
pub fn resolvent(decomp: &SpectralDecomposition, z: Complex64) -> Result<ComplexMatrix> {
    let n = decomp.n();
    let tol = 1e-12 * decomp.sigma_max().max(1.0);
    let mut weights = Vec::with_capacity(n);
    for &lam in decomp.eigenvalues() {
        let dist = (z - lam).norm();
        if dist < tol {
            return Err(Error::Pole {
                point: format!("{z}"),
                eigenvalue: lam,
                distance: dist,
            });
        }
        weights.push((z - lam).inv());
    }
    let u = decomp.vectors();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| weights[k] * (u[(i, k)] * u[(j, k)]))
            .sum()
    }))
}

pub fn spectrum_summary(decomp: &SpectralDecomposition) -> SpectrumSummary {
    let sigma_max = decomp.sigma_max();
    let sigma_min = decomp.sigma_min();
    let kappa_infinite = sigma_min == 0.0;
    let gaps = decomp.gaps();
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    SpectrumSummary {
        sigma_max,
        sigma_min,
        kappa: if kappa_infinite {
            f64::INFINITY
        } else {
            sigma_max / sigma_min
        },
        kappa_infinite,
        // A 1x1 matrix has no gaps; report 0 rather than infinity.
        min_gap: if gaps.is_empty() { 0.0 } else { min_gap.max(0.0) },
        gaps,
    }
}

fn finalize(eigenvalues: Vec<f64>, vectors: DenseMatrix) -> SpectralDecomposition {
    let n = eigenvalues.len();
    let mut cols: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut c = vectors.column(k);
            normalize_sign(&mut c);
            (eigenvalues[k], c)
        })
        .collect();
    cols.sort_by(|a, b| {
        b.0.total_cmp(&a.0).then_with(|| {
            for (x, y) in a.1.iter().zip(&b.1) {
                match y.total_cmp(x) {
                    std::cmp::Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            std::cmp::Ordering::Equal
        })
    });
    let vals = cols.iter().map(|c| c.0).collect();
    let vecs = DenseMatrix::from_fn(n, n, |i, k| cols[k].1[i]);
    SpectralDecomposition {
        eigenvalues: vals,
        vectors: vecs,
    }
}

fn normalize_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * scale.max(f64::MIN_POSITIVE)) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Householder reduction to tridiagonal form. On return `d` holds the
/// diagonal, `e[1..]` the sub-diagonal and `v` the accumulated orthogonal
/// transformation.
fn tred2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`, optionally rotating `v` along.
/// Gives up after `100·n` QL sweeps in total.
fn tql2(d: &mut [f64], e: &mut [f64], mut v: Option<&mut DenseMatrix>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let cap = 100 * n.max(1);
    let mut sweeps = 0usize;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                sweeps += 1;
                if sweeps > cap {
                    return Err(Error::Numerical(format!(
                        "tridiagonal QL did not converge within {cap} sweeps"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let hk = v[(k, i + 1)];
                            v[(k, i + 1)] = s * v[(k, i)] + c * hk;
                            v[(k, i)] = c * v[(k, i)] - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    Ok(())
}
