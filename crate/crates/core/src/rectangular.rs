//! Rectangular matrices through the symmetrization `[[0, A], [Aᵀ, 0]]`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::certify::{gap_rhs, k_threshold, Certificate, ConclusionKind, Theorem};
use crate::eigen::{operator_norm, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};
use crate::region::{interaction_x, region_stats, Region};
use crate::svd::{singular_values, svd_wide, Svd};

/// Where an eigenpair of the symmetrized matrix comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymIndex {
    /// `σ_i` with eigenvector `(u_i, v_i)/√2`.
    Positive(usize),
    /// `−σ_i` with eigenvector `(u_i, −v_i)/√2`.
    Negative(usize),
    /// `0` with eigenvector `(0, v_k)`, `v_k` in the null space of `A`.
    Zero(usize),
}

#[derive(Debug, Clone)]
pub struct SymmetrizedPair {
    /// Rows of the working matrix (`m ≤ n`).
    pub m: usize,
    pub n: usize,
    /// The input had more rows than columns and was transposed.
    pub transposed: bool,
    pub script_a: DenseMatrix,
    pub svd: Svd,
    pub decomposition: SpectralDecomposition,
    /// `index[k]` describes eigenpair `k` of `decomposition`.
    pub index: Vec<SymIndex>,
}

impl SymmetrizedPair {
    pub fn zero_multiplicity(&self) -> usize {
        self.n - self.m
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.svd.singular_values
    }

    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.index.len())
            .filter(|&k| matches!(self.index[k], SymIndex::Positive(_)))
            .collect()
    }
}

/// `[[0, A], [Aᵀ, 0]]` for an `m × n` matrix.
pub fn symmetric_embedding(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = (a.rows(), a.cols());
    DenseMatrix::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
        (true, false) => a[(i, j - m)],
        (false, true) => a[(j, i - m)],
        _ => 0.0,
    })
}

fn oriented(a: &DenseMatrix) -> (DenseMatrix, bool) {
    if a.rows() > a.cols() {
        (a.transpose(), true)
    } else {
        (a.clone(), false)
    }
}

/// Builds the symmetrized matrix and its eigendecomposition directly from
/// the singular value decomposition. Inputs with more rows than columns are
/// transposed first.
pub fn symmetrize(a: &DenseMatrix) -> Result<SymmetrizedPair> {
    if a.is_empty() {
        return Err(Error::Shape("cannot symmetrize an empty matrix".into()));
    }
    let (w, transposed) = oriented(a);
    let (m, n) = (w.rows(), w.cols());
    let svd = svd_wide(&w)?;
    let size = m + n;
    let mut values = Vec::with_capacity(size);
    let mut labels = Vec::with_capacity(size);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(size);
    for i in 0..m {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; size];
            for r in 0..m {
                v[r] = svd.u[(r, i)] * FRAC_1_SQRT_2;
            }
            for c in 0..n {
                v[m + c] = sign * svd.v[(c, i)] * FRAC_1_SQRT_2;
            }
            values.push(sign * svd.singular_values[i]);
            labels.push(if sign > 0.0 { SymIndex::Positive(i) } else { SymIndex::Negative(i) });
            cols.push(v);
        }
    }
    for k in m..n {
        let mut v = vec![0.0; size];
        for c in 0..n {
            v[m + c] = svd.v[(c, k)];
        }
        values.push(0.0);
        labels.push(SymIndex::Zero(k - m));
        cols.push(v);
    }
    let vectors = DenseMatrix::from_fn(size, size, |i, j| cols[j][i]);
    let decomposition = SpectralDecomposition::from_parts(values, vectors)?;
    // from_parts reorders and may flip signs; recover labels by matching.
    let index = (0..size)
        .map(|k| {
            let v = decomposition.vector(k);
            let best = (0..size)
                .max_by(|&x, &y| dot(&v, &cols[x]).abs().total_cmp(&dot(&v, &cols[y]).abs()))
                .expect("non-empty");
            labels[best]
        })
        .collect();
    Ok(SymmetrizedPair {
        m,
        n,
        transposed,
        script_a: symmetric_embedding(&w),
        svd,
        decomposition,
        index,
    })
}

/// `max_{i,j ∈ idx} |u_iᵀ E v_j|`.
pub fn rect_interaction_x(svd: &Svd, e: &DenseMatrix, idx: &[usize]) -> f64 {
    let mut x = 0.0f64;
    for &j in idx {
        let vj = svd.v.column(j);
        let ev = e.matvec(&vj);
        for &i in idx {
            x = x.max(dot(&svd.u.column(i), &ev).abs());
        }
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RectMode {
    Stability,
    LeastSingular,
}

impl std::str::FromStr for RectMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stability" => Ok(RectMode::Stability),
            "least_singular" | "least-singular" => Ok(RectMode::LeastSingular),
            _ => Err(Error::Parse(format!("rect mode must be stability or least_singular, got '{s}'"))),
        }
    }
}

/// Stability or least-singular-value certificate for an `m × n` pair,
/// evaluated through the symmetrized system.
///
/// `r` and `x` are taken conservatively: `r = max(r_rect, r_sym/2)` and
/// `x = max(x_rect, x_sym)`, so the symmetric predicate with doubled
/// constants is implied whichever count is larger.
pub fn rect_certificates(
    a: &DenseMatrix,
    e: &DenseMatrix,
    region: Option<&Region>,
    k: f64,
    mode: RectMode,
) -> Result<Certificate> {
    if a.rows() != e.rows() || a.cols() != e.cols() {
        return Err(Error::Shape(format!(
            "A is {}x{} but E is {}x{}",
            a.rows(),
            a.cols(),
            e.rows(),
            e.cols()
        )));
    }
    let pair = symmetrize(a)?;
    let (e_w, _) = oriented(e);
    let script_e = symmetric_embedding(&e_w);
    let e_norm = operator_norm(&e_w)?;
    let sv = pair.singular_values();
    let sigma1 = sv[0];
    let sigma_m = sv[pair.m - 1];
    let reach = k * e_norm;

    let (theorem, sym_region, kind) = match mode {
        RectMode::Stability => {
            let region = region.ok_or_else(|| Error::InvalidArgument("stability mode needs a region".into()))?;
            if region.intervals().iter().any(|iv| !(iv.lo > 0.0)) {
                return Err(Error::Region(format!(
                    "rectangular regions must lie in (0, inf), got {region}"
                )));
            }
            (Theorem::RectStability, region.clone(), ConclusionKind::CountPreserved)
        }
        RectMode::LeastSingular => {
            let mut c = Certificate::default_for(Theorem::RectLeastSingular, ConclusionKind::SigmaMinLowerBound);
            if !(sigma_m > 0.0) {
                c.inputs.insert("sigma1".into(), sigma1);
                c.inputs.insert("sigma_m".into(), sigma_m);
                c.inputs.insert("e_norm".into(), e_norm);
                c.inputs.insert("k".into(), k);
                c.inputs.insert("r".into(), 0.0);
                c.inputs.insert("x".into(), 0.0);
                c.conclusion.value = 0.0;
                c.notes.push("A has a zero singular value".into());
                return Ok(c);
            }
            (
                Theorem::RectLeastSingular,
                Region::single(-sigma_m / 2.0, sigma_m / 2.0)?,
                ConclusionKind::SigmaMinLowerBound,
            )
        }
    };

    let stats = region_stats(&pair.decomposition, &sym_region, k, e_norm)?;
    let x_sym = interaction_x(&pair.decomposition, &script_e, &stats.neighborhood)?;
    let rect_n: Vec<usize> = (0..pair.m)
        .filter(|&i| match mode {
            RectMode::Stability => sym_region.distance(sv[i]) <= reach,
            RectMode::LeastSingular => sv[i] - sigma_m / 2.0 <= reach,
        })
        .collect();
    let x_rect = rect_interaction_x(&pair.svd, &e_w, &rect_n);
    let r = (rect_n.len() as f64).max(stats.r as f64 / 2.0);
    let x = x_rect.max(x_sym);
    let c_d = stats.c_d as f64;

    let mut c = Certificate::default_for(theorem, kind);
    for (key, v) in [
        ("sigma1", sigma1),
        ("e_norm", e_norm),
        ("k", k),
        ("r", r),
        ("x", x),
        ("r_rect", rect_n.len() as f64),
        ("r_sym", stats.r as f64),
        ("x_rect", x_rect),
        ("x_sym", x_sym),
        ("delta_d", stats.delta_d),
        ("c_d", c_d),
    ] {
        c.inputs.insert(key.into(), v);
    }
    match mode {
        RectMode::Stability => {
            let count = sv.iter().filter(|&&s| sym_region.contains(s)).count();
            c.conclusion.value = count as f64;
            c.conclusion.text = format!("singular-value count in {sym_region} preserved ({count})");
            if stats.delta_d > sigma1 || !(stats.delta_d > 0.0) || !(sigma1 > 0.0) {
                c.notes.push(format!("delta_D = {} outside (0, sigma1]", stats.delta_d));
                return Ok(c);
            }
            let kt = k_threshold(52.0, 3.0, stats.delta_d, sigma1, c_d);
            c.inputs.insert("k_threshold".into(), kt);
            c.rhs = gap_rhs(160.0, 5.0, stats.delta_d, sigma1, c_d, r, x, e_norm, k);
            c.applicable = k > kt;
            c.certified = c.applicable && stats.delta_d >= c.rhs;
        }
        RectMode::LeastSingular => {
            c.inputs.insert("sigma_m".into(), sigma_m);
            c.conclusion.value = sigma_m / 2.0;
            c.conclusion.text = format!("sigma_m(A+E) >= sigma_m/2 = {}", sigma_m / 2.0);
            let kt = k_threshold(52.0, 6.0, sigma_m, sigma1, 1.0);
            c.inputs.insert("k_threshold".into(), kt);
            c.rhs = gap_rhs(320.0, 10.0, sigma_m, sigma1, 1.0, r, x, e_norm, k);
            c.applicable = k > kt;
            c.certified = c.applicable && sigma_m >= c.rhs;
        }
    }
    Ok(c)
}

/// Rectangular Weyl: `max_p |σ̃_p − σ_p|` against `‖E‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectWeyl {
    pub e_norm: f64,
    pub max_shift: f64,
}

pub fn rect_weyl_check(a: &DenseMatrix, e: &DenseMatrix) -> Result<RectWeyl> {
    let s = singular_values(a)?;
    let st = singular_values(&a.add(e)?)?;
    let max_shift = s.iter().zip(&st).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(RectWeyl {
        e_norm: operator_norm(e)?,
        max_shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::symmetric_eigenvalues;

    #[test]
    fn symmetrize_examples() {
        let p = symmetrize(&DenseMatrix::from_rows(&[vec![2.0]]).unwrap()).unwrap();
        assert_eq!(p.script_a, DenseMatrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap());
        assert_eq!(p.decomposition.eigenvalues(), &[2.0, -2.0]);

        let a = DenseMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 4.0, 0.0]]).unwrap();
        let p = symmetrize(&a).unwrap();
        let oracle = symmetric_eigenvalues(&p.script_a).unwrap();
        assert_eq!(oracle.len(), 5);
        for (x, y) in p.decomposition.eigenvalues().iter().zip([4.0, 3.0, 0.0, -3.0, -4.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in oracle.iter().zip(p.decomposition.eigenvalues()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(p.zero_multiplicity(), 1);
        assert!(p.decomposition.reconstruct().max_abs_diff(&p.script_a) < 1e-14);
        assert_eq!(p.index[0], SymIndex::Positive(0));
        assert_eq!(p.index[2], SymIndex::Zero(0));
        assert_eq!(p.index[4], SymIndex::Negative(0));

        let p = symmetrize(&DenseMatrix::zeros(2, 2)).unwrap();
        assert!(p.decomposition.eigenvalues().iter().all(|&l| l == 0.0));
        assert!(symmetrize(&DenseMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn tall_input_is_transposed() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let p = symmetrize(&a).unwrap();
        assert!(p.transposed);
        assert_eq!((p.m, p.n), (2, 3));
    }

    #[test]
    fn zero_noise_certifies() {
        let a = DenseMatrix::from_rows(&[vec![5.0, 0.0, 1.0], vec![0.0, 2.0, 0.0]]).unwrap();
        let e = DenseMatrix::zeros(2, 3);
        let d = Region::single(3.0, 10.0).unwrap();
        let c = rect_certificates(&a, &e, Some(&d), 1000.0, RectMode::Stability).unwrap();
        assert!(c.certified, "{}", c.to_text());
        assert!((c.recompute_rhs().unwrap() - c.rhs).abs() == 0.0);
        let c = rect_certificates(&a, &e, None, 1000.0, RectMode::LeastSingular).unwrap();
        assert!(c.certified);

        let bad = Region::single(-1.0, 3.0).unwrap();
        assert!(matches!(
            rect_certificates(&a, &e, Some(&bad), 100.0, RectMode::Stability),
            Err(Error::Region(_))
        ));
        let singular = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let c = rect_certificates(&singular, &DenseMatrix::zeros(2, 2), None, 100.0, RectMode::LeastSingular).unwrap();
        assert!(!c.applicable && !c.certified);
    }

    #[test]
    fn rect_weyl_holds() {
        let a = DenseMatrix::from_rows(&[vec![3.0, 1.0, 0.0], vec![0.0, 2.0, 1.0]]).unwrap();
        let e = DenseMatrix::from_rows(&[vec![0.1, -0.2, 0.0], vec![0.05, 0.0, 0.3]]).unwrap();
        let w = rect_weyl_check(&a, &e).unwrap();
        assert!(w.max_shift <= w.e_norm + 1e-12);
    }
}
