//! One-sided (Hestenes) Jacobi singular value decomposition.

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

const MAX_SWEEPS: usize = 80;

/// `A = U Σ Vᵀ` for an `m × n` matrix with `m ≤ n` (the caller transposes
/// otherwise).
///
/// `u` is `m × m`; `v` is `n × n`, its first `m` columns pair with
/// `singular_values` and the rest span the null space of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let m = self.u.rows();
        let n = self.v.rows();
        DenseMatrix::from_fn(m, n, |i, j| {
            (0..m)
                .map(|k| self.u[(i, k)] * self.singular_values[k] * self.v[(j, k)])
                .sum()
        })
    }
}

/// Singular values of any real matrix, descending, `min(m, n)` of them.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows() <= a.cols() {
        Ok(svd_wide(a)?.singular_values)
    } else {
        Ok(svd_wide(&a.transpose())?.singular_values)
    }
}

/// SVD of a wide (`m ≤ n`) matrix.
pub fn svd_wide(a: &DenseMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 || n == 0 {
        return Err(Error::Shape("SVD of an empty matrix".into()));
    }
    if m > n {
        return Err(Error::Shape(format!(
            "svd_wide needs rows <= cols, got {m}x{n}"
        )));
    }
    // Orthogonalise the m columns of Aᵀ (each of length n) by plane rotations.
    let mut g: Vec<Vec<f64>> = (0..m).map(|i| a.row(i).to_vec()).collect();
    let mut rot = DenseMatrix::identity(m);
    let scale = a.frobenius_norm();
    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let alpha = dot(&g[p], &g[p]);
                let beta = dot(&g[q], &g[q]);
                let gamma = dot(&g[p], &g[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (gp, gq) = pair_mut(&mut g, p, q);
                for (x, y) in gp.iter_mut().zip(gq.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = c * xp - s * xq;
                    *y = s * xp + c * xq;
                }
                for k in 0..m {
                    let (rp, rq) = (rot[(k, p)], rot[(k, q)]);
                    rot[(k, p)] = c * rp - s * rq;
                    rot[(k, q)] = s * rp + c * rq;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..m).collect();
    let norms: Vec<f64> = g.iter().map(|c| dot(c, c).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE) * (n as f64);
    let singular_values: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let u = DenseMatrix::from_fn(m, m, |i, j| rot[(i, order[j])]);
    let mut right: Vec<Option<Vec<f64>>> = order
        .iter()
        .map(|&k| {
            (norms[k] > tiny).then(|| g[k].iter().map(|x| x / norms[k]).collect())
        })
        .collect();
    right.resize(n, None);
    let v = complete_basis(n, right);
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

fn pair_mut(g: &mut [Vec<f64>], p: usize, q: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(p < q);
    let (lo, hi) = g.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

/// Fills the `None` slots with unit vectors orthogonal to everything else.
/// Each slot takes the standard basis vector with the largest residual after
/// projection; with `k` columns filled that residual is at least `√((n−k)/n)`.
fn complete_basis(n: usize, mut cols: Vec<Option<Vec<f64>>>) -> DenseMatrix {
    for slot in 0..cols.len() {
        if cols[slot].is_some() {
            continue;
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..n {
            let mut v = vec![0.0; n];
            v[e] = 1.0;
            for _ in 0..2 {
                for q in cols.iter().flatten() {
                    let c = dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, mut v) = best.expect("n > 0");
        v.iter_mut().for_each(|x| *x /= norm);
        cols[slot] = Some(v);
    }
    DenseMatrix::from_fn(n, n, |i, j| cols[j].as_ref().unwrap()[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_rectangle() {
        let a = DenseMatrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 4.0, 0.0]]).unwrap();
        let svd = svd_wide(&a).unwrap();
        assert_eq!(svd.singular_values, vec![4.0, 3.0]);
        assert!(svd.reconstruct().max_abs_diff(&a) < 1e-15);
        let vtv = svd.v.transpose().matmul(&svd.v).unwrap();
        assert!(vtv.max_abs_diff(&DenseMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn zero_and_rank_deficient() {
        let svd = svd_wide(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(svd.singular_values, vec![0.0, 0.0]);
        assert!(svd.v.max_abs_diff(&DenseMatrix::identity(2)) < 1e-15);

        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        let svd = svd_wide(&a).unwrap();
        assert!((svd.singular_values[0] - 70f64.sqrt()).abs() < 1e-13);
        assert!(svd.singular_values[1] < 1e-14);
        assert!(svd.reconstruct().max_abs_diff(&a) < 1e-13);
        let vtv = svd.v.transpose().matmul(&svd.v).unwrap();
        assert!(vtv.max_abs_diff(&DenseMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn wide_null_space_completes() {
        // 12 x 15: three null directions, where no standard basis vector need
        // keep half its length after projection.
        let a = DenseMatrix::from_fn(12, 15, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + (i == j) as u8 as f64);
        let svd = svd_wide(&a).unwrap();
        let vtv = svd.v.transpose().matmul(&svd.v).unwrap();
        assert!(vtv.max_abs_diff(&DenseMatrix::identity(15)) < 1e-12);
        assert!(svd.reconstruct().max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn rejects_tall_or_empty() {
        assert!(svd_wide(&DenseMatrix::zeros(3, 2)).is_err());
        assert!(svd_wide(&DenseMatrix::zeros(0, 2)).is_err());
        assert_eq!(singular_values(&DenseMatrix::from_rows(&[vec![2.0], vec![0.0]]).unwrap()).unwrap(), vec![2.0]);
    }
}
