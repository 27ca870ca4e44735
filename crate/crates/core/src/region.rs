//! Regions of the real line (finite unions of disjoint open intervals) and the
//! spectral statistics measured relative to a region.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eigen::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// Distance to the closure of the interval.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    intervals: Vec<Interval>,
}

impl Region {
    /// Sorts and validates the intervals. Overlapping or touching intervals are
    /// rejected: merging them changes the boundary, so callers must do it.
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Region("a region needs at least one interval".into()));
        }
        for iv in &intervals {
            if iv.lo.is_nan() || iv.hi.is_nan() || iv.lo >= iv.hi {
                return Err(Error::Region(format!(
                    "interval ({}, {}) is empty or malformed",
                    iv.lo, iv.hi
                )));
            }
            if iv.lo == f64::INFINITY || iv.hi == f64::NEG_INFINITY {
                return Err(Error::Region(format!(
                    "interval ({}, {}) has no finite part",
                    iv.lo, iv.hi
                )));
            }
        }
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in intervals.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(Error::Region(format!(
                    "intervals ({}, {}) and ({}, {}) overlap or touch",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn single(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![Interval::new(lo, hi)])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// `C_D`, the number of connected components.
    pub fn component_count(&self) -> usize {
        self.intervals.len()
    }

    /// `B(D)`: every finite endpoint, ascending.
    pub fn boundary(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .flat_map(|iv| [iv.lo, iv.hi])
            .filter(|v| v.is_finite())
            .collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn distance(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|iv| iv.distance(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// `dist(x, B(D))`; infinite for the whole line.
    pub fn distance_to_boundary(&self, x: f64) -> f64 {
        self.boundary()
            .into_iter()
            .map(|b| (x - b).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals
            .iter()
            .all(|iv| iv.lo.is_finite() && iv.hi.is_finite())
    }

    pub fn shifted(&self, t: f64) -> Self {
        Self {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval::new(iv.lo + t, iv.hi + t))
                .collect(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        assert!(t > 0.0, "region scale must be positive");
        Self {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval::new(iv.lo * t, iv.hi * t))
                .collect(),
        }
    }

    /// Finite intervals with infinite ends replaced by `±clip`. Fails if a
    /// clipped interval would become empty.
    pub fn clipped(&self, clip: f64) -> Result<Vec<(f64, f64)>> {
        self.intervals
            .iter()
            .map(|iv| {
                let lo = if iv.lo.is_finite() { iv.lo } else { -clip };
                let hi = if iv.hi.is_finite() { iv.hi } else { clip };
                if lo >= hi {
                    Err(Error::Region(format!(
                        "clipping ({}, {}) at ±{clip} leaves nothing",
                        iv.lo, iv.hi
                    )))
                } else {
                    Ok((lo, hi))
                }
            })
            .collect()
    }
}

impl FromStr for Region {
    type Err = Error;

    /// Parses `"(0,2),(3,inf)"`; `inf`, `+inf` and `-inf` are accepted.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty region".into()));
        }
        let mut intervals = Vec::new();
        let mut rest = s.as_str();
        loop {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' at {rest:?}")))?;
            let close = body
                .find(')')
                .ok_or_else(|| Error::Parse(format!("missing ')' in {rest:?}")))?;
            let (lo, hi) = body[..close]
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("interval {:?} needs two ends", &body[..close])))?;
            intervals.push(Interval::new(parse_endpoint(lo)?, parse_endpoint(hi)?));
            rest = &body[close + 1..];
            if rest.is_empty() {
                break;
            }
            rest = rest
                .strip_prefix(',')
                .ok_or_else(|| Error::Parse(format!("expected ',' between intervals at {rest:?}")))?;
        }
        Region::new(intervals)
    }
}

fn parse_endpoint(tok: &str) -> Result<f64> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        t => t
            .parse()
            .map_err(|_| Error::Parse(format!("bad interval endpoint {tok:?}"))),
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |v: f64| {
            if v == f64::INFINITY {
                "inf".to_string()
            } else if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{v}")
            }
        };
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|iv| format!("({},{})", end(iv.lo), end(iv.hi)))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Spectral statistics of `A` relative to a region `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    /// `δ_D = min_i dist(λ_i, B(D))`.
    pub delta_d: f64,
    /// `Λ_D(A)`: indices of eigenvalues strictly inside `D`.
    pub inside: Vec<usize>,
    /// `N_D = {i : dist(λ_i, D) ≤ K‖E‖}`.
    pub neighborhood: Vec<usize>,
    /// `r = |N_D|`.
    pub r: usize,
    pub c_d: usize,
    pub k: f64,
    pub e_norm: f64,
}

pub fn region_stats(
    decomp: &SpectralDecomposition,
    region: &Region,
    k: f64,
    e_norm: f64,
) -> Result<RegionStats> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!("K must be positive and finite, got {k}")));
    }
    if !(e_norm >= 0.0) || !e_norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise norm must be non-negative and finite, got {e_norm}"
        )));
    }
    let reach = k * e_norm;
    let ev = decomp.eigenvalues();
    let delta_d = ev
        .iter()
        .map(|&l| region.distance_to_boundary(l))
        .fold(f64::INFINITY, f64::min);
    let inside: Vec<usize> = (0..ev.len()).filter(|&i| region.contains(ev[i])).collect();
    let neighborhood: Vec<usize> = (0..ev.len())
        .filter(|&i| region.distance(ev[i]) <= reach)
        .collect();
    Ok(RegionStats {
        delta_d,
        r: neighborhood.len(),
        inside,
        neighborhood,
        c_d: region.component_count(),
        k,
        e_norm,
    })
}

/// `x = max_{i,j ∈ N_D} |u_iᵀ E u_j|`, or 0 when `N_D` is empty.
pub fn interaction_x(decomp: &SpectralDecomposition, e: &DenseMatrix, neighborhood: &[usize]) -> Result<f64> {
    let n = decomp.n();
    if e.rows() != n || e.cols() != n {
        return Err(Error::Shape(format!(
            "noise is {}x{} but the decomposition has dimension {n}",
            e.rows(),
            e.cols()
        )));
    }
    if let Some(&bad) = neighborhood.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, dim: n });
    }
    let vecs: Vec<Vec<f64>> = neighborhood.iter().map(|&i| decomp.vector(i)).collect();
    let e_vecs: Vec<Vec<f64>> = vecs.iter().map(|v| e.matvec(v)).collect();
    let mut x = 0.0f64;
    for (a, u) in vecs.iter().enumerate() {
        for ev in &e_vecs[a..] {
            x = x.max(dot(u, ev).abs());
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_decomp(ev: &[f64]) -> SpectralDecomposition {
        SpectralDecomposition::from_parts(ev.to_vec(), DenseMatrix::identity(ev.len())).unwrap()
    }

    #[test]
    fn make_region_examples() {
        let d = Region::single(0.0, 2.0).unwrap();
        assert_eq!(d.component_count(), 1);
        assert_eq!(d.boundary(), vec![0.0, 2.0]);

        let d = Region::new(vec![Interval::new(3.0, 4.0), Interval::new(-1.0, 0.0)]).unwrap();
        assert_eq!(d.component_count(), 2);
        assert_eq!(d.boundary(), vec![-1.0, 0.0, 3.0, 4.0]);

        assert!(Region::new(vec![Interval::new(0.0, 2.0), Interval::new(1.0, 3.0)]).is_err());
        assert!(Region::new(vec![Interval::new(0.0, 1.0), Interval::new(1.0, 3.0)]).is_err());
        assert!(Region::single(1.0, 1.0).is_err());
        assert!(Region::new(vec![]).is_err());
    }

    #[test]
    fn parse_and_display() {
        let d: Region = "(0,2), (3,inf)".parse().unwrap();
        assert_eq!(d.intervals()[1].hi, f64::INFINITY);
        assert_eq!(d.boundary(), vec![0.0, 2.0, 3.0]);
        assert_eq!(d.to_string(), "(0,2),(3,inf)");
        let d: Region = "(-inf,-1.5)".parse().unwrap();
        assert_eq!(d.intervals()[0].lo, f64::NEG_INFINITY);
        assert!("(0,2".parse::<Region>().is_err());
        assert!("(0;2)".parse::<Region>().is_err());
        assert!("(0,2)(3,4)".parse::<Region>().is_err());
    }

    #[test]
    fn stats_examples() {
        let dec = diag_decomp(&[3.0, 1.0, -2.0]);
        let d = Region::single(0.0, 2.0).unwrap();
        let s = region_stats(&dec, &d, 1.0, 0.0).unwrap();
        assert_eq!(s.delta_d, 1.0);
        assert_eq!(s.inside, vec![1]);

        // K‖E‖ = 1.5: distances to D are 1 (λ=3), 0 (λ=1), 2 (λ=−2).
        let s = region_stats(&dec, &d, 1.5, 1.0).unwrap();
        assert_eq!(s.neighborhood, vec![0, 1]);
        assert_eq!(s.r, 2);

        let pos = diag_decomp(&[4.0, 2.5, 0.5]);
        let d = Region::single(f64::NEG_INFINITY, 0.0).unwrap();
        let s = region_stats(&pos, &d, 1.0, 0.0).unwrap();
        assert!(s.inside.is_empty());
        assert_eq!(s.delta_d, 0.5);
    }

    #[test]
    fn boundary_eigenvalue_gives_zero_delta() {
        let dec = diag_decomp(&[2.0, 1.0]);
        let s = region_stats(&dec, &Region::single(0.0, 2.0).unwrap(), 1.0, 0.0).unwrap();
        assert_eq!(s.delta_d, 0.0);
        assert_eq!(s.inside, vec![1]);
    }

    #[test]
    fn stats_reject_bad_parameters() {
        let dec = diag_decomp(&[1.0]);
        let d = Region::single(0.0, 2.0).unwrap();
        assert!(region_stats(&dec, &d, 0.0, 1.0).is_err());
        assert!(region_stats(&dec, &d, 1.0, -1.0).is_err());
    }

    #[test]
    fn interaction_examples() {
        let dec = diag_decomp(&[3.0, 2.0, 1.0]);
        assert_eq!(interaction_x(&dec, &DenseMatrix::zeros(3, 3), &[0, 1]).unwrap(), 0.0);
        assert_eq!(interaction_x(&dec, &DenseMatrix::identity(3), &[2]).unwrap(), 1.0);
        assert_eq!(interaction_x(&dec, &DenseMatrix::identity(3), &[]).unwrap(), 0.0);
        assert!(interaction_x(&dec, &DenseMatrix::identity(2), &[0]).is_err());
    }

    #[test]
    fn clipping() {
        let d: Region = "(-inf,0),(1,inf)".parse().unwrap();
        assert_eq!(d.clipped(10.0).unwrap(), vec![(-10.0, 0.0), (1.0, 10.0)]);
        assert!(d.clipped(0.5).is_err());
    }
}
