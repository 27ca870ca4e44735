//! Certificates and bounds: Weyl, regional stability, hole arguments,
//! leading eigenvalues, projector perturbation, Davis–Kahan, and the
//! auxiliary quantities they depend on.
//!
//! Every certificate echoes the scalars it was computed from, so a
//! serialized certificate can be re-checked with [`Certificate::recompute_rhs`]
//! without the original matrices.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::eigen::{operator_norm, symmetric_eigenvalues, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::region::{interaction_x, region_stats, Region, RegionStats};

/// `T` reported by [`leading_bound`] when the noise is exactly zero.
pub const T_FLOOR: f64 = 1e-12;

const LEADING_GRID: usize = 160;
const LEADING_GRID_DECADES: f64 = 14.0;
const BISECTION_REL_WIDTH: f64 = 1e-10;
const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    WeylStable,
    RegionalStability,
    LeastSingular,
    Localize,
    LeadingLower,
    LeadingUpper,
    ProjectorBound,
    DavisKahan,
    RectStability,
    RectLeastSingular,
}

impl Theorem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::WeylStable => "weyl_stable",
            Theorem::RegionalStability => "regional_stability",
            Theorem::LeastSingular => "least_singular",
            Theorem::Localize => "localize",
            Theorem::LeadingLower => "leading_lower",
            Theorem::LeadingUpper => "leading_upper",
            Theorem::ProjectorBound => "projector_bound",
            Theorem::DavisKahan => "davis_kahan",
            Theorem::RectStability => "rect_stability",
            Theorem::RectLeastSingular => "rect_least_singular",
        }
    }

    /// The inequality the certificate evaluates.
    pub fn statement(&self) -> &'static str {
        match self {
            Theorem::WeylStable => "Weyl: delta_D > ||E|| implies |Lambda_D(A)| = |Lambda_D(A+E)|",
            Theorem::RegionalStability => {
                "K > 26 C_D ln(3 s1/delta_D) and delta_D >= (40/pi) ln(5 s1/delta_D) C_D max{r^2 x, ||E||/K, sqrt(r x ||E||)} implies D is stable"
            }
            Theorem::LeastSingular => {
                "hole argument on [A 0; 0 0], D = (-s_n/2, s_n/2): s_n >= (80/pi) ln(10 s1/s_n) max{r^2 x, ||E||/K, sqrt(r x ||E||)} and K > 26 ln(6 s1/s_n) implies s_n(A+E) >= s_n/2"
            }
            Theorem::Localize => {
                "hole argument on [A 0; 0 lambda]: stability predicate on D_lambda implies A+E has no eigenvalue in D_lambda"
            }
            Theorem::LeadingLower => {
                "stability of (lambda_p - T, inf) implies lambda_p(A+E) >= lambda_p - T"
            }
            Theorem::LeadingUpper => {
                "stability of (lambda_p + T, inf) implies lambda_p(A+E) <= lambda_p + T"
            }
            Theorem::ProjectorBound => {
                "delta_D >= 6 max{sqrt(r x ||E||), ||E||/K} implies ||P(A+E) - P(A)|| <= C_D [2 r^2 x/delta_D + 13 ln(3 s1/delta_D)/K + (5 ln(5 s1/delta_D)/pi)(2||E||/(K delta_D) + r x ||E||/delta_D^2 + 1/K^2)]"
            }
            Theorem::DavisKahan => {
                "delta_D >= ||E|| implies ||P(A+E) - P(A)|| <= pi ||E|| / (4 delta_D)"
            }
            Theorem::RectStability => {
                "symmetrized stability: K > 52 C_D ln(3 s1/delta_D) and delta_D >= (160/pi) ln(5 s1/delta_D) C_D max{r^2 x, ||E||/K, sqrt(r x ||E||)} implies the singular-value count in D is preserved"
            }
            Theorem::RectLeastSingular => {
                "symmetrized hole: s_m >= (320/pi) ln(10 s1/s_m) max{r^2 x, ||E||/K, sqrt(r x ||E||)} and K > 52 ln(6 s1/s_m) implies s_m(A+E) >= s_m/2"
            }
        }
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Theorem::WeylStable,
            Theorem::RegionalStability,
            Theorem::LeastSingular,
            Theorem::Localize,
            Theorem::LeadingLower,
            Theorem::LeadingUpper,
            Theorem::ProjectorBound,
            Theorem::DavisKahan,
            Theorem::RectStability,
            Theorem::RectLeastSingular,
        ];
        all.into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown theorem '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConclusionKind {
    /// `|Λ_D(A)| = |Λ_D(Ã)|`; value is the count.
    CountPreserved,
    /// `σ̃_n ≥ value`.
    SigmaMinLowerBound,
    /// `Ã` has no eigenvalue in the region; value is the centre `λ`.
    NoEigenvalueInRegion,
    /// `λ̃_p ≥ value`.
    EigenvalueLowerBound,
    /// `λ̃_p ≤ value`.
    EigenvalueUpperBound,
    /// `‖Π_H̃ − Π_H‖ ≤ value`.
    ProjectorDistanceBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub kind: ConclusionKind,
    #[serde(with = "json_f64")]
    pub value: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub theorem: Theorem,
    pub applicable: bool,
    pub certified: bool,
    #[serde(with = "json_f64::map")]
    pub inputs: BTreeMap<String, f64>,
    #[serde(with = "json_f64")]
    pub rhs: f64,
    pub conclusion: Conclusion,
    pub statement: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// How a certificate relates to what actually happened to `A + E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Certified,
    NotCertifiedEmpiricallyTrue,
    NotCertifiedEmpiricallyFalse,
    /// Certified but the conclusion failed: a theorem implication violation.
    Violation,
}

impl Outcome {
    pub fn classify(certified: bool, empirically_true: bool) -> Self {
        match (certified, empirically_true) {
            (true, true) => Outcome::Certified,
            (true, false) => Outcome::Violation,
            (false, true) => Outcome::NotCertifiedEmpiricallyTrue,
            (false, false) => Outcome::NotCertifiedEmpiricallyFalse,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Certified => "certified",
            Outcome::NotCertifiedEmpiricallyTrue => "not certified, empirically true",
            Outcome::NotCertifiedEmpiricallyFalse => "not certified, empirically false",
            Outcome::Violation => "VIOLATION: certified but false",
        }
    }
}

impl Certificate {
    pub(crate) fn default_for(theorem: Theorem, conclusion_kind: ConclusionKind) -> Self {
        Self::new(theorem, conclusion_kind)
    }

    fn new(theorem: Theorem, conclusion_kind: ConclusionKind) -> Self {
        Certificate {
            theorem,
            applicable: false,
            certified: false,
            inputs: BTreeMap::new(),
            rhs: f64::NAN,
            conclusion: Conclusion {
                kind: conclusion_kind,
                value: f64::NAN,
                text: String::new(),
            },
            statement: theorem.statement().to_string(),
            notes: Vec::new(),
        }
    }

    fn input(mut self, key: &str, value: f64) -> Self {
        self.inputs.insert(key.to_string(), value);
        self
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.inputs
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("certificate has no input '{key}'")))
    }

    /// Re-evaluates the right-hand side from the echoed inputs alone.
    pub fn recompute_rhs(&self) -> Result<f64> {
        let g = |k: &str| self.get(k);
        Ok(match self.theorem {
            Theorem::WeylStable => g("e_norm")?,
            Theorem::RegionalStability
            | Theorem::Localize
            | Theorem::LeadingLower
            | Theorem::LeadingUpper => gap_rhs(
                40.0,
                5.0,
                g("delta_d")?,
                g("sigma1")?,
                g("c_d")?,
                g("r")?,
                g("x")?,
                g("e_norm")?,
                g("k")?,
            ),
            Theorem::LeastSingular => gap_rhs(
                80.0,
                10.0,
                g("sigma_n")?,
                g("sigma1")?,
                1.0,
                g("r")?,
                g("x")?,
                g("e_norm")?,
                g("k")?,
            ),
            Theorem::RectStability => gap_rhs(
                160.0,
                5.0,
                g("delta_d")?,
                g("sigma1")?,
                g("c_d")?,
                g("r")?,
                g("x")?,
                g("e_norm")?,
                g("k")?,
            ),
            Theorem::RectLeastSingular => gap_rhs(
                320.0,
                10.0,
                g("sigma_m")?,
                g("sigma1")?,
                1.0,
                g("r")?,
                g("x")?,
                g("e_norm")?,
                g("k")?,
            ),
            Theorem::ProjectorBound => projector_rhs(
                g("delta_d")?,
                g("c_d")?,
                g("r")?,
                g("x")?,
                g("e_norm")?,
                g("k")?,
                g("sigma1")?,
            ),
            Theorem::DavisKahan => PI * g("e_norm")? / (4.0 * g("delta_d")?),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// `key = value` lines, inputs in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "theorem = {}", self.theorem.as_str());
        let _ = writeln!(out, "applicable = {}", self.applicable);
        let _ = writeln!(out, "certified = {}", self.certified);
        let _ = writeln!(out, "rhs = {}", self.rhs);
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "inputs.{k} = {v}");
        }
        let kind = serde_json::to_value(self.conclusion.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        let _ = writeln!(out, "conclusion.kind = {kind}");
        let _ = writeln!(out, "conclusion.value = {}", self.conclusion.value);
        let _ = writeln!(out, "conclusion.text = {}", self.conclusion.text);
        let _ = writeln!(out, "statement = {}", self.statement);
        for note in &self.notes {
            let _ = writeln!(out, "note = {note}");
        }
        out
    }
}

/// `(α/π)·ln(β σ₁/δ)·C_D·max{r²x, ‖E‖/K, √(r x ‖E‖)}`.
#[allow(clippy::too_many_arguments)]
pub fn gap_rhs(
    alpha: f64,
    beta: f64,
    delta: f64,
    sigma1: f64,
    c_d: f64,
    r: f64,
    x: f64,
    e_norm: f64,
    k: f64,
) -> f64 {
    let m = (r * r * x).max(e_norm / k).max((r * x * e_norm).sqrt());
    if m == 0.0 {
        return 0.0;
    }
    alpha / PI * (beta * sigma1 / delta).ln() * c_d * m
}

/// `γ·C_D·ln(β σ₁/δ)`: `K` must exceed this.
pub fn k_threshold(gamma: f64, beta: f64, delta: f64, sigma1: f64, c_d: f64) -> f64 {
    gamma * c_d * (beta * sigma1 / delta).ln()
}

/// Right-hand side of the projector perturbation bound.
pub fn projector_rhs(delta: f64, c_d: f64, r: f64, x: f64, e_norm: f64, k: f64, sigma1: f64) -> f64 {
    c_d * (2.0 * r * r * x / delta
        + 13.0 * (3.0 * sigma1 / delta).ln() / k
        + 5.0 * (5.0 * sigma1 / delta).ln() / PI
            * (2.0 * e_norm / (k * delta) + r * x * e_norm / (delta * delta) + 1.0 / (k * k)))
}

/// Premises shared by all log-based predicates. The proofs use
/// `ln(βσ₁/δ_D) ≥ ln β`; past `δ_D > σ₁` the logs can turn negative and
/// would certify anything.
fn log_regime_ok(delta: f64, sigma1: f64) -> std::result::Result<(), String> {
    if !(delta > 0.0) {
        return Err(format!("delta_D = {delta} is not positive"));
    }
    if !(sigma1 > 0.0) || !sigma1.is_finite() {
        return Err(format!("sigma1 = {sigma1} is not positive and finite"));
    }
    if delta > sigma1 {
        return Err(format!("delta_D = {delta} exceeds sigma1 = {sigma1}"));
    }
    Ok(())
}

/// Serde helpers writing non-finite floats as the strings `"inf"`,
/// `"-inf"` and `"nan"`, which plain JSON cannot represent.
pub mod json_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::custom(format!("bad float '{t}'"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod map {
        use std::collections::BTreeMap;

        use super::*;

        pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
            let out: BTreeMap<&String, Repr> = m.iter().map(|(k, &v)| (k, to_repr(v))).collect();
            out.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
            BTreeMap::<String, Repr>::deserialize(d)?
                .into_iter()
                .map(|(k, v)| Ok((k, from_repr(v)?)))
                .collect()
        }
    }
}

// ---------------------------------------------------------------------------
// Weyl

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub e_norm: f64,
    /// `[λ_p − ‖E‖, λ_p + ‖E‖]` per index.
    pub intervals: Vec<(f64, f64)>,
    /// `|λ̃_p − λ_p|` per index.
    pub shifts: Vec<f64>,
    pub max_shift: f64,
    /// `max_shift ≤ ‖E‖` up to `1e-12·max(1, σ₁)` rounding.
    pub within_bound: bool,
}

pub fn weyl_check(decomp: &SpectralDecomposition, e: &DenseMatrix) -> Result<WeylReport> {
    let n = decomp.n();
    if e.rows() != n || e.cols() != n {
        return Err(Error::Shape(format!(
            "noise is {}x{} but A is {n}x{n}",
            e.rows(),
            e.cols()
        )));
    }
    e.check_symmetric()?;
    let e_norm = operator_norm(e)?;
    let at = decomp.reconstruct().add(e)?.symmetrized();
    let noisy = symmetric_eigenvalues(&at)?;
    let ev = decomp.eigenvalues();
    let intervals = ev.iter().map(|&l| (l - e_norm, l + e_norm)).collect();
    let shifts: Vec<f64> = ev.iter().zip(&noisy).map(|(a, b)| (a - b).abs()).collect();
    let max_shift = shifts.iter().copied().fold(0.0, f64::max);
    let slack = 1e-12 * decomp.sigma_max().max(e_norm).max(1.0);
    Ok(WeylReport {
        e_norm,
        intervals,
        shifts,
        max_shift,
        within_bound: max_shift <= e_norm + slack,
    })
}

pub fn weyl_stable(stats: &RegionStats) -> Certificate {
    let mut c = Certificate::new(Theorem::WeylStable, ConclusionKind::CountPreserved)
        .input("delta_d", stats.delta_d)
        .input("e_norm", stats.e_norm);
    c.applicable = stats.delta_d > 0.0;
    c.rhs = stats.e_norm;
    c.certified = c.applicable && stats.delta_d > stats.e_norm;
    c.conclusion.value = stats.inside.len() as f64;
    c.conclusion.text = format!("eigenvalue count in D preserved ({})", stats.inside.len());
    c
}

// ---------------------------------------------------------------------------
// Regional stability and hole arguments

/// Stability predicate on precomputed statistics.
pub fn stability_certificate(stats: &RegionStats, x: f64, sigma1: f64) -> Certificate {
    stability_with(Theorem::RegionalStability, stats, x, sigma1)
}

fn stability_with(theorem: Theorem, stats: &RegionStats, x: f64, sigma1: f64) -> Certificate {
    let c_d = stats.c_d as f64;
    let r = stats.r as f64;
    let mut c = Certificate::new(theorem, ConclusionKind::CountPreserved)
        .input("delta_d", stats.delta_d)
        .input("c_d", c_d)
        .input("r", r)
        .input("x", x)
        .input("e_norm", stats.e_norm)
        .input("k", stats.k)
        .input("sigma1", sigma1);
    c.conclusion.value = stats.inside.len() as f64;
    c.conclusion.text = format!("D is stable: eigenvalue count in D preserved ({})", stats.inside.len());
    if let Err(why) = log_regime_ok(stats.delta_d, sigma1) {
        c.notes.push(why);
        return c;
    }
    let kt = k_threshold(26.0, 3.0, stats.delta_d, sigma1, c_d);
    c.inputs.insert("k_threshold".into(), kt);
    c.rhs = gap_rhs(40.0, 5.0, stats.delta_d, sigma1, c_d, r, x, stats.e_norm, stats.k);
    c.applicable = stats.k > kt;
    c.certified = c.applicable && stats.delta_d >= c.rhs;
    c
}

/// Decomposition of `diag(A, corner)` built from that of `A`.
fn bordered_decomposition(decomp: &SpectralDecomposition, corner: f64) -> Result<SpectralDecomposition> {
    let n = decomp.n();
    let mut ev = decomp.eigenvalues().to_vec();
    ev.push(corner);
    let u = decomp.vectors();
    let vecs = DenseMatrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => u[(i, j)],
        (false, false) => 1.0,
        _ => 0.0,
    });
    SpectralDecomposition::from_parts(ev, vecs)
}

fn check_noise(decomp: &SpectralDecomposition, e: &DenseMatrix) -> Result<f64> {
    let n = decomp.n();
    if e.rows() != n || e.cols() != n {
        return Err(Error::Shape(format!(
            "noise is {}x{} but A is {n}x{n}",
            e.rows(),
            e.cols()
        )));
    }
    e.check_symmetric()?;
    operator_norm(e)
}

/// Least singular value certificate via the augmented zero eigenvalue.
pub fn least_singular_certificate(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    k: f64,
) -> Result<Certificate> {
    let e_norm = check_noise(decomp, e)?;
    let sigma1 = decomp.sigma_max();
    let sigma_n = decomp.sigma_min();
    let mut c = Certificate::new(Theorem::LeastSingular, ConclusionKind::SigmaMinLowerBound)
        .input("sigma1", sigma1)
        .input("sigma_n", sigma_n)
        .input("e_norm", e_norm)
        .input("k", k);
    c.conclusion.value = sigma_n / 2.0;
    c.conclusion.text = format!("sigma_n(A+E) >= sigma_n/2 = {}", sigma_n / 2.0);
    if !(sigma_n > 0.0) {
        c.notes.push("A is singular".into());
        c.inputs.insert("r".into(), 0.0);
        c.inputs.insert("x".into(), 0.0);
        return Ok(c);
    }
    let aug = bordered_decomposition(decomp, 0.0)?;
    let e_aug = e.bordered(0.0);
    let region = Region::single(-sigma_n / 2.0, sigma_n / 2.0)?;
    let stats = region_stats(&aug, &region, k, e_norm)?;
    let x = interaction_x(&aug, &e_aug, &stats.neighborhood)?;
    let r_direct = decomp
        .eigenvalues()
        .iter()
        .filter(|l| l.abs() - sigma_n / 2.0 <= k * e_norm)
        .count();
    c.inputs.insert("r".into(), stats.r as f64);
    c.inputs.insert("r_direct".into(), r_direct as f64);
    c.inputs.insert("x".into(), x);
    c.inputs.insert("delta_d".into(), stats.delta_d);
    let kt = k_threshold(26.0, 6.0, sigma_n, sigma1, 1.0);
    c.inputs.insert("k_threshold".into(), kt);
    c.rhs = gap_rhs(80.0, 10.0, sigma_n, sigma1, 1.0, stats.r as f64, x, e_norm, k);
    c.applicable = k > kt;
    c.certified = c.applicable && sigma_n >= c.rhs;
    Ok(c)
}

/// Certifies that `A + E` has no eigenvalue in `d_lambda`, a region around
/// `lambda` free of eigenvalues of `A`.
pub fn localize_eigenvalue(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    lambda: f64,
    d_lambda: &Region,
    k: f64,
) -> Result<Certificate> {
    let e_norm = check_noise(decomp, e)?;
    if !d_lambda.contains(lambda) {
        return Err(Error::Precondition(format!("{lambda} is not inside {d_lambda}")));
    }
    if let Some(l) = decomp.eigenvalues().iter().find(|&&l| d_lambda.contains(l)) {
        return Err(Error::Precondition(format!(
            "eigenvalue {l} of A lies inside {d_lambda}"
        )));
    }
    let aug = bordered_decomposition(decomp, lambda)?;
    let e_aug = e.bordered(0.0);
    let stats = region_stats(&aug, d_lambda, k, e_norm)?;
    let x = interaction_x(&aug, &e_aug, &stats.neighborhood)?;
    let sigma1 = decomp.sigma_max().max(lambda.abs());
    let mut c = stability_with(Theorem::Localize, &stats, x, sigma1).input("lambda", lambda);
    c.conclusion.kind = ConclusionKind::NoEigenvalueInRegion;
    c.conclusion.value = lambda;
    c.conclusion.text = format!("A+E has no eigenvalue in {d_lambda}");
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Side::Lower),
            "upper" => Ok(Side::Upper),
            _ => Err(Error::Parse(format!("side must be lower or upper, got '{s}'"))),
        }
    }
}

/// One-sided bound on the `p`-th largest eigenvalue (`p` is 0-based).
///
/// Searches for the smallest `T` such that the stability predicate holds on
/// `(λ_p − T, ∞)` (lower) or `(λ_p + T, ∞)` (upper). The predicate is not
/// monotone in `T` because `r` changes with the region, so a geometric grid
/// locates the smallest feasible grid point and bisection refines it while
/// keeping the upper end feasible.
pub fn leading_bound(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    p: usize,
    side: Side,
    k: f64,
) -> Result<Certificate> {
    let n = decomp.n();
    if p >= n {
        return Err(Error::IndexOutOfRange { index: p, dim: n });
    }
    let e_norm = check_noise(decomp, e)?;
    let ev = decomp.eigenvalues();
    let lambda_p = ev[p];
    let sigma1 = decomp.sigma_max();
    let gap = match side {
        Side::Lower if p + 1 < n => ev[p] - ev[p + 1],
        Side::Upper if p > 0 => ev[p - 1] - ev[p],
        _ => f64::INFINITY,
    };
    if !(gap > 0.0) {
        return Err(Error::Precondition(format!(
            "eigenvalue {p} is not separated on the {side:?} side"
        )));
    }
    let theorem = match side {
        Side::Lower => Theorem::LeadingLower,
        Side::Upper => Theorem::LeadingUpper,
    };
    let kind = match side {
        Side::Lower => ConclusionKind::EigenvalueLowerBound,
        Side::Upper => ConclusionKind::EigenvalueUpperBound,
    };
    let finish = |mut c: Certificate, t: f64| {
        c.theorem = theorem;
        c.statement = theorem.statement().to_string();
        c.conclusion.kind = kind;
        c.conclusion.value = match side {
            Side::Lower => lambda_p - t,
            Side::Upper => lambda_p + t,
        };
        c.conclusion.text = match side {
            Side::Lower => format!("lambda_{}(A+E) >= {} - {t}", p + 1, lambda_p),
            Side::Upper => format!("lambda_{}(A+E) <= {} + {t}", p + 1, lambda_p),
        };
        c.input("lambda_p", lambda_p).input("t", t)
    };

    if e_norm == 0.0 {
        let stats = RegionStats {
            delta_d: T_FLOOR,
            inside: Vec::new(),
            neighborhood: Vec::new(),
            r: 0,
            c_d: 1,
            k,
            e_norm,
        };
        let mut c = finish(stability_with(theorem, &stats, 0.0, sigma1), T_FLOOR);
        c.applicable = true;
        c.certified = true;
        c.rhs = 0.0;
        c.notes.push("zero noise: lambda_p(A+E) = lambda_p".into());
        return Ok(c);
    }

    let e_aug = e;
    let evaluate = |t: f64| -> Result<Certificate> {
        let lo = match side {
            Side::Lower => lambda_p - t,
            Side::Upper => lambda_p + t,
        };
        let region = Region::single(lo, f64::INFINITY)?;
        let stats = region_stats(decomp, &region, k, e_norm)?;
        let x = interaction_x(decomp, e_aug, &stats.neighborhood)?;
        Ok(stability_with(theorem, &stats, x, sigma1))
    };

    let t_max = (gap / 2.0).min(sigma1);
    let ratio = 10f64.powf(-LEADING_GRID_DECADES / LEADING_GRID as f64);
    let mut best: Option<(usize, f64, Certificate)> = None;
    let mut top = None;
    for i in 0..=LEADING_GRID {
        let t = t_max * ratio.powi(i as i32);
        let c = evaluate(t)?;
        if i == 0 {
            top = Some(c.clone());
        }
        if c.certified {
            best = Some((i, t, c));
        }
    }
    let Some((i, mut hi, mut hi_cert)) = best else {
        let c = top.expect("grid has at least one point");
        let mut c = finish(c, t_max);
        c.certified = false;
        c.notes.push("no admissible T".into());
        return Ok(c);
    };
    if i < LEADING_GRID {
        let mut lo = t_max * ratio.powi(i as i32 + 1);
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= BISECTION_REL_WIDTH * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let c = evaluate(mid)?;
            if c.certified {
                hi = mid;
                hi_cert = c;
            } else {
                lo = mid;
            }
        }
    }
    Ok(finish(hi_cert, hi))
}

// ---------------------------------------------------------------------------
// Projector bounds

/// Projector perturbation bound from scalars.
///
/// Beyond the stated gap premise this also requires `h < 1/2` (the series
/// argument behind the bound needs it) and `δ_D ≤ σ₁`.
pub fn projector_perturbation_bound(
    delta_d: f64,
    c_d: usize,
    r: usize,
    x: f64,
    e_norm: f64,
    k: f64,
    sigma1: f64,
) -> Certificate {
    let (c_df, rf) = (c_d as f64, r as f64);
    let mut c = Certificate::new(Theorem::ProjectorBound, ConclusionKind::ProjectorDistanceBound)
        .input("delta_d", delta_d)
        .input("c_d", c_df)
        .input("r", rf)
        .input("x", x)
        .input("e_norm", e_norm)
        .input("k", k)
        .input("sigma1", sigma1);
    if let Err(why) = log_regime_ok(delta_d, sigma1) {
        c.notes.push(why);
        return c;
    }
    if !(k > 0.0) {
        c.notes.push(format!("K = {k} is not positive"));
        return c;
    }
    let h = h_parameter(r, x, e_norm, delta_d, k);
    c.inputs.insert("h".into(), h.h);
    c.rhs = projector_rhs(delta_d, c_df, rf, x, e_norm, k, sigma1);
    let gap_ok = delta_d >= 6.0 * (rf * x * e_norm).sqrt().max(e_norm / k);
    if !h.h_lt_half {
        c.notes.push(format!("h = {} is not below 1/2", h.h));
    }
    c.applicable = gap_ok && h.h_lt_half;
    c.certified = c.applicable;
    c.conclusion.value = c.rhs;
    c.conclusion.text = format!("||P(A+E) - P(A)|| <= {}", c.rhs);
    c
}

/// Projector bound on a concrete instance.
pub fn projector_bound_for(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    region: &Region,
    k: f64,
) -> Result<Certificate> {
    let e_norm = check_noise(decomp, e)?;
    let stats = region_stats(decomp, region, k, e_norm)?;
    let x = interaction_x(decomp, e, &stats.neighborhood)?;
    Ok(projector_perturbation_bound(
        stats.delta_d,
        stats.c_d,
        stats.r,
        x,
        e_norm,
        k,
        decomp.sigma_max(),
    ))
}

pub fn davis_kahan_bound(e_norm: f64, delta_d: f64) -> Certificate {
    let mut c = Certificate::new(Theorem::DavisKahan, ConclusionKind::ProjectorDistanceBound)
        .input("delta_d", delta_d)
        .input("e_norm", e_norm);
    if !(delta_d > 0.0) {
        c.notes.push(format!("delta_D = {delta_d} is not positive"));
        return c;
    }
    c.rhs = PI * e_norm / (4.0 * delta_d);
    c.applicable = delta_d >= e_norm;
    c.certified = c.applicable;
    c.conclusion.value = c.rhs;
    c.conclusion.text = format!("||P(A+E) - P(A)|| <= {}", c.rhs);
    c
}

/// Measured `‖Π_H̃ − Π_H‖` for the eigenvalues inside a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorDifference {
    pub norm: f64,
    pub dim_h: usize,
    pub dim_h_tilde: usize,
}

pub fn projector_difference(
    decomp: &SpectralDecomposition,
    noisy: &SpectralDecomposition,
    region: &Region,
) -> Result<ProjectorDifference> {
    if decomp.n() != noisy.n() {
        return Err(Error::Shape("decompositions differ in dimension".into()));
    }
    let inside = |d: &SpectralDecomposition| -> Vec<usize> {
        (0..d.n()).filter(|&i| region.contains(d.eigenvalues()[i])).collect()
    };
    let (h, ht) = (inside(decomp), inside(noisy));
    let diff = noisy.projector(&ht)?.sub(&decomp.projector(&h)?)?.symmetrized();
    Ok(ProjectorDifference {
        norm: operator_norm(&diff)?,
        dim_h: h.len(),
        dim_h_tilde: ht.len(),
    })
}

// ---------------------------------------------------------------------------
// Auxiliary parameters

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HParams {
    pub r: usize,
    pub x: f64,
    pub e_norm: f64,
    pub delta_d: f64,
    pub k: f64,
    pub h: f64,
    pub h_lt_half: bool,
}

pub fn h_parameter(r: usize, x: f64, e_norm: f64, delta_d: f64, k: f64) -> HParams {
    let rf = r as f64;
    let h = rf * x * e_norm / (delta_d * delta_d) + 2.0 * e_norm / (delta_d * k) + 1.0 / (k * k);
    HParams {
        r,
        x,
        e_norm,
        delta_d,
        k,
        h,
        h_lt_half: h < 0.5,
    }
}

/// `C₃ = 2(C₂ + 2)·C₁ + 1/2`, the exponent of the smoothed-analysis least
/// singular value bound with its vanishing correction dropped.
pub fn tv_exponent(c1: f64, c2: f64) -> Result<f64> {
    if !(c1 > 0.0) || !(c2 > 0.0) || !c1.is_finite() || !c2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "exponents must be positive, got C1 = {c1}, C2 = {c2}"
        )));
    }
    Ok(2.0 * (c2 + 2.0) * c1 + 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", content = "value", rename_all = "snake_case")]
pub enum KStrategy {
    Fixed(f64),
    /// `K = √n·ln²n / σ_n`.
    SqrtLogSigma,
    /// Minimise the projector bound over [`k_grid`].
    GridMinimize,
}

impl FromStr for KStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "paper_sigman" => Ok(KStrategy::SqrtLogSigma),
            "grid" | "grid_minimize" => Ok(KStrategy::GridMinimize),
            _ => {
                let v = s
                    .strip_prefix("fixed:")
                    .ok_or_else(|| Error::Parse(format!("bad K strategy '{s}'")))?;
                let k: f64 = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad K value '{v}'")))?;
                if !(k > 0.0) || !k.is_finite() {
                    return Err(Error::Parse(format!("K must be positive, got {k}")));
                }
                Ok(KStrategy::Fixed(k))
            }
        }
    }
}

/// 32 geometric points from 2 to 10⁶.
pub fn k_grid() -> Vec<f64> {
    let ratio = (1e6f64 / 2.0).powf(1.0 / 31.0);
    (0..32)
        .map(|i| if i == 31 { 1e6 } else { 2.0 * ratio.powi(i) })
        .collect()
}

pub fn select_k(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    region: &Region,
    strategy: KStrategy,
) -> Result<f64> {
    match strategy {
        KStrategy::Fixed(k) => Ok(k),
        KStrategy::SqrtLogSigma => {
            let sigma_n = decomp.sigma_min();
            if sigma_n == 0.0 {
                return Err(Error::Precondition("sigma_n = 0; sqrt(n) ln^2 n / sigma_n undefined".into()));
            }
            let n = decomp.n() as f64;
            Ok(n.sqrt() * n.ln().powi(2) / sigma_n)
        }
        KStrategy::GridMinimize => {
            let mut best: Option<(f64, f64)> = None;
            for k in k_grid() {
                let c = projector_bound_for(decomp, e, region, k)?;
                if c.applicable && best.is_none_or(|(_, rhs)| c.rhs < rhs) {
                    best = Some((k, c.rhs));
                }
            }
            best.map(|(k, _)| k).ok_or_else(|| {
                Error::Precondition("no K on the grid makes the projector bound applicable".into())
            })
        }
    }
}

/// Diagnostic only: the sharper projector estimate with an unspecified
/// constant `c_ref`. Never used as a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedDiagnostic {
    pub epsilon_gamma: f64,
    pub diagnostic_rhs: f64,
    pub c_ref: f64,
    pub label: String,
}

pub fn refined_bound_diagnostic(
    decomp: &SpectralDecomposition,
    e: &DenseMatrix,
    region: &Region,
    k: f64,
    c_ref: f64,
    contour: &Contour,
) -> Result<RefinedDiagnostic> {
    if !(c_ref > 0.0) {
        return Err(Error::InvalidArgument(format!("c_ref must be positive, got {c_ref}")));
    }
    let e_norm = check_noise(decomp, e)?;
    let stats = region_stats(decomp, region, k, e_norm)?;
    let ev = decomp.eigenvalues();
    let epsilon_gamma = contour
        .nodes()
        .iter()
        .map(|node| {
            stats
                .neighborhood
                .iter()
                .map(|&j| 1.0 / (node.z - ev[j]).norm_sqr())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
        .sqrt();
    let delta = stats.delta_d;
    let n = decomp.n() as f64;
    let sigma1 = decomp.sigma_max();
    let diagnostic_rhs = c_ref
        * stats.c_d as f64
        * n.ln().powf(1.5)
        * (5.0 * sigma1 / delta).ln()
        * (epsilon_gamma
            + 1.0 / delta
            + 1.0 / k
            + e_norm / (k * delta)
            + e_norm * epsilon_gamma / delta
            + e_norm / (delta * delta));
    Ok(RefinedDiagnostic {
        epsilon_gamma,
        diagnostic_rhs,
        c_ref,
        label: "DIAGNOSTIC".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinBound {
    pub mean_bound: f64,
    pub tail_prob: Option<f64>,
}

/// Matrix Bernstein for a sum of independent centred `d1 × d2` summands with
/// `‖S_k‖ ≤ L` and variance statistic `v`.
pub fn bernstein_matrix_bound(l: f64, v: f64, d1: usize, d2: usize, t: Option<f64>) -> Result<BernsteinBound> {
    if !(l > 0.0) || !(v > 0.0) {
        return Err(Error::InvalidArgument(format!("L and v must be positive, got L = {l}, v = {v}")));
    }
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidArgument("dimensions must be at least 1".into()));
    }
    let log_d = ((d1 + d2) as f64).ln();
    let mean_bound = (2.0 * v * log_d).sqrt() + l * log_d / 3.0;
    let tail_prob = match t {
        None => None,
        Some(t) if t >= 0.0 => {
            Some(((d1 + d2) as f64) * (-(t * t / 2.0) / (v + l * t / 3.0)).exp())
        }
        Some(t) => return Err(Error::InvalidArgument(format!("t must be non-negative, got {t}"))),
    };
    Ok(BernsteinBound { mean_bound, tail_prob })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{build_contour, ContourOptions, QuadratureRule};
    use crate::eigen::spectral_decompose;
    use crate::randmat::{sample_wigner_stream, stream_rng, NoiseDistribution, NoiseModel};
    use rand::Rng;

    fn stats(delta: f64, c_d: usize, r: usize, e_norm: f64, k: f64) -> RegionStats {
        RegionStats {
            delta_d: delta,
            inside: vec![0],
            neighborhood: (0..r).collect(),
            r,
            c_d,
            k,
            e_norm,
        }
    }

    fn diag(ev: &[f64]) -> SpectralDecomposition {
        SpectralDecomposition::from_parts(ev.to_vec(), DenseMatrix::identity(ev.len())).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn weyl_examples() {
        let a = diag(&[2.0, 1.0]);
        let rep = weyl_check(&a, &DenseMatrix::from_diag(&[0.5, -0.5])).unwrap();
        assert_eq!(rep.e_norm, 0.5);
        assert!((rep.max_shift - 0.5).abs() < 1e-15);
        assert!(rep.within_bound);
        let rep = weyl_check(&a, &DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(rep.max_shift, 0.0);
        assert!(weyl_check(&a, &DenseMatrix::zeros(3, 3)).is_err());

        assert!(weyl_stable(&stats(2.0, 1, 1, 1.0, 1.0)).certified);
        assert!(!weyl_stable(&stats(1.0, 1, 1, 1.0, 1.0)).certified);
        assert!(weyl_stable(&stats(0.3, 1, 1, 0.0, 1.0)).certified);
    }

    #[test]
    fn stability_examples() {
        let c = stability_certificate(&stats(100.0, 1, 1, 1.0, 100.0), 0.01, 1000.0);
        let expected = 40.0 / PI * 50f64.ln() * 0.1;
        assert!(rel(c.rhs, expected) < 1e-14);
        assert!((c.rhs - 4.98).abs() < 0.01);
        assert!((c.inputs["k_threshold"] - 88.43).abs() < 0.01);
        assert!(c.applicable && c.certified);
        assert!(rel(c.recompute_rhs().unwrap(), c.rhs) < 1e-12);

        let c = stability_certificate(&stats(0.5, 1, 3, 0.0, 100.0), 0.0, 1.0);
        assert_eq!(c.rhs, 0.0);
        assert!(c.certified);

        let kt = 26.0 * (3.0f64 * 1000.0 / 100.0).ln();
        let c = stability_certificate(&stats(100.0, 1, 1, 1.0, kt), 0.01, 1000.0);
        assert!(!c.applicable && !c.certified);

        let c = stability_certificate(&stats(0.0, 1, 1, 1.0, 100.0), 0.0, 1.0);
        assert!(!c.applicable);
        // Past delta_D > sigma1 the logarithms go negative; refuse.
        let c = stability_certificate(&stats(100.0, 1, 4, 200.0, 1e6), 200.0, 1.0);
        assert!(!c.applicable && !c.certified);
    }

    #[test]
    fn least_singular_examples() {
        let a = diag(&[5.0, 3.0, -2.0]);
        let c = least_singular_certificate(&a, &DenseMatrix::zeros(3, 3), 100.0).unwrap();
        assert_eq!(c.rhs, 0.0);
        assert!(c.certified);
        assert_eq!(c.conclusion.value, 1.0);
        // The augmented zero eigenvalue is always inside the hole.
        assert_eq!(c.inputs["r"], 1.0);
        assert_eq!(c.inputs["r_direct"], 0.0);

        let a = diag(&[5.0, 0.0]);
        let c = least_singular_certificate(&a, &DenseMatrix::zeros(2, 2), 100.0).unwrap();
        assert!(!c.applicable && !c.certified);
    }

    #[test]
    fn localize_examples() {
        let a = diag(&[5.0, 1.0]);
        let c = localize_eigenvalue(&a, &DenseMatrix::zeros(2, 2), 3.0, &Region::single(2.0, 4.0).unwrap(), 100.0)
            .unwrap();
        assert!(c.certified);
        assert!(matches!(
            localize_eigenvalue(&a, &DenseMatrix::zeros(2, 2), 3.0, &Region::single(2.0, 6.0).unwrap(), 100.0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            localize_eigenvalue(&a, &DenseMatrix::zeros(2, 2), 4.5, &Region::single(2.0, 4.0).unwrap(), 100.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn leading_bound_zero_noise_and_oracle() {
        let a = diag(&[10.0, 4.0, 1.0]);
        let c = leading_bound(&a, &DenseMatrix::zeros(3, 3), 1, Side::Lower, 50.0).unwrap();
        assert!(c.certified);
        assert_eq!(c.inputs["t"], T_FLOOR);

        let n = 30;
        let ev: Vec<f64> = (0..n).map(|i| if i < 3 { 1000.0 * (3 - i) as f64 } else { 0.0 }).collect();
        let a = diag(&ev);
        let model = NoiseModel::new(NoiseDistribution::Gaussian, 0.05, 11);
        let e = sample_wigner_stream(n, &model, 0);
        for (p, side) in [(0, Side::Upper), (0, Side::Lower), (2, Side::Lower), (2, Side::Upper)] {
            let c = leading_bound(&a, &e, p, side, 200.0).unwrap();
            assert!(c.certified, "{side:?} {p}: {}", c.to_text());
            let t = c.inputs["t"];
            assert!(t > 0.0 && t <= 500.0);
            assert!(rel(c.recompute_rhs().unwrap(), c.rhs) < 1e-12);
            assert!(rel(c.inputs["delta_d"], t) < 1e-12);
            let noisy = symmetric_eigenvalues(&a.reconstruct().add(&e).unwrap()).unwrap();
            match side {
                Side::Lower => assert!(noisy[p] >= ev[p] - t),
                Side::Upper => assert!(noisy[p] <= ev[p] + t),
            }
        }
    }

    #[test]
    fn projector_bound_examples() {
        let c = projector_perturbation_bound(10.0, 1, 1, 0.01, 1.0, 20.0, 100.0);
        assert!(c.applicable);
        let expected = 2.0 * 0.01 / 10.0
            + 13.0 * 30f64.ln() / 20.0
            + 5.0 * 50f64.ln() / PI * (2.0 / 200.0 + 0.01 / 100.0 + 1.0 / 400.0);
        assert!(rel(c.rhs, expected) < 1e-14);
        assert!((c.rhs - 2.291).abs() < 1e-3);

        let c = projector_perturbation_bound(2.0, 1, 1, 0.0, 0.0, 20.0, 10.0);
        let expected = 13.0 * 15f64.ln() / 20.0 + 5.0 * 25f64.ln() / PI / 400.0;
        assert!(rel(c.rhs, expected) < 1e-14 && c.applicable);

        // sqrt(r x E) = 0.2, E/K = 0.1.
        let c = projector_perturbation_bound(0.5, 1, 1, 0.04, 1.0, 10.0, 10.0);
        assert!(!c.applicable);
        assert!(!projector_perturbation_bound(0.0, 1, 1, 0.0, 0.0, 10.0, 10.0).applicable);
    }

    #[test]
    fn davis_kahan_examples() {
        let c = davis_kahan_bound(1.0, 2.0);
        assert!((c.rhs - 0.3926990817).abs() < 1e-10 && c.applicable);
        assert_eq!(davis_kahan_bound(0.0, 2.0).rhs, 0.0);
        assert!(!davis_kahan_bound(3.0, 2.0).applicable);
    }

    #[test]
    fn h_examples() {
        let h = h_parameter(1, 0.1, 2.0, 2.0, 10.0);
        assert!((h.h - 0.26).abs() < 1e-15 && h.h_lt_half);
        assert_eq!(h_parameter(3, 1.0, 0.0, 2.0, 4.0).h, 1.0 / 16.0);
        let h = h_parameter(1, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(h.h, 4.0);
        assert!(!h.h_lt_half);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_exponent(3.0, 1.0).unwrap(), 18.5);
        assert_eq!(tv_exponent(1.0, 1.0).unwrap(), 6.5);
        assert_eq!(tv_exponent(1.0, 2.0).unwrap(), 8.5);
        assert!(tv_exponent(1.0, 0.0).is_err());
        assert!(tv_exponent(-1.0, 1.0).is_err());
    }

    #[test]
    fn select_k_examples() {
        let a = diag(&[3.0, 2.0]);
        let e = DenseMatrix::zeros(2, 2);
        let d = Region::single(2.5, 4.0).unwrap();
        assert_eq!(select_k(&a, &e, &d, KStrategy::Fixed(50.0)).unwrap(), 50.0);

        let mut ev = vec![20.0; 400];
        ev[399] = 10.0;
        let big = diag(&ev);
        let k = select_k(&big, &DenseMatrix::zeros(400, 400), &d, KStrategy::SqrtLogSigma).unwrap();
        assert!(rel(k, 20.0 * 400f64.ln().powi(2) / 10.0) < 1e-15);
        assert!((k - 71.79).abs() < 0.01);
        assert!(select_k(&diag(&[1.0, 0.0]), &e, &d, KStrategy::SqrtLogSigma).is_err());

        let grid = k_grid();
        assert_eq!(grid.len(), 32);
        assert_eq!(grid[0], 2.0);
        assert_eq!(grid[31], 1e6);

        assert_eq!("fixed:7.5".parse::<KStrategy>().unwrap(), KStrategy::Fixed(7.5));
        assert!("fixed:-1".parse::<KStrategy>().is_err());
        assert_eq!("grid".parse::<KStrategy>().unwrap(), KStrategy::GridMinimize);
    }

    #[test]
    fn grid_minimize_matches_exhaustive_scan() {
        let n = 12;
        let ev: Vec<f64> = (0..n).map(|i| 100.0 - 7.0 * i as f64).collect();
        let a = diag(&ev);
        let e = sample_wigner_stream(n, &NoiseModel::new(NoiseDistribution::Rademacher, 0.02, 3), 0);
        let d = Region::single(75.0, 120.0).unwrap();
        let k = select_k(&a, &e, &d, KStrategy::GridMinimize).unwrap();
        let mut scan: Vec<(f64, f64)> = k_grid()
            .into_iter()
            .map(|k| (k, projector_bound_for(&a, &e, &d, k).unwrap()))
            .filter(|(_, c)| c.applicable)
            .map(|(k, c)| (k, c.rhs))
            .collect();
        scan.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)));
        assert_eq!(k, scan[0].0);
    }

    #[test]
    fn refined_diagnostic_examples() {
        let a = diag(&[5.0, -5.0]);
        let d = Region::single(4.0, 20.0).unwrap();
        let opts = ContourOptions {
            nodes_per_edge: 101,
            rule: QuadratureRule::Midpoint,
            reach: 0.0,
            height: None,
        };
        let contour = build_contour(&a, &d, &opts).unwrap();
        let e = DenseMatrix::zeros(2, 2);
        let diagnostic = refined_bound_diagnostic(&a, &e, &d, 10.0, 1.0, &contour).unwrap();
        assert!((diagnostic.epsilon_gamma - 1.0).abs() < 1e-12);
        let expected = 2f64.ln().powf(1.5) * (25.0f64 / 1.0).ln() * (1.0 + 1.0 + 0.1);
        assert!(rel(diagnostic.diagnostic_rhs, expected) < 1e-12);

        let empty = Region::single(-1.0, 1.0).unwrap();
        let c2 = build_contour(&a, &empty, &opts).unwrap();
        let diagnostic = refined_bound_diagnostic(&a, &e, &empty, 10.0, 1.0, &c2).unwrap();
        assert_eq!(diagnostic.epsilon_gamma, 0.0);
        assert!(refined_bound_diagnostic(&a, &e, &empty, 10.0, 0.0, &c2).is_err());
    }

    #[test]
    fn bernstein_examples() {
        let b = bernstein_matrix_bound(1.0, 1.0, 1, 1, Some(0.0)).unwrap();
        assert!((b.mean_bound - 1.4084).abs() < 1e-4);
        assert_eq!(b.tail_prob, Some(2.0));
        let b = bernstein_matrix_bound(1.0, 1e-300, 3, 5, None).unwrap();
        assert!(rel(b.mean_bound, 8f64.ln() / 3.0) < 1e-12);
        assert!(bernstein_matrix_bound(0.0, 1.0, 1, 1, None).is_err());
        assert!(bernstein_matrix_bound(1.0, 0.0, 1, 1, None).is_err());
        assert!(bernstein_matrix_bound(1.0, 1.0, 1, 1, Some(-1.0)).is_err());
    }

    #[test]
    fn bernstein_monte_carlo() {
        // Z = Σ_k ε_k diag(c_k) with fixed coefficients; ‖Z‖ = max_i |Σ_k ε_k c_ki|.
        let d = 8;
        let summands = 64;
        let mut good = 0;
        for run in 0..1000u64 {
            let mut rng = stream_rng(0xbe5, run);
            let coeffs: Vec<Vec<f64>> = (0..summands)
                .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let l = coeffs.iter().flatten().fold(0.0f64, |m, c| m.max(c.abs()));
            let v = (0..d)
                .map(|i| coeffs.iter().map(|c| c[i] * c[i]).sum::<f64>())
                .fold(0.0, f64::max);
            let bound = bernstein_matrix_bound(l, v, d, d, None).unwrap().mean_bound;
            let draws = 50;
            let mean: f64 = (0..draws)
                .map(|_| {
                    let signs: Vec<f64> = (0..summands)
                        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                        .collect();
                    (0..d)
                        .map(|i| (0..summands).map(|k| signs[k] * coeffs[k][i]).sum::<f64>().abs())
                        .fold(0.0, f64::max)
                })
                .sum::<f64>()
                / draws as f64;
            if mean <= bound {
                good += 1;
            }
        }
        assert!(good >= 990, "{good}");
    }

    #[test]
    fn certificate_serialization_roundtrip() {
        let c = stability_certificate(&stats(100.0, 1, 1, 1.0, 100.0), 0.01, 1000.0);
        let back = Certificate::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        let text = c.to_text();
        assert!(text.contains("theorem = regional_stability"));
        assert!(text.contains("inputs.delta_d = 100"));
        assert!(text.contains("conclusion.kind = count_preserved"));
        assert_eq!("davis_kahan".parse::<Theorem>().unwrap(), Theorem::DavisKahan);
    }

    #[test]
    fn outcome_labels() {
        assert_eq!(Outcome::classify(false, true).label(), "not certified, empirically true");
        assert_eq!(Outcome::classify(true, false), Outcome::Violation);
    }

    #[test]
    fn projector_difference_on_exact_instance() {
        let a = spectral_decompose(&DenseMatrix::from_diag(&[3.0, 1.0])).unwrap();
        let d = Region::single(2.0, 4.0).unwrap();
        let same = projector_difference(&a, &a, &d).unwrap();
        assert_eq!(same.norm, 0.0);
        assert_eq!((same.dim_h, same.dim_h_tilde), (1, 1));
    }
}
