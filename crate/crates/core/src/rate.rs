//! Rate functionals of the large-deviation principles for projection pairs.
//!
//! Every functional evaluates integrals against equal-weight point clouds;
//! the logarithmic energy uses the off-diagonal pairwise estimator.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use rayon::prelude::*;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spectra::{CatalogFunction, SpectralMeasure};
use crate::tolerance;
use crate::tracial::{check_unit, freeness_atoms, TracialState};

/// Real number extended by `±∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Maps infinite floats to the matching variant.
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// `c·self` with `0·∞ = 0`.
    pub fn scale(self, c: f64) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(c * x),
            _ if c == 0.0 => ExtReal::Finite(0.0),
            inf if c > 0.0 => inf,
            inf => -inf,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

/// Saturating addition. `+∞ + (-∞)` resolves to `+∞`: rates are bounded
/// below, so an infinite penalty wins.
impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
            (ExtReal::NegInf, _) | (_, ExtReal::NegInf) => ExtReal::NegInf,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::Finite(rhs)
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;

    fn sub(self, rhs: ExtReal) -> ExtReal {
        self + (-rhs)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(ExtReal::Finite(x)),
            Repr::Text(t) => match t.as_str() {
                "+inf" | "inf" => Ok(ExtReal::PosInf),
                "-inf" => Ok(ExtReal::NegInf),
                other => Err(de::Error::custom(format!(
                    "not an extended real: {other:?}"
                ))),
            },
        }
    }
}

/// `B(s, t)`, the large-N limit of the scaled Selberg normalization.
pub fn b_function(s: f64, t: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) || !s.is_finite() || !t.is_finite() {
        return Err(Error::param(format!("B({s}, {t}) needs s, t >= 0")));
    }
    // y²/2·log y, continuously extended by 0 at y = 0.
    let h = |y: f64| if y == 0.0 { 0.0 } else { 0.5 * y * y * y.ln() };
    Ok(h(1.0 + s) - h(s) + h(1.0 + t) - h(t) - h(2.0 + s + t) + h(1.0 + s + t))
}

/// Constants entering the rate functions for traces `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub kappa: f64,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl RateParams {
    /// `max{α, β, 1-α, 1-β} = ρ + κ + λ`.
    pub fn max_trace(&self) -> f64 {
        self.alpha
            .max(self.beta)
            .max(1.0 - self.alpha)
            .max(1.0 - self.beta)
    }
}

pub fn rate_params(alpha: f64, beta: f64) -> Result<RateParams> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let rho = alpha.min(beta).min(1.0 - alpha).min(1.0 - beta);
    let kappa = (alpha - beta).abs();
    let lambda = (alpha + beta - 1.0).abs();
    let c = if rho > 0.0 {
        rho * rho * b_function(kappa / rho, lambda / rho)?
    } else {
        0.0
    };
    Ok(RateParams {
        alpha,
        beta,
        rho,
        kappa,
        lambda,
        c,
    })
}

/// Logarithmic energy together with how the estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogEnergy {
    pub value: ExtReal,
    /// Number of cloud points entering the pairwise estimator.
    pub points: usize,
    /// True when the measure has atoms or the cloud has coincident points.
    pub degenerate: bool,
}

/// Mean of `log|x_i - x_j|` over ordered pairs `i != j`; `-∞` for fewer than
/// two points or a coincident pair.
///
/// Rows are summed in parallel and combined in index order, so the result
/// does not depend on the thread count.
pub(crate) fn offdiag_log_mean(points: &[f64]) -> f64 {
    let n = points.len();
    if n < 2 {
        return f64::NEG_INFINITY;
    }
    let rows: Vec<f64> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let xi = points[i];
            points[i + 1..].iter().map(|&xj| (xi - xj).abs().ln()).sum()
        })
        .collect();
    let total: f64 = rows.iter().sum();
    2.0 * total / (n as f64 * (n - 1) as f64)
}

pub fn log_energy_detailed(mu: &SpectralMeasure) -> LogEnergy {
    let points = mu.cloud().len();
    if !mu.atoms().is_empty() {
        return LogEnergy {
            value: ExtReal::NegInf,
            points,
            degenerate: true,
        };
    }
    if mu.is_empty() {
        return LogEnergy {
            value: ExtReal::Finite(0.0),
            points,
            degenerate: false,
        };
    }
    let mean = offdiag_log_mean(mu.cloud());
    let m = mu.cloud_mass();
    LogEnergy {
        value: ExtReal::from_f64(mean).scale(m * m),
        points,
        degenerate: mean == f64::NEG_INFINITY,
    }
}

/// `Σ(μ) = ∬ log|x - y| dμ(x) dμ(y)`.
pub fn log_energy(mu: &SpectralMeasure) -> ExtReal {
    log_energy_detailed(mu).value
}

fn mean_of(points: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    points.iter().map(|&x| f(x)).sum::<f64>() / points.len() as f64
}

/// `-ρ²Σ(μ) - ρκ∫log x dμ - ρλ∫log(1-x) dμ + C` for a probability cloud `μ` on `(0, 1)`.
fn interval_functional(points: &[f64], p: &RateParams) -> ExtReal {
    let inside = |x: f64| x > tolerance::LOG_EDGE && x < 1.0 - tolerance::LOG_EDGE;
    if points.is_empty() || !points.iter().all(|&x| inside(x)) {
        return ExtReal::PosInf;
    }
    let sigma = offdiag_log_mean(points);
    if !sigma.is_finite() {
        return ExtReal::PosInf;
    }
    let lx = mean_of(points, f64::ln);
    let l1x = mean_of(points, |x| (1.0 - x).ln());
    ExtReal::Finite(-p.rho * p.rho * sigma - p.rho * p.kappa * lx - p.rho * p.lambda * l1x + p.c)
}

/// Checks that the atoms of `measure` are exactly `required` (locations within
/// the atom tolerance, masses within the mass-match tolerance).
fn atoms_match(measure: &SpectralMeasure, required: &[(f64, f64)], wrap_angle: bool) -> bool {
    let mut want: Vec<(f64, f64)> = Vec::new();
    for &(x, m) in required {
        match want.iter_mut().find(|w| (w.0 - x).abs() <= tolerance::ATOM) {
            Some(w) => w.1 += m,
            None => want.push((x, m)),
        }
    }
    let mut found = vec![0.0; want.len()];
    for &(x, m) in measure.atoms() {
        let x = if wrap_angle && x <= -PI + tolerance::ATOM {
            PI
        } else {
            x
        };
        match want.iter().position(|w| (w.0 - x).abs() <= tolerance::ATOM) {
            Some(i) => found[i] += m,
            None => return false,
        }
    }
    want.iter()
        .zip(&found)
        .all(|(w, f)| (w.1 - f).abs() <= tolerance::ATOM_MASS_MATCH)
}

/// `Ĩ(μ̃)`: rate of the empirical law of `PQP` including its forced atoms.
///
/// Finite only if `μ̃ = (1 - min{α,β})δ₀ + max{α+β-1, 0}δ₁ + ρμ` with `μ` an
/// atom-free cloud in `(0, 1)`.
pub fn rate_tilde(mu_tilde: &SpectralMeasure, alpha: f64, beta: f64) -> Result<ExtReal> {
    let p = rate_params(alpha, beta)?;
    let required = [
        (0.0, 1.0 - alpha.min(beta)),
        (1.0, (alpha + beta - 1.0).max(0.0)),
    ];
    if !atoms_match(mu_tilde, &required, false) {
        return Ok(ExtReal::PosInf);
    }
    if (mu_tilde.cloud_mass() - p.rho).abs() > tolerance::ATOM_MASS_MATCH {
        return Ok(ExtReal::PosInf);
    }
    if p.rho == 0.0 {
        return Ok(ExtReal::Finite(0.0));
    }
    Ok(interval_functional(mu_tilde.cloud(), &p))
}

/// `𝓘(τ)`: rate on tracial states. Finite only when `τ` has the corner
/// traces of free projections with traces `(α, β)`.
pub fn rate_ts(tau: &TracialState, alpha: f64, beta: f64) -> Result<ExtReal> {
    let p = rate_params(alpha, beta)?;
    let free = freeness_atoms(alpha, beta)?;
    let corners_ok = tau
        .corners()
        .iter()
        .zip(&free)
        .all(|(a, b)| (a - b).abs() <= tolerance::ATOM_MASS_MATCH);
    let (te, tf) = tau.generator_traces();
    let traces_ok = (te - alpha).abs() <= tolerance::ATOM_MASS_MATCH
        && (tf - beta).abs() <= tolerance::ATOM_MASS_MATCH;
    if !(corners_ok && traces_ok) {
        return Ok(ExtReal::PosInf);
    }
    if p.rho == 0.0 {
        return Ok(ExtReal::Finite(0.0));
    }
    let mu = tau.mu();
    if !mu.atoms().is_empty() {
        return Ok(ExtReal::PosInf);
    }
    Ok(interval_functional(mu.cloud(), &p))
}

/// `χ(τ) = -𝓘(τ)` at the generator traces of `τ`.
pub fn free_entropy(tau: &TracialState) -> ExtReal {
    let (te, tf) = tau.generator_traces();
    match rate_ts(tau, te.clamp(0.0, 1.0), tf.clamp(0.0, 1.0)) {
        Ok(v) => -v,
        Err(_) => ExtReal::NegInf,
    }
}

/// Rate of the empirical law of `h(P, Q)`.
///
/// The law must have the atoms and the symmetric continuous shape produced by
/// free-compatible states; otherwise the rate is `+∞`. Unitary laws are given
/// on the angle in `(-π, π]`.
pub fn rate_contracted(
    measure: &SpectralMeasure,
    h: CatalogFunction,
    alpha: f64,
    beta: f64,
) -> Result<ExtReal> {
    h.validate()?;
    let p = rate_params(alpha, beta)?;
    let a11 = (alpha + beta - 1.0).max(0.0);
    match h {
        CatalogFunction::Pqp => rate_tilde(measure, alpha, beta),
        CatalogFunction::Anticommutator => {
            let required = [(0.0, 1.0 - a11 - 2.0 * p.rho), (2.0, a11)];
            if !shape_masses_ok(measure, &required, 2.0 * p.rho, false) {
                return Ok(ExtReal::PosInf);
            }
            if p.rho == 0.0 {
                return Ok(ExtReal::Finite(0.0));
            }
            Ok(match anticommutator_preimage(measure.cloud()) {
                Some(ts) => interval_functional(&ts, &p),
                None => ExtReal::PosInf,
            })
        }
        CatalogFunction::Linear { a, b } => {
            let required = [
                (0.0, (1.0 - alpha - beta).max(0.0)),
                (a, (alpha - beta).max(0.0)),
                (b, (beta - alpha).max(0.0)),
                (a + b, a11),
            ];
            if !shape_masses_ok(measure, &required, 2.0 * p.rho, false) {
                return Ok(ExtReal::PosInf);
            }
            if p.rho == 0.0 {
                return Ok(ExtReal::Finite(0.0));
            }
            Ok(linear_functional(measure.cloud(), a, b, &p))
        }
        CatalogFunction::UnitaryProduct => {
            let required = [
                (0.0, (alpha + beta - 1.0).abs()),
                (PI, (alpha - beta).abs()),
            ];
            if !shape_masses_ok(measure, &required, 2.0 * p.rho, true) {
                return Ok(ExtReal::PosInf);
            }
            if p.rho == 0.0 {
                return Ok(ExtReal::Finite(0.0));
            }
            Ok(unitary_functional(measure.cloud(), &p))
        }
    }
}

fn shape_masses_ok(
    measure: &SpectralMeasure,
    required: &[(f64, f64)],
    cloud_mass: f64,
    wrap_angle: bool,
) -> bool {
    atoms_match(measure, required, wrap_angle)
        && (measure.cloud_mass() - cloud_mass).abs() <= tolerance::ATOM_MASS_MATCH
}

/// Recovers the angle variables from a cloud of `t ± √t` values, checking
/// that both branches are present for every `t`.
fn anticommutator_preimage(cloud: &[f64]) -> Option<Vec<f64>> {
    let (pos, neg): (Vec<f64>, Vec<f64>) = cloud.iter().partition(|&&x| x > 0.0);
    if pos.len() != neg.len() || pos.iter().any(|&x| x >= 2.0) {
        return None;
    }
    let ts: Vec<f64> = pos
        .iter()
        .map(|&x| {
            let r = ((1.0 + 4.0 * x).sqrt() - 1.0) / 2.0;
            r * r
        })
        .collect();
    let mut lower: Vec<f64> = ts.iter().map(|&t| t - t.sqrt()).collect();
    lower.sort_by(f64::total_cmp);
    let mut neg = neg;
    neg.sort_by(f64::total_cmp);
    let matched = lower
        .iter()
        .zip(&neg)
        .all(|(x, y)| (x - y).abs() <= tolerance::SHAPE_MATCH);
    matched.then_some(ts)
}

fn linear_functional(cloud: &[f64], a: f64, b: f64, p: &RateParams) -> ExtReal {
    let s = a + b;
    let scale = a.abs().max(b.abs()).max(1.0);
    let n = cloud.len();
    let symmetric =
        (0..n).all(|i| (cloud[i] + cloud[n - 1 - i] - s).abs() <= tolerance::SHAPE_MATCH * scale);
    let mut corners = [0.0, a, b, s];
    corners.sort_by(f64::total_cmp);
    let (lo, hi) = (corners[0], corners[1]);
    let in_support = |x: f64| (x > lo && x < hi) || (x > s - hi && x < s - lo);
    if !symmetric || !cloud.iter().all(|&x| in_support(x)) {
        return ExtReal::PosInf;
    }
    let sigma = offdiag_log_mean(cloud);
    let lk = mean_of(cloud, |x| ((x - a) * (x - b)).abs().ln());
    let ll = mean_of(cloud, |x| (x * (s - x)).abs().ln());
    let value = -2.0 * p.rho * p.rho * sigma - p.rho * p.kappa * lk - p.rho * p.lambda * ll
        + p.c
        + p.rho * p.max_trace() * (a * b).abs().ln();
    if value.is_finite() {
        ExtReal::Finite(value)
    } else {
        ExtReal::PosInf
    }
}

/// Unitary rate on a symmetric angle cloud. The double integral of
/// `log|cos θ - cos ψ|` is estimated over the upper-half points only: a point
/// and its mirror image share a cosine, so they are excluded like diagonal pairs.
fn unitary_functional(cloud: &[f64], p: &RateParams) -> ExtReal {
    let n = cloud.len();
    let symmetric = (0..n).all(|i| (cloud[i] + cloud[n - 1 - i]).abs() <= tolerance::SHAPE_MATCH);
    let edge = tolerance::ATOM_MERGE;
    let interior = cloud.iter().all(|&x| x.abs() > edge && x.abs() < PI - edge);
    if !n.is_multiple_of(2) || !symmetric || !interior {
        return ExtReal::PosInf;
    }
    let cos: Vec<f64> = cloud[n / 2..].iter().map(|&x| x.cos()).collect();
    let sigma = offdiag_log_mean(&cos);
    let l_plus = mean_of(&cos, |c| (1.0 + c).ln());
    let l_minus = mean_of(&cos, |c| (1.0 - c).ln());
    let value = -p.rho * p.rho * sigma - p.rho * p.kappa * l_plus - p.rho * p.lambda * l_minus
        + p.c
        + p.rho * p.max_trace() * LN_2;
    if value.is_finite() {
        ExtReal::Finite(value)
    } else {
        ExtReal::PosInf
    }
}
