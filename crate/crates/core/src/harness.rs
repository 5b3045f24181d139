//! Statistical verification suites.
//!
//! Every suite draws its samples from independent streams indexed by sample
//! number, evaluates them in parallel and reduces them in index order, so a
//! report depends only on the configuration and the master seed.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{
    canonical_pair, sample_pair, selberg_log_z, spectrum_params, ProjectionPair,
};
use crate::error::{Error, Result};
use crate::limits::{minimizer_for, minimizer_pqp, quantile_cloud};
use crate::linalg::{hermitian_eigs, ComplexMatrix};
use crate::quad::GaussLegendre;
use crate::rate::{rate_params, rate_tilde, rate_ts, ExtReal};
use crate::rng::RngStream;
use crate::spectra::{spectrum, CatalogFunction, SpectralMeasure};
use crate::tolerance;
use crate::tracial::TracialState;

/// `sup |F_n - F|` over the sample points, both one-sided limits of the
/// empirical CDF included. `sorted` must be ascending and nonempty.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Selberg,
    BLimit,
    Structure,
    Freeness,
    RateMin,
    Contraction,
    Moments,
    UnitaryLaw,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Selberg,
        Suite::BLimit,
        Suite::Structure,
        Suite::Freeness,
        Suite::RateMin,
        Suite::Contraction,
        Suite::Moments,
        Suite::UnitaryLaw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Selberg => "selberg",
            Suite::BLimit => "b_limit",
            Suite::Structure => "structure",
            Suite::Freeness => "freeness",
            Suite::RateMin => "rate_min",
            Suite::Contraction => "contraction",
            Suite::Moments => "moments",
            Suite::UnitaryLaw => "unitary_law",
        }
    }

    /// Disjoint block of stream indices reserved for the suite.
    fn stream_base(self) -> u64 {
        (Suite::ALL.iter().position(|&s| s == self).unwrap_or(0) as u64 + 1) << 40
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == key)
            .ok_or_else(|| Error::param(format!("unknown suite {s:?}")))
    }
}

/// Sizes used by the suites. The defaults are the acceptance settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub selberg_cases: Vec<(usize, f64, f64)>,
    pub b_limit_dims: Vec<usize>,
    pub trace_pairs: Vec<(f64, f64)>,
    pub structure_cases: Vec<(usize, usize, usize)>,
    pub structure_samples: usize,
    pub freeness_n: usize,
    pub freeness_samples: usize,
    pub discretization: usize,
    pub contraction_dims: Vec<usize>,
    pub contraction_samples: usize,
    pub contraction_linear: (f64, f64),
    pub moments_case: (usize, usize, usize),
    pub moments_samples: usize,
    pub unitary_n: usize,
    pub unitary_samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            selberg_cases: vec![(1, 0.0, 0.0), (2, 0.0, 0.0), (2, 1.0, 1.0), (3, 2.0, 1.0)],
            b_limit_dims: vec![64, 128, 256],
            trace_pairs: vec![(0.5, 0.5), (0.3, 0.6)],
            structure_cases: vec![(12, 3, 4), (12, 7, 8)],
            structure_samples: 10_000,
            freeness_n: 512,
            freeness_samples: 20,
            discretization: 2000,
            contraction_dims: vec![8, 64],
            contraction_samples: 100,
            contraction_linear: (1.5, -0.7),
            moments_case: (64, 20, 36),
            moments_samples: 10_000,
            unitary_n: 512,
            unitary_samples: 20,
        }
    }
}

/// Outcome of one check inside a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub samples: usize,
    pub seed: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub duration_secs: f64,
}

impl VerificationReport {
    fn new(suite: &str, checks: Vec<CheckRecord>, started: Instant) -> Self {
        Self {
            suite: suite.to_string(),
            pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
            checks,
            duration_secs: started.elapsed().as_secs_f64(),
        }
    }
}

struct Checks {
    seed: u64,
    records: Vec<CheckRecord>,
}

impl Checks {
    fn new(seed: u64) -> Self {
        Self {
            seed,
            records: Vec::new(),
        }
    }

    /// Passes when `statistic <= threshold` (NaN fails).
    fn at_most(&mut self, name: impl Into<String>, statistic: f64, threshold: f64, samples: usize) {
        self.push(name, statistic, threshold, samples, statistic <= threshold);
    }

    /// Passes when `statistic < threshold`.
    fn below(&mut self, name: impl Into<String>, statistic: f64, threshold: f64, samples: usize) {
        self.push(name, statistic, threshold, samples, statistic < threshold);
    }

    fn push(
        &mut self,
        name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        samples: usize,
        pass: bool,
    ) {
        self.records.push(CheckRecord {
            name: name.into(),
            statistic,
            threshold,
            samples,
            seed: self.seed,
            pass,
        });
    }
}

/// Runs a suite by name; `all` runs every suite and merges the checks.
pub fn run_suite(name: &str, config: &SuiteConfig, master_seed: u64) -> Result<VerificationReport> {
    if name.eq_ignore_ascii_case("all") {
        let started = Instant::now();
        let mut checks = Vec::new();
        for suite in Suite::ALL {
            let report = run(suite, config, master_seed)?;
            checks.extend(report.checks.into_iter().map(|mut c| {
                c.name = format!("{suite}/{}", c.name);
                c
            }));
        }
        return Ok(VerificationReport::new("all", checks, started));
    }
    run(name.parse()?, config, master_seed)
}

pub fn run(suite: Suite, config: &SuiteConfig, master_seed: u64) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut checks = Checks::new(master_seed);
    let base = RngStream::new(master_seed, suite.stream_base());
    match suite {
        Suite::Selberg => selberg(config, &mut checks),
        Suite::BLimit => b_limit(config, &mut checks)?,
        Suite::Structure => structure(config, base, &mut checks)?,
        Suite::Freeness => freeness(config, base, &mut checks)?,
        Suite::RateMin => rate_min(config, &mut checks)?,
        Suite::Contraction => contraction(config, base, &mut checks)?,
        Suite::Moments => moments(config, base, &mut checks)?,
        Suite::UnitaryLaw => unitary_law(config, base, &mut checks)?,
    }
    Ok(VerificationReport::new(
        suite.name(),
        checks.records,
        started,
    ))
}

fn rank(x: f64, n: usize) -> usize {
    (x * n as f64).round() as usize
}

/// Runs `f` on streams `base + 0 .. base + count` in parallel, results in index order.
fn par_samples<T: Send>(
    base: RngStream,
    count: usize,
    f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| f(&mut base.offset(i).rng()))
        .collect()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// `∫_{[0,1]^n} ∏ x^κ (1-x)^λ ∏_{i<j} (x_i - x_j)²` by tensor Gauss–Legendre.
/// For integer exponents the integrand is a polynomial of degree below
/// `2·nodes` in each variable and the rule is exact.
pub fn selberg_brute_force(n: usize, kappa: f64, lambda: f64, nodes: usize) -> f64 {
    let gl = GaussLegendre::new(nodes);
    let xs: Vec<f64> = gl.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let ws: Vec<f64> = gl.weights.iter().map(|w| 0.5 * w).collect();
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let mut term = 1.0;
        for i in 0..n {
            let x = xs[idx[i]];
            term *= ws[idx[i]] * x.powf(kappa) * (1.0 - x).powf(lambda);
            for j in 0..i {
                let d = x - xs[idx[j]];
                term *= d * d;
            }
        }
        total += term;
        let mut pos = 0;
        loop {
            if pos == n {
                return total;
            }
            idx[pos] += 1;
            if idx[pos] < nodes {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn selberg(config: &SuiteConfig, checks: &mut Checks) {
    for &(n, kappa, lambda) in &config.selberg_cases {
        let exact = selberg_log_z(n, kappa, lambda).exp();
        let brute = selberg_brute_force(n, kappa, lambda, 24);
        checks.at_most(
            format!("Z(n={n}, kappa={kappa}, lambda={lambda}) relative error"),
            ((exact - brute) / brute).abs(),
            1e-6,
            1,
        );
    }
}

fn b_limit(config: &SuiteConfig, checks: &mut Checks) -> Result<()> {
    for &(alpha, beta) in &config.trace_pairs {
        let target = rate_params(alpha, beta)?.c;
        let mut errors = Vec::new();
        for &n in &config.b_limit_dims {
            let sp = spectrum_params(n, rank(alpha, n), rank(beta, n))?;
            let scaled =
                selberg_log_z(sp.n, sp.kappa_n as f64, sp.lambda_n as f64) / (n * n) as f64;
            errors.push((scaled - target).abs());
        }
        let worst_step = errors
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        checks.below(
            format!("alpha={alpha} beta={beta} error increments (must be negative)"),
            worst_step,
            0.0,
            errors.len(),
        );
        checks.at_most(
            format!("alpha={alpha} beta={beta} error at largest N"),
            *errors.last().unwrap_or(&f64::INFINITY),
            0.05,
            errors.len(),
        );
    }
    Ok(())
}

/// `tr(A B) = Σ_ij A_ij B_ji` without forming the product.
fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let (a, b) = (a.as_nalgebra(), b.as_nalgebra());
    a.iter()
        .zip(b.transpose().iter())
        .map(|(x, y)| (x * y).re)
        .sum()
}

/// `tr((PQ)^m) / N` for `m = 1..=count` (`count <= 5`), using at most two
/// matrix products: higher powers come from trace pairings of `M²` and `M³`.
fn pq_power_traces(pair: &ProjectionPair, count: usize) -> Vec<f64> {
    assert!(count <= 5, "at most five powers");
    let m1 = pair.p.product(&pair.q);
    let m2 = m1.product(&m1);
    let m3 = if count >= 3 {
        Some(m2.product(&m1))
    } else {
        None
    };
    let n = pair.n as f64;
    let mut out = vec![m1.trace().re / n];
    if count >= 2 {
        out.push(m2.trace().re / n);
    }
    if let Some(m3) = &m3 {
        out.push(m3.trace().re / n);
        if count >= 4 {
            out.push(trace_of_product(&m2, &m2) / n);
        }
        if count >= 5 {
            out.push(trace_of_product(&m2, m3) / n);
        }
    }
    out
}

fn structure(config: &SuiteConfig, base: RngStream, checks: &mut Checks) -> Result<()> {
    let samples = config.structure_samples;
    for (case, &(n, k, l)) in config.structure_cases.iter().enumerate() {
        let offset = (case as u64) << 32;
        let direct = par_samples(base.offset(offset), samples, |rng| {
            Ok(pq_power_traces(&sample_pair(n, k, l, rng)?, 4))
        })?;
        let canonical = par_samples(base.offset(offset + (1 << 31)), samples, |rng| {
            Ok(pq_power_traces(&canonical_pair(n, k, l, rng)?, 4))
        })?;
        for m in 0..4 {
            let d: Vec<f64> = direct.iter().map(|v| v[m]).collect();
            let c: Vec<f64> = canonical.iter().map(|v| v[m]).collect();
            let (md, sd) = mean_and_se(&d);
            let (mc, sc) = mean_and_se(&c);
            let z = (md - mc).abs() / (sd * sd + sc * sc).sqrt();
            checks.at_most(
                format!(
                    "N={n} k={k} l={l} tr((PQ)^{}) standardized difference",
                    m + 1
                ),
                z,
                3.0,
                samples,
            );
        }
    }
    Ok(())
}

fn freeness(config: &SuiteConfig, base: RngStream, checks: &mut Checks) -> Result<()> {
    let n = config.freeness_n;
    let samples = config.freeness_samples;
    for (case, &(alpha, beta)) in config.trace_pairs.iter().enumerate() {
        let law = minimizer_pqp(alpha, beta)?;
        let (k, l) = (rank(alpha, n), rank(beta, n));
        let stats = par_samples(base.offset((case as u64) << 32), samples, |rng| {
            let pair = sample_pair(n, k, l, rng)?;
            let eig = spectrum(&pair, CatalogFunction::Pqp, tolerance::ATOM)?;
            let zeros = eig.iter().filter(|x| x.abs() <= tolerance::ATOM).count();
            let interior: Vec<f64> = eig
                .into_iter()
                .filter(|&x| x > tolerance::ATOM && x < 1.0 - tolerance::ATOM)
                .collect();
            let ks = if interior.is_empty() {
                1.0
            } else {
                ks_distance(&interior, |x| law.continuous_cdf(x))
            };
            Ok((zeros as f64 / n as f64, ks))
        })?;
        let zero_frac = stats.iter().map(|s| s.0).sum::<f64>() / samples as f64;
        let ks = stats.iter().map(|s| s.1).sum::<f64>() / samples as f64;
        checks.at_most(
            format!("alpha={alpha} beta={beta} atom-at-0 fraction deviation"),
            (zero_frac - (1.0 - alpha.min(beta))).abs(),
            0.02,
            samples,
        );
        checks.at_most(
            format!("alpha={alpha} beta={beta} mean KS of continuous part"),
            ks,
            0.05,
            samples,
        );
    }
    Ok(())
}

fn uniform_cloud(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

fn rate_min(config: &SuiteConfig, checks: &mut Checks) -> Result<()> {
    let n = config.discretization;
    for &(alpha, beta) in &config.trace_pairs {
        let cloud = quantile_cloud(&minimizer_pqp(alpha, beta)?, n)?;
        let r = rate_tilde(&cloud, alpha, beta)?;
        checks.at_most(
            format!("alpha={alpha} beta={beta} |rate at minimizer|"),
            r.to_f64().abs(),
            1e-2,
            n,
        );
    }
    let uniform = SpectralMeasure::new(vec![(0.0, 0.5)], uniform_cloud(n), 0.5)?;
    let r = rate_tilde(&uniform, 0.5, 0.5)?;
    checks.at_most(
        "uniform substitution at alpha=beta=1/2",
        (r.to_f64() - (0.375 - LN_2 / 2.0)).abs(),
        2e-3,
        n,
    );
    let infinite = |r: ExtReal| if r == ExtReal::PosInf { 0.0 } else { 1.0 };
    let violated = SpectralMeasure::new(vec![(0.0, 0.4)], uniform_cloud(n), 0.6)?;
    checks.at_most(
        "violated atom gives +inf (0 = yes)",
        infinite(rate_tilde(&violated, 0.5, 0.5)?),
        0.0,
        n,
    );
    let mu = SpectralMeasure::cloud_only(uniform_cloud(n))?;
    let bumped = TracialState::new(0.1, 0.0, 0.0, 0.0, mu)?;
    checks.at_most(
        "tracial state with a11 + 0.1 gives +inf (0 = yes)",
        infinite(rate_ts(&bumped, 0.5, 0.5)?),
        0.0,
        n,
    );
    Ok(())
}

fn contraction_functions(config: &SuiteConfig) -> Result<[CatalogFunction; 4]> {
    let (a, b) = config.contraction_linear;
    Ok([
        CatalogFunction::Pqp,
        CatalogFunction::Anticommutator,
        CatalogFunction::linear(a, b)?,
        CatalogFunction::UnitaryProduct,
    ])
}

fn contraction(config: &SuiteConfig, base: RngStream, checks: &mut Checks) -> Result<()> {
    let functions = contraction_functions(config)?;
    let samples = config.contraction_samples;
    for &n in &config.contraction_dims {
        let errors = par_samples(base.offset((n as u64) << 32), samples, |rng| {
            use rand::Rng;
            let k = rng.random_range(0..=n);
            let l = rng.random_range(0..=n);
            let pair = sample_pair(n, k, l, rng)?;
            let tau = TracialState::from_pair(&pair, tolerance::ATOM)?;
            functions
                .iter()
                .map(|&h| {
                    let predicted = tau.pushforward(h)?.expand(n)?;
                    let actual = spectrum(&pair, h, tolerance::ATOM)?;
                    Ok(predicted
                        .iter()
                        .zip(&actual)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max))
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        for (j, h) in functions.iter().enumerate() {
            let worst = errors.iter().map(|e| e[j]).fold(0.0, f64::max);
            checks.at_most(
                format!("N={n} {h} max |pushforward - spectrum|"),
                worst,
                1e-8,
                samples,
            );
        }
    }
    Ok(())
}

fn moments(config: &SuiteConfig, base: RngStream, checks: &mut Checks) -> Result<()> {
    let (n, k, l) = config.moments_case;
    let samples = config.moments_samples;
    let per_sample = par_samples(base, samples, |rng| {
        let pair = sample_pair(n, k, l, rng)?;
        let pq = pq_power_traces(&pair, 5);
        // P = I_k ⊕ 0 here, so PQP is the leading k x k block of Q padded
        // with zeros and its spectrum comes from that block alone.
        let block = pair.q.as_nalgebra().view((0, 0), (k, k)).clone_owned();
        let eig = hermitian_eigs(&ComplexMatrix::from_nalgebra(block), false)?.values;
        let gap = pq
            .iter()
            .enumerate()
            .map(|(m, t)| {
                let power: f64 = eig.iter().map(|x| x.powi(m as i32 + 1)).sum();
                (power / n as f64 - t).abs()
            })
            .fold(0.0, f64::max);
        Ok((pq[0], gap))
    })?;
    let gap = per_sample.iter().map(|s| s.1).fold(0.0, f64::max);
    checks.at_most(
        format!("N={n} k={k} l={l} max |tr((PQ)^m) - tr((PQP)^m)|, m=1..5"),
        gap,
        1e-10,
        samples,
    );
    let first: Vec<f64> = per_sample.iter().map(|s| s.0).collect();
    let (mean, se) = mean_and_se(&first);
    let expected = (k * l) as f64 / (n * n) as f64;
    checks.at_most(
        format!("N={n} k={k} l={l} standardized deviation of mean tr(PQ) from kl/N^2"),
        (mean - expected).abs() / se,
        3.0,
        samples,
    );
    Ok(())
}

fn unitary_law(config: &SuiteConfig, base: RngStream, checks: &mut Checks) -> Result<()> {
    let n = config.unitary_n;
    let samples = config.unitary_samples;
    let (k, l) = (rank(0.5, n), rank(0.5, n));
    let ks = par_samples(base, samples, |rng| {
        let pair = sample_pair(n, k, l, rng)?;
        let angles = spectrum(&pair, CatalogFunction::UnitaryProduct, tolerance::ATOM)?;
        Ok(ks_distance(&angles, |t| {
            ((t + PI) / (2.0 * PI)).clamp(0.0, 1.0)
        }))
    })?;
    checks.at_most(
        "alpha=beta=1/2 mean KS against the uniform circle law",
        ks.iter().sum::<f64>() / samples as f64,
        0.05,
        samples,
    );
    Ok(())
}

/// Wasserstein-1 distance between the quantile clouds of the `PQP` law
/// pushed through `h` and of the direct limit law of `h`.
pub fn pushforward_consistency(h: CatalogFunction, alpha: f64, beta: f64, n: usize) -> Result<f64> {
    let pqp = quantile_cloud(&minimizer_pqp(alpha, beta)?, n)?;
    let rho = alpha.min(beta).min(1.0 - alpha).min(1.0 - beta);
    let mu = if rho > 0.0 {
        SpectralMeasure::cloud_only(pqp.cloud().to_vec())?
    } else {
        SpectralMeasure::empty()
    };
    let tau = TracialState::free(alpha, beta, mu)?;
    let pushed = tau.pushforward(h)?;
    let direct = quantile_cloud(&minimizer_for(h, alpha, beta)?, n)?;
    Ok(pushed.wasserstein1(&direct))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_examples() {
        let q: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!(ks_distance(&q, |x| x) <= 0.01 + 1e-15);
        assert_eq!(ks_distance(&[0.0; 5], |x: f64| x.clamp(0.0, 1.0)), 1.0);
        let arcsine: Vec<f64> = (0..2000)
            .map(|i| (PI * (i as f64 + 0.5) / 4000.0).sin().powi(2))
            .collect();
        assert!(ks_distance(&arcsine, |x| 2.0 / PI * x.sqrt().asin()) <= 5e-4);
    }

    #[test]
    fn suite_names() {
        assert_eq!("B_LIMIT".parse::<Suite>().unwrap(), Suite::BLimit);
        assert_eq!("unitary-law".parse::<Suite>().unwrap(), Suite::UnitaryLaw);
        assert!(run_suite("nope", &SuiteConfig::default(), 0).is_err());
    }

    #[test]
    fn selberg_suite_passes() {
        let r = run_suite("selberg", &SuiteConfig::default(), 1).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn b_limit_suite_passes() {
        let r = run_suite("b_limit", &SuiteConfig::default(), 1).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn small_contraction_is_deterministic() {
        let config = SuiteConfig {
            contraction_dims: vec![6],
            contraction_samples: 8,
            ..SuiteConfig::default()
        };
        let a = run(Suite::Contraction, &config, 3).unwrap();
        let b = run(Suite::Contraction, &config, 3).unwrap();
        assert!(a.pass, "{a:?}");
        let stats =
            |r: &VerificationReport| r.checks.iter().map(|c| c.statistic).collect::<Vec<_>>();
        assert_eq!(stats(&a), stats(&b));
    }
}
