//! Sampled ensembles against each other and against the limit laws.

use rand::Rng;
use rayon::prelude::*;

use twoproj::ensembles::{canonical_pair, sample_jacobi, sample_pair, spectrum_params};
use twoproj::limits::minimizer_pqp;
use twoproj::rng::RngStream;
use twoproj::spectra::{empirical_measure, spectrum, CatalogFunction};

const SEED: u64 = 20_240_611;

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn power_sums(xs: &[f64], count: usize) -> Vec<f64> {
    (1..=count as i32)
        .map(|m| xs.iter().map(|x| x.powi(m)).sum())
        .collect()
}

fn sampled<T: Send>(
    stream: u64,
    count: usize,
    f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> T + Sync,
) -> Vec<T> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| f(&mut RngStream::new(SEED, (stream << 32) + i).rng()))
        .collect()
}

/// The generic eigenvalues of `PQP` (the `n` largest) follow the Jacobi law
/// named by the rank bookkeeping.
#[test]
fn jacobi_matches_pqp_generic_part() {
    let samples = 10_000;
    for (case, (n, k, l)) in [(10, 3, 4), (10, 6, 7), (9, 5, 2)].into_iter().enumerate() {
        let sp = spectrum_params(n, k, l).unwrap();
        let from_pairs = sampled(2 * case as u64, samples, |rng| {
            let pair = sample_pair(n, k, l, rng).unwrap();
            let eig = spectrum(&pair, CatalogFunction::Pqp, 1e-8).unwrap();
            let generic = &eig[sp.n0..sp.n0 + sp.n];
            power_sums(generic, 3)
        });
        let from_jacobi = sampled(2 * case as u64 + 1, samples, |rng| {
            power_sums(
                &sample_jacobi(sp.n, sp.kappa_n, sp.lambda_n, rng).unwrap(),
                3,
            )
        });
        for m in 0..3 {
            let a: Vec<f64> = from_pairs.iter().map(|v| v[m]).collect();
            let b: Vec<f64> = from_jacobi.iter().map(|v| v[m]).collect();
            let (ma, sa) = mean_se(&a);
            let (mb, sb) = mean_se(&b);
            let z = (ma - mb).abs() / (sa * sa + sb * sb).sqrt();
            assert!(z <= 3.0, "({n},{k},{l}) power {}: z = {z}", m + 1);
        }
    }
}

#[test]
fn pqp_has_forced_zeros() {
    let mut rng = RngStream::new(SEED, 99).rng();
    for _ in 0..20 {
        let pair = sample_pair(10, 3, 4, &mut rng).unwrap();
        let eig = spectrum(&pair, CatalogFunction::Pqp, 1e-8).unwrap();
        let m = empirical_measure(&eig, &[0.0, 1.0], 1e-8).unwrap();
        assert!(m.atom_mass_near(0.0, 1e-8) >= 0.7 - 1e-12);
    }
}

#[test]
fn two_dimensional_canonical_pair() {
    let xs = sampled(7, 10_000, |rng| {
        let pair = canonical_pair(2, 1, 1, rng).unwrap();
        let q = &pair.q;
        let x = q.get(0, 0).re;
        assert!((q.get(1, 1).re - (1.0 - x)).abs() <= 1e-12);
        assert!((q.get(0, 1).re - (x * (1.0 - x)).sqrt()).abs() <= 1e-12);
        assert!(q.get(0, 1).im.abs() <= 1e-12);
        x
    });
    assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
    // Uniform on [0, 1]: mean 1/2 and second moment 1/3.
    let (m1, s1) = mean_se(&xs);
    assert!((m1 - 0.5).abs() <= 3.0 * s1, "{m1} ± {s1}");
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let (m2, s2) = mean_se(&sq);
    assert!((m2 - 1.0 / 3.0).abs() <= 3.0 * s2, "{m2} ± {s2}");
}

/// Moments of `PQP` at `N = 512` against the limit law, each within three
/// standard errors over 20 samples.
#[test]
fn limit_law_moments_match_sampling() {
    let n = 512;
    for (case, (alpha, beta)) in [(0.5, 0.5), (0.5, 0.25)].into_iter().enumerate() {
        let law = minimizer_pqp(alpha, beta).unwrap();
        let (k, l) = ((alpha * n as f64) as usize, (beta * n as f64) as usize);
        let rows = sampled(100 + case as u64, 20, |rng| {
            let pair = sample_pair(n, k, l, rng).unwrap();
            let eig = spectrum(&pair, CatalogFunction::Pqp, 1e-8).unwrap();
            power_sums(&eig, 4)
                .into_iter()
                .map(|s| s / n as f64)
                .collect::<Vec<_>>()
        });
        for m in 0..4 {
            let v: Vec<f64> = rows.iter().map(|r| r[m]).collect();
            let (mean, se) = mean_se(&v);
            let want = law.moment(m as i32 + 1);
            assert!(
                (mean - want).abs() <= 3.0 * se,
                "({alpha}, {beta}) moment {}: {mean} ± {se} vs {want}",
                m + 1
            );
        }
    }
}

#[test]
fn sampling_is_reproducible() {
    let run = |stream| {
        let mut rng = RngStream::new(SEED, stream).rng();
        let pair = sample_pair(16, 5, 9, &mut rng).unwrap();
        spectrum(&pair, CatalogFunction::Anticommutator, 1e-8).unwrap()
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
    let mut a = RngStream::new(SEED, 5).rng();
    let mut b = RngStream::new(SEED, 5).rng();
    assert_eq!(a.random::<u64>(), b.random::<u64>());
}
