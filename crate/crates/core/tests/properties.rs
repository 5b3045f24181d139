//! Randomized invariants of pushforwards and rate functions.

use proptest::prelude::*;

use twoproj::limits::{minimizer_pqp, quantile_cloud};
use twoproj::rate::{free_entropy, log_energy, rate_contracted, rate_tilde, rate_ts, ExtReal};
use twoproj::spectra::{CatalogFunction, SpectralMeasure};
use twoproj::tracial::{freeness_atoms, TracialState};

fn catalog() -> Vec<CatalogFunction> {
    vec![
        CatalogFunction::Pqp,
        CatalogFunction::Anticommutator,
        CatalogFunction::Linear { a: 1.5, b: -0.7 },
        CatalogFunction::Linear { a: 1.0, b: 2.0 },
        CatalogFunction::UnitaryProduct,
    ]
}

fn finite(v: ExtReal) -> f64 {
    v.finite()
        .unwrap_or_else(|| panic!("expected a finite value, got {v}"))
}

/// Points strictly inside `(0, 1)`, away from the edges.
fn cloud_points(len: impl Into<prop::collection::SizeRange>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..0.99, len)
}

/// Corner traces with `1 - Σ` bounded away from zero.
fn corners() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform5(0.0f64..1.0).prop_map(|w| {
        let total: f64 = w.iter().sum::<f64>() + 1e-9;
        // The last weight becomes the generic part 2ρ.
        [w[0] / total, w[1] / total, w[2] / total, w[3] / total]
    })
}

fn free_state(alpha: f64, beta: f64, points: Vec<f64>) -> TracialState {
    let [a11, a10, a01, a00] = freeness_atoms(alpha, beta).unwrap();
    TracialState::new(
        a11,
        a10,
        a01,
        a00,
        SpectralMeasure::cloud_only(points).unwrap(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pushforward_conserves_mass(a in corners(), points in cloud_points(1..40)) {
        let tau = TracialState::new(a[0], a[1], a[2], a[3],
            SpectralMeasure::cloud_only(points).unwrap()).unwrap();
        for h in catalog() {
            let nu = tau.pushforward(h).unwrap();
            prop_assert!((nu.total_mass() - 1.0).abs() <= 1e-9, "{h}: {}", nu.total_mass());
        }
    }

    #[test]
    fn pushforward_is_affine(
        a in corners(),
        (p1, p2) in (1usize..30).prop_flat_map(|n| (cloud_points(n), cloud_points(n))),
    ) {
        let mu1 = SpectralMeasure::cloud_only(p1).unwrap();
        let mu2 = SpectralMeasure::cloud_only(p2).unwrap();
        let t1 = TracialState::new(a[0], a[1], a[2], a[3], mu1.clone()).unwrap();
        let t2 = TracialState::new(a[0], a[1], a[2], a[3], mu2.clone()).unwrap();
        for c in [0.0, 0.5, 1.0] {
            let tc = TracialState::new(a[0], a[1], a[2], a[3], mu1.mixture(c, &mu2).unwrap()).unwrap();
            for h in catalog() {
                let lhs = tc.pushforward(h).unwrap();
                let rhs = t1.pushforward(h).unwrap().mixture(c, &t2.pushforward(h).unwrap()).unwrap();
                prop_assert!(lhs.wasserstein1(&rhs) <= 1e-12, "{h} c={c}");
                prop_assert!((lhs.total_mass() - rhs.total_mass()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rate_ts_equals_rate_tilde_of_psi(
        alpha in 0.05f64..0.95,
        beta in 0.05f64..0.95,
        points in cloud_points(2..200),
    ) {
        let tau = free_state(alpha, beta, points);
        let direct = rate_ts(&tau, alpha, beta).unwrap();
        let via_psi = rate_tilde(&tau.psi_map().unwrap(), alpha, beta).unwrap();
        match (direct.finite(), via_psi.finite()) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0)),
            _ => prop_assert_eq!(direct, via_psi),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rates_are_nonnegative(
        alpha in 0.05f64..0.95,
        beta in 0.05f64..0.95,
        points in cloud_points(200),
    ) {
        let tau = free_state(alpha, beta, points);
        let rate = finite(rate_ts(&tau, alpha, beta).unwrap());
        prop_assert!(rate >= -1e-2, "rate {rate}");
        prop_assert!(finite(free_entropy(&tau)) <= 1e-2);
    }

    #[test]
    fn contracted_rate_matches_state_rate(
        alpha in 0.1f64..0.9,
        beta in 0.1f64..0.9,
        points in cloud_points(400),
    ) {
        let tau = free_state(alpha, beta, points);
        let expected = finite(rate_ts(&tau, alpha, beta).unwrap());
        for h in catalog() {
            let nu = tau.pushforward(h).unwrap();
            let got = finite(rate_contracted(&nu, h, alpha, beta).unwrap());
            prop_assert!((got - expected).abs() <= 1e-2, "{h}: {got} vs {expected}");
        }
    }

    #[test]
    fn rate_is_midpoint_convex(
        alpha in 0.1f64..0.9,
        beta in 0.1f64..0.9,
        p1 in cloud_points(300),
        p2 in cloud_points(300),
    ) {
        let t1 = free_state(alpha, beta, p1);
        let t2 = free_state(alpha, beta, p2);
        let mid = tau_mixture(&t1, &t2);
        let r1 = finite(rate_ts(&t1, alpha, beta).unwrap());
        let r2 = finite(rate_ts(&t2, alpha, beta).unwrap());
        let rm = finite(rate_ts(&mid, alpha, beta).unwrap());
        prop_assert!(rm <= 0.5 * (r1 + r2) + 1e-2, "{rm} vs {r1}, {r2}");
    }

    #[test]
    fn linear_energy_scaling(
        points in cloud_points(1000),
        (a, b) in (0.3f64..3.0, 0.3f64..3.0, any::<bool>())
            .prop_map(|(a, b, flip)| (a, if flip { -b } else { b })),
    ) {
        // Only the generic part: no atoms, all mass in the cloud.
        let tau = TracialState::new(0.0, 0.0, 0.0, 0.0,
            SpectralMeasure::cloud_only(points.clone()).unwrap()).unwrap();
        let nu = tau.pushforward(CatalogFunction::Linear { a, b }).unwrap();
        let nu = SpectralMeasure::cloud_only(nu.cloud().to_vec()).unwrap();
        let mu = SpectralMeasure::cloud_only(points).unwrap();
        let sigma_mu = finite(log_energy(&mu));
        let sigma_nu = finite(log_energy(&nu));
        let gap = sigma_mu - (2.0 * sigma_nu - (a * b).abs().ln());
        prop_assert!(gap.abs() <= 5e-3, "gap {gap}");
    }
}

fn tau_mixture(t1: &TracialState, t2: &TracialState) -> TracialState {
    let mu = t1.mu().mixture(0.5, t2.mu()).unwrap();
    TracialState::new(t1.a11(), t1.a10(), t1.a01(), t1.a00(), mu).unwrap()
}

fn minimizer_state(alpha: f64, beta: f64, n: usize) -> TracialState {
    let cloud = quantile_cloud(&minimizer_pqp(alpha, beta).unwrap(), n).unwrap();
    free_state(alpha, beta, cloud.cloud().to_vec())
}

#[test]
fn free_state_minimizes_every_contracted_rate() {
    for (alpha, beta) in [(0.5, 0.5), (0.3, 0.6), (0.7, 0.8), (0.2, 0.25)] {
        let tau = minimizer_state(alpha, beta, 2000);
        for h in catalog() {
            let nu = tau.pushforward(h).unwrap();
            let rate = finite(rate_contracted(&nu, h, alpha, beta).unwrap());
            assert!(rate.abs() <= 1e-2, "({alpha}, {beta}) {h}: {rate}");
        }
        assert!(finite(free_entropy(&tau)).abs() <= 1e-2);
    }
}

#[test]
fn perturbing_the_minimizer_raises_the_rate() {
    let (alpha, beta) = (0.5, 0.5);
    let n = 2000;
    let law = minimizer_pqp(alpha, beta).unwrap();
    let mut rates = Vec::new();
    for eps in [0.0, 0.1, 0.2] {
        let noise = (eps * n as f64).round() as usize;
        let mut points = if noise < n {
            quantile_cloud(&law, n - noise).unwrap().cloud().to_vec()
        } else {
            Vec::new()
        };
        points.extend((0..noise).map(|i| (i as f64 + 0.5) / noise as f64));
        let tau = free_state(alpha, beta, points);
        rates.push(finite(rate_ts(&tau, alpha, beta).unwrap()));
    }
    assert!(rates[0] < rates[1] && rates[1] < rates[2], "{rates:?}");
}
