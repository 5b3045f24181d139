//! Tracial states on the universal algebra of two projections.
//!
//! A state is the tuple `(a11, a10, a01, a00, μ)`: the traces of the four
//! minimal corner projections `e∧f, e∧f⊥, e⊥∧f, e⊥∧f⊥` and the law of the
//! angle variable on the generic part, which carries mass
//! `ρ = (1 - a11 - a10 - a01 - a00) / 2` in each of `e` and `e⊥`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensembles::ProjectionPair;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigs, ComplexMatrix};
use crate::spectra::{CatalogFunction, SpectralMeasure};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct TracialState {
    a11: f64,
    a10: f64,
    a01: f64,
    a00: f64,
    mu: SpectralMeasure,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    a11: f64,
    a10: f64,
    a01: f64,
    a00: f64,
    mu: SpectralMeasure,
}

impl TryFrom<RawState> for TracialState {
    type Error = Error;

    fn try_from(r: RawState) -> Result<Self> {
        TracialState::new(r.a11, r.a10, r.a01, r.a00, r.mu)
    }
}

impl From<TracialState> for RawState {
    fn from(s: TracialState) -> Self {
        RawState {
            a11: s.a11,
            a10: s.a10,
            a01: s.a01,
            a00: s.a00,
            mu: s.mu,
        }
    }
}

impl TracialState {
    /// Validates: nonnegative corner traces summing to at most 1, and a
    /// probability measure `μ` on `(0, 1)` whenever the generic part is
    /// nontrivial. With `ρ = 0` the measure is ignored and stored empty.
    pub fn new(a11: f64, a10: f64, a01: f64, a00: f64, mu: SpectralMeasure) -> Result<Self> {
        let a = [a11, a10, a01, a00];
        if a.iter().any(|x| !x.is_finite() || *x < -tolerance::MASS) {
            return Err(Error::param("corner traces must be nonnegative"));
        }
        let sum: f64 = a.iter().sum();
        if sum > 1.0 + tolerance::MASS {
            return Err(Error::param(format!("corner traces sum to {sum} > 1")));
        }
        let [a11, a10, a01, a00] = a.map(|x| x.max(0.0));
        let rho = (1.0 - sum) / 2.0;
        let mu = if rho <= tolerance::MASS {
            SpectralMeasure::empty()
        } else {
            if mu.is_empty() {
                return Err(Error::param(
                    "generic part has positive mass but μ is empty",
                ));
            }
            if mu
                .weighted_points()
                .iter()
                .any(|&(x, _)| x <= 0.0 || x >= 1.0)
            {
                return Err(Error::param(
                    "μ must be supported in the open interval (0, 1)",
                ));
            }
            mu
        };
        Ok(Self {
            a11,
            a10,
            a01,
            a00,
            mu,
        })
    }

    /// Extracts the state of a finite pair under the normalized trace.
    ///
    /// Eigenvalues within `tol` of 1 in the four corner compressions count
    /// the corner dimensions; eigenvalues of `PQP` in `(tol, 1 - tol)` form
    /// `μ`. The generic part must account for the remaining dimension twice.
    pub fn from_pair(pair: &ProjectionPair, tol: f64) -> Result<Self> {
        let n = pair.n;
        let (p, q) = (&pair.p, &pair.q);
        let id = ComplexMatrix::identity(n);
        let pq = p.product(q);
        let pqp = pq.product(p).hermitian_part();
        let p_qc_p = (p - &pqp).hermitian_part();
        let pc_q_pc = (&(&(q - &pq) - &pq.adjoint()) + &pqp).hermitian_part();
        let pc_qc_pc = (&(&id - p) - &pc_q_pc).hermitian_part();

        let ones = |m: &ComplexMatrix| -> Result<(usize, Vec<f64>)> {
            let v = hermitian_eigs(m, false)?.values;
            Ok((v.iter().filter(|&&x| x >= 1.0 - tol).count(), v))
        };
        let (d11, pqp_eigs) = ones(&pqp)?;
        let (d10, _) = ones(&p_qc_p)?;
        let (d01, _) = ones(&pc_q_pc)?;
        let (d00, _) = ones(&pc_qc_pc)?;
        let interior: Vec<f64> = pqp_eigs
            .into_iter()
            .filter(|&x| x > tol && x < 1.0 - tol)
            .collect();
        let corners = d11 + d10 + d01 + d00;
        if corners > n || 2 * interior.len() != n - corners {
            return Err(Error::Extraction {
                interior: interior.len(),
                expected: n.saturating_sub(corners) / 2,
            });
        }
        let nf = n as f64;
        let mu = if interior.is_empty() {
            SpectralMeasure::empty()
        } else {
            SpectralMeasure::cloud_only(interior)?
        };
        Self::new(
            d11 as f64 / nf,
            d10 as f64 / nf,
            d01 as f64 / nf,
            d00 as f64 / nf,
            mu,
        )
    }

    /// The state of free projections with traces `(α, β)`, given `μ`.
    pub fn free(alpha: f64, beta: f64, mu: SpectralMeasure) -> Result<Self> {
        let [a11, a10, a01, a00] = freeness_atoms(alpha, beta)?;
        Self::new(a11, a10, a01, a00, mu)
    }

    pub fn a11(&self) -> f64 {
        self.a11
    }

    pub fn a10(&self) -> f64 {
        self.a10
    }

    pub fn a01(&self) -> f64 {
        self.a01
    }

    pub fn a00(&self) -> f64 {
        self.a00
    }

    pub fn corners(&self) -> [f64; 4] {
        [self.a11, self.a10, self.a01, self.a00]
    }

    pub fn mu(&self) -> &SpectralMeasure {
        &self.mu
    }

    pub fn rho(&self) -> f64 {
        ((1.0 - self.a11 - self.a10 - self.a01 - self.a00) / 2.0).max(0.0)
    }

    /// `(τ(e), τ(f))`.
    pub fn generator_traces(&self) -> (f64, f64) {
        let te = (1.0 + self.a11 + self.a10 - self.a01 - self.a00) / 2.0;
        let tf = (1.0 + self.a11 - self.a10 + self.a01 - self.a00) / 2.0;
        (te, tf)
    }

    /// Distribution of `efe` under the state.
    pub fn psi_map(&self) -> Result<SpectralMeasure> {
        self.pushforward(CatalogFunction::Pqp)
    }

    /// Distribution of `h(e, f)` under the state.
    pub fn pushforward(&self, h: CatalogFunction) -> Result<SpectralMeasure> {
        h.validate()?;
        let rho = self.rho();
        let (a11, a10, a01, a00) = (self.a11, self.a10, self.a01, self.a00);
        let mut atoms: Vec<(f64, f64)>;
        // Each generic 2x2 block contributes one or two eigenvalues per angle value.
        let branches: Vec<Box<dyn Fn(f64) -> f64>>;
        match h {
            CatalogFunction::Pqp => {
                atoms = vec![(0.0, rho + a10 + a01 + a00), (1.0, a11)];
                branches = vec![Box::new(|t| t)];
            }
            CatalogFunction::Anticommutator => {
                atoms = vec![(0.0, a10 + a01 + a00), (2.0, a11)];
                branches = vec![
                    Box::new(|t: f64| t + t.sqrt()),
                    Box::new(|t: f64| t - t.sqrt()),
                ];
            }
            CatalogFunction::Linear { a, b } => {
                atoms = vec![(0.0, a00), (a, a10), (b, a01), (a + b, a11)];
                let disc = move |t: f64| ((a - b) * (a - b) + 4.0 * a * b * t).max(0.0).sqrt();
                branches = vec![
                    Box::new(move |t| (a + b - disc(t)) / 2.0),
                    Box::new(move |t| (a + b + disc(t)) / 2.0),
                ];
            }
            CatalogFunction::UnitaryProduct => {
                atoms = vec![(0.0, a11 + a00), (PI, a10 + a01)];
                let theta = |t: f64| (2.0 * t - 1.0).clamp(-1.0, 1.0).acos();
                branches = vec![Box::new(theta), Box::new(move |t| -theta(t))];
            }
        }
        let mut cloud = Vec::new();
        if rho > 0.0 {
            for branch in &branches {
                atoms.extend(self.mu.atoms().iter().map(|&(t, m)| (branch(t), rho * m)));
                cloud.extend(self.mu.cloud().iter().map(|&t| branch(t)));
            }
        }
        let cloud_mass = if cloud.is_empty() {
            0.0
        } else {
            rho * self.mu.cloud_mass() * branches.len() as f64
        };
        SpectralMeasure::assemble(atoms, cloud, cloud_mass)
    }
}

/// Corner traces `[a11, a10, a01, a00]` of free projections with traces `(α, β)`.
pub fn freeness_atoms(alpha: f64, beta: f64) -> Result<[f64; 4]> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    Ok([
        (alpha + beta - 1.0).max(0.0),
        (alpha - beta).max(0.0),
        (beta - alpha).max(0.0),
        (1.0 - alpha - beta).max(0.0),
    ])
}

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} = {x} outside [0, 1]")))
    }
}
