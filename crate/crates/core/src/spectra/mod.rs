//! Catalog functions of a projection pair, their spectra and mixed moments.

mod measure;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::ProjectionPair;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigs, ComplexMatrix};

pub use measure::SpectralMeasure;

/// Functions of `(P, Q)` whose spectra are determined by the pair's joint law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatalogFunction {
    /// `PQP`
    Pqp,
    /// `PQ + QP`
    Anticommutator,
    /// `aP + bQ` with `a, b` nonzero
    Linear { a: f64, b: f64 },
    /// `exp(iπP) exp(-iπQ)`, spectrum reported as angles in `(-π, π]`
    UnitaryProduct,
}

impl CatalogFunction {
    pub fn linear(a: f64, b: f64) -> Result<Self> {
        let f = CatalogFunction::Linear { a, b };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CatalogFunction::Linear { a, b } => {
                if !(a.is_finite() && b.is_finite()) || a == 0.0 || b == 0.0 {
                    Err(Error::param(format!(
                        "linear coefficients must be finite and nonzero, got ({a}, {b})"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn is_unitary(&self) -> bool {
        matches!(self, CatalogFunction::UnitaryProduct)
    }

    /// Locations where the output may carry atoms (angles for the unitary).
    pub fn atom_locations(&self) -> Vec<f64> {
        let mut locs = match *self {
            CatalogFunction::Pqp => vec![0.0, 1.0],
            CatalogFunction::Anticommutator => vec![0.0, 2.0],
            CatalogFunction::Linear { a, b } => vec![0.0, a, b, a + b],
            CatalogFunction::UnitaryProduct => vec![0.0, PI],
        };
        locs.sort_by(f64::total_cmp);
        locs.dedup();
        locs
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatalogFunction::Pqp => "pqp",
            CatalogFunction::Anticommutator => "anticommutator",
            CatalogFunction::Linear { .. } => "linear",
            CatalogFunction::UnitaryProduct => "unitary",
        }
    }

    /// Parses a catalog name; `linear` takes its coefficients from `coeffs`.
    pub fn parse(name: &str, coeffs: Option<(f64, f64)>) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "pqp" => Ok(CatalogFunction::Pqp),
            "anticommutator" | "anti" => Ok(CatalogFunction::Anticommutator),
            "unitary" | "unitary_product" => Ok(CatalogFunction::UnitaryProduct),
            "linear" => {
                let (a, b) =
                    coeffs.ok_or_else(|| Error::param("linear requires coefficients a and b"))?;
                CatalogFunction::linear(a, b)
            }
            other => Err(Error::Unsupported(other.to_string())),
        }
    }
}

impl fmt::Display for CatalogFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogFunction::Linear { a, b } => write!(f, "linear(a={a}, b={b})"),
            other => f.write_str(other.name()),
        }
    }
}

/// `h(P, Q)` as a matrix. `exp(iπP) = I - 2P` for a projection.
pub fn apply_catalog(pair: &ProjectionPair, h: CatalogFunction) -> Result<ComplexMatrix> {
    h.validate()?;
    let (p, q) = (&pair.p, &pair.q);
    Ok(match h {
        CatalogFunction::Pqp => p.product(q).product(p).hermitian_part(),
        CatalogFunction::Anticommutator => {
            let pq = p.product(q);
            &pq + &pq.adjoint()
        }
        CatalogFunction::Linear { a, b } => &p.scale(a) + &q.scale(b),
        CatalogFunction::UnitaryProduct => {
            let id = ComplexMatrix::identity(pair.n);
            let u = &id - &p.scale(2.0);
            let v = &id - &q.scale(2.0);
            u.product(&v)
        }
    })
}

/// Sorted spectrum of `h(P, Q)`; angles in `(-π, π]` for the unitary.
///
/// The unitary spectrum comes from the Hermitian matrix `Re U = (U + U*)/2`:
/// eigenvalues of `U` off `±1` come in conjugate pairs `e^{±iθ}`, each pair
/// contributing `cos θ` twice. `tol` decides which eigenvalues of `Re U` are
/// the atoms at `±1`.
pub fn spectrum(pair: &ProjectionPair, h: CatalogFunction, tol: f64) -> Result<Vec<f64>> {
    let m = apply_catalog(pair, h)?;
    if !h.is_unitary() {
        return Ok(hermitian_eigs(&m, false)?.values);
    }
    let re = m.hermitian_part();
    let c = hermitian_eigs(&re, false)?.values;
    let mut angles = Vec::with_capacity(c.len());
    let mut interior = Vec::new();
    for &v in &c {
        if v >= 1.0 - 2.0 * tol {
            angles.push(0.0);
        } else if v <= -1.0 + 2.0 * tol {
            angles.push(PI);
        } else {
            interior.push(v);
        }
    }
    if interior.len() % 2 != 0 {
        return Err(Error::numeric(
            "unpaired interior eigenvalue of Re U",
            interior.len() as f64,
        ));
    }
    for pair in interior.chunks_exact(2) {
        let theta = (0.5 * (pair[0] + pair[1])).clamp(-1.0, 1.0).acos();
        angles.push(theta);
        angles.push(-theta);
    }
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// Empirical measure of `eigs`: values within `tol` of a location in
/// `atom_locations` are pooled into an atom, the rest form the cloud.
pub fn empirical_measure(
    eigs: &[f64],
    atom_locations: &[f64],
    tol: f64,
) -> Result<SpectralMeasure> {
    if eigs.is_empty() {
        return Err(Error::param("no eigenvalues"));
    }
    let mut locs = atom_locations.to_vec();
    locs.sort_by(f64::total_cmp);
    if locs.windows(2).any(|w| w[1] - w[0] <= 2.0 * tol) {
        return Err(Error::param("atom windows overlap"));
    }
    let mut counts = vec![0usize; locs.len()];
    let mut cloud = Vec::new();
    for &x in eigs {
        match locs.iter().position(|&a| (x - a).abs() <= tol) {
            Some(i) => counts[i] += 1,
            None => cloud.push(x),
        }
    }
    let n = eigs.len() as f64;
    let atoms = locs
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&x, &c)| (x, c as f64 / n))
        .collect();
    let cloud_mass = cloud.len() as f64 / n;
    SpectralMeasure::assemble(atoms, cloud, cloud_mass)
}

/// Letter of a word in the two projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    E,
    F,
}

/// Parses a word over `{e, f}` (case-insensitive).
pub fn parse_word(word: &str) -> Result<Vec<Letter>> {
    word.chars()
        .map(|c| match c {
            'e' | 'E' => Ok(Letter::E),
            'f' | 'F' => Ok(Letter::F),
            other => Err(Error::param(format!("unknown letter {other:?}"))),
        })
        .collect()
}

/// Normalized trace `tr_N` of the word with `E -> P`, `F -> Q`.
pub fn word_moment(pair: &ProjectionPair, word: &[Letter]) -> Complex64 {
    let mut acc: Option<ComplexMatrix> = None;
    for letter in word {
        let m = match letter {
            Letter::E => &pair.p,
            Letter::F => &pair.q,
        };
        acc = Some(match acc {
            None => m.clone(),
            Some(a) => a.product(m),
        });
    }
    match acc {
        None => Complex64::new(1.0, 0.0),
        Some(a) => a.trace() / pair.n as f64,
    }
}

impl FromStr for CatalogFunction {
    type Err = Error;

    /// Accepts `pqp`, `anticommutator`, `unitary` and `linear:a,b`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((name, rest)) => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| Error::param("expected linear:a,b"))?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::param(format!("bad coefficient {v:?}: {e}")))
                };
                CatalogFunction::parse(name, Some((parse(a)?, parse(b)?)))
            }
            None => CatalogFunction::parse(s, None),
        }
    }
}
