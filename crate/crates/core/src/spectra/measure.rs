use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// Probability measure on the line (or on angles) stored as point masses plus
/// an equal-weight point cloud carrying the remaining mass.
///
/// The empty measure (no atoms, no cloud) is also representable; it stands for
/// an irrelevant continuous part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct SpectralMeasure {
    atoms: Vec<(f64, f64)>,
    cloud: Vec<f64>,
    cloud_mass: f64,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<(f64, f64)>,
    cloud: Vec<f64>,
    cloud_mass: f64,
}

impl TryFrom<RawMeasure> for SpectralMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        SpectralMeasure::new(raw.atoms, raw.cloud, raw.cloud_mass)
    }
}

impl From<SpectralMeasure> for RawMeasure {
    fn from(m: SpectralMeasure) -> Self {
        RawMeasure {
            atoms: m.atoms,
            cloud: m.cloud,
            cloud_mass: m.cloud_mass,
        }
    }
}

impl SpectralMeasure {
    /// Validating constructor. Atoms and cloud are sorted; the total mass must
    /// be 1 (or the measure empty).
    pub fn new(mut atoms: Vec<(f64, f64)>, mut cloud: Vec<f64>, cloud_mass: f64) -> Result<Self> {
        if atoms.iter().any(|&(x, m)| {
            !x.is_finite() || !m.is_finite() || !(0.0..=1.0 + tolerance::MASS).contains(&m)
        }) {
            return Err(Error::param(
                "atom masses must lie in [0, 1] at finite locations",
            ));
        }
        if cloud.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("cloud points must be finite"));
        }
        if !(0.0..=1.0 + tolerance::MASS).contains(&cloud_mass) {
            return Err(Error::param(format!(
                "cloud mass {cloud_mass} outside [0, 1]"
            )));
        }
        if cloud.is_empty() && cloud_mass > tolerance::MASS {
            return Err(Error::param("positive cloud mass with no cloud points"));
        }
        if !cloud.is_empty() && cloud_mass <= 0.0 {
            return Err(Error::param("cloud points with zero cloud mass"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        cloud.sort_by(f64::total_cmp);
        if atoms
            .windows(2)
            .any(|w| w[1].0 - w[0].0 <= tolerance::ATOM_MERGE)
        {
            return Err(Error::param("atom locations are not distinct"));
        }
        let m = Self {
            atoms,
            cloud,
            cloud_mass: if cloud_mass <= tolerance::MASS && !cloud_mass.is_nan() {
                cloud_mass.max(0.0)
            } else {
                cloud_mass
            },
        };
        let total = m.total_mass();
        if !(m.is_empty() || (total - 1.0).abs() <= tolerance::MASS) {
            return Err(Error::param(format!("total mass {total} is not 1")));
        }
        Ok(m)
    }

    /// Normalizing constructor for computed measures: drops zero-mass atoms,
    /// merges coincident atoms, folds cloud points that land on an atom into
    /// it, then validates.
    pub(crate) fn assemble(
        atoms: Vec<(f64, f64)>,
        cloud: Vec<f64>,
        cloud_mass: f64,
    ) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|a| a.1 > 0.0).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            match merged.last_mut() {
                Some(last) if (x - last.0).abs() <= tolerance::ATOM_MERGE => last.1 += m,
                _ => merged.push((x, m)),
            }
        }
        let weight = if cloud.is_empty() {
            0.0
        } else {
            cloud_mass / cloud.len() as f64
        };
        let mut kept = Vec::with_capacity(cloud.len());
        for x in cloud {
            match merged
                .iter_mut()
                .find(|a| (a.0 - x).abs() <= tolerance::ATOM_MERGE)
            {
                Some(atom) => atom.1 += weight,
                None => kept.push(x),
            }
        }
        let kept_mass = weight * kept.len() as f64;
        Self::new(merged, kept, kept_mass)
    }

    pub fn empty() -> Self {
        Self {
            atoms: Vec::new(),
            cloud: Vec::new(),
            cloud_mass: 0.0,
        }
    }

    pub fn point_mass(location: f64) -> Self {
        Self {
            atoms: vec![(location, 1.0)],
            cloud: Vec::new(),
            cloud_mass: 0.0,
        }
    }

    /// Equal-weight probability cloud.
    pub fn cloud_only(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("empty cloud"));
        }
        Self::new(Vec::new(), points, 1.0)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn cloud(&self) -> &[f64] {
        &self.cloud
    }

    pub fn cloud_mass(&self) -> f64 {
        self.cloud_mass
    }

    /// Mass carried by each cloud point.
    pub fn point_weight(&self) -> f64 {
        if self.cloud.is_empty() {
            0.0
        } else {
            self.cloud_mass / self.cloud.len() as f64
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum::<f64>() + self.cloud_mass
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.cloud.is_empty()
    }

    /// Mass of the atom within `tol` of `location`, or 0.
    pub fn atom_mass_near(&self, location: f64, tol: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.0 - location).abs() <= tol)
            .map(|a| a.1)
            .sum()
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let w = self.point_weight();
        self.atoms.iter().map(|&(x, m)| m * f(x)).sum::<f64>()
            + self.cloud.iter().map(|&x| w * f(x)).sum::<f64>()
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.integrate(|x| x.powi(k))
    }

    /// Mass of `(-inf, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum();
        let below = self.cloud.partition_point(|&c| c <= x);
        atoms + below as f64 * self.point_weight()
    }

    /// The measure as a sorted multiset of `n` equally weighted points.
    ///
    /// Every atom and cloud point must carry an integer multiple of `1/n`.
    pub fn expand(&self, n: usize) -> Result<Vec<f64>> {
        let count = |mass: f64| -> Result<usize> {
            let c = mass * n as f64;
            let r = c.round();
            if (c - r).abs() > 1e-6 {
                return Err(Error::param(format!(
                    "mass {mass} is not a multiple of 1/{n}"
                )));
            }
            Ok(r as usize)
        };
        let mut out = Vec::with_capacity(n);
        for &(x, m) in &self.atoms {
            out.extend(std::iter::repeat_n(x, count(m)?));
        }
        if !self.cloud.is_empty() {
            let per_point = count(self.point_weight())?;
            for &x in &self.cloud {
                out.extend(std::iter::repeat_n(x, per_point));
            }
        }
        if out.len() != n {
            return Err(Error::param(format!(
                "expansion produced {} points instead of {n}",
                out.len()
            )));
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// Weighted support points, sorted by location.
    pub fn weighted_points(&self) -> Vec<(f64, f64)> {
        let w = self.point_weight();
        let mut pts: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .copied()
            .chain(self.cloud.iter().map(|&x| (x, w)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    }

    /// Wasserstein-1 distance `∫ |F - G| dx` between two measures on the line.
    pub fn wasserstein1(&self, other: &Self) -> f64 {
        let a = self.weighted_points();
        let b = other.weighted_points();
        let mut events: Vec<(f64, f64)> = a
            .iter()
            .copied()
            .chain(b.iter().map(|&(x, m)| (x, -m)))
            .collect();
        events.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut diff = 0.0;
        let mut total = 0.0;
        for w in 0..events.len() {
            diff += events[w].1;
            if let Some(next) = events.get(w + 1) {
                total += diff.abs() * (next.0 - events[w].0);
            }
        }
        total
    }

    /// `c·self + (1 - c)·other`.
    ///
    /// The clouds can only be merged when their scaled point weights agree;
    /// otherwise the mixture has no equal-weight representation.
    pub fn mixture(&self, c: f64, other: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::param(format!("mixing weight {c} outside [0, 1]")));
        }
        if c == 1.0 {
            return Ok(self.clone());
        }
        if c == 0.0 {
            return Ok(other.clone());
        }
        let wa = c * self.point_weight();
        let wb = (1.0 - c) * other.point_weight();
        if !self.cloud.is_empty() && !other.cloud.is_empty() && (wa - wb).abs() > 1e-12 * wa.max(wb)
        {
            return Err(Error::param(
                "cloud point weights differ; mixture is not an equal-weight cloud",
            ));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|&(x, m)| (x, c * m))
            .chain(other.atoms.iter().map(|&(x, m)| (x, (1.0 - c) * m)))
            .collect();
        let cloud = self.cloud.iter().chain(&other.cloud).copied().collect();
        Self::assemble(
            atoms,
            cloud,
            c * self.cloud_mass + (1.0 - c) * other.cloud_mass,
        )
    }
}
