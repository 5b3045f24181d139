//! Limiting eigenvalue laws of catalog functions of free projections.
//!
//! Each law is a finite set of atoms plus a density on finitely many open
//! intervals. Integrals use the substitution `x = m + h sin u` on every
//! piece, which absorbs inverse-square-root edge behavior, followed by
//! panelled Gauss–Legendre quadrature in `u`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::spectra::{CatalogFunction, SpectralMeasure};
use crate::tolerance;
use crate::tracial::check_unit;

const PANELS: usize = 256;
const ORDER: usize = 16;

/// Edges `ξ ≤ η` of the continuous part of the free `PQP` law.
pub fn xi_eta(alpha: f64, beta: f64) -> (f64, f64) {
    let m = alpha + beta - 2.0 * alpha * beta;
    let r = (4.0 * alpha * beta * (1.0 - alpha) * (1.0 - beta))
        .max(0.0)
        .sqrt();
    ((m - r).max(0.0), (m + r).min(1.0))
}

/// One integration piece with its cumulative mass table over `u`-panels.
#[derive(Debug, Clone)]
struct Piece {
    mid: f64,
    half: f64,
    /// Cumulative mass at the panel edges `u_j = -π/2 + jπ/PANELS`.
    cum: Vec<f64>,
}

impl Piece {
    fn x(&self, u: f64) -> f64 {
        self.mid + self.half * u.sin()
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }
}

fn panel_edge(j: usize) -> f64 {
    -FRAC_PI_2 + PI * j as f64 / PANELS as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Pqp,
    Anticommutator,
    Linear { a: f64, b: f64, a0: f64, b0: f64 },
    Unitary { theta1: f64, theta2: f64 },
}

/// Closed-form limit law of `h(p, q)` for free projections with traces `(α, β)`.
#[derive(Debug, Clone)]
pub struct LimitLaw {
    function: CatalogFunction,
    alpha: f64,
    beta: f64,
    xi: f64,
    eta: f64,
    rho: f64,
    shape: Shape,
    atoms: Vec<(f64, f64)>,
    support: Vec<(f64, f64)>,
    pieces: Vec<Piece>,
    gl: GaussLegendre,
}

/// Serializable view of a law for plotting.
#[derive(Debug, Clone, Serialize)]
pub struct LawExport {
    pub function: CatalogFunction,
    pub alpha: f64,
    pub beta: f64,
    pub atoms: Vec<(f64, f64)>,
    pub support: Vec<(f64, f64)>,
    pub grid: Vec<f64>,
    pub density_values: Vec<f64>,
    pub continuous_mass: f64,
}

type Atom = (f64, f64);
type Interval = (f64, f64);

/// The free `PQP` law: atoms at 0 and 1 plus the density on `(ξ, η)`.
pub fn minimizer_pqp(alpha: f64, beta: f64) -> Result<LimitLaw> {
    minimizer_for(CatalogFunction::Pqp, alpha, beta)
}

pub fn minimizer_for(h: CatalogFunction, alpha: f64, beta: f64) -> Result<LimitLaw> {
    h.validate()?;
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let rho = alpha.min(beta).min(1.0 - alpha).min(1.0 - beta);
    let (xi, eta) = xi_eta(alpha, beta);
    let a11 = (alpha + beta - 1.0).max(0.0);
    let generic = rho > 0.0;
    let (shape, atoms, support, breaks): (Shape, Vec<Atom>, Vec<Interval>, Vec<f64>) = match h {
        CatalogFunction::Pqp => (
            Shape::Pqp,
            vec![(0.0, 1.0 - alpha.min(beta)), (1.0, a11)],
            if generic { vec![(xi, eta)] } else { vec![] },
            vec![],
        ),
        CatalogFunction::Anticommutator => {
            let t = |s: f64| s - s.sqrt();
            let s = |s: f64| s + s.sqrt();
            let (t_xi, t_eta) = (t(xi), t(eta));
            let t_lo = if xi < 0.25 && 0.25 < eta {
                -0.25
            } else {
                t_xi.min(t_eta)
            };
            let t_hi = t_xi.max(t_eta);
            let inner = t_xi.min(t_eta);
            let breaks = if inner > t_lo && inner < t_hi {
                vec![inner]
            } else {
                vec![]
            };
            (
                Shape::Anticommutator,
                vec![(0.0, 1.0 - a11 - 2.0 * rho), (2.0, a11)],
                if generic {
                    vec![(t_lo, t_hi), (s(xi), s(eta))]
                } else {
                    vec![]
                },
                breaks,
            )
        }
        CatalogFunction::Linear { a, b } => {
            let root =
                |t: f64| (a + b - ((a - b) * (a - b) + 4.0 * a * b * t).max(0.0).sqrt()) / 2.0;
            let (r_eta, r_xi) = (root(eta), root(xi));
            let (a0, b0) = (r_eta.min(r_xi), r_eta.max(r_xi));
            (
                Shape::Linear { a, b, a0, b0 },
                vec![
                    (0.0, (1.0 - alpha - beta).max(0.0)),
                    (a, (alpha - beta).max(0.0)),
                    (b, (beta - alpha).max(0.0)),
                    (a + b, a11),
                ],
                if generic {
                    vec![(a0, b0), (a + b - b0, a + b - a0)]
                } else {
                    vec![]
                },
                vec![],
            )
        }
        CatalogFunction::UnitaryProduct => {
            let theta1 = (2.0 * eta - 1.0).clamp(-1.0, 1.0).acos();
            let theta2 = (2.0 * xi - 1.0).clamp(-1.0, 1.0).acos();
            (
                Shape::Unitary { theta1, theta2 },
                vec![
                    (0.0, (alpha + beta - 1.0).abs()),
                    (PI, (alpha - beta).abs()),
                ],
                if generic {
                    vec![(-theta2, -theta1), (theta1, theta2)]
                } else {
                    vec![]
                },
                vec![],
            )
        }
    };
    let mut law = LimitLaw {
        function: h,
        alpha,
        beta,
        xi,
        eta,
        rho,
        shape,
        atoms: merge_atoms(atoms),
        support,
        pieces: Vec::new(),
        gl: GaussLegendre::new(ORDER),
    };
    law.support.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut cuts: Vec<(f64, f64)> = Vec::new();
    for &(lo, hi) in &law.support {
        let mut edges = vec![lo];
        edges.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
        edges.push(hi);
        cuts.extend(edges.windows(2).map(|w| (w[0], w[1])));
    }
    law.pieces = cuts
        .into_iter()
        .filter(|(lo, hi)| hi > lo)
        .map(|(lo, hi)| law.build_piece(lo, hi))
        .collect();
    Ok(law)
}

fn merge_atoms(atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (x, m) in atoms.into_iter().filter(|a| a.1 > 0.0) {
        match out
            .iter_mut()
            .find(|o| (o.0 - x).abs() <= tolerance::ATOM_MERGE)
        {
            Some(o) => o.1 += m,
            None => out.push((x, m)),
        }
    }
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Free `PQP` density on `(ξ, η)`.
fn pqp_density(xi: f64, eta: f64, x: f64) -> f64 {
    if x <= xi || x >= eta || x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((x - xi) * (eta - x)).sqrt() / (2.0 * PI * x * (1.0 - x))
}

impl LimitLaw {
    pub fn function(&self) -> CatalogFunction {
        self.function
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(ξ, η)` of the underlying `PQP` law.
    pub fn xi_eta(&self) -> (f64, f64) {
        (self.xi, self.eta)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Disjoint open support intervals of the density (angles for the unitary).
    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    /// Mass of the continuous part, `1 - Σ atoms`.
    pub fn continuous_mass(&self) -> f64 {
        if self.rho > 0.0 {
            (1.0 - self.atoms.iter().map(|a| a.1).sum::<f64>()).max(0.0)
        } else {
            0.0
        }
    }

    /// Mass of the continuous part by quadrature.
    pub fn integrated_mass(&self) -> f64 {
        self.pieces.iter().map(Piece::total).sum()
    }

    /// Density of the continuous part at `x`; zero off the support.
    pub fn density(&self, x: f64) -> f64 {
        if !self.support.iter().any(|&(lo, hi)| x > lo && x < hi) {
            return 0.0;
        }
        let (xi, eta) = (self.xi, self.eta);
        match self.shape {
            Shape::Pqp => pqp_density(xi, eta, x),
            Shape::Anticommutator => {
                if x > 0.0 {
                    let r = ((1.0 + 4.0 * x).sqrt() - 1.0) / 2.0;
                    pqp_density(xi, eta, r * r) / (1.0 + 0.5 / r)
                } else {
                    let d = (1.0 + 4.0 * x).max(0.0).sqrt();
                    [(1.0 - d) / 2.0, (1.0 + d) / 2.0]
                        .iter()
                        .filter(|&&r| r > 0.0)
                        .map(|&r| pqp_density(xi, eta, r * r) / (1.0 - 0.5 / r).abs())
                        .sum()
                }
            }
            Shape::Linear { a, b, a0, b0 } => {
                let s = a + b;
                let q = -(x - a0) * (x - b0) * (x - s + b0) * (x - s + a0);
                (x - s / 2.0).abs() * q.max(0.0).sqrt()
                    / (PI * (x * (x - a) * (x - b) * (x - s)).abs())
            }
            Shape::Unitary { .. } => {
                let c = x.cos();
                let q = -(c + 1.0 - 2.0 * xi) * (c + 1.0 - 2.0 * eta);
                q.max(0.0).sqrt() / x.sin().abs() / (2.0 * PI)
            }
        }
    }

    fn build_piece(&self, lo: f64, hi: f64) -> Piece {
        let mut piece = Piece {
            mid: 0.5 * (lo + hi),
            half: 0.5 * (hi - lo),
            cum: Vec::with_capacity(PANELS + 1),
        };
        piece.cum.push(0.0);
        let mut acc = 0.0;
        for j in 0..PANELS {
            acc += self.panel_integral(&piece, panel_edge(j), panel_edge(j + 1), |_| 1.0);
            piece.cum.push(acc);
        }
        piece
    }

    /// `∫ g f dx` over the part of `piece` with `u ∈ [u0, u1]`.
    fn panel_integral(&self, piece: &Piece, u0: f64, u1: f64, g: impl Fn(f64) -> f64) -> f64 {
        self.gl.integrate(u0, u1, |u| {
            let x = piece.x(u);
            g(x) * self.density(x) * piece.half * u.cos()
        })
    }

    /// `∫ g dμ_c` over the continuous part.
    pub fn integrate_continuous(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                (0..PANELS)
                    .map(|j| self.panel_integral(p, panel_edge(j), panel_edge(j + 1), &g))
                    .sum::<f64>()
            })
            .sum()
    }

    /// `∫ x^k` against the full law (atoms plus density).
    pub fn moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|&(x, m)| m * x.powi(k)).sum::<f64>()
            + self.integrate_continuous(|x| x.powi(k))
    }

    /// Unnormalized continuous mass of `(-∞, x]`.
    fn continuous_mass_below(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for p in &self.pieces {
            if x >= p.mid + p.half {
                acc += p.total();
                continue;
            }
            if x <= p.mid - p.half {
                break;
            }
            let u = ((x - p.mid) / p.half).clamp(-1.0, 1.0).asin();
            let j = (((u + FRAC_PI_2) / PI * PANELS as f64) as usize).min(PANELS - 1);
            acc += p.cum[j] + self.panel_integral(p, panel_edge(j), u, |_| 1.0);
            break;
        }
        acc
    }

    /// CDF of the continuous part normalized to a probability measure.
    pub fn continuous_cdf(&self, x: f64) -> f64 {
        let total = self.integrated_mass();
        if total <= 0.0 {
            return 0.0;
        }
        (self.continuous_mass_below(x) / total).clamp(0.0, 1.0)
    }

    /// CDF of the full law.
    pub fn cdf(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum();
        atoms + self.continuous_mass() * self.continuous_cdf(x)
    }

    /// Quantile of the normalized continuous part at level `p ∈ (0, 1)`.
    ///
    /// Locates the panel from the cumulative table, then bisects in `u`.
    pub fn continuous_quantile(&self, p: f64) -> Result<f64> {
        let total = self.integrated_mass();
        if self.pieces.is_empty() || total <= 0.0 {
            return Err(Error::param("law has no continuous part"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("level {p} outside [0, 1]")));
        }
        let mut target = p * total;
        let mut chosen = self.pieces.last().expect("nonempty");
        for piece in &self.pieces {
            if target <= piece.total() {
                chosen = piece;
                break;
            }
            target -= piece.total();
        }
        let target = target.min(chosen.total());
        let j = chosen
            .cum
            .partition_point(|&c| c < target)
            .saturating_sub(1)
            .min(PANELS - 1);
        let rem = target - chosen.cum[j];
        let (mut lo, mut hi) = (panel_edge(j), panel_edge(j + 1));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.panel_integral(chosen, panel_edge(j), mid, |_| 1.0) < rem {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(chosen.x(0.5 * (lo + hi)))
    }

    /// Grid export for plotting: `n` cell midpoints across the support hull.
    pub fn export(&self, n: usize) -> LawExport {
        let (grid, density_values) = match (self.support.first(), self.support.last()) {
            (Some(first), Some(last)) if n > 0 => {
                let (lo, hi) = (first.0, last.1);
                let grid: Vec<f64> = (0..n)
                    .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
                    .collect();
                let values = grid.iter().map(|&x| self.density(x)).collect();
                (grid, values)
            }
            _ => (Vec::new(), Vec::new()),
        };
        LawExport {
            function: self.function,
            alpha: self.alpha,
            beta: self.beta,
            atoms: self.atoms.clone(),
            support: self.support.clone(),
            grid,
            density_values,
            continuous_mass: self.continuous_mass(),
        }
    }
}

/// Discretizes a law: atoms verbatim plus `n` cloud points at the
/// `(i - 1/2)/n` quantiles of the normalized continuous part.
pub fn quantile_cloud(law: &LimitLaw, n: usize) -> Result<SpectralMeasure> {
    if n < 2 {
        return Err(Error::param("quantile cloud needs n >= 2"));
    }
    let mass = law.continuous_mass();
    if law.pieces.is_empty() || mass <= 0.0 {
        return SpectralMeasure::new(law.atoms.clone(), Vec::new(), 0.0);
    }
    let cloud = (0..n)
        .map(|i| law.continuous_quantile((i as f64 + 0.5) / n as f64))
        .collect::<Result<Vec<f64>>>()?;
    SpectralMeasure::new(law.atoms.clone(), cloud, mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn half_half_is_arcsine() {
        let law = minimizer_pqp(0.5, 0.5).unwrap();
        assert_eq!(law.xi_eta(), (0.0, 1.0));
        assert_eq!(law.atoms(), &[(0.0, 0.5)]);
        assert_abs_diff_eq!(law.integrated_mass(), 0.5, epsilon = 1e-10);
        for x in [0.1f64, 0.37, 0.9] {
            let arcsine = 1.0 / (2.0 * PI * (x * (1.0 - x)).sqrt());
            assert_abs_diff_eq!(law.density(x), arcsine, epsilon = 1e-12);
            let cdf = 2.0 / PI * x.sqrt().asin();
            assert_abs_diff_eq!(law.continuous_cdf(x), cdf, epsilon = 1e-10);
        }
    }

    #[test]
    fn edges_for_quarter() {
        let (xi, eta) = xi_eta(0.5, 0.25);
        let r = 3f64.sqrt() / 4.0;
        assert_abs_diff_eq!(xi, 0.5 - r, epsilon = 1e-15);
        assert_abs_diff_eq!(eta, 0.5 + r, epsilon = 1e-15);
    }

    #[test]
    fn arcsine_quantiles() {
        let law = minimizer_pqp(0.5, 0.5).unwrap();
        let c = quantile_cloud(&law, 2).unwrap();
        assert_abs_diff_eq!(c.cloud()[0], (PI / 8.0).sin().powi(2), epsilon = 1e-9);
        assert_abs_diff_eq!(c.cloud()[1], (3.0 * PI / 8.0).sin().powi(2), epsilon = 1e-9);
    }

    #[test]
    fn mean_is_product_of_traces() {
        for (a, b) in [(0.5, 0.5), (0.3, 0.6)] {
            let law = minimizer_pqp(a, b).unwrap();
            assert_abs_diff_eq!(law.moment(1), a * b, epsilon = 1e-6);
        }
    }

    #[test]
    fn normalization_all_functions() {
        for h in [
            CatalogFunction::Pqp,
            CatalogFunction::Anticommutator,
            CatalogFunction::linear(1.5, -0.7).unwrap(),
            CatalogFunction::linear(1.0, 1.0).unwrap(),
            CatalogFunction::UnitaryProduct,
        ] {
            for (a, b) in [(0.5, 0.5), (0.3, 0.6), (0.8, 0.7), (0.1, 0.2), (0.0, 0.3)] {
                let law = minimizer_for(h, a, b).unwrap();
                let atoms: f64 = law.atoms().iter().map(|x| x.1).sum();
                assert_abs_diff_eq!(atoms + law.integrated_mass(), 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn unitary_half_is_uniform() {
        let law = minimizer_for(CatalogFunction::UnitaryProduct, 0.5, 0.5).unwrap();
        assert!(law.atoms().is_empty());
        for x in [-3.0, -1.0, 0.2, 2.5] {
            assert_abs_diff_eq!(law.density(x), 1.0 / (2.0 * PI), epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_rejects_zero() {
        assert!(minimizer_for(CatalogFunction::Linear { a: 0.0, b: 1.0 }, 0.5, 0.5).is_err());
    }

    #[test]
    fn degenerate_law_is_atomic() {
        let law = minimizer_pqp(0.0, 0.4).unwrap();
        assert_eq!(law.atoms(), &[(0.0, 1.0)]);
        assert!(law.support().is_empty());
        let c = quantile_cloud(&law, 10).unwrap();
        assert!(c.cloud().is_empty());
    }
}
