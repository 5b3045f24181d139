//! Random projection pairs, Jacobi ensembles and the Selberg normalization.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{ginibre, haar_isometry, hermitian_eigs, inv_sqrt_psd, ComplexMatrix};

/// A pair of orthogonal projections `(P, Q)` on `C^n` with ranks `(k, l)`.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub p: ComplexMatrix,
    pub q: ComplexMatrix,
}

impl ProjectionPair {
    /// `(Q, P)`, with ranks swapped accordingly.
    pub fn swapped(self) -> Self {
        Self {
            n: self.n,
            k: self.l,
            l: self.k,
            p: self.q,
            q: self.p,
        }
    }
}

/// Spectral bookkeeping of `PQP`: `n0` forced zeros, `n1` forced ones and
/// `n` generic eigenvalues with Jacobi exponents `kappa_n = |k - l|` and
/// `lambda_n = |k + l - N|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumParams {
    pub n0: usize,
    pub n1: usize,
    pub n: usize,
    pub kappa_n: usize,
    pub lambda_n: usize,
}

fn check_ranks(n: usize, k: usize, l: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Dimension("N must be positive".into()));
    }
    if k > n || l > n {
        return Err(Error::param(format!(
            "ranks ({k}, {l}) out of range for N = {n}"
        )));
    }
    Ok(())
}

pub fn spectrum_params(n: usize, k: usize, l: usize) -> Result<SpectrumParams> {
    check_ranks(n, k, l)?;
    let n0 = n - k.min(l);
    let n1 = (k + l).saturating_sub(n);
    Ok(SpectrumParams {
        n0,
        n1,
        n: n - n0 - n1,
        kappa_n: k.abs_diff(l),
        lambda_n: (k + l).abs_diff(n),
    })
}

fn coordinate_projection(n: usize, rank: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..n).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// `P = I_k ⊕ 0`, `Q = U (I_l ⊕ 0) U*` with `U` Haar.
///
/// Only the first `l` columns of `U` enter `Q`, so a Haar isometry is drawn
/// instead of a full unitary.
pub fn sample_pair<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    l: usize,
    rng: &mut R,
) -> Result<ProjectionPair> {
    check_ranks(n, k, l)?;
    let p = coordinate_projection(n, k);
    let v = haar_isometry(n, l, rng)?;
    let q = (&v * &v.adjoint()).hermitian_part();
    Ok(ProjectionPair { n, k, l, p, q })
}

/// Eigenvalues (ascending) of an `n x n` Jacobi ensemble with parameter
/// `(s, t)`, built as `(A+B)^{-1/2} A (A+B)^{-1/2}` from independent complex
/// Wisharts with `n + s` and `n + t` degrees of freedom.
pub fn sample_jacobi<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    t: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let y = ginibre(n, n + s, rng);
    let z = ginibre(n, n + t, rng);
    let a = (&y * &y.adjoint()).hermitian_part();
    let b = (&z * &z.adjoint()).hermitian_part();
    let root = inv_sqrt_psd(&(&a + &b))?;
    let x = (&(&root * &a) * &root).hermitian_part();
    Ok(hermitian_eigs(&x, false)?.values)
}

/// Signed-integer front end for [`sample_jacobi`] that reports negative
/// parameters as errors.
pub fn sample_jacobi_checked<R: Rng + ?Sized>(
    n: usize,
    s: i64,
    t: i64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if s < 0 || t < 0 {
        return Err(Error::param(format!(
            "Jacobi parameters must be non-negative, got ({s}, {t})"
        )));
    }
    sample_jacobi(n, s as usize, t as usize, rng)
}

/// Writes the 2x2 structure blocks `[[x, sqrt(x(1-x))], [sqrt(x(1-x)), 1-x]]`
/// coupling coordinate `start + i` with `start + m + i`.
fn place_structure_blocks(q: &mut ComplexMatrix, start: usize, xs: &[f64]) {
    let m = xs.len();
    for (i, &x) in xs.iter().enumerate() {
        let x = x.clamp(0.0, 1.0);
        let off = (x * (1.0 - x)).sqrt();
        let a = start + i;
        let b = start + m + i;
        q.set(a, a, Complex64::new(x, 0.0));
        q.set(b, b, Complex64::new(1.0 - x, 0.0));
        q.set(a, b, Complex64::new(off, 0.0));
        q.set(b, a, Complex64::new(off, 0.0));
    }
}

fn set_identity_range(q: &mut ComplexMatrix, range: std::ops::Range<usize>) {
    for i in range {
        q.set(i, i, Complex64::new(1.0, 0.0));
    }
}

/// Block pair with the same joint distribution as [`sample_pair`].
///
/// With `k <= l`: when `k + l <= N` the generic block has size `k` and a Jacobi
/// law of parameter `(l - k, N - k - l)`; otherwise it has size `N - l` and
/// parameter `(l - k, k + l - N)`. For `k > l` the roles are swapped and the
/// output pair swapped back.
pub fn canonical_pair<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    l: usize,
    rng: &mut R,
) -> Result<ProjectionPair> {
    check_ranks(n, k, l)?;
    if k > l {
        return canonical_pair(n, l, k, rng).map(ProjectionPair::swapped);
    }
    let p = coordinate_projection(n, k);
    let mut q = ComplexMatrix::zeros(n, n);
    if k + l <= n {
        // [X, √(X(I-X))] coupling on coordinates [0, 2k), then I_{l-k}, then 0.
        let xs = sample_jacobi(k, l - k, n - k - l, rng)?;
        place_structure_blocks(&mut q, 0, &xs);
        set_identity_range(&mut q, 2 * k..k + l);
    } else {
        // I_{k+l-N}, then the coupling on [k+l-N, k+N-l), then I_{l-k}.
        let m = n - l;
        let xs = sample_jacobi(m, l - k, k + l - n, rng)?;
        let ones = k + l - n;
        set_identity_range(&mut q, 0..ones);
        place_structure_blocks(&mut q, ones, &xs);
        set_identity_range(&mut q, ones + 2 * m..n);
    }
    Ok(ProjectionPair { n, k, l, p, q })
}

/// `log Z` for the Jacobi eigenvalue density with `n` points and exponents
/// `(kappa, lambda)`, by the Selberg product of Gamma functions.
pub fn selberg_log_z(n: usize, kappa: f64, lambda: f64) -> f64 {
    let ln_gamma_two = ln_gamma(2.0);
    (1..=n)
        .map(|j| {
            let j = j as f64;
            ln_gamma(j + 1.0) + ln_gamma(j + kappa) + ln_gamma(j + lambda)
                - ln_gamma_two
                - ln_gamma(j + n as f64 + kappa + lambda)
        })
        .sum()
}
