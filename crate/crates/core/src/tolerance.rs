//! Numerical tolerances shared across the crate.

/// Structural predicates: hermiticity, unitarity, idempotence.
pub const STRUCTURAL: f64 = 1e-10;

/// Composite residuals such as `S M S - I`.
pub const COMPOSITE: f64 = 1e-8;

/// Relative reconstruction bound for eigendecompositions.
pub const EIGEN_RECONSTRUCTION: f64 = 1e-9;

/// Absolute window used to attribute eigenvalues to the forced atoms at 0 and 1.
pub const ATOM: f64 = 1e-8;

/// Cloud points closer than this to an atom location are merged into the atom.
pub const ATOM_MERGE: f64 = 1e-12;

/// Total mass of a probability measure.
pub const MASS: f64 = 1e-9;

/// Matching of atom masses against the masses a rate functional requires.
pub const ATOM_MASS_MATCH: f64 = 1e-9;

/// Cloud points within this distance of 0 or 1 make the log integrals diverge.
pub const LOG_EDGE: f64 = 1e-12;

/// Iteration cap handed to the Hermitian eigensolver.
pub const EIGEN_MAX_ITER: usize = 10_000;

/// Symmetry and branch matching when a contracted law is checked for the
/// shape produced by a tracial state.
pub const SHAPE_MATCH: f64 = 1e-9;
