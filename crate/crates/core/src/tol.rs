//! Numerical tolerances shared by every module.

/// Largest allowed population of the top Fock level `|dim-1>`.
pub const TAIL_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Relative to `max(1, ||H||_F)`.
pub const HERM_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const EIG_TOL: f64 = 1e-10;
/// Cauchy-Schwarz slack on moment bounds.
pub const MS_TOL: f64 = 1e-9;

/// Eigenvalues below `SUPP_EPS * p_max` are outside the QFI support.
pub const SUPP_EPS: f64 = 1e-12;

/// Tail mass targeted by the automatic dimension suggestion.
pub const AUTO_TAIL: f64 = 1e-12;

/// Minimum separation between coherent-superposition centres.
pub const SEP_TOL: f64 = 1e-6;

/// Odd cat states below this amplitude are rejected (N_- -> 0).
pub const MIN_ODD_CAT_ALPHA: f64 = 1e-3;

/// Excess QFI over 1/2 below this is treated as classical (W clamps to 0).
pub const CLASSICAL_SNAP: f64 = 1e-12;

/// Largest ensemble accepted by the extended-state construction.
pub const MAX_FLAGS: usize = 64;

/// Largest superposition handled by the macroscopicity sums.
pub const MAX_SUPERPOSITION: usize = 16;
