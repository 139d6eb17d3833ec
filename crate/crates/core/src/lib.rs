//! Quadrature quantum Fisher information, metrological power and the
//! convex-roof nonclassicality measure for single bosonic modes in a
//! truncated Fock basis, plus a two-mode Mach-Zehnder interferometer model.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; file formats and the command-line front end live
//! in the `nclass-cli` crate.
//!
//! Conventions used throughout:
//!
//! - QFI values are on the *variance* scale (the customary factor of four is
//!   dropped), so a pure state has `F_G = <G^2> - <G>^2`.
//! - Quadratures are `X_mu = i (e^{-i mu} a^dag - e^{i mu} a) / sqrt 2`, so
//!   `x = X_{pi/2}` and `p = X_0`.
//! - Two-mode vectors are indexed `n_a * d_b + n_b` (Kronecker order `A (x) B`).

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod macroscopic;
pub mod mzi;
pub mod qfi;
pub mod roof;
pub mod states;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use eigen::{hermitian_eig, hermitian_eig_matrix, EigenDecomposition};
pub use fock::{
    annihilation, creation, moments_of_density, moments_of_pure, number_operator, p_quadrature, partial_trace,
    quadrature, tensor_product, x_quadrature, DensityMatrix, HermitianOperator, Mode, ModeDims, PureState,
    QuadratureMoments, TruncatedBasis,
};
pub use linalg::CMatrix;
pub use macroscopic::{far_apart_limit, macro_terms, MacroReport};
pub use mzi::{
    aligned_reference, heisenberg_scan, log_log_slope, mzi_generators, mzi_qfi_balanced, mzi_qfi_exact,
    mzi_qfi_predicted, mzi_qfi_tau, mzi_report, phase_scan, precision_analysis, tau_scan, witness_from_qfi,
    HeisenbergPoint, MziConfig, MziReport, PhaseScan, PrecisionBounds,
};
pub use qfi::{
    ensemble_objective, max_quadrature_qfi, metrological_power, pure_nonclassicality, qfi_bilinear, qfi_from_support,
    qfi_generator, quadrature_form, EnsembleObjective, PureMeasure, QfiResult, QuadratureForm, Support,
};
pub use roof::{
    ensemble_from_isometry, extended_state_qfi, minimize_nonclassicality, EnsembleDecomposition, ExtendedQfi, Isometry,
    RoofOptions, RoofResult, SizeSensitivity,
};
pub use states::{
    beamsplitter_unitary, format_complex, loss_channel, mix, mix_pure, parse_complex, prepare_pure,
    prepare_superposition, rho_p, suggest_dim, BeamSplitter, CoherentSuperposition, Parity, StateSpec,
};
