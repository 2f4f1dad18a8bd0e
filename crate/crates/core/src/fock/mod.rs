//! Approximation-free single-shot statistics: reduced exact sums for any
//! integer M, and a truncated Fock-space construction for M ≤ 4.

pub mod brute;
pub mod nb;
pub mod reduced;

pub use brute::{brute_force, rho0_element, rho1_element, FockLabel, FockModel, OracleDiagnostics, TruncatedOperator};
pub use nb::NbWindow;
pub use reduced::{exact_shot_probs, p_d_exact, p_d_exact_kappa, p_f_exact};
