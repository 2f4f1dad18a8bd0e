//! Closed-form reference bounds: the Nair-Gu lower bound, the coherent-state
//! Chernoff bound and the infinite-dimensionality limit of the Bell-state
//! receiver.

use crate::error::{Error, Result};
use crate::params::{ln_one_minus, LogProb, ScenarioParams};

const LN_2: f64 = std::f64::consts::LN_2;
const LN_4: f64 = 2.0 * std::f64::consts::LN_2;

fn per_shot_survival_ln(params: &ScenarioParams) -> Result<f64> {
    let rate = params.nair_gu_rate();
    if rate >= 1.0 {
        return Err(Error::Domain(format!("kappa/(N_B+1) = {rate} must be < 1")));
    }
    Ok(ln_one_minus(rate))
}

fn require_shots(n_t: u64) -> Result<()> {
    if n_t == 0 {
        return Err(Error::invalid("n_t must be a positive integer"));
    }
    Ok(())
}

/// ln of [1 − κ/(N_B+1)]^{N_T} / 4.
pub fn nair_gu_error_lb(params: &ScenarioParams, n_t: u64) -> Result<LogProb> {
    require_shots(n_t)?;
    Ok(LogProb::from_ln(n_t as f64 * per_shot_survival_ln(params)? - LN_4))
}

/// ln of exp(−κ N_T (√(1+N_B) − √N_B)²) / 2.
pub fn cs_chernoff_ub(params: &ScenarioParams, n_t: u64) -> Result<LogProb> {
    require_shots(n_t)?;
    Ok(LogProb::from_ln(-params.kappa() * n_t as f64 * cs_rate_factor(params.n_b()) - LN_2))
}

/// ln of [1 − κ/(N_B+1)]^{N_T} / 2, the M → ∞ limit of the Bell-state receiver.
pub fn pannu_asymptotic_ub(params: &ScenarioParams, n_t: u64) -> Result<LogProb> {
    require_shots(n_t)?;
    Ok(LogProb::from_ln(n_t as f64 * per_shot_survival_ln(params)? - LN_2))
}

/// (√(1+N_B) − √N_B)², written as 1/(√(1+N_B) + √N_B)² to avoid cancellation
/// at large N_B.
pub fn cs_rate_factor(n_b: f64) -> f64 {
    let s = (1.0 + n_b).sqrt() + n_b.sqrt();
    1.0 / (s * s)
}

/// Exponent advantage of the Nair-Gu rate over the coherent-state rate, in dB.
pub fn quantum_advantage_db(n_b: f64) -> Result<f64> {
    if !n_b.is_finite() || n_b < 0.0 {
        return Err(Error::invalid(format!("n_b must be finite and >= 0, got {n_b}")));
    }
    Ok(10.0 * ((1.0 / (n_b + 1.0)) / cs_rate_factor(n_b)).log10())
}

/// Penalty value at which the Bell-state system's exponent only matches the
/// coherent-state exponent: (√(1+N_B) − √N_B)² (N_B + 1).
pub fn cs_parity_penalty(n_b: f64) -> f64 {
    cs_rate_factor(n_b) * (n_b + 1.0)
}
