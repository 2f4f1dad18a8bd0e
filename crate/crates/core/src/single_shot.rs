//! Mean-replacement approximations to the single-shot false-alarm and
//! detection probabilities, their first-order corrections, and the
//! dimensionality threshold M₀ above which p_D exceeds p_F.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ScenarioParams, ShotProbs};

fn noise_denominator(params: &ScenarioParams) -> Result<f64> {
    let d = params.m() * (params.n_b() + 1.0) - 1.0;
    if d <= 0.0 {
        return Err(Error::Domain(format!("M(N_B+1) = {} must exceed 1", params.m() * (params.n_b() + 1.0))));
    }
    Ok(d)
}

/// p_F ≈ N_B / (M(N_B+1) − 1).
pub fn p_f_approx(params: &ScenarioParams) -> Result<f64> {
    Ok(params.n_b() / noise_denominator(params)?)
}

/// p_D ≈ κ/(N_B+1) + N_B/(M(N_B+1)).
pub fn p_d_approx(params: &ScenarioParams) -> f64 {
    let nb1 = params.n_b() + 1.0;
    params.kappa() / nb1 + params.n_b() / (params.m() * nb1)
}

/// Both approximations as a validated pair.
pub fn shot_probs(params: &ScenarioParams) -> Result<ShotProbs> {
    ShotProbs::new(p_f_approx(params)?, p_d_approx(params))
}

/// First-order false-alarm correction N_B(N_B+1)/[M(N_B+1)−1]².
pub fn delta_f(params: &ScenarioParams) -> Result<f64> {
    let d = noise_denominator(params)?;
    Ok(params.n_b() * (params.n_b() + 1.0) / (d * d))
}

/// First-order detection correction, the sum of the m = m′ part
/// N_B(3κ+N_B)/[M(N_B+1)]² and the m ≠ m′ part κ(M−1)N_B²/[M(N_B+1)]².
pub fn delta_d(params: &ScenarioParams) -> f64 {
    let (kappa, n_b, m) = (params.kappa(), params.n_b(), params.m());
    let d = m * (n_b + 1.0);
    (n_b * (3.0 * kappa + n_b) + kappa * (m - 1.0) * n_b * n_b) / (d * d)
}

/// M₀ = [κ + √(κ² + 4κN_B(N_B+1))] / [2κ(N_B+1)].
pub fn m0_threshold(kappa: f64, n_b: f64) -> Result<f64> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::Domain(format!("kappa must be > 0, got {kappa}")));
    }
    if kappa >= 1.0 {
        return Err(Error::Domain(format!("kappa must be < 1, got {kappa}")));
    }
    if !n_b.is_finite() || n_b < 0.0 {
        return Err(Error::Domain(format!("n_b must be finite and >= 0, got {n_b}")));
    }
    let disc = kappa * kappa + 4.0 * kappa * n_b * (n_b + 1.0);
    Ok((kappa + disc.sqrt()) / (2.0 * kappa * (n_b + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectedShotProbs {
    pub base: ShotProbs,
    pub delta_f: f64,
    pub delta_d: f64,
    pub corrected: ShotProbs,
}

/// Approximations with their first-order corrections applied.
///
/// Requires M > 10·M₀ so that the corrected values stay well inside [0,1].
pub fn corrected_probs(params: &ScenarioParams) -> Result<CorrectedShotProbs> {
    let m0 = m0_threshold(params.kappa(), params.n_b())?;
    if params.m() <= 10.0 * m0 {
        return Err(Error::Domain(format!("corrections need M > 10·M_0 = {:e}, got M = {:e}", 10.0 * m0, params.m())));
    }
    let base = shot_probs(params)?;
    let df = delta_f(params)?;
    let dd = delta_d(params);
    let corrected = ShotProbs::new(base.p_f() - df, base.p_d() - dd)
        .map_err(|e| Error::Range(format!("corrected probability out of range: {e}")))?;
    Ok(CorrectedShotProbs { base, delta_f: df, delta_d: dd, corrected })
}
