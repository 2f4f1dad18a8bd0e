//! Multi-shot threshold test, Chernoff exponent and penalty relative to the
//! Nair-Gu exponent, plus exact and Monte Carlo error probabilities for the
//! same decision rule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::binomial::{ln_lower_tail, ln_upper_tail};
use crate::error::{Error, Result};
use crate::params::{ln_add_exp, ln_one_minus, LogProb, ScenarioParams, ShotProbs};
use crate::roots::{bisect, golden_section_min};
use crate::single_shot::{m0_threshold, shot_probs};

const LN_2: f64 = std::f64::consts::LN_2;

/// Optimised per-shot Chernoff overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffResult {
    pub s_opt: f64,
    /// ln Q(s_opt), Q(s) = p_D^s p_F^{1−s} + (1−p_D)^s (1−p_F)^{1−s}.
    pub ln_q: f64,
}

impl ChernoffResult {
    /// ln of Q(s_opt)^{N_T} / 2. `n_t` may be 0 (the 1/2 endpoint) or
    /// non-integral when used as a continuous curve.
    pub fn ln_bound(&self, n_t: f64) -> LogProb {
        LogProb::from_ln(n_t * self.ln_q - LN_2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyPoint {
    pub params: ScenarioParams,
    pub penalty: f64,
    pub has_advantage_vs_nair_gu: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub p_err_hat: f64,
    pub std_err: f64,
    pub trials: u64,
    pub seed: u64,
}

fn require_shots(n_t: u64) -> Result<()> {
    if n_t == 0 {
        return Err(Error::invalid("n_t must be a positive integer"));
    }
    Ok(())
}

/// ln Q(s).
///
/// Q − 1 = p_F·expm1(s·r) + (1−p_F)·expm1(s·r′) with r = ln(p_D/p_F) and
/// r′ = ln((1−p_D)/(1−p_F)); this keeps digits when p_D ≈ p_F, where Q is
/// within ~(p_D−p_F)²/p_F of 1 and the minimum over s is very flat.
pub fn ln_overlap(probs: &ShotProbs, s: f64) -> f64 {
    let (pf, pd) = (probs.p_f(), probs.p_d());
    let r = ((pd - pf) / pf).ln_1p();
    let r_miss = ((pf - pd) / (1.0 - pf)).ln_1p();
    if pf > 0.0 && pf < 1.0 && pd < 1.0 && s * r < 700.0 {
        return (pf * (s * r).exp_m1() + (1.0 - pf) * (s * r_miss).exp_m1()).ln_1p().min(0.0);
    }
    let ln_a = s * pd.ln() + (1.0 - s) * pf.ln();
    let ln_b = s * ln_one_minus(pd) + (1.0 - s) * ln_one_minus(pf);
    ln_add_exp(ln_a, ln_b).min(0.0)
}

/// Threshold γ on the count of single-shot H₁ decisions.
pub fn lrt_threshold(probs: &ShotProbs, n_t: u64) -> Result<f64> {
    require_shots(n_t)?;
    probs.require_ordered()?;
    let (pf, pd) = (probs.p_f(), probs.p_d());
    let num = ln_one_minus(pf) - ln_one_minus(pd);
    let den = pd.ln() - pf.ln() + num;
    Ok(n_t as f64 * num / den)
}

/// Smallest count that decides H₁. Identical hypotheses make the likelihood
/// ratio 1 everywhere, and the inclusive ≥ then decides H₁ on every count.
fn decision_cutoff(probs: &ShotProbs, n_t: u64) -> Result<u64> {
    if probs.p_f() == probs.p_d() && probs.p_f() > 0.0 && probs.p_f() < 1.0 {
        return Ok(0);
    }
    // A γ that is integral up to rounding is treated as integral, so the
    // tie D = γ goes to H₁ as the inclusive rule requires.
    let gamma = lrt_threshold(probs, n_t)?;
    Ok((gamma - 1e-9 * gamma.max(1.0)).ceil().max(0.0) as u64)
}

/// Closed-form minimiser of Q(s).
pub fn chernoff_s_opt(probs: &ShotProbs) -> Result<f64> {
    probs.require_ordered()?;
    let (pf, pd) = (probs.p_f(), probs.p_d());
    let (l1f, l1d) = (ln_one_minus(pf), ln_one_minus(pd));
    let ln_ratio_hit = pd.ln() - pf.ln();
    let ln_ratio_miss = l1f - l1d;
    let num = pf.ln() - l1f + ln_ratio_hit.ln() - ln_ratio_miss.ln();
    let den = l1d + pf.ln() - l1f - pd.ln();
    let s = num / den;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Numeric(format!("s_opt = {s} outside (0,1)")));
    }
    Ok(s)
}

/// Golden-section argmin of ln Q(s) over [0,1]; a check on the closed form.
pub fn numeric_s_argmin(probs: &ShotProbs) -> Result<f64> {
    probs.require_ordered()?;
    Ok(golden_section_min(|s| ln_overlap(probs, s), 0.0, 1.0, 1e-12).0)
}

pub fn chernoff_bound(probs: &ShotProbs, n_t: u64) -> Result<ChernoffResult> {
    require_shots(n_t)?;
    if probs.p_f() == probs.p_d() {
        return Ok(ChernoffResult { s_opt: 0.5, ln_q: 0.0 });
    }
    let s_opt = chernoff_s_opt(probs)?;
    Ok(ChernoffResult { s_opt, ln_q: ln_overlap(probs, s_opt) })
}

/// Ratio of the Chernoff exponent to the Nair-Gu exponent κN_T/(N_B+1).
/// N_T cancels, so the result depends on (κ, N_B, M) only.
pub fn penalty(params: &ScenarioParams) -> Result<PenaltyPoint> {
    let m0 = m0_threshold(params.kappa(), params.n_b())?;
    let below = || Error::BelowThreshold { m: params.m(), m0 };
    if params.m() <= m0 {
        return Err(below());
    }
    let probs = shot_probs(params)?;
    if probs.p_d() <= probs.p_f() {
        return Err(below());
    }
    let s = chernoff_s_opt(&probs)?;
    let value = -ln_overlap(&probs, s) / params.nair_gu_rate();
    Ok(PenaltyPoint { params: *params, penalty: value, has_advantage_vs_nair_gu: value > 0.0 && value <= 1.0 })
}

const LN_M_MAX: f64 = 20.0 * std::f64::consts::LN_10;

/// Dimensionality at which the penalty reaches `target`, by bisection on ln M
/// over [ln(1.001·M₀), ln 10²⁰].
pub fn solve_m_for_penalty(kappa: f64, n_b: f64, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!("target must lie in (0,1), got {target}")));
    }
    let base = ScenarioParams::new(kappa, n_b, 1.0)?;
    let m0 = m0_threshold(kappa, n_b)?;
    let f = |ln_m: f64| -> Result<f64> { Ok(penalty(&base.with_m(ln_m.exp())?)?.penalty - target) };
    let ln_m = bisect(f, (1.001 * m0).ln(), LN_M_MAX, 1e-13)?;
    let m = ln_m.exp();
    let achieved = penalty(&base.with_m(m)?)?.penalty;
    if ((achieved - target) / target).abs() >= 1e-6 {
        return Err(Error::Numeric(format!(
            "bisection converged to M = {m:e} with penalty {achieved} (target {target})"
        )));
    }
    Ok(m)
}

/// Error probability of the threshold test with equally likely hypotheses,
/// from exact binomial tails.
pub fn exact_error(probs: &ShotProbs, n_t: u64) -> Result<LogProb> {
    require_shots(n_t)?;
    let cut = decision_cutoff(probs, n_t)?;
    let ln_false_alarm = ln_upper_tail(n_t, probs.p_f(), cut);
    let ln_miss = if cut == 0 { f64::NEG_INFINITY } else { ln_lower_tail(n_t, probs.p_d(), cut - 1) };
    Ok(LogProb::from_ln(ln_add_exp(ln_false_alarm, ln_miss) - LN_2))
}

/// Monte Carlo estimate of the threshold test's error probability.
///
/// Trial `i` under hypothesis `h` draws from ChaCha8 stream `2i + h` of the
/// generator keyed by `seed`, so the estimate does not depend on how rayon
/// schedules trials.
pub fn mc_error(probs: &ShotProbs, n_t: u64, trials: u64, seed: u64) -> Result<McEstimate> {
    require_shots(n_t)?;
    if trials < 1000 {
        return Err(Error::invalid(format!("need at least 1000 trials, got {trials}")));
    }
    let cut = decision_cutoff(probs, n_t)?;
    let h0 = Binomial::new(n_t, probs.p_f()).map_err(|e| Error::invalid(e.to_string()))?;
    let h1 = Binomial::new(n_t, probs.p_d()).map_err(|e| Error::invalid(e.to_string()))?;
    let base = ChaCha8Rng::seed_from_u64(seed);

    let (false_alarms, misses) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = base.clone();
            rng.set_stream(2 * i);
            let fa = (h0.sample(&mut rng) >= cut) as u64;
            let mut rng = base.clone();
            rng.set_stream(2 * i + 1);
            let miss = (h1.sample(&mut rng) < cut) as u64;
            (fa, miss)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let n = trials as f64;
    let p_hat = 0.5 * (false_alarms as f64 / n + misses as f64 / n);
    Ok(McEstimate { p_err_hat: p_hat, std_err: (p_hat * (1.0 - p_hat) / n).sqrt(), trials, seed })
}
