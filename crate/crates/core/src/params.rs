//! Scenario parameters and probability newtypes shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Roundtrip transmissivity, background brightness and Bell-state dimensionality.
///
/// `m` is real-valued: the closed forms are evaluated at dimensionalities far
/// beyond anything representable as an enumerable state space. Routines that
/// need an integer dimensionality call [`ScenarioParams::integer_m`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    kappa: f64,
    n_b: f64,
    m: f64,
}

impl ScenarioParams {
    pub fn new(kappa: f64, n_b: f64, m: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 || kappa >= 1.0 {
            return Err(Error::invalid(format!("kappa must lie in (0,1), got {kappa}")));
        }
        if !n_b.is_finite() || n_b < 0.0 {
            return Err(Error::invalid(format!("n_b must be finite and >= 0, got {n_b}")));
        }
        if !m.is_finite() || m < 1.0 {
            return Err(Error::invalid(format!("m must be finite and >= 1, got {m}")));
        }
        Ok(Self { kappa, n_b, m })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n_b(&self) -> f64 {
        self.n_b
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// Same scenario at a different dimensionality.
    pub fn with_m(&self, m: f64) -> Result<Self> {
        Self::new(self.kappa, self.n_b, m)
    }

    /// The dimensionality as an integer, if it is one.
    pub fn integer_m(&self) -> Result<u64> {
        if self.m.fract() != 0.0 || self.m > 9.0e15 {
            return Err(Error::invalid(format!("m must be an exactly representable integer here, got {}", self.m)));
        }
        Ok(self.m as u64)
    }

    /// κ/(N_B+1), the per-transmission Nair-Gu exponent.
    pub fn nair_gu_rate(&self) -> f64 {
        self.kappa / (self.n_b + 1.0)
    }
}

/// Single-shot false-alarm and detection probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotProbs {
    p_f: f64,
    p_d: f64,
}

impl ShotProbs {
    pub fn new(p_f: f64, p_d: f64) -> Result<Self> {
        for (name, p) in [("p_f", p_f), ("p_d", p_d)] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Range(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(Self { p_f, p_d })
    }

    pub fn p_f(&self) -> f64 {
        self.p_f
    }

    pub fn p_d(&self) -> f64 {
        self.p_d
    }

    /// Checks `0 < p_F < p_D < 1`, the regime where the threshold test
    /// decides H₁ on large counts.
    pub fn require_ordered(&self) -> Result<()> {
        if self.p_f <= 0.0 || self.p_f >= 1.0 || self.p_d <= 0.0 || self.p_d >= 1.0 {
            return Err(Error::Domain(format!(
                "probabilities must lie strictly inside (0,1): p_F = {:e}, p_D = {:e}",
                self.p_f, self.p_d
            )));
        }
        if self.p_d <= self.p_f {
            return Err(Error::Ordering { p_f: self.p_f, p_d: self.p_d });
        }
        Ok(())
    }
}

/// A probability held as its natural logarithm.
///
/// Multi-shot bounds at N_T ~ 10^7 underflow a linear `f64`, so everything
/// is combined in log domain and only exponentiated for display.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogProb(f64);

impl LogProb {
    pub fn new(ln_p: f64) -> Result<Self> {
        if ln_p.is_nan() || ln_p > 0.0 {
            return Err(Error::Range(format!("ln p = {ln_p} is not the log of a probability")));
        }
        Ok(Self(ln_p))
    }

    /// Wraps a value that is a log-probability by construction, clamping
    /// rounding excursions above zero.
    pub(crate) fn from_ln(ln_p: f64) -> Self {
        debug_assert!(!ln_p.is_nan());
        Self(ln_p.min(0.0))
    }

    pub fn zero() -> Self {
        Self(f64::NEG_INFINITY)
    }

    pub fn ln(&self) -> f64 {
        self.0
    }

    pub fn log10(&self) -> f64 {
        self.0 / std::f64::consts::LN_10
    }

    pub fn prob(&self) -> f64 {
        self.0.exp()
    }
}

/// Numerically stable ln(eᵃ + eᵇ).
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln(1 − p) without cancellation for small p.
#[inline]
pub fn ln_one_minus(p: f64) -> f64 {
    (-p).ln_1p()
}
