//! Exact single-shot probabilities as low-dimensional sums.
//!
//! Mode-exchange symmetry collapses the sums over all M-mode occupation
//! tuples to sums over one or two singled-out modes plus the aggregate count
//! of the rest, which is negative-binomial.

use rayon::prelude::*;

use super::nb::NbWindow;
use crate::error::{Error, Result};
use crate::params::{ScenarioParams, ShotProbs};

const TERM_LIMIT: u128 = 1_000_000_000;
const WINDOW_LIMIT: usize = 200_000_000;

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 1e-14 && rel_tol < 1e-4) {
        return Err(Error::invalid(format!("rel_tol must lie in (1e-14, 1e-4), got {rel_tol}")));
    }
    Ok(())
}

fn integer_modes(params: &ScenarioParams) -> Result<u64> {
    let m = params.integer_m()?;
    if m < 2 {
        return Err(Error::invalid("exact sums need M ≥ 2"));
    }
    Ok(m)
}

/// A truncated sum and a bound on its distance from the full series.
struct Partial {
    value: f64,
    bound: f64,
}

/// Re-runs `f` with tighter window tolerances until the truncation bound is
/// within `rel_tol` of the partial sum.
fn converge(rel_tol: f64, mut f: impl FnMut(f64) -> Result<Partial>) -> Result<f64> {
    let mut eps = rel_tol * 1e-2;
    while eps > 1e-300 {
        let p = f(eps)?;
        if p.bound <= rel_tol * p.value {
            return Ok(p.value);
        }
        eps *= 1e-3;
    }
    Err(Error::Numeric("reduced sum did not reach the requested tolerance".into()))
}

/// g(j) = Σ_k w_k / (j + k + c) for j in [j_lo, j_hi].
fn inner_sums(inner: &NbWindow, c: f64, j_lo: u64, j_hi: u64) -> Result<Vec<f64>> {
    let terms = (j_hi - j_lo + 1) as u128 * inner.len() as u128;
    if terms > TERM_LIMIT {
        return Err(Error::WindowCapacity { terms, limit: TERM_LIMIT });
    }
    let base = inner.start() as f64 + c;
    Ok((j_lo..=j_hi)
        .into_par_iter()
        .map(|j| {
            let shift = j as f64 + base;
            inner.weights().iter().enumerate().map(|(i, w)| w / (shift + i as f64)).sum()
        })
        .collect())
}

fn window(r: u64, n_b: f64, eps: f64) -> Result<NbWindow> {
    NbWindow::new(r, n_b, eps, WINDOW_LIMIT)
}

fn last(w: &NbWindow) -> u64 {
    w.start() + w.len() as u64 - 1
}

fn p_f_partial(n_b: f64, m: u64, eps: f64) -> Result<Partial> {
    let outer = window(1, n_b, eps)?;
    let inner = window(m - 1, n_b, eps)?;
    let g = inner_sums(&inner, (m - 1) as f64, outer.start(), last(&outer))?;
    let value = outer.iter().zip(&g).map(|((n, w), gn)| w * n as f64 * gn).sum();
    // Each summand n/(n+k+M−1) is at most 1.
    Ok(Partial { value, bound: 2.01 * (outer.tail() + inner.tail()) })
}

fn p_d_partial(kappa: f64, n_b: f64, m: u64, eps: f64) -> Result<Partial> {
    let mf = m as f64;
    let pair = window(2, n_b, eps)?;

    // Returned photon pairs with its own idler. The factor
    // N_B(1−κ/(N_B+1)) + κ(n+1)/(N_B+1) is the weight (n+1)/N_B·(...) after
    // the N_B^{n+1} prefactor is absorbed, so N_B = 0 needs no special case.
    let inner = window(m - 1, n_b, eps)?;
    let g = inner_sums(&inner, mf, pair.start(), last(&pair))?;
    let diag: f64 = pair
        .iter()
        .zip(&g)
        .map(|((n, w), gn)| w * (n_b * (1.0 - kappa / (n_b + 1.0)) + kappa * (n as f64 + 1.0) / (n_b + 1.0)) * gn)
        .sum();
    let diag_bound = 2.01 * (pair.tail() + inner.tail()) * (n_b / mf + kappa / (n_b + 1.0));

    // Cross terms m ≠ m′: the two singled-out modes enter through the
    // distribution of n + n′, the other M−2 modes through their total.
    let mut conv = vec![0.0; 2 * pair.len() - 1];
    let terms = (pair.len() as u128).pow(2);
    if terms > TERM_LIMIT {
        return Err(Error::WindowCapacity { terms, limit: TERM_LIMIT });
    }
    for (i, a) in pair.weights().iter().enumerate() {
        for (j, b) in pair.weights().iter().enumerate() {
            conv[i + j] += a * b;
        }
    }
    let rest = window(m - 2, n_b, eps)?;
    let j_lo = 2 * pair.start();
    let g = inner_sums(&rest, mf, j_lo, j_lo + conv.len() as u64 - 1)?;
    let cross: f64 = conv.iter().zip(&g).map(|(w, gj)| w * gj).sum::<f64>() * kappa * (mf - 1.0);
    let cross_bound = 2.01 * (2.0 * pair.tail() + rest.tail()) * kappa;

    Ok(Partial { value: diag + cross, bound: diag_bound + cross_bound })
}

/// Exact false-alarm probability.
pub fn p_f_exact(params: &ScenarioParams, rel_tol: f64) -> Result<f64> {
    check_tol(rel_tol)?;
    let m = integer_modes(params)?;
    converge(rel_tol, |eps| p_f_partial(params.n_b(), m, eps))
}

/// Exact detection probability.
pub fn p_d_exact(params: &ScenarioParams, rel_tol: f64) -> Result<f64> {
    check_tol(rel_tol)?;
    let m = integer_modes(params)?;
    converge(rel_tol, |eps| p_d_partial(params.kappa(), params.n_b(), m, eps))
}

/// As [`p_d_exact`] but accepting κ = 0, where H₁ coincides with H₀.
pub fn p_d_exact_kappa(kappa: f64, n_b: f64, m: u64, rel_tol: f64) -> Result<f64> {
    check_tol(rel_tol)?;
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::invalid(format!("kappa must lie in [0,1), got {kappa}")));
    }
    if !(n_b >= 0.0 && n_b.is_finite()) || m < 2 {
        return Err(Error::invalid("need N_B ≥ 0 and M ≥ 2"));
    }
    converge(rel_tol, |eps| p_d_partial(kappa, n_b, m, eps))
}

pub fn exact_shot_probs(params: &ScenarioParams, rel_tol: f64) -> Result<ShotProbs> {
    ShotProbs::new(p_f_exact(params, rel_tol)?, p_d_exact(params, rel_tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::single_shot::{p_d_approx, p_f_approx};

    fn sp(kappa: f64, n_b: f64, m: f64) -> ScenarioParams {
        ScenarioParams::new(kappa, n_b, m).unwrap()
    }

    #[test]
    fn vacuum_noise() {
        assert_eq!(p_f_exact(&sp(0.1, 0.0, 10.0), 1e-10).unwrap(), 0.0);
        // Only the returned photon can trigger: κ/M from the diagonal term and
        // κ(M−1)/M from the cross terms.
        let pd = p_d_exact(&sp(0.1, 0.0, 10.0), 1e-10).unwrap();
        assert!((pd - 0.1).abs() < 1e-15, "{pd}");
    }

    #[test]
    fn hand_values_at_two_modes() {
        let p = sp(0.1, 0.2, 2.0);
        assert!((p_f_exact(&p, 1e-12).unwrap() - 1.0 / 12.0).abs() < 1e-12);
        let pd = p_d_exact(&p, 1e-12).unwrap();
        assert!((pd - 0.159722222222).abs() < 1e-9, "{pd}");
    }

    #[test]
    fn approximations_at_large_m() {
        let p = sp(0.1, 1.0, 500.0);
        let pf = p_f_exact(&p, 1e-10).unwrap();
        let pd = p_d_exact(&p, 1e-10).unwrap();
        assert!((pf - 0.001).abs() < 1e-12, "{pf}");
        assert!((pd - 0.05095).abs() < 1e-5, "{pd}");
        assert!(pf < p_f_approx(&p).unwrap() && pd < p_d_approx(&p));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(p_f_exact(&sp(0.1, 1.0, 2.5), 1e-10).is_err());
        assert!(p_f_exact(&sp(0.1, 1.0, 1.0), 1e-10).is_err());
        assert!(p_f_exact(&sp(0.1, 1.0, 10.0), 1e-3).is_err());
        assert!(p_f_exact(&sp(0.1, 1.0, 10.0), 1e-15).is_err());
        assert!(p_d_exact_kappa(1.0, 1.0, 10, 1e-10).is_err());
    }
}
