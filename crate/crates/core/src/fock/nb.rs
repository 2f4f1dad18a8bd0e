//! Truncated negative-binomial weights for aggregate thermal photon counts.
//!
//! NB(r) here is the law of the total photon number in r independent thermal
//! modes of mean N_B: P(k) = C(k+r−1, k) N_B^k / (N_B+1)^{k+r}.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Weights on a contiguous window of counts, normalised to sum to one, with a
/// rigorous bound on the probability mass left outside the window.
#[derive(Debug, Clone)]
pub struct NbWindow {
    start: u64,
    weights: Vec<f64>,
    tail: f64,
    window_mass: f64,
}

impl NbWindow {
    /// Extends outward from the mode until the geometric-ratio bound on the
    /// remaining mass on each side is below `eps` relative to the window.
    pub fn new(r: u64, n_b: f64, eps: f64, max_len: usize) -> Result<Self> {
        if !(n_b >= 0.0 && n_b.is_finite()) {
            return Err(Error::invalid(format!("N_B must be finite and ≥ 0, got {n_b}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0,1), got {eps}")));
        }
        if r == 0 || n_b == 0.0 {
            return Ok(Self { start: 0, weights: vec![1.0], tail: 0.0, window_mass: 1.0 });
        }

        let q = n_b / (n_b + 1.0);
        let rf = r as f64;
        let mode = ((rf - 1.0) * n_b).floor() as u64;
        let over = |len: usize| Error::WindowCapacity { terms: len as u128, limit: max_len as u128 };

        // Above the mode the ratio (k+r)/(k+1)·q falls with k.
        let mut up = vec![1.0f64];
        let mut up_sum = 1.0;
        let mut tail_up;
        let mut k = mode;
        loop {
            let ratio = (k as f64 + rf) / (k as f64 + 1.0) * q;
            let w = *up.last().unwrap();
            if ratio < 1.0 {
                tail_up = w * ratio / (1.0 - ratio);
                if tail_up < eps * up_sum {
                    break;
                }
            }
            let next = w * ratio;
            if next == 0.0 {
                tail_up = 0.0;
                break;
            }
            up.push(next);
            up_sum += next;
            k += 1;
            if up.len() > max_len {
                return Err(over(up.len()));
            }
        }

        // Below the mode the ratio k/((k−1+r)·q) falls as k decreases.
        let mut down = Vec::new();
        let mut down_sum = 0.0;
        let mut tail_down = 0.0;
        let mut k = mode;
        let mut w = 1.0f64;
        while k > 0 {
            let ratio = k as f64 / ((k as f64 - 1.0 + rf) * q);
            if ratio < 1.0 {
                let bound = w * ratio / (1.0 - ratio);
                if bound < eps * (up_sum + down_sum) {
                    tail_down = bound;
                    break;
                }
            }
            w *= ratio;
            if w == 0.0 {
                break;
            }
            down.push(w);
            down_sum += w;
            k -= 1;
            if up.len() + down.len() > max_len {
                return Err(over(up.len() + down.len()));
            }
        }

        let start = mode - down.len() as u64;
        let sum = up_sum + down_sum;
        let mut weights: Vec<f64> = down.into_iter().rev().chain(up).collect();
        for w in &mut weights {
            *w /= sum;
        }

        let ln_anchor = ln_gamma(mode as f64 + rf) - ln_gamma(mode as f64 + 1.0) - ln_gamma(rf)
            + mode as f64 * (n_b.ln() - n_b.ln_1p())
            - rf * n_b.ln_1p();
        Ok(Self { start, weights, tail: (tail_up + tail_down) / sum, window_mass: sum * ln_anchor.exp() })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Normalised weights; entry i belongs to count start + i.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Upper bound on the mass outside the window, relative to the window mass.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Absolute probability inside the window, from the log-gamma anchor.
    pub fn window_mass(&self) -> f64 {
        self.window_mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(i, &w)| (self.start + i as u64, w))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(k, w)| k as f64 * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.iter().map(|(k, w)| (k as f64 - mu).powi(2) * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: usize = 100_000_000;

    #[test]
    fn geometric_window() {
        let w = NbWindow::new(1, 1.0, 1e-15, CAP).unwrap();
        assert_eq!(w.start(), 0);
        for (k, wk) in w.iter().take(10) {
            assert!((wk - 0.5f64.powi(k as i32 + 1)).abs() < 1e-15);
        }
        assert!(w.tail() < 1e-15);
    }

    #[test]
    fn moments_match_closed_form() {
        for &(r, nb) in &[(1u64, 0.2), (5, 1.0), (200, 1.0), (10_000, 100.0)] {
            let w = NbWindow::new(r, nb, 1e-15, CAP).unwrap();
            let mean = r as f64 * nb;
            let var = r as f64 * nb * (nb + 1.0);
            assert!((w.mean() - mean).abs() <= 1e-10 * mean, "r={r} mean {}", w.mean());
            assert!((w.variance() - var).abs() <= 1e-9 * var, "r={r} var {}", w.variance());
            assert!((w.window_mass() - 1.0).abs() < 1e-8, "mass {}", w.window_mass());
        }
    }

    #[test]
    fn vacuum_is_point_mass() {
        let w = NbWindow::new(7, 0.0, 1e-12, CAP).unwrap();
        assert_eq!(w.weights(), &[1.0]);
        let w = NbWindow::new(0, 3.0, 1e-12, CAP).unwrap();
        assert_eq!((w.start(), w.len()), (0, 1));
    }

    #[test]
    fn capacity_guard() {
        let err = NbWindow::new(1_000_000, 100.0, 1e-12, 1000).unwrap_err();
        assert!(matches!(err, Error::WindowCapacity { .. }));
    }
}
