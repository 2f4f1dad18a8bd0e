//! Log-domain binomial probabilities.
//!
//! The pmf anchor uses Loader's saddle-point form (Stirling remainders plus
//! the deviance term `bd0`), which keeps full relative precision at
//! N ~ 10^7 where differences of log-gammas would not. Tails are summed
//! outward from the mode with ratio recurrences and stop once a term falls
//! below 10⁻¹⁵ of the running sum.

use statrs::function::gamma::ln_gamma;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const TAIL_CUTOFF: f64 = 1e-15;

/// ln(n!) − ln(√(2πn) (n/e)ⁿ).
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// x ln(x/μ) + μ − x without cancellation when x ≈ μ.
fn bd0(x: f64, mu: f64) -> f64 {
    if (x - mu).abs() < 0.1 * (x + mu) {
        let v = (x - mu) / (x + mu);
        let mut s = (x - mu) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / mu).ln() + mu - x
    }
}

/// ln P(Bin(n, p) = k).
pub fn ln_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let (nf, kf) = (n as f64, k as f64);
    if k == 0 {
        return nf * (-p).ln_1p();
    }
    if k == n {
        return nf * p.ln();
    }
    let rest = nf - kf;
    stirlerr(nf) - stirlerr(kf) - stirlerr(rest) - bd0(kf, nf * p) - bd0(rest, nf * q)
        + 0.5 * (nf / (2.0 * std::f64::consts::PI * kf * rest)).ln()
}

fn mode(n: u64, p: f64) -> u64 {
    (((n as f64 + 1.0) * p).floor() as u64).min(n)
}

/// ln Σ_{k=lo}^{hi} P(Bin(n,p) = k).
fn ln_range_sum(n: u64, p: f64, lo: u64, hi: u64) -> f64 {
    if lo > hi || lo > n {
        return f64::NEG_INFINITY;
    }
    let hi = hi.min(n);
    if p == 0.0 {
        return if lo == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if hi == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let anchor = mode(n, p).clamp(lo, hi);
    let ln_anchor = ln_pmf(n, p, anchor);
    let ln_odds = p.ln() - (-p).ln_1p();
    let mut sum = 1.0;

    let mut rel = 0.0;
    let mut k = anchor;
    while k < hi {
        rel += ((n - k) as f64 / (k + 1) as f64).ln() + ln_odds;
        k += 1;
        let t = rel.exp();
        sum += t;
        if t < TAIL_CUTOFF * sum {
            break;
        }
    }

    rel = 0.0;
    k = anchor;
    while k > lo {
        rel += (k as f64 / (n - k + 1) as f64).ln() - ln_odds;
        k -= 1;
        let t = rel.exp();
        sum += t;
        if t < TAIL_CUTOFF * sum {
            break;
        }
    }
    (ln_anchor + sum.ln()).min(0.0)
}

/// ln P(Bin(n,p) ≥ c).
pub fn ln_upper_tail(n: u64, p: f64, c: u64) -> f64 {
    if c == 0 {
        return 0.0;
    }
    ln_range_sum(n, p, c, n)
}

/// ln P(Bin(n,p) ≤ c).
pub fn ln_lower_tail(n: u64, p: f64, c: u64) -> f64 {
    ln_range_sum(n, p, 0, c)
}
