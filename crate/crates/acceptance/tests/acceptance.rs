//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bellqi::baselines::quantum_advantage_db;
use bellqi::fock::{brute_force, exact_shot_probs};
use bellqi::gaussian::{solve_ns_for_penalty, tan_penalty, GaussianScenario};
use bellqi::multi_shot::{chernoff_bound, exact_error, mc_error, numeric_s_argmin, penalty};
use bellqi::report::commands::dominance_tuples;
use bellqi::report::{run, Cell, Command, Outcome, RunConfig};
use bellqi::single_shot::{corrected_probs, delta_d, delta_f, m0_threshold, p_d_approx, p_f_approx};
use bellqi::{Result, ScenarioParams};

const REL_TOL: f64 = 1e-10;

type Criterion = (u32, &'static str, fn() -> Result<Verdict>);

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict { passed, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn num_column(report: &bellqi::report::Report, name: &str) -> Vec<f64> {
    report
        .column(name)
        .unwrap_or_default()
        .into_iter()
        .map(|c| if let Cell::Num(x) = c { *x } else { f64::NAN })
        .collect()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn table1() -> Result<Verdict> {
    let (report, took) = timed(|| run(Command::Table1, &RunConfig::default()));
    let report = report?;
    let expected = [2.27e13, 7.34e5, 2.21e11, 7.33e3];
    let m = num_column(&report, "m");
    let worst = m.iter().zip(expected).map(|(&a, b)| rel(a, b)).fold(0.0, f64::max);
    let ok = m.len() == 4 && worst <= 0.01 && took < Duration::from_secs(1);
    let m_text: Vec<String> = m.iter().map(|x| format!("{x:.4e}")).collect();
    Ok(Verdict::new(
        ok,
        format!("M = [{}], worst rel dev {worst:.2e} (limit 1e-2), {took:.2?} (limit 1 s)", m_text.join(", ")),
    ))
}

fn thresholds() -> Result<Verdict> {
    let lo = m0_threshold(0.001, 1.0)?;
    let hi = m0_threshold(0.001, 100.0)?;
    let ok = rel(lo, 22.6) <= 0.005 && rel(hi, 31.5) <= 0.005;
    Ok(Verdict::new(ok, format!("M0(N_B=1) = {lo:.4}, M0(N_B=100) = {hi:.4} (targets 22.6, 31.5 within 0.5%)")))
}

fn gaussian_anchors() -> Result<Verdict> {
    let target = 10f64.powf(-0.1);
    let hi = solve_ns_for_penalty(0.001, 100.0, target)?;
    let lo = solve_ns_for_penalty(0.001, 1.0, target)?;
    let limit = [1.0, 100.0]
        .iter()
        .map(|&n_b| tan_penalty(&GaussianScenario::new(0.001, n_b, 1e-6)?))
        .collect::<Result<Vec<_>>>()?;
    let limit_dev = limit.iter().map(|&e| (e - 1.0).abs()).fold(0.0, f64::max);
    let ok = rel(hi, 0.01523) <= 0.005 && rel(lo, 0.01421) <= 0.005 && limit_dev <= 0.01;
    Ok(Verdict::new(
        ok,
        format!(
            "N_S(N_B=100) = {hi:.5} (target 0.01523), N_S(N_B=1) = {lo:.5} (target 0.01421), \
             max |E-1| at N_S=1e-6 = {limit_dev:.2e} (limit 1e-2)"
        ),
    ))
}

fn advantage() -> Result<Verdict> {
    let hi = quantum_advantage_db(100.0)?;
    let lo = quantum_advantage_db(1.0)?;
    let ok = (hi - 5.99).abs() <= 0.05 && (lo - 4.64).abs() <= 0.05;
    Ok(Verdict::new(ok, format!("{hi:.3} dB at N_B=100 (5.99), {lo:.3} dB at N_B=1 (4.64), tolerance 0.05 dB")))
}

fn oracle_bands() -> Result<Verdict> {
    let params = ScenarioParams::new(0.01, 1.0, 200.0)?;
    let (exact, took) = timed(|| exact_shot_probs(&params, REL_TOL));
    let exact = exact?;
    let (df, dd) = (delta_f(&params)?, delta_d(&params));
    let (pf, pd) = (p_f_approx(&params)?, p_d_approx(&params));
    let corr = corrected_probs(&params)?.corrected;
    let gap = |a: f64, b: f64| (a - b).abs();
    let band_f = gap(exact.p_f(), pf) <= 2.0 * df;
    let band_d = gap(exact.p_d(), pd) <= 2.0 * dd;
    let closer_f = gap(exact.p_f(), corr.p_f()) < gap(exact.p_f(), pf);
    let closer_d = gap(exact.p_d(), corr.p_d()) < gap(exact.p_d(), pd);
    let ok = band_f && band_d && closer_f && closer_d && took < Duration::from_secs(10);
    Ok(Verdict::new(
        ok,
        format!(
            "bands p_F {band_f}, p_D {band_d}; corrected closer p_F {closer_f} \
             ({:.3e} vs {:.3e}), p_D {closer_d}; {took:.2?} (limit 10 s)",
            gap(exact.p_f(), corr.p_f()),
            gap(exact.p_f(), pf)
        ),
    ))
}

fn brute() -> Result<Verdict> {
    let params = ScenarioParams::new(0.1, 0.2, 2.0)?;
    let (out, took) = timed(|| brute_force(&params, 8));
    let (probs, diag) = out?;
    let oracle = exact_shot_probs(&params, REL_TOL)?;
    let tail = diag.tail_mass;
    let mismatch = (probs.p_f() - oracle.p_f()).abs().max((probs.p_d() - oracle.p_d()).abs());
    let ok = mismatch <= 1e-4 + tail
        && diag.trace_rho1 >= 1.0 - 2.0 * tail
        && diag.trace_rho1 <= 1.0
        && diag.min_eigenvalue >= -1e-10
        && diag.projector_residual < 1e-10
        && diag.phase_invariance_residual < 1e-12
        && took < Duration::from_secs(60);
    Ok(Verdict::new(
        ok,
        format!(
            "mismatch {mismatch:.2e} (limit {:.2e}), trace {:.12}, tail {tail:.2e}, min eig {:.2e}, \
             projector {:.2e}, phase {:.2e}, {took:.2?}",
            1e-4 + tail,
            diag.trace_rho1,
            diag.min_eigenvalue,
            diag.projector_residual,
            diag.phase_invariance_residual
        ),
    ))
}

fn dominance() -> Result<Verdict> {
    let tuples = dominance_tuples(200, RunConfig::default().seed)?;
    let mut violations = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_s = 0.0f64;
    for &(probs, n_t) in &tuples {
        let bound = chernoff_bound(&probs, n_t)?;
        let ln_bound = bound.ln_bound(n_t as f64).ln();
        let ln_exact = exact_error(&probs, n_t)?.ln();
        // Both sides are evaluated in floating point; allow last-digit rounding only.
        if ln_exact > ln_bound + 1e-12 * (1.0 + ln_bound.abs()) {
            violations += 1;
        }
        worst_excess = worst_excess.max(ln_exact - ln_bound);
        worst_s = worst_s.max((bound.s_opt - numeric_s_argmin(&probs)?).abs());
    }
    let ok = violations == 0 && worst_s <= 1e-6;
    Ok(Verdict::new(
        ok,
        format!(
            "{} tuples, {violations} violations, max ln(exact/bound) {worst_excess:.3e}, \
             max |s_opt - argmin| {worst_s:.2e} (limit 1e-6)",
            tuples.len()
        ),
    ))
}

fn monte_carlo() -> Result<Verdict> {
    let probs = bellqi::single_shot::shot_probs(&ScenarioParams::new(0.1, 1.0, 500.0)?)?;
    let (n_t, trials, seed) = (200, 100_000, 42);
    let exact = exact_error(&probs, n_t)?.prob();
    let in_pool = |threads| -> Result<_> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| bellqi::Error::Numeric(e.to_string()))?
            .install(|| mc_error(&probs, n_t, trials, seed))
    };
    let a = in_pool(1)?;
    let b = in_pool(8)?;
    let c = in_pool(8)?;
    let z = (a.p_err_hat - exact).abs() / a.std_err;
    let same = |x: &bellqi::multi_shot::McEstimate, y: &bellqi::multi_shot::McEstimate| {
        x.p_err_hat.to_bits() == y.p_err_hat.to_bits() && x.std_err.to_bits() == y.std_err.to_bits()
    };
    let identical = same(&a, &b) && same(&b, &c);
    Ok(Verdict::new(
        z <= 3.0 && identical,
        format!(
            "estimate {:.6} vs exact {exact:.6}, {z:.2} standard errors (limit 3), bit-identical {identical}",
            a.p_err_hat
        ),
    ))
}

fn dim_ratio() -> Result<Verdict> {
    let report = run(Command::DimRatio, &RunConfig::default())?;
    let (n_b, pr, ratio) = (num_column(&report, "n_b"), num_column(&report, "pr_e"), num_column(&report, "ratio"));
    let mut ok = report.outcome == Outcome::Ok && !ratio.is_empty();
    let mut lows = Vec::new();
    for (nb, floor) in [(100.0, 1e5), (1.0, 1e4)] {
        let rows: Vec<usize> = (0..n_b.len()).filter(|&i| n_b[i] == nb).collect();
        let covers = rows.iter().any(|&i| pr[i] <= 1e-6) && rows.iter().any(|&i| pr[i] >= 1e-1);
        let low = rows.iter().map(|&i| ratio[i]).fold(f64::INFINITY, f64::min);
        ok &= covers && low > floor;
        lows.push(low);
    }
    Ok(Verdict::new(ok, format!("min ratio {:.3e} at N_B=100 (> 1e5), {:.3e} at N_B=1 (> 1e4)", lows[0], lows[1])))
}

fn penalty_asymptote() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for n_b in [1.0, 100.0] {
        // Log-spaced grid from just above the threshold to 1e18, 20 points per decade.
        let lo = (1.01 * m0_threshold(0.001, n_b)?).log10();
        let points = ((18.0 - lo) * 20.0).ceil() as usize + 1;
        let values = (0..points)
            .map(|i| {
                let m =
                    if i + 1 == points { 1e18 } else { 10f64.powf(lo + (18.0 - lo) * i as f64 / (points - 1) as f64) };
                Ok(penalty(&ScenarioParams::new(0.001, n_b, m)?)?.penalty)
            })
            .collect::<Result<Vec<f64>>>()?;
        let monotone = values.windows(2).all(|w| w[1] > w[0]);
        let last = *values.last().unwrap();
        ok &= monotone && last > 0.999;
        parts.push(format!("N_B={n_b}: monotone {monotone}, E(1e18) = {last:.6}"));
    }
    Ok(Verdict::new(ok, format!("{} (limit > 0.999)", parts.join("; "))))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "table reproduction", table1),
        (2, "dimensionality thresholds", thresholds),
        (3, "Gaussian anchors", gaussian_anchors),
        (4, "quantum-advantage landmarks", advantage),
        (5, "oracle bands", oracle_bands),
        (6, "brute-force consistency", brute),
        (7, "bound dominance", dominance),
        (8, "Monte Carlo", monte_carlo),
        (9, "dimensionality ratios", dim_ratio),
        (10, "penalty asymptote", penalty_asymptote),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let verdict = check().unwrap_or_else(|e| Verdict::new(false, format!("error: {e}")));
        failed += usize::from(!verdict.passed);
        let tag = if verdict.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id} ({name}): {}", verdict.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
