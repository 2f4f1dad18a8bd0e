//! Run configuration: TOML scenario files plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format {other:?}, expected csv or json"))),
        }
    }
}

/// Grid values as written in the file: a scalar, a list, or a log-spaced
/// range `{ from, to, points }`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Single(f64),
    Values(Vec<f64>),
    Log { from: f64, to: f64, points: usize },
}

impl GridSpec {
    pub fn expand(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Single(v) => Ok(vec![*v]),
            GridSpec::Values(v) if v.is_empty() => Err(Error::Config("empty grid".into())),
            GridSpec::Values(v) => Ok(v.clone()),
            GridSpec::Log { from, to, points } => log_space(*from, *to, *points),
        }
    }
}

pub fn log_space(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > 0.0 && from.is_finite() && to.is_finite()) || points == 0 {
        return Err(Error::Config(format!("bad log grid from={from} to={to} points={points}")));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    let (a, b) = (from.log10(), to.log10());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => from,
            _ if i + 1 == points => to,
            _ => 10f64.powf(a + step * i as f64),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    M,
    NS,
    NT,
    PrE,
    Target,
}

impl GridKind {
    pub fn key(self) -> &'static str {
        match self {
            GridKind::M => "m",
            GridKind::NS => "n_s",
            GridKind::NT => "n_t",
            GridKind::PrE => "pr_e",
            GridKind::Target => "target",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub kind: GridKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub kappa: f64,
    pub n_b: f64,
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandCheck {
    pub kappa: f64,
    pub n_b: f64,
    pub m: u64,
}

impl Default for BandCheck {
    fn default() -> Self {
        Self { kappa: 0.01, n_b: 1.0, m: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BruteCheck {
    pub kappa: f64,
    pub n_b: f64,
    pub m: u64,
    pub cutoff: u32,
}

impl Default for BruteCheck {
    fn default() -> Self {
        Self { kappa: 0.1, n_b: 0.2, m: 2, cutoff: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McCheck {
    pub kappa: f64,
    pub n_b: f64,
    pub m: f64,
    pub n_t: u64,
    pub trials: u64,
}

impl Default for McCheck {
    fn default() -> Self {
        Self { kappa: 0.1, n_b: 1.0, m: 500.0, n_t: 200, trials: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub band: BandCheck,
    pub brute: BruteCheck,
    pub kappa_zero: BandCheck,
    pub mc: McCheck,
    pub dominance_tuples: usize,
    /// Also require the corrected false-alarm estimate to beat the plain one.
    pub strict_corrections: bool,
    /// Swap p_D below p_F in the multi-shot checks, to exercise error paths.
    pub corrupt_p_d: bool,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            band: BandCheck::default(),
            brute: BruteCheck::default(),
            kappa_zero: BandCheck { kappa: 0.0, n_b: 1.0, m: 200 },
            mc: McCheck::default(),
            dominance_tuples: 200,
            strict_corrections: false,
            corrupt_p_d: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kappa: f64,
    n_b: f64,
    m: Option<GridSpec>,
    n_s: Option<GridSpec>,
    n_t: Option<GridSpec>,
    pr_e: Option<GridSpec>,
    target: Option<GridSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    format: Option<Format>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    rel_tol: Option<f64>,
    threads: Option<usize>,
    #[serde(default)]
    scenario: Vec<RawScenario>,
    validate: Option<ValidateConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenarios: Vec<Scenario>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub rel_tol: f64,
    /// Worker count; excluded from the echoed config because it never
    /// changes results.
    #[serde(skip)]
    pub threads: usize,
    pub validate: ValidateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenarios: Vec::new(),
            format: Format::Csv,
            out: None,
            seed: 42,
            rel_tol: 1e-10,
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            validate: ValidateConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let defaults = RunConfig::default();
        let scenarios = raw.scenario.iter().map(convert_scenario).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scenarios,
            format: raw.format.unwrap_or(defaults.format),
            out: raw.out,
            seed: raw.seed.unwrap_or(defaults.seed),
            rel_tol: raw.rel_tol.unwrap_or(defaults.rel_tol),
            threads: raw.threads.unwrap_or(defaults.threads),
            validate: raw.validate.unwrap_or_default(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks shared by every command. Per-command grid requirements are
    /// checked by the commands before any row is computed.
    pub fn check(&self) -> Result<()> {
        if self.threads == 0 {
            return Err(Error::Config("threads must be positive".into()));
        }
        if !(self.rel_tol > 1e-14 && self.rel_tol < 1e-4) {
            return Err(Error::Config(format!("rel_tol must lie in (1e-14, 1e-4), got {}", self.rel_tol)));
        }
        for sc in &self.scenarios {
            if !(sc.kappa > 0.0 && sc.kappa < 1.0) {
                return Err(Error::Config(format!("kappa must lie in (0,1), got {}", sc.kappa)));
            }
            if !(sc.n_b >= 0.0 && sc.n_b.is_finite()) {
                return Err(Error::Config(format!("n_b must be finite and >= 0, got {}", sc.n_b)));
            }
            if let Some(grid) = &sc.grid {
                if grid.values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(format!("non-finite value in {} grid", grid.kind.key())));
                }
            }
        }
        Ok(())
    }
}

fn convert_scenario(raw: &RawScenario) -> Result<Scenario> {
    let candidates = [
        (GridKind::M, &raw.m),
        (GridKind::NS, &raw.n_s),
        (GridKind::NT, &raw.n_t),
        (GridKind::PrE, &raw.pr_e),
        (GridKind::Target, &raw.target),
    ];
    let mut present = candidates.iter().filter(|(_, spec)| spec.is_some());
    let grid = match (present.next(), present.next()) {
        (None, _) => None,
        (Some((kind, Some(spec))), None) => Some(Grid { kind: *kind, values: spec.expand()? }),
        _ => return Err(Error::Config("a scenario may carry at most one grid".into())),
    };
    Ok(Scenario { kappa: raw.kappa, n_b: raw.n_b, grid })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let cfg = RunConfig::from_toml(
            r#"
            format = "json"
            seed = 7
            rel_tol = 1e-9
            threads = 2

            [[scenario]]
            kappa = 0.001
            n_b = 1.0
            m = { from = 100.0, to = 1e6, points = 5 }

            [[scenario]]
            kappa = 0.001
            n_b = 100.0
            n_s = [0.01, 0.02]

            [validate]
            dominance_tuples = 10
            [validate.mc]
            trials = 5000
            "#,
        )
        .unwrap();
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.seed, 7);
        let m = &cfg.scenarios[0].grid.as_ref().unwrap().values;
        assert_eq!(m.len(), 5);
        assert!((m[2] - 1e4).abs() < 1e-8 && m[4] == 1e6);
        assert_eq!(cfg.scenarios[1].grid.as_ref().unwrap().kind, GridKind::NS);
        assert_eq!(cfg.validate.dominance_tuples, 10);
        assert_eq!(cfg.validate.mc.trials, 5000);
        assert_eq!(cfg.validate.mc.n_t, 200);
        cfg.check().unwrap();
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(RunConfig::from_toml("bogus = 1"), Err(Error::Config(_))));
        let two_grids = "[[scenario]]\nkappa = 0.1\nn_b = 1.0\nm = 10.0\nn_s = 0.1\n";
        assert!(RunConfig::from_toml(two_grids).is_err());
        let bad_kappa = RunConfig::from_toml("[[scenario]]\nkappa = 1.5\nn_b = 1.0\n").unwrap();
        assert!(bad_kappa.check().is_err());
        assert!(RunConfig::from_toml("format = \"xml\"").is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_space(1e-6, 1e-1, 6).unwrap();
        assert_eq!(g[0], 1e-6);
        assert_eq!(g[5], 1e-1);
        assert!(log_space(0.0, 1.0, 3).is_err());
    }
}
