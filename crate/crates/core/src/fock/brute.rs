//! Truncated Fock-space construction of both hypotheses' returned-plus-idler
//! states and of the receiver's projector, for a handful of modes.
//!
//! Mode and idler indices are 0-based. Both density operators conserve the
//! total photon number in the returned modes, so they are stored as one real
//! block per photon-number sector.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::{ScenarioParams, ShotProbs};

pub const MAX_MODES: usize = 4;
pub const MAX_CUTOFF: u32 = 10;
pub const DIMENSION_CAP: usize = 50_000;

/// Photon numbers of the M returned modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FockLabel {
    occupations: Vec<u32>,
}

impl FockLabel {
    pub fn new(occupations: Vec<u32>, cutoff: u32) -> Result<Self> {
        let label = Self { occupations };
        if label.total() > cutoff {
            return Err(Error::invalid(format!("label total {} exceeds cutoff {cutoff}", label.total())));
        }
        Ok(label)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn total(&self) -> u32 {
        self.occupations.iter().sum()
    }

    pub fn modes(&self) -> usize {
        self.occupations.len()
    }

    fn shifted(&self, add: usize) -> Self {
        let mut occupations = self.occupations.clone();
        occupations[add] += 1;
        Self { occupations }
    }
}

/// All labels on `modes` modes with exactly `total` photons, lexicographic.
fn labels_with_total(modes: usize, total: u32) -> Vec<FockLabel> {
    fn fill(rest: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<FockLabel>) {
        if slots == 1 {
            prefix.push(rest);
            out.push(FockLabel { occupations: prefix.clone() });
            prefix.pop();
            return;
        }
        for first in (0..=rest).rev() {
            prefix.push(first);
            fill(rest - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(total, modes, &mut Vec::with_capacity(modes), &mut out);
    out
}

/// Matrix elements of the two hypotheses' states; κ = 0 is allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockModel {
    kappa: f64,
    n_b: f64,
    modes: usize,
}

impl FockModel {
    pub fn new(kappa: f64, n_b: f64, modes: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&kappa) {
            return Err(Error::invalid(format!("kappa must lie in [0,1), got {kappa}")));
        }
        if !(n_b >= 0.0 && n_b.is_finite()) {
            return Err(Error::invalid(format!("N_B must be finite and ≥ 0, got {n_b}")));
        }
        if modes < 2 {
            return Err(Error::invalid("need at least two modes"));
        }
        Ok(Self { kappa, n_b, modes })
    }

    pub fn from_params(params: &ScenarioParams) -> Result<Self> {
        Self::new(params.kappa(), params.n_b(), params.integer_m()? as usize)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// N_B^a / (N_B+1)^b, with 0^0 = 1.
    fn ratio_pow(&self, a: u32, b: u32) -> f64 {
        self.n_b.powi(a as i32) / (self.n_b + 1.0).powi(b as i32)
    }

    fn geo(&self, n: u32) -> f64 {
        self.ratio_pow(n, n + 1)
    }

    fn thermal_except(&self, n: &[u32], skip: &[usize]) -> f64 {
        n.iter().enumerate().filter(|(l, _)| !skip.contains(l)).map(|(_, &k)| self.geo(k)).product()
    }

    fn valid(&self, m: usize, mp: usize, n: &[u32], np: &[u32]) -> bool {
        m < self.modes && mp < self.modes && n.len() == self.modes && np.len() == self.modes
    }

    /// ⟨N|⟨m| ρ⁽⁰⁾ |m′⟩|N′⟩: thermal noise, idler maximally mixed.
    pub fn rho0(&self, m: usize, mp: usize, n: &[u32], np: &[u32]) -> f64 {
        if !self.valid(m, mp, n, np) || m != mp || n != np {
            return 0.0;
        }
        self.thermal_except(n, &[]) / self.modes as f64
    }

    /// ⟨N|⟨m| ρ⁽¹⁾ |m′⟩|N′⟩.
    pub fn rho1(&self, m: usize, mp: usize, n: &[u32], np: &[u32]) -> f64 {
        if !self.valid(m, mp, n, np) {
            return 0.0;
        }
        let (kappa, n_b, mf) = (self.kappa, self.n_b, self.modes as f64);
        if m == mp {
            if n != np {
                return 0.0;
            }
            let thermal = self.thermal_except(n, &[]) * (1.0 - kappa / (n_b + 1.0));
            // thermal·N_m/(N_B(N_B+1)) with the 1/N_B folded into the power.
            let nm = n[m];
            let returned = if nm == 0 {
                0.0
            } else {
                kappa * nm as f64 * self.thermal_except(n, &[m]) * self.ratio_pow(nm - 1, nm + 2)
            };
            return (thermal + returned) / mf;
        }
        // Nonzero only for N′ = N − e_m + e_{m′}.
        if n[m] == 0 {
            return 0.0;
        }
        let matches = (0..self.modes).all(|l| {
            let expected = if l == m {
                n[l] - 1
            } else if l == mp {
                n[l] + 1
            } else {
                n[l]
            };
            np[l] == expected
        });
        if !matches {
            return 0.0;
        }
        let (a, b) = (np[m], n[mp]);
        kappa / mf
            * self.thermal_except(n, &[m, mp])
            * self.ratio_pow(a + b, a + b + 4)
            * ((a as f64 + 1.0) * (b as f64 + 1.0)).sqrt()
    }

    fn ln_nb(&self, t: u64) -> f64 {
        let (tf, mf) = (t as f64, self.modes as f64);
        ln_gamma(tf + mf) - ln_gamma(tf + 1.0) - ln_gamma(mf) + tf * self.n_b.ln() - (tf + mf) * self.n_b.ln_1p()
    }

    /// Mass of both states beyond total photon number `cutoff`, as sums over
    /// the negative-binomial law of the aggregate count.
    pub fn tail_masses(&self, cutoff: u32) -> (f64, f64) {
        if self.n_b == 0.0 {
            return (0.0, 0.0);
        }
        let (kappa, n_b, mf) = (self.kappa, self.n_b, self.modes as f64);
        let q = n_b / (n_b + 1.0);
        let mode = ((mf - 1.0) * n_b).floor() as u64;
        let mut t = cutoff as u64 + 1;
        let mut w = self.ln_nb(t).exp();
        let (mut tail0, mut tail1) = (0.0, 0.0);
        loop {
            let weight1 = (1.0 - kappa / (n_b + 1.0)) + kappa * t as f64 / (mf * n_b * (n_b + 1.0));
            tail0 += w;
            tail1 += w * weight1;
            let ratio = (t as f64 + mf) / (t as f64 + 1.0) * q;
            if t > mode && ratio < 1.0 && w * t as f64 / (1.0 - ratio) < 1e-18 * tail0.max(1e-300) || w == 0.0 {
                break;
            }
            w *= ratio;
            t += 1;
        }
        (tail0, tail1)
    }
}

/// ⟨N|⟨m| ρ⁽¹⁾ |m′⟩|N′⟩ for the scenario. Labels must have M entries; any
/// mismatch gives 0.
pub fn rho1_element(m: usize, m_prime: usize, n: &FockLabel, n_prime: &FockLabel, params: &ScenarioParams) -> f64 {
    match FockModel::from_params(params) {
        Ok(model) => model.rho1(m, m_prime, n.occupations(), n_prime.occupations()),
        Err(_) => 0.0,
    }
}

pub fn rho0_element(m: usize, m_prime: usize, n: &FockLabel, n_prime: &FockLabel, params: &ScenarioParams) -> f64 {
    match FockModel::from_params(params) {
        Ok(model) => model.rho0(m, m_prime, n.occupations(), n_prime.occupations()),
        Err(_) => 0.0,
    }
}

/// Density operator on labels of total ≤ cutoff times the M idler states.
///
/// Block t covers the labels with t photons; basis index within the block is
/// label_index·M + idler.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    modes: usize,
    sectors: Vec<Vec<FockLabel>>,
    blocks: Vec<DMatrix<f64>>,
    tail_mass: f64,
}

fn sector_index(labels: &[FockLabel]) -> HashMap<&[u32], usize> {
    labels.iter().enumerate().map(|(i, l)| (l.occupations(), i)).collect()
}

pub fn truncated_dimension(modes: usize, cutoff: u32) -> usize {
    // C(cutoff + M, M) labels.
    let labels = (1..=modes).fold(1usize, |acc, i| acc * (cutoff as usize + i) / i);
    labels * modes
}

impl TruncatedOperator {
    fn build(model: &FockModel, cutoff: u32, hypothesis_one: bool) -> Result<Self> {
        let modes = model.modes();
        let dim = truncated_dimension(modes, cutoff);
        if dim > DIMENSION_CAP {
            return Err(Error::Dimension { dim, cap: DIMENSION_CAP });
        }
        let sectors: Vec<Vec<FockLabel>> = (0..=cutoff).map(|t| labels_with_total(modes, t)).collect();
        let mut blocks = Vec::with_capacity(sectors.len());
        for labels in &sectors {
            let index = sector_index(labels);
            let size = labels.len() * modes;
            let mut block = DMatrix::zeros(size, size);
            for (i, label) in labels.iter().enumerate() {
                let n = label.occupations();
                for m in 0..modes {
                    let row = i * modes + m;
                    for mp in 0..modes {
                        let mut np = n.to_vec();
                        if mp != m {
                            if n[m] == 0 {
                                continue;
                            }
                            np[m] -= 1;
                            np[mp] += 1;
                        }
                        let col = index[np.as_slice()] * modes + mp;
                        block[(row, col)] =
                            if hypothesis_one { model.rho1(m, mp, n, &np) } else { model.rho0(m, mp, n, &np) };
                    }
                }
            }
            blocks.push(block);
        }
        let (tail0, tail1) = model.tail_masses(cutoff);
        Ok(Self { modes, sectors, blocks, tail_mass: if hypothesis_one { tail1 } else { tail0 } })
    }

    pub fn rho0(model: &FockModel, cutoff: u32) -> Result<Self> {
        Self::build(model, cutoff, false)
    }

    pub fn rho1(model: &FockModel, cutoff: u32) -> Result<Self> {
        Self::build(model, cutoff, true)
    }

    /// Ordered basis: sectors by photon number, labels lexicographic within
    /// a sector, idler innermost.
    pub fn basis(&self) -> Vec<(FockLabel, usize)> {
        self.sectors
            .iter()
            .flat_map(|labels| labels.iter().flat_map(|l| (0..self.modes).map(move |m| (l.clone(), m))))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.iter().map(|b| SymmetricEigen::new(b.clone()).eigenvalues.min()).fold(f64::INFINITY, f64::min)
    }

    /// Largest |A − A†| entry.
    pub fn hermiticity_residual(&self) -> f64 {
        self.blocks.iter().map(|b| (b - b.transpose()).amax()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max)
    }

    /// POVM vectors landing in sector t, as (row indices, amplitudes) per
    /// vector. Vectors come from the labels of sector t−1.
    fn povm_vectors(&self, t: usize) -> Vec<Vec<(usize, f64)>> {
        let index = sector_index(&self.sectors[t]);
        let norm = (t - 1 + self.modes) as f64;
        self.sectors[t - 1]
            .iter()
            .map(|label| {
                (0..self.modes)
                    .map(|m| {
                        let target = label.shifted(m);
                        let amp = ((label.occupations()[m] + 1) as f64 / norm).sqrt();
                        (index[target.occupations()] * self.modes + m, amp)
                    })
                    .collect()
            })
            .collect()
    }

    /// Tr(Π₁ ρ).
    pub fn detection_probability(&self) -> f64 {
        (1..self.blocks.len())
            .map(|t| {
                let block = &self.blocks[t];
                self.povm_vectors(t)
                    .iter()
                    .map(|psi| {
                        psi.iter().flat_map(|&(i, a)| psi.iter().map(move |&(j, b)| a * b * block[(i, j)])).sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// Tr(Π₁ U ρ U†) with U = exp(i Σ_ℓ φ_ℓ N_ℓ) on the returned modes.
    pub fn detection_with_phases(&self, phases: &[f64]) -> Result<Complex64> {
        if phases.len() != self.modes {
            return Err(Error::invalid(format!("need {} phases, got {}", self.modes, phases.len())));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for t in 1..self.blocks.len() {
            let rotor: Vec<Complex64> = self.sectors[t]
                .iter()
                .flat_map(|label| {
                    let theta: f64 = label.occupations().iter().zip(phases).map(|(&n, &p)| n as f64 * p).sum();
                    std::iter::repeat_n(Complex64::from_polar(1.0, theta), self.modes)
                })
                .collect();
            let block = &self.blocks[t];
            for psi in self.povm_vectors(t) {
                for &(i, a) in &psi {
                    for &(j, b) in &psi {
                        total += rotor[i] * rotor[j].conj() * (a * b * block[(i, j)]);
                    }
                }
            }
        }
        Ok(total)
    }

    /// max |Π₁² − Π₁| and max |⟨ψ_N|ψ_N′⟩ − δ| over the complete sectors.
    pub fn povm_residuals(&self) -> (f64, f64) {
        let (mut proj, mut gram) = (0.0f64, 0.0f64);
        for t in 1..self.blocks.len() {
            let size = self.blocks[t].nrows();
            let vectors = self.povm_vectors(t);
            let mut mat = DMatrix::<f64>::zeros(size, vectors.len());
            for (c, psi) in vectors.iter().enumerate() {
                for &(i, a) in psi {
                    mat[(i, c)] = a;
                }
            }
            let g = mat.transpose() * &mat;
            gram = gram.max((g - DMatrix::identity(vectors.len(), vectors.len())).amax());
            let p = &mat * mat.transpose();
            proj = proj.max((&p * &p - &p).amax());
        }
        (proj, gram)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleDiagnostics {
    pub trace_rho1: f64,
    pub min_eigenvalue: f64,
    pub projector_residual: f64,
    pub phase_invariance_residual: f64,
    /// Larger of the two states' truncated tail masses.
    pub tail_mass: f64,
}

const PHASE_SEED: u64 = 0x9e37_79b9;

/// p_F and p_D by explicit construction in a truncated Fock space.
///
/// The phase check rotates every returned mode by a common random phase,
/// eight times. Independent per-mode phases are not a symmetry of the
/// detection probability; see [`TruncatedOperator::detection_with_phases`].
pub fn brute_force(params: &ScenarioParams, cutoff: u32) -> Result<(ShotProbs, OracleDiagnostics)> {
    let model = FockModel::from_params(params)?;
    if model.modes() > MAX_MODES {
        return Err(Error::invalid(format!("brute force supports M ≤ {MAX_MODES}, got {}", model.modes())));
    }
    if !(1..=MAX_CUTOFF).contains(&cutoff) {
        return Err(Error::invalid(format!("cutoff must lie in 1..={MAX_CUTOFF}, got {cutoff}")));
    }
    let rho0 = TruncatedOperator::rho0(&model, cutoff)?;
    let rho1 = TruncatedOperator::rho1(&model, cutoff)?;
    let p_d = rho1.detection_probability();
    let probs = ShotProbs::new(rho0.detection_probability(), p_d)?;

    let mut rng = ChaCha8Rng::seed_from_u64(PHASE_SEED);
    let mut phase_residual = 0.0f64;
    for _ in 0..8 {
        let phi = rng.random::<f64>() * std::f64::consts::TAU;
        let shifted = rho1.detection_with_phases(&vec![phi; model.modes()])?;
        phase_residual = phase_residual.max((shifted - p_d).norm());
    }

    let diagnostics = OracleDiagnostics {
        trace_rho1: rho1.trace(),
        min_eigenvalue: rho1.min_eigenvalue(),
        projector_residual: rho1.povm_residuals().0,
        phase_invariance_residual: phase_residual,
        tail_mass: rho0.tail_mass().max(rho1.tail_mass()),
    };
    Ok((probs, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(occ: &[u32]) -> FockLabel {
        FockLabel::new(occ.to_vec(), 10).unwrap()
    }

    #[test]
    fn label_enumeration_counts() {
        assert_eq!(labels_with_total(3, 4).len(), 15);
        assert_eq!(truncated_dimension(2, 8), 45 * 2);
        assert_eq!(truncated_dimension(4, 10), 1001 * 4);
        let total: usize = (0..=8).map(|t| labels_with_total(2, t).len()).sum();
        assert_eq!(total * 2, truncated_dimension(2, 8));
    }

    #[test]
    fn label_cutoff() {
        assert!(FockLabel::new(vec![3, 4], 6).is_err());
    }

    #[test]
    fn off_diagonal_hand_value() {
        let p = ScenarioParams::new(0.1, 0.2, 2.0).unwrap();
        let v = rho1_element(0, 1, &label(&[1, 0]), &label(&[0, 1]), &p);
        assert!((v - 0.05 / 1.2f64.powi(4)).abs() < 1e-15);
        assert_eq!(rho1_element(0, 1, &label(&[1, 0]), &label(&[1, 1]), &p), 0.0);
        assert_eq!(rho1_element(0, 1, &label(&[0, 1]), &label(&[0, 2]), &p), 0.0);
    }

    #[test]
    fn zero_kappa_matches_noise_state() {
        let model = FockModel::new(0.0, 0.7, 3).unwrap();
        let a = TruncatedOperator::rho0(&model, 5).unwrap();
        let b = TruncatedOperator::rho1(&model, 5).unwrap();
        assert_eq!(a.max_abs_diff(&b), 0.0);
    }

    #[test]
    fn vacuum_noise_brute_force() {
        let p = ScenarioParams::new(0.1, 0.0, 2.0).unwrap();
        let (probs, diag) = brute_force(&p, 4).unwrap();
        assert_eq!(probs.p_f(), 0.0);
        assert!((probs.p_d() - 0.1).abs() < 1e-15);
        assert_eq!(diag.tail_mass, 0.0);
        assert!((diag.trace_rho1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        let p = ScenarioParams::new(0.1, 0.2, 5.0).unwrap();
        assert!(brute_force(&p, 4).is_err());
        let p = ScenarioParams::new(0.1, 0.2, 2.0).unwrap();
        assert!(brute_force(&p, 11).is_err());
        let model = FockModel::new(0.1, 0.2, 8).unwrap();
        assert!(matches!(TruncatedOperator::rho1(&model, 10), Err(Error::Dimension { .. })));
    }
}
