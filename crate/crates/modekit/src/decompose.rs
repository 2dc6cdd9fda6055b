//! The three full decomposition drivers.
//!
//! `emd` repeatedly extracts IMFs from the running residue until it holds
//! at most one extremum. `eemd` averages independent EMDs of
//! noise-perturbed copies. `ceemdan` extracts one ensemble-averaged mode
//! at a time from noise-perturbed residues, which keeps reconstruction
//! exact by construction.
//!
//! Ensemble realizations run in parallel; the averages are reduced in
//! ascending realization order so results are independent of the thread
//! count.

use crate::error::{Error, Result};
use crate::noise::NoisePlan;
use crate::sifting::{extract_imf, SiftResult, StopCriterion, StopReason};
use crate::signal::{find_extrema, std_dev, Signal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Default cap on the number of extracted modes.
pub const DEFAULT_MAX_MODES: usize = 16;

/// Amplitude quantum, relative to the residue's peak, below which
/// oscillations are treated as rounding noise when testing termination.
pub const RESIDUE_QUANTUM_REL: f64 = 1e-12;

/// Interior extrema count of a residue with rounding noise suppressed:
/// amplitudes are quantized to `RESIDUE_QUANTUM_REL` times the peak
/// before counting, so ulp-level jitter left by repeated subtraction
/// reads as a plateau instead of thousands of fake extrema.
pub fn trend_extrema_count(x: &[f64]) -> usize {
    let peak = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if peak == 0.0 {
        return 0;
    }
    let q = RESIDUE_QUANTUM_REL * peak;
    let quantized: Vec<f64> = x.iter().map(|v| (v / q).round() * q).collect();
    find_extrema(&quantized).count()
}

/// Minimum signal length accepted by the decomposition entry points.
pub const MIN_SIGNAL_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Emd,
    Eemd,
    Ceemdan,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Emd => write!(f, "emd"),
            Method::Eemd => write!(f, "eemd"),
            Method::Ceemdan => write!(f, "ceemdan"),
        }
    }
}

/// Per-mode sifting diagnostics. For ensemble methods `iterations` sums
/// over all realizations that produced the mode and no single stop reason
/// applies.
#[derive(Debug, Clone, Serialize)]
pub struct ModeDiagnostics {
    pub iterations: u64,
    pub stop_reason: Option<StopReason>,
}

/// Parameters of an ensemble decomposition.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub noise: NoisePlan,
    pub criterion: StopCriterion,
    pub max_modes: Option<usize>,
}

/// Configuration echo carried by every decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigSnapshot {
    pub criterion: StopCriterion,
    pub nstd: Option<f64>,
    pub nr: Option<u32>,
    pub master_seed: Option<u64>,
    pub max_modes: usize,
}

/// An ordered set of IMFs (highest frequency first) plus the final
/// residue, with sifting diagnostics.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub method: Method,
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
    pub modes: Vec<ModeDiagnostics>,
    pub total_iterations: u64,
    pub elapsed_seconds: f64,
    pub config: ConfigSnapshot,
}

impl Decomposition {
    /// Sum of all IMFs plus the residue.
    pub fn reconstruction(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }

    pub fn imf_count(&self) -> usize {
        self.imfs.len()
    }
}

struct CoreDecomposition {
    imfs: Vec<Vec<f64>>,
    residue: Vec<f64>,
    modes: Vec<ModeDiagnostics>,
    total_iterations: u64,
}

/// EMD on a raw sample sequence; shared by the public driver, the
/// ensemble realizations, and the noise-mode cache.
fn emd_core(
    samples: &[f64],
    criterion: &StopCriterion,
    max_modes: usize,
) -> Result<CoreDecomposition> {
    let mut residue = samples.to_vec();
    let mut imfs: Vec<Vec<f64>> = Vec::new();
    let mut modes: Vec<ModeDiagnostics> = Vec::new();
    let mut total_iterations: u64 = 0;
    while imfs.len() < max_modes {
        if trend_extrema_count(&residue) <= 1 {
            break;
        }
        match extract_imf(&residue, criterion) {
            Ok(SiftResult {
                imf,
                iterations,
                stop_reason,
            }) => {
                for (r, v) in residue.iter_mut().zip(&imf) {
                    *r -= v;
                }
                total_iterations += iterations as u64;
                modes.push(ModeDiagnostics {
                    iterations: iterations as u64,
                    stop_reason: Some(stop_reason),
                });
                imfs.push(imf);
            }
            Err(Error::TooFewExtrema) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(CoreDecomposition {
        imfs,
        residue,
        modes,
        total_iterations,
    })
}

fn check_len(signal: &Signal) -> Result<()> {
    if signal.len() < MIN_SIGNAL_LEN {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            min: MIN_SIGNAL_LEN,
        });
    }
    Ok(())
}

/// Noise amplitude reference: the signal's standard deviation, falling
/// back to 1 for constant inputs so ensemble noise does not vanish.
fn noise_reference_std(x: &[f64]) -> f64 {
    let s = std_dev(x);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Standard EMD: extract IMFs until the residue contains no more than
/// one extremum (or the mode cap is hit).
pub fn emd(
    signal: &Signal,
    criterion: &StopCriterion,
    max_modes: Option<usize>,
) -> Result<Decomposition> {
    check_len(signal)?;
    let cap = max_modes.unwrap_or(DEFAULT_MAX_MODES);
    let start = Instant::now();
    let core = emd_core(signal.samples(), criterion, cap)?;
    Ok(Decomposition {
        method: Method::Emd,
        imfs: core.imfs,
        residue: core.residue,
        modes: core.modes,
        total_iterations: core.total_iterations,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        config: ConfigSnapshot {
            criterion: criterion.clone(),
            nstd: None,
            nr: None,
            master_seed: None,
            max_modes: cap,
        },
    })
}

/// Ensemble EMD: mode k is the average over realizations of the k-th EMD
/// mode of the noise-perturbed signal. Realizations with fewer modes
/// contribute zeros to the higher modes; the residue is the average of
/// per-realization residues, so reconstruction error is expected.
pub fn eemd(signal: &Signal, config: &EnsembleConfig) -> Result<Decomposition> {
    check_len(signal)?;
    let cap = config.max_modes.unwrap_or(DEFAULT_MAX_MODES);
    let n = signal.len();
    let nr = config.noise.nr();
    let target_std = noise_reference_std(signal.samples());
    let start = Instant::now();

    let runs: Vec<CoreDecomposition> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let noise = config.noise.realization(i, n, target_std)?;
            let perturbed: Vec<f64> = signal
                .samples()
                .iter()
                .zip(&noise)
                .map(|(x, w)| x + w)
                .collect();
            emd_core(&perturbed, &config.criterion, cap)
        })
        .collect::<Result<Vec<_>>>()?;

    let k_max = runs.iter().map(|r| r.imfs.len()).max().unwrap_or(0);
    let mut imfs = vec![vec![0.0; n]; k_max];
    let mut residue = vec![0.0; n];
    let mut per_mode_iterations = vec![0u64; k_max];
    let mut total_iterations = 0u64;
    for run in &runs {
        for (k, imf) in run.imfs.iter().enumerate() {
            for (acc, v) in imfs[k].iter_mut().zip(imf) {
                *acc += v;
            }
            per_mode_iterations[k] += run.modes[k].iterations;
        }
        for (acc, v) in residue.iter_mut().zip(&run.residue) {
            *acc += v;
        }
        total_iterations += run.total_iterations;
    }
    let inv = 1.0 / nr as f64;
    for imf in &mut imfs {
        for v in imf.iter_mut() {
            *v *= inv;
        }
    }
    for v in &mut residue {
        *v *= inv;
    }

    Ok(Decomposition {
        method: Method::Eemd,
        imfs,
        residue,
        modes: per_mode_iterations
            .into_iter()
            .map(|iterations| ModeDiagnostics {
                iterations,
                stop_reason: None,
            })
            .collect(),
        total_iterations,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        config: ConfigSnapshot {
            criterion: config.criterion.clone(),
            nstd: Some(config.noise.nstd()),
            nr: Some(nr),
            master_seed: Some(config.noise.master_seed()),
            max_modes: cap,
        },
    })
}

/// First EMD mode of a sample sequence: a single `extract_imf` run.
pub fn emd_first_mode(samples: &[f64], criterion: &StopCriterion) -> Result<SiftResult> {
    extract_imf(samples, criterion)
}

/// CEEMDAN: mode k+1 is the ensemble mean of the first EMD mode of
/// r_k + eps_k * E_k(w_i), where E_k(w) is the k-th EMD mode of the pure
/// noise realization w and eps_k scales with the current residue's
/// standard deviation. Residues are defined by subtraction, so the
/// decomposition reconstructs the input exactly.
pub fn ceemdan(signal: &Signal, config: &EnsembleConfig) -> Result<Decomposition> {
    check_len(signal)?;
    let cap = config.max_modes.unwrap_or(DEFAULT_MAX_MODES);
    let n = signal.len();
    let nr = config.noise.nr();
    let nstd = config.noise.nstd();
    let start = Instant::now();

    let mut total_iterations = 0u64;

    // unit-variance noise and its EMD modes, cached per realization;
    // skipped entirely when the ensemble is noiseless
    let (units, noise_modes): (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) = if nstd > 0.0 {
        let pairs: Vec<(Vec<f64>, CoreDecomposition)> = (0..nr)
            .into_par_iter()
            .map(|i| {
                let w = config.noise.unit_realization(i, n)?;
                let core = emd_core(&w, &config.criterion, cap)?;
                Ok((w, core))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut units = Vec::with_capacity(nr as usize);
        let mut modes = Vec::with_capacity(nr as usize);
        for (w, core) in pairs {
            total_iterations += core.total_iterations;
            units.push(w);
            modes.push(core.imfs);
        }
        (units, modes)
    } else {
        (vec![Vec::new(); nr as usize], vec![Vec::new(); nr as usize])
    };

    let mut imfs: Vec<Vec<f64>> = Vec::new();
    let mut mode_diags: Vec<ModeDiagnostics> = Vec::new();
    let mut residue: Vec<f64> = signal.samples().to_vec();

    while imfs.len() < cap {
        if trend_extrema_count(&residue) <= 1 {
            break;
        }
        let k = imfs.len(); // extracting mode k+1
        let eps = nstd * noise_reference_std(&residue);

        let contributions: Vec<Option<SiftResult>> = (0..nr as usize)
            .into_par_iter()
            .map(|i| {
                let input: Vec<f64> = if nstd == 0.0 {
                    residue.clone()
                } else if k == 0 {
                    // mode 1 uses the raw noise realization
                    residue
                        .iter()
                        .zip(&units[i])
                        .map(|(r, w)| r + eps * w)
                        .collect()
                } else {
                    match noise_modes[i].get(k - 1) {
                        Some(wm) => residue.iter().zip(wm).map(|(r, w)| r + eps * w).collect(),
                        // noise exhausted before mode k: plain residue
                        None => residue.clone(),
                    }
                };
                emd_first_mode(&input, &config.criterion).ok()
            })
            .collect();

        if contributions.iter().all(Option::is_none) {
            break;
        }
        let mut mode = vec![0.0; n];
        let mut iterations = 0u64;
        for c in contributions.iter().flatten() {
            for (acc, v) in mode.iter_mut().zip(&c.imf) {
                *acc += v;
            }
            iterations += c.iterations as u64;
        }
        // failed realizations contribute zero but the mean stays over NR
        let inv = 1.0 / nr as f64;
        for v in &mut mode {
            *v *= inv;
        }
        for (r, v) in residue.iter_mut().zip(&mode) {
            *r -= v;
        }
        total_iterations += iterations;
        mode_diags.push(ModeDiagnostics {
            iterations,
            stop_reason: None,
        });
        imfs.push(mode);
    }

    Ok(Decomposition {
        method: Method::Ceemdan,
        imfs,
        residue,
        modes: mode_diags,
        total_iterations,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        config: ConfigSnapshot {
            criterion: config.criterion.clone(),
            nstd: Some(nstd),
            nr: Some(nr),
            master_seed: Some(config.noise.master_seed()),
            max_modes: cap,
        },
    })
}
