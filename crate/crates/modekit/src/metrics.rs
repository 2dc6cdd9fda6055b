//! Evaluation quantities: reconstruction error (ECM), orthogonality,
//! mode-period and mode-mixing diagnostics, iteration accounting.

use crate::decompose::Decomposition;
use crate::error::{Error, Result};
use crate::signal::find_extrema;
use serde::Serialize;

/// Mean square error between the original samples and the decomposition's
/// reconstruction (sum of modes plus residue).
pub fn ecm(decomp: &Decomposition, original: &[f64]) -> Result<f64> {
    let rec = decomp.reconstruction();
    if rec.len() != original.len() {
        return Err(Error::LengthMismatch {
            left: original.len(),
            right: rec.len(),
        });
    }
    let sum: f64 = original
        .iter()
        .zip(&rec)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(sum / original.len() as f64)
}

/// ECM normalized by the original signal's mean square; 0 for an exact
/// reconstruction regardless of amplitude.
pub fn ecm_relative(decomp: &Decomposition, original: &[f64]) -> Result<f64> {
    let abs = ecm(decomp, original)?;
    let power = original.iter().map(|x| x * x).sum::<f64>() / original.len() as f64;
    if power == 0.0 {
        return Ok(abs);
    }
    Ok(abs / power)
}

/// Orthogonality index: sum of cross-products between distinct
/// components (modes plus residue), normalized by the reconstruction's
/// energy. Near zero for near-orthogonal decompositions.
pub fn orthogonality_index(decomp: &Decomposition) -> Result<f64> {
    if decomp.imfs.is_empty() {
        return Err(Error::EmptyDecomposition);
    }
    let n = decomp.residue.len();
    let mut sum_rec_sq = 0.0;
    let mut sum_self_sq = 0.0;
    for t in 0..n {
        let mut total = decomp.residue[t];
        let mut self_sq = decomp.residue[t] * decomp.residue[t];
        for imf in &decomp.imfs {
            total += imf[t];
            self_sq += imf[t] * imf[t];
        }
        sum_rec_sq += total * total;
        sum_self_sq += self_sq;
    }
    if sum_rec_sq == 0.0 {
        return Ok(0.0);
    }
    // sum_{j != k} c_j c_k = (sum c)^2 - sum c^2
    Ok((sum_rec_sq - sum_self_sq) / sum_rec_sq)
}

/// Mean oscillation period of a mode in seconds, estimated from its
/// extrema count: 2 * length / #extrema samples.
pub fn mean_period(mode: &[f64], sample_rate: f64) -> Result<f64> {
    let extrema = find_extrema(mode).count();
    if extrema < 2 {
        return Err(Error::TooFewExtrema);
    }
    Ok(2.0 * mode.len() as f64 / extrema as f64 / sample_rate)
}

/// Pearson correlation between a mode and a reference over the centered
/// `interior_fraction` of samples, excluding spline end effects.
pub fn mode_correlation(mode: &[f64], reference: &[f64], interior_fraction: f64) -> Result<f64> {
    if mode.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: mode.len(),
            right: reference.len(),
        });
    }
    if !(interior_fraction > 0.0 && interior_fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "interior_fraction must be in (0, 1], got {interior_fraction}"
        )));
    }
    let n = mode.len();
    let window = ((n as f64 * interior_fraction).round() as usize).clamp(2, n);
    let lo = (n - window) / 2;
    let a = &mode[lo..lo + window];
    let b = &reference[lo..lo + window];
    let m = window as f64;
    let ma = a.iter().sum::<f64>() / m;
    let mb = b.iter().sum::<f64>() / m;
    let mut num = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(num / (va * vb).sqrt())
}

/// Per-mode report entry.
#[derive(Debug, Clone, Serialize)]
pub struct ModeReport {
    pub iterations: u64,
    /// None when the mode has too few extrema for a period estimate.
    pub mean_period_seconds: Option<f64>,
    pub energy: f64,
}

/// Summary of one decomposition, mirroring the columns of the method
/// comparison tables: mode count, time, iterations, reconstruction error.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub imf_count: usize,
    pub total_iterations: u64,
    pub elapsed_seconds: f64,
    pub ecm: f64,
    pub ecm_relative: f64,
    /// None when the decomposition has no modes.
    pub orthogonality_index: Option<f64>,
    pub per_mode: Vec<ModeReport>,
}

/// Builds the summary report for a decomposition of `original` sampled at
/// `sample_rate`.
pub fn report(
    decomp: &Decomposition,
    original: &[f64],
    sample_rate: f64,
) -> Result<DecompositionReport> {
    let per_mode = decomp
        .imfs
        .iter()
        .zip(&decomp.modes)
        .map(|(imf, diag)| ModeReport {
            iterations: diag.iterations,
            mean_period_seconds: mean_period(imf, sample_rate).ok(),
            energy: imf.iter().map(|v| v * v).sum(),
        })
        .collect();
    Ok(DecompositionReport {
        imf_count: decomp.imf_count(),
        total_iterations: decomp.total_iterations,
        elapsed_seconds: decomp.elapsed_seconds,
        ecm: ecm(decomp, original)?,
        ecm_relative: ecm_relative(decomp, original)?,
        orthogonality_index: orthogonality_index(decomp).ok(),
        per_mode,
    })
}
