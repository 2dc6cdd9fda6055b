//! Synthetic signal generators, CSV signal ingestion, and the
//! parameter-sweep harness.
//!
//! The sweep runs a Cartesian grid of (criterion, nstd, nr, max_iter)
//! over a set of signals, emitting one row per run plus per-grid-point
//! corpus means. Every grid point derives its own noise seed from the
//! master seed, so adding grid points never perturbs existing rows.

use crate::decompose::{ceemdan, eemd, emd, EnsembleConfig, Method};
use crate::error::{Error, Result};
use crate::metrics::{ecm, orthogonality_index};
use crate::noise::NoisePlan;
use crate::sifting::StopCriterion;
use crate::signal::Signal;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// A signal with a stable identifier for report rows.
#[derive(Debug, Clone)]
pub struct NamedSignal {
    pub id: String,
    pub signal: Signal,
}

// ---------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------

fn check_nyquist(frequency: f64, sample_rate: f64) -> Result<()> {
    if frequency >= sample_rate / 2.0 {
        return Err(Error::AliasingViolation {
            frequency,
            sample_rate,
        });
    }
    Ok(())
}

/// Sum of two sinusoids, f1 < f2, sampled at `fs` for `duration` seconds.
pub fn gen_two_tone(
    f1: f64,
    f2: f64,
    fs: f64,
    duration: f64,
    amplitudes: (f64, f64),
) -> Result<Signal> {
    if !(f1 > 0.0 && f1 < f2) {
        return Err(Error::InvalidConfig(format!(
            "need 0 < f1 < f2, got f1={f1}, f2={f2}"
        )));
    }
    if duration.is_nan() || duration <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "duration must be > 0, got {duration}"
        )));
    }
    check_nyquist(f2, fs)?;
    let n = (duration * fs).round() as usize;
    let (a1, a2) = amplitudes;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            a1 * (2.0 * PI * f1 * t).sin() + a2 * (2.0 * PI * f2 * t).sin()
        })
        .collect();
    Signal::new(samples, fs)
}

/// Amplitude- and frequency-modulated tone:
/// (1 + 0.5 sin(2 pi am t)) * sin(2 pi carrier t + fm_depth sin(2 pi am t)).
pub fn gen_amfm(
    carrier: f64,
    am_rate: f64,
    fm_depth: f64,
    fs: f64,
    duration: f64,
) -> Result<Signal> {
    if duration.is_nan() || duration <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "duration must be > 0, got {duration}"
        )));
    }
    // peak instantaneous frequency includes the FM deviation
    check_nyquist(carrier + fm_depth.abs() * am_rate, fs)?;
    let n = (duration * fs).round() as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let am = (2.0 * PI * am_rate * t).sin();
            (1.0 + 0.5 * am) * (2.0 * PI * carrier * t + fm_depth * am).sin()
        })
        .collect();
    Signal::new(samples, fs)
}

/// Seeded unit-variance Gaussian white noise.
pub fn gen_white_noise(fs: f64, duration: f64, seed: u64) -> Result<Signal> {
    if duration.is_nan() || duration <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "duration must be > 0, got {duration}"
        )));
    }
    let n = (duration * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Signal::new(samples, fs)
}

fn add_noise(signal: &Signal, level: f64, seed: u64) -> Signal {
    let noise = gen_white_noise(
        signal.sample_rate(),
        signal.len() as f64 / signal.sample_rate(),
        seed,
    )
    .expect("noise generation");
    let scale = level * signal.std();
    let samples = signal
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(x, w)| x + scale * w)
        .collect();
    Signal::new(samples, signal.sample_rate()).expect("noisy signal")
}

/// The shipped ten-signal synthetic corpus: two-tone, AM/FM, and
/// noise-contaminated variants mixing low- and high-frequency content.
/// 2048 samples each at 400 Hz.
pub fn default_corpus(seed: u64) -> Vec<NamedSignal> {
    let fs = 400.0;
    let dur = 2048.0 / fs;
    let named = |id: &str, s: Signal| NamedSignal {
        id: id.to_string(),
        signal: s,
    };
    vec![
        named(
            "two_tone_5_40",
            gen_two_tone(5.0, 40.0, fs, dur, (1.0, 1.0)).unwrap(),
        ),
        named(
            "two_tone_2_25",
            gen_two_tone(2.0, 25.0, fs, dur, (1.0, 1.0)).unwrap(),
        ),
        named(
            "two_tone_10_80",
            gen_two_tone(10.0, 80.0, fs, dur, (1.0, 0.5)).unwrap(),
        ),
        named(
            "two_tone_8_120",
            gen_two_tone(8.0, 120.0, fs, dur, (0.8, 0.6)).unwrap(),
        ),
        named("amfm_30_2", gen_amfm(30.0, 2.0, 1.0, fs, dur).unwrap()),
        named("amfm_60_3", gen_amfm(60.0, 3.0, 2.0, fs, dur).unwrap()),
        named(
            "two_tone_5_40_noisy",
            add_noise(
                &gen_two_tone(5.0, 40.0, fs, dur, (1.0, 1.0)).unwrap(),
                0.1,
                derive_seed(seed, 6, 0),
            ),
        ),
        named(
            "amfm_30_2_noisy",
            add_noise(
                &gen_amfm(30.0, 2.0, 1.0, fs, dur).unwrap(),
                0.1,
                derive_seed(seed, 7, 0),
            ),
        ),
        named(
            "two_tone_3_15_noisy",
            add_noise(
                &gen_two_tone(3.0, 15.0, fs, dur, (1.0, 1.0)).unwrap(),
                0.05,
                derive_seed(seed, 8, 0),
            ),
        ),
        named(
            "white_noise",
            gen_white_noise(fs, dur, derive_seed(seed, 9, 0)).unwrap(),
        ),
    ]
}

// ---------------------------------------------------------------------
// CSV signal format
// ---------------------------------------------------------------------

/// Loads signals from the CSV format: line 1 `sample_rate=<float>`, then
/// comma-separated rows with one column per signal.
pub fn load_csv(path: &Path) -> Result<Vec<Signal>> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Vec<Signal>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::EmptyFile)?;
    let sample_rate: f64 = header
        .trim()
        .strip_prefix("sample_rate=")
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("expected `sample_rate=<float>` header, got `{header}`"),
        })?
        .parse()
        .map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad sample rate: {e}"),
        })?;

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut rows = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad sample `{}`: {e}", field.trim()),
                })
            })
            .collect::<Result<_>>()?;
        for (col, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite sample in column {col}"),
                });
            }
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); values.len()];
        } else if values.len() != columns.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} columns, got {}", columns.len(), values.len()),
            });
        }
        for (col, v) in values.into_iter().enumerate() {
            columns[col].push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyFile);
    }
    columns
        .into_iter()
        .map(|samples| Signal::new(samples, sample_rate))
        .collect()
}

/// Serializes equal-length columns into the CSV signal format. Floats use
/// the shortest decimal representation that round-trips bit-exactly.
pub fn format_csv(columns: &[&[f64]], sample_rate: f64) -> Result<String> {
    let rows = columns.first().map(|c| c.len()).unwrap_or(0);
    if rows == 0 {
        return Err(Error::InvalidConfig("no samples to write".into()));
    }
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::InvalidConfig(
            "columns have different lengths".into(),
        ));
    }
    let mut out = format!("sample_rate={sample_rate}\n");
    for i in 0..rows {
        let mut first = true;
        for col in columns {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("{}", col[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// sweep harness
// ---------------------------------------------------------------------

/// Deterministic per-run seed derivation, fixed so adding grid points or
/// signals never changes the seed of existing runs.
pub fn derive_seed(master: u64, grid_index: u64, signal_index: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E3779B97F4A7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
    splitmix64(splitmix64(master ^ splitmix64(grid_index)) ^ splitmix64(!signal_index))
}

/// A parameter sweep over one method.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub method: Method,
    pub criteria: Vec<StopCriterion>,
    /// Noise levels; must be absent (empty) or singleton for plain EMD.
    pub nstd_grid: Vec<f64>,
    /// Ensemble sizes; same rule as nstd_grid.
    pub nr_grid: Vec<u32>,
    /// Overrides for each criterion's max_iter; empty means "use the
    /// criterion's own cap".
    pub max_iter_grid: Vec<u32>,
    pub signals: Vec<NamedSignal>,
    pub master_seed: u64,
}

/// One sweep result row. Aggregate rows carry fractional means and a
/// `mean[ok/total]` signal id; failed rows carry the error tag and empty
/// metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub criterion: String,
    pub nstd: Option<f64>,
    pub nr: Option<u32>,
    pub max_iter: u32,
    pub signal_id: String,
    pub imf_count: Option<f64>,
    pub iterations: Option<f64>,
    pub time_s: f64,
    pub ecm: Option<f64>,
    pub io: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
struct GridPoint {
    criterion: StopCriterion,
    nstd: Option<f64>,
    nr: Option<u32>,
}

fn build_grid(spec: &SweepSpec) -> Result<Vec<GridPoint>> {
    for c in &spec.criteria {
        c.validate()?;
    }
    if spec.method == Method::Emd {
        if spec.nstd_grid.len() > 1 || spec.nr_grid.len() > 1 {
            return Err(Error::InvalidConfig(
                "nstd/nr grids are not applicable to emd (must be absent or singleton)".into(),
            ));
        }
    } else if spec.nstd_grid.is_empty() || spec.nr_grid.is_empty() {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    if spec.criteria.is_empty() {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    if spec.signals.is_empty() {
        return Err(Error::InvalidConfig("sweep has no signals".into()));
    }

    let nstd_axis: Vec<Option<f64>> = match spec.method {
        Method::Emd => vec![None],
        _ => spec.nstd_grid.iter().copied().map(Some).collect(),
    };
    let nr_axis: Vec<Option<u32>> = match spec.method {
        Method::Emd => vec![None],
        _ => spec.nr_grid.iter().copied().map(Some).collect(),
    };
    let max_iter_axis: Vec<Option<u32>> = if spec.max_iter_grid.is_empty() {
        vec![None]
    } else {
        spec.max_iter_grid.iter().copied().map(Some).collect()
    };

    let mut grid = Vec::new();
    for criterion in &spec.criteria {
        for &max_iter in &max_iter_axis {
            let criterion = match max_iter {
                Some(m) => criterion.clone().with_max_iter(m)?,
                None => criterion.clone(),
            };
            for &nstd in &nstd_axis {
                for &nr in &nr_axis {
                    grid.push(GridPoint {
                        criterion: criterion.clone(),
                        nstd,
                        nr,
                    });
                }
            }
        }
    }
    Ok(grid)
}

fn run_one(spec: &SweepSpec, point: &GridPoint, grid_idx: usize, signal_idx: usize) -> SweepRow {
    let named = &spec.signals[signal_idx];
    let seed = derive_seed(spec.master_seed, grid_idx as u64, signal_idx as u64);
    let base = SweepRow {
        method: spec.method,
        criterion: point.criterion.label(),
        nstd: point.nstd,
        nr: point.nr,
        max_iter: point.criterion.max_iter,
        signal_id: named.id.clone(),
        imf_count: None,
        iterations: None,
        time_s: 0.0,
        ecm: None,
        io: None,
        error: None,
    };
    let result = match spec.method {
        Method::Emd => emd(&named.signal, &point.criterion, None),
        Method::Eemd | Method::Ceemdan => {
            let noise = match NoisePlan::new(seed, point.nr.unwrap(), point.nstd.unwrap()) {
                Ok(plan) => plan,
                Err(e) => {
                    return SweepRow {
                        error: Some(e.to_string()),
                        ..base
                    };
                }
            };
            let config = EnsembleConfig {
                noise,
                criterion: point.criterion.clone(),
                max_modes: None,
            };
            match spec.method {
                Method::Eemd => eemd(&named.signal, &config),
                _ => ceemdan(&named.signal, &config),
            }
        }
    };
    match result {
        Ok(decomp) => {
            let e = ecm(&decomp, named.signal.samples()).ok();
            let io = orthogonality_index(&decomp).ok();
            SweepRow {
                imf_count: Some(decomp.imf_count() as f64),
                iterations: Some(decomp.total_iterations as f64),
                time_s: decomp.elapsed_seconds,
                ecm: e,
                io,
                ..base
            }
        }
        Err(e) => SweepRow {
            error: Some(e.to_string()),
            ..base
        },
    }
}

fn aggregate(point: &GridPoint, spec: &SweepSpec, rows: &[SweepRow]) -> SweepRow {
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let mean = |f: &dyn Fn(&SweepRow) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    SweepRow {
        method: spec.method,
        criterion: point.criterion.label(),
        nstd: point.nstd,
        nr: point.nr,
        max_iter: point.criterion.max_iter,
        signal_id: format!("mean[{}/{}]", ok.len(), rows.len()),
        imf_count: mean(&|r| r.imf_count),
        iterations: mean(&|r| r.iterations),
        time_s: mean(&|r| Some(r.time_s)).unwrap_or(0.0),
        ecm: mean(&|r| r.ecm),
        io: mean(&|r| r.io),
        error: None,
    }
}

/// Runs the full Cartesian grid. Emits one row per (grid point, signal)
/// in deterministic grid order, followed by the grid point's corpus-mean
/// row. Per-row failures are recorded, never aborting the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let grid = build_grid(spec)?;
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..spec.signals.len()).map(move |s| (g, s)))
        .collect();
    let per_run: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(g, s)| run_one(spec, &grid[g], g, s))
        .collect();

    let mut out = Vec::with_capacity(per_run.len() + grid.len());
    for (g, point) in grid.iter().enumerate() {
        let chunk = &per_run[g * spec.signals.len()..(g + 1) * spec.signals.len()];
        out.extend_from_slice(chunk);
        out.push(aggregate(point, spec, chunk));
    }
    Ok(out)
}

/// Renders sweep rows as CSV with the fixed column order.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "method,criterion,nstd,nr,max_iter,signal_id,imf_count,iterations,time_s,ecm,io,error\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.method,
            r.criterion,
            opt(r.nstd),
            r.nr.map(|x| x.to_string()).unwrap_or_default(),
            r.max_iter,
            r.signal_id,
            opt(r.imf_count),
            opt(r.iterations),
            r.time_s,
            opt(r.ecm),
            opt(r.io),
            r.error.clone().unwrap_or_default(),
        ));
    }
    out
}
