//! The inner sifting loop: repeatedly subtract the envelope mean from a
//! signal until one of four stopping criteria declares the detail an IMF.
//!
//! The variants:
//! - `FixedWithImfCheck`: at least `n` passes, then stop once the IMF
//!   definition holds (optionally for `hold` consecutive passes).
//! - `FixedExact`: exactly `n` passes, no condition checked.
//! - `StandardDeviation`: stop when the normalized deviation between two
//!   consecutive details falls below a threshold.
//! - `DualThreshold`: stop when |m(t)/a(t)| is below theta1 on a (1-alpha)
//!   fraction of samples and below theta2 everywhere.

use crate::error::{Error, Result};
use crate::signal::{count_zero_crossings, find_extrema, local_mean, EnvelopePair};
use serde::{Deserialize, Serialize};

/// Relative tolerance on the envelope mean for the IMF definition's
/// "mean is zero" condition.
pub const IMF_MEAN_TOLERANCE: f64 = 0.05;

/// Denominator guard for the SD statistic.
pub const SD_GUARD: f64 = 1e-12;

/// Terms where |d_prev(t)| is below this fraction of max|d_prev|
/// contribute zero to the SD sum.
pub const SD_SMALL_REL: f64 = 1e-8;

/// Samples whose envelope amplitude is below this fraction of the peak
/// are excluded from the dual-threshold tests.
pub const AMPLITUDE_GUARD_REL: f64 = 1e-12;

/// The stopping rule proper; `StopCriterion` pairs it with a global
/// iteration cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Sift at least `n` times, then stop once the IMF definition has
    /// held for `hold` consecutive passes (`hold = 1`: stop at the first
    /// pass >= n where it holds).
    FixedWithImfCheck { n: u32, hold: u32 },
    /// Sift exactly `n` times, ignoring all conditions.
    FixedExact { n: u32 },
    /// Stop when the SD statistic between consecutive details drops
    /// below the threshold. Typical values 0.2..0.3.
    StandardDeviation { sd_threshold: f64 },
    /// Rilling's two-threshold criterion on sigma(t) = |m(t)/a(t)|.
    DualThreshold {
        theta1: f64,
        theta2: f64,
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopCriterion {
    pub rule: StopRule,
    pub max_iter: u32,
}

/// Default iteration cap for free-running sifting.
pub const DEFAULT_MAX_ITER: u32 = 5000;

impl StopCriterion {
    pub fn fixed_with_imf_check(n: u32) -> Result<Self> {
        Self::new(StopRule::FixedWithImfCheck { n, hold: 1 }, DEFAULT_MAX_ITER)
    }

    pub fn fixed_exact(n: u32) -> Result<Self> {
        Self::new(StopRule::FixedExact { n }, DEFAULT_MAX_ITER.max(n))
    }

    pub fn standard_deviation(sd_threshold: f64) -> Result<Self> {
        Self::new(
            StopRule::StandardDeviation { sd_threshold },
            DEFAULT_MAX_ITER,
        )
    }

    pub fn dual_threshold(theta1: f64, theta2: f64, alpha: f64) -> Result<Self> {
        Self::new(
            StopRule::DualThreshold {
                theta1,
                theta2,
                alpha,
            },
            DEFAULT_MAX_ITER,
        )
    }

    /// theta1 = 0.05, theta2 = 0.5, alpha = 0.05, max_iter = 5000.
    pub fn dual_threshold_defaults() -> Self {
        Self::dual_threshold(0.05, 0.5, 0.05).unwrap()
    }

    pub fn new(rule: StopRule, max_iter: u32) -> Result<Self> {
        let c = Self { rule, max_iter };
        c.validate()?;
        Ok(c)
    }

    pub fn with_max_iter(mut self, max_iter: u32) -> Result<Self> {
        self.max_iter = max_iter;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        match self.rule {
            StopRule::FixedWithImfCheck { n, hold } => {
                if n < 1 || hold < 1 {
                    return Err(Error::InvalidConfig("n and hold must be >= 1".into()));
                }
            }
            StopRule::FixedExact { n } => {
                if n < 1 {
                    return Err(Error::InvalidConfig("n must be >= 1".into()));
                }
                if n > self.max_iter {
                    return Err(Error::InvalidConfig(format!(
                        "fixed iteration count {n} exceeds max_iter {}",
                        self.max_iter
                    )));
                }
            }
            StopRule::StandardDeviation { sd_threshold } => {
                if sd_threshold.is_nan() || sd_threshold <= 0.0 {
                    return Err(Error::InvalidConfig("sd_threshold must be > 0".into()));
                }
            }
            StopRule::DualThreshold {
                theta1,
                theta2,
                alpha,
            } => {
                if !(theta1 > 0.0 && theta2 > theta1) {
                    return Err(Error::InvalidConfig("need theta2 > theta1 > 0".into()));
                }
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::InvalidConfig("alpha must be in (0, 1)".into()));
                }
            }
        }
        Ok(())
    }

    /// Short label used in sweep reports, e.g. `dual(0.05;0.5;0.05)`.
    /// Deliberately comma-free so labels stay a single CSV field.
    pub fn label(&self) -> String {
        match self.rule {
            StopRule::FixedWithImfCheck { n, hold: 1 } => format!("fixed_check(n={n})"),
            StopRule::FixedWithImfCheck { n, hold } => {
                format!("fixed_check(n={n};hold={hold})")
            }
            StopRule::FixedExact { n } => format!("fixed(n={n})"),
            StopRule::StandardDeviation { sd_threshold } => format!("sd({sd_threshold})"),
            StopRule::DualThreshold {
                theta1,
                theta2,
                alpha,
            } => {
                format!("dual({theta1};{theta2};{alpha})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    CriterionSatisfied,
    MaxIterReached,
    ImfCheckSatisfied,
}

#[derive(Debug, Clone)]
pub struct SiftResult {
    pub imf: Vec<f64>,
    pub iterations: u32,
    pub stop_reason: StopReason,
}

/// One sifting pass: subtract the envelope mean from `h`.
///
/// Returns the detail and the envelope pair it was computed from, so the
/// caller can evaluate stopping criteria without refitting splines.
pub fn sift_once(h: &[f64]) -> Result<(Vec<f64>, EnvelopePair)> {
    let env = local_mean(h)?;
    let detail = h.iter().zip(&env.mean).map(|(x, m)| x - m).collect();
    Ok((detail, env))
}

/// Checks both halves of the IMF definition: zero-crossing and extrema
/// counts differ by at most one, and the envelope mean stays within
/// `mean_tolerance` of zero relative to the detail's peak amplitude.
///
/// Returns false when envelopes cannot be built.
pub fn imf_condition_holds(d: &[f64], mean_tolerance: f64) -> bool {
    match local_mean(d) {
        Ok(env) => imf_condition_with_env(d, &env, mean_tolerance),
        Err(_) => false,
    }
}

/// Condition (1) of the IMF definition on its own: zero-crossing and
/// extrema counts differ by at most one.
fn counts_differ_by_at_most_one(d: &[f64]) -> bool {
    let extrema = find_extrema(d).count();
    let crossings = count_zero_crossings(d);
    extrema.abs_diff(crossings) <= 1
}

fn imf_condition_with_env(d: &[f64], env: &EnvelopePair, mean_tolerance: f64) -> bool {
    if !counts_differ_by_at_most_one(d) {
        return false;
    }
    let peak = d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let max_mean = env.mean.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    max_mean <= mean_tolerance * peak
}

/// The SD statistic between two consecutive details:
/// SD = sum_t (d_prev - d_cur)^2 / (d_prev^2 + SD_GUARD), where terms with
/// |d_prev(t)| below SD_SMALL_REL * max|d_prev| contribute zero.
pub fn sd_value(d_prev: &[f64], d_cur: &[f64]) -> Result<f64> {
    if d_prev.len() != d_cur.len() {
        return Err(Error::LengthMismatch {
            left: d_prev.len(),
            right: d_cur.len(),
        });
    }
    let peak = d_prev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let floor = SD_SMALL_REL * peak;
    let mut sd = 0.0;
    for (p, c) in d_prev.iter().zip(d_cur) {
        if p.abs() < floor {
            continue;
        }
        let diff = p - c;
        sd += diff * diff / (p * p + SD_GUARD);
    }
    Ok(sd)
}

/// Rilling's dual-threshold test on sigma(t) = |m(t)/a(t)|: true iff
/// sigma < theta1 on at least a (1-alpha) fraction of samples and
/// sigma < theta2 at every sample. Samples with near-zero amplitude are
/// excluded from both tests.
pub fn dual_threshold_satisfied(env: &EnvelopePair, theta1: f64, theta2: f64, alpha: f64) -> bool {
    let scale = env
        .upper
        .iter()
        .chain(&env.lower)
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let guard = AMPLITUDE_GUARD_REL * scale;
    let mut evaluated = 0usize;
    let mut below_theta1 = 0usize;
    for (m, a) in env.mean.iter().zip(&env.amplitude) {
        if a.abs() < guard {
            continue;
        }
        let sigma = (m / a).abs();
        if sigma >= theta2 {
            return false;
        }
        evaluated += 1;
        if sigma < theta1 {
            below_theta1 += 1;
        }
    }
    if evaluated == 0 {
        return true;
    }
    below_theta1 as f64 >= (1.0 - alpha) * evaluated as f64
}

/// Extracts one IMF from `h0` by repeated sifting under the criterion.
///
/// Criteria are evaluated on each pass's output detail (so a satisfied
/// criterion still holds when re-evaluated on the returned IMF). Fails
/// with `TooFewExtrema` only when the initial input cannot be sifted;
/// losing the extrema mid-loop ends sifting with the current detail.
pub fn extract_imf(h0: &[f64], criterion: &StopCriterion) -> Result<SiftResult> {
    let (mut detail, _env0) = sift_once(h0)?;
    let mut prev: Vec<f64> = h0.to_vec();
    let mut iterations: u32 = 1;
    let mut consecutive_holds: u32 = 0;

    loop {
        let env_detail = local_mean(&detail);
        let reason = match criterion.rule {
            StopRule::FixedExact { n } => {
                (iterations >= n).then_some(StopReason::CriterionSatisfied)
            }
            StopRule::FixedWithImfCheck { n, hold } => {
                let holds = match &env_detail {
                    Ok(env) => imf_condition_with_env(&detail, env, IMF_MEAN_TOLERANCE),
                    Err(_) => false,
                };
                consecutive_holds = if holds { consecutive_holds + 1 } else { 0 };
                (iterations >= n && consecutive_holds >= hold)
                    .then_some(StopReason::ImfCheckSatisfied)
            }
            // SD and dual-threshold additionally require condition (1) of
            // the IMF definition, so free-running criteria never emit a
            // detail with riding waves left in it.
            StopRule::StandardDeviation { sd_threshold } => {
                (sd_value(&prev, &detail)? < sd_threshold && counts_differ_by_at_most_one(&detail))
                    .then_some(StopReason::CriterionSatisfied)
            }
            StopRule::DualThreshold {
                theta1,
                theta2,
                alpha,
            } => match &env_detail {
                Ok(env) => (dual_threshold_satisfied(env, theta1, theta2, alpha)
                    && counts_differ_by_at_most_one(&detail))
                .then_some(StopReason::CriterionSatisfied),
                Err(_) => None,
            },
        };
        if let Some(stop_reason) = reason {
            return Ok(SiftResult {
                imf: detail,
                iterations,
                stop_reason,
            });
        }
        if iterations >= criterion.max_iter {
            return Ok(SiftResult {
                imf: detail,
                iterations,
                stop_reason: StopReason::MaxIterReached,
            });
        }
        match env_detail {
            Ok(env) => {
                let next = detail.iter().zip(&env.mean).map(|(x, m)| x - m).collect();
                prev = detail;
                detail = next;
                iterations += 1;
            }
            // detail can no longer be sifted; it is as close to an IMF
            // as this input gets
            Err(_) => {
                return Ok(SiftResult {
                    imf: detail,
                    iterations,
                    stop_reason: StopReason::CriterionSatisfied,
                })
            }
        }
    }
}
