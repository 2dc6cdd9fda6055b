//! Foundation types and the envelope machinery every sifting pass depends on:
//! extrema detection, zero-crossing counting, and natural cubic spline
//! envelopes with mirrored boundary knots.

use crate::error::{Error, Result};

/// A uniformly sampled real-valued time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Signal {
    /// Builds a signal, checking that every sample is finite and the
    /// sample rate is positive.
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::SignalTooShort { len: 0, min: 1 });
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "non-finite sample at index {pos}"
            )));
        }
        if sample_rate <= 0.0 || !sample_rate.is_finite() || sample_rate.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Population standard deviation, used to scale ensemble noise.
    pub fn std(&self) -> f64 {
        std_dev(&self.samples)
    }
}

/// Population standard deviation of a sequence.
pub fn std_dev(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
    var.sqrt()
}

/// Strict local extrema of a signal, as (sample index, value) knots.
///
/// A plateau of equal values counts as one extremum at its midpoint index
/// (rounded down); signal endpoints are never extrema.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtremaSet {
    pub maxima: Vec<(usize, f64)>,
    pub minima: Vec<(usize, f64)>,
}

impl ExtremaSet {
    pub fn count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }
}

/// Finds all strict local maxima and minima of a sample sequence.
pub fn find_extrema(x: &[f64]) -> ExtremaSet {
    let n = x.len();
    let mut out = ExtremaSet::default();
    if n < 3 {
        return out;
    }
    let mut i = 0usize;
    while i < n {
        // run of equal values [i, j]
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[j] {
            j += 1;
        }
        if i > 0 && j + 1 < n {
            let v = x[i];
            let before = x[i - 1];
            let after = x[j + 1];
            let mid = (i + j) / 2;
            if before < v && after < v {
                out.maxima.push((mid, v));
            } else if before > v && after > v {
                out.minima.push((mid, v));
            }
        }
        i = j + 1;
    }
    out
}

/// Counts sign changes between consecutive non-zero samples.
///
/// A run of exact zeros bounded by opposite signs counts as one crossing;
/// bounded by equal signs it counts as none.
pub fn count_zero_crossings(x: &[f64]) -> usize {
    let mut crossings = 0usize;
    let mut last_positive: Option<bool> = None;
    for &v in x {
        if v == 0.0 {
            continue;
        }
        let positive = v > 0.0;
        if let Some(p) = last_positive {
            if p != positive {
                crossings += 1;
            }
        }
        last_positive = Some(positive);
    }
    crossings
}

/// How envelope knots are extended past the signal ends before spline
/// fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPolicy {
    /// Use the knots as given.
    None,
    /// Reflect up to the two nearest knots across each endpoint, anchoring
    /// the spline beyond both ends of the signal.
    Mirror,
}

/// Samples a natural cubic spline through the (possibly boundary-extended)
/// knots at every integer position `0..length`.
pub fn interpolate_envelope(
    knots: &[(usize, f64)],
    length: usize,
    boundary: BoundaryPolicy,
) -> Result<Vec<f64>> {
    let (xs, ys) = extend_knots(knots, length, boundary);
    if xs.len() < 2 {
        return Err(Error::TooFewExtrema);
    }
    let spline = NaturalCubicSpline::fit(&xs, &ys);
    Ok((0..length).map(|i| spline.eval(i as f64)).collect())
}

fn extend_knots(
    knots: &[(usize, f64)],
    length: usize,
    boundary: BoundaryPolicy,
) -> (Vec<f64>, Vec<f64>) {
    let mut xs: Vec<f64> = Vec::with_capacity(knots.len() + 4);
    let mut ys: Vec<f64> = Vec::with_capacity(knots.len() + 4);
    if boundary == BoundaryPolicy::Mirror && !knots.is_empty() {
        // reflect across x = 0; the farther knot lands first
        for &(p, v) in knots.iter().take(2).filter(|(p, _)| *p > 0).rev() {
            xs.push(-(p as f64));
            ys.push(v);
        }
    }
    for &(p, v) in knots {
        xs.push(p as f64);
        ys.push(v);
    }
    if boundary == BoundaryPolicy::Mirror && !knots.is_empty() {
        let end = (length - 1) as f64;
        for &(p, v) in knots
            .iter()
            .rev()
            .take(2)
            .filter(|(p, _)| (*p as f64) < end)
        {
            xs.push(2.0 * end - p as f64);
            ys.push(v);
        }
    }
    (xs, ys)
}

/// Natural cubic spline in the second-derivative (moment) formulation,
/// solved with the Thomas algorithm. Ends outside the knot span use the
/// boundary segment's polynomial.
struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m2: Vec<f64>, // second derivatives at the knots, zero at both ends
}

impl NaturalCubicSpline {
    fn fit(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        let mut m2 = vec![0.0; n];
        if n > 2 {
            let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
            // tridiagonal system for interior moments
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut sub = vec![0.0; k];
            let mut sup = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                diag[i] = 2.0 * (h[i] + h[i + 1]);
                sub[i] = h[i];
                sup[i] = h[i + 1];
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
            }
            // forward sweep
            for i in 1..k {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m2[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m2[i + 1] = (rhs[i] - sup[i] * m2[i + 2]) / diag[i];
            }
        }
        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m2,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.xs.len();
        // clamp to the boundary segments; the cubic extrapolates there
        let seg = match self.xs.partition_point(|&x| x <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.xs[seg + 1] - self.xs[seg];
        let a = (self.xs[seg + 1] - t) / h;
        let b = (t - self.xs[seg]) / h;
        a * self.ys[seg]
            + b * self.ys[seg + 1]
            + ((a * a * a - a) * self.m2[seg] + (b * b * b - b) * self.m2[seg + 1]) * h * h / 6.0
    }
}

/// Upper/lower envelopes of a signal with the derived mean and amplitude
/// sequences m(t) = (upper+lower)/2 and a(t) = (upper-lower)/2.
#[derive(Debug, Clone)]
pub struct EnvelopePair {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub mean: Vec<f64>,
    pub amplitude: Vec<f64>,
}

/// Builds the extrema envelopes of a sample sequence and their mean.
///
/// Fails with `TooFewExtrema` when either kind of extremum is absent,
/// which the sifting caller treats as "residue reached".
pub fn local_mean(x: &[f64]) -> Result<EnvelopePair> {
    let extrema = find_extrema(x);
    if extrema.maxima.is_empty() || extrema.minima.is_empty() {
        return Err(Error::TooFewExtrema);
    }
    let upper = interpolate_envelope(&extrema.maxima, x.len(), BoundaryPolicy::Mirror)?;
    let lower = interpolate_envelope(&extrema.minima, x.len(), BoundaryPolicy::Mirror)?;
    let mean = upper
        .iter()
        .zip(&lower)
        .map(|(u, l)| 0.5 * (u + l))
        .collect();
    let amplitude = upper
        .iter()
        .zip(&lower)
        .map(|(u, l)| 0.5 * (u - l))
        .collect();
    Ok(EnvelopePair {
        upper,
        lower,
        mean,
        amplitude,
    })
}
