//! Missing-positive-sentiment analysis.
//!
//! Scores near the truncated mean `m` are split into a lower half-band
//! `[m - w, m)` and an upper half-band `(m, m + w]`, where the semi-width `w`
//! is a percentage of the score range. The band ratio
//! `alpha = N_w- / N_w+` is compared with the global ratio `beta = N- / N+`
//! of negative to positive scores, and
//!
//! ```text
//! M = 100 * (alpha - beta) / beta
//! ```
//!
//! estimates the percentage of positive contents that never arrived.
//! Negative-trending series are analyzed with their signs reversed.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{BiasError, Ratio};
use crate::model::ReputationSeries;
use crate::trend::{self, Trend};

/// Mean after dropping one largest and one smallest value.
pub fn truncated_mean(scores: &[f64]) -> Result<f64, BiasError> {
    if scores.len() < 3 {
        return Err(BiasError::InsufficientData {
            needed: 3,
            got: scores.len(),
        });
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let inner = &sorted[1..sorted.len() - 1];
    Ok(inner.iter().sum::<f64>() / inner.len() as f64)
}

/// Fisher-Pearson moment coefficient of skewness, `m3 / m2^(3/2)`, with
/// population central moments.
pub fn skewness(scores: &[f64]) -> Result<f64, BiasError> {
    if scores.len() < 3 {
        return Err(BiasError::InsufficientData {
            needed: 3,
            got: scores.len(),
        });
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let (m2, m3) = scores.iter().fold((0.0, 0.0), |(m2, m3), &x| {
        let d = x - mean;
        let d2 = d * d;
        (m2 + d2, m3 + d2 * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    if m2 <= 0.0 {
        return Err(BiasError::ZeroVariance);
    }
    Ok(m3 / m2.powf(1.5))
}

/// Counts around a band centre and across the whole series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BandCounts {
    /// Scores in `(m, m + w]`.
    pub n_band_pos: usize,
    /// Scores in `[m - w, m)`.
    pub n_band_neg: usize,
    /// Scores above zero.
    pub n_pos: usize,
    /// Scores below zero.
    pub n_neg: usize,
}

/// Slack applied at band edges: a few ulps at the magnitude of the edges, so
/// that a score written as the same decimal as an edge lands on it.
pub fn edge_slack(m: f64, w_abs: f64) -> f64 {
    4.0 * f64::EPSILON * (m.abs() + w_abs)
}

/// Count scores in the half-bands around `m` and by sign.
///
/// Scores within [`edge_slack`] of `m` fall in neither half-band, and the
/// outer edges `m +- w_abs` are widened by the same slack. Zeros are neither
/// positive nor negative. `w_abs` is expected to be positive.
pub fn band_counts(scores: &[f64], m: f64, w_abs: f64) -> BandCounts {
    debug_assert!(w_abs > 0.0);
    let slack = edge_slack(m, w_abs);
    let (lo, hi) = (m - w_abs - slack, m + w_abs + slack);
    let (below, above) = (m - slack, m + slack);
    let mut c = BandCounts::default();
    for &x in scores {
        if x > above && x <= hi {
            c.n_band_pos += 1;
        } else if x < below && x >= lo {
            c.n_band_neg += 1;
        }
        if x > 0.0 {
            c.n_pos += 1;
        } else if x < 0.0 {
            c.n_neg += 1;
        }
    }
    c
}

pub fn alpha(counts: &BandCounts) -> Result<f64, BiasError> {
    if counts.n_band_pos == 0 {
        return Err(BiasError::UndefinedRatio(Ratio::Alpha));
    }
    Ok(counts.n_band_neg as f64 / counts.n_band_pos as f64)
}

pub fn beta(counts: &BandCounts) -> Result<f64, BiasError> {
    if counts.n_pos == 0 {
        return Err(BiasError::UndefinedRatio(Ratio::Beta));
    }
    Ok(counts.n_neg as f64 / counts.n_pos as f64)
}

/// `(alpha, beta)` for one set of counts.
pub fn ratios(counts: &BandCounts) -> Result<(f64, f64), BiasError> {
    Ok((alpha(counts)?, beta(counts)?))
}

/// Percentage of missing positive sentiment, `100 (alpha - beta) / beta`.
pub fn missing_pct(alpha: f64, beta: f64) -> Result<f64, BiasError> {
    if !(beta > 0.0) {
        return Err(BiasError::NonPositiveBeta(beta));
    }
    Ok(100.0 * (alpha - beta) / beta)
}

/// Band semi-widths to evaluate, as percentages of the score range.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Sweep(Vec<f64>);

impl Sweep {
    pub fn new(values: Vec<f64>) -> Result<Self, BiasError> {
        if values.is_empty() {
            return Err(BiasError::InvalidSweep("sweep is empty".into()));
        }
        if let Some(bad) = values.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(BiasError::InvalidSweep(format!("semi-width {bad} is not positive")));
        }
        Ok(Sweep(values))
    }

    pub fn single(w_pct: f64) -> Result<Self, BiasError> {
        Sweep::new(vec![w_pct])
    }

    /// `start, start + step, ...` up to and including `end` (within 1e-9).
    pub fn range(start: f64, end: f64, step: f64) -> Result<Self, BiasError> {
        if !(step > 0.0 && end >= start) {
            return Err(BiasError::InvalidSweep(format!(
                "range {start}:{end}:{step} needs step > 0 and end >= start"
            )));
        }
        let steps = ((end - start) / step + 1e-9).floor() as usize;
        Sweep::new((0..=steps).map(|i| start + i as f64 * step).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Default for Sweep {
    /// 2.5% to 16.5% in steps of 1%.
    fn default() -> Self {
        Sweep::range(2.5, 16.5, 1.0).expect("default sweep is valid")
    }
}

impl FromStr for Sweep {
    type Err = BiasError;

    /// Accepts `start:end:step` or a comma-separated list of percentages.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| BiasError::InvalidSweep(format!("{t:?}: {e}")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, end, step] => Sweep::range(num(start)?, num(end)?, num(step)?),
            [list] => Sweep::new(list.split(',').map(num).collect::<Result<_, _>>()?),
            _ => Err(BiasError::InvalidSweep(format!(
                "expected start:end:step or a comma list, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub sweep: Sweep,
    pub slope_epsilon: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            sweep: Sweep::default(),
            slope_epsilon: 0.0,
        }
    }
}

/// Statistics for one band semi-width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerWidth {
    pub semi_width_pct: f64,
    pub w_abs: f64,
    pub counts: BandCounts,
    pub alpha: Option<f64>,
    pub m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    pub entity: String,
    pub trend: Trend,
    pub slope: Option<f64>,
    pub n: usize,
    pub truncated_mean: f64,
    pub range: f64,
    /// Skewness within `[m - w, m + w]` at the widest sweep width.
    pub skew_window: Option<f64>,
    pub skew_all: f64,
    /// Mean of the defined per-width alphas.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub m_statistic: Option<f64>,
    pub per_w: Vec<PerWidth>,
    pub sign_flipped: bool,
    pub warnings: Vec<String>,
}

/// Full analysis of one series.
///
/// The trend of the cumulative profile decides the branch: negative trends
/// are analyzed on negated scores (`sign_flipped`), zero trends get
/// skewness only.
pub fn analyze(series: &ReputationSeries, config: &AnalysisConfig) -> Result<BiasReport, BiasError> {
    let scores = series.scores();
    if scores.len() < 3 {
        return Err(BiasError::InsufficientData {
            needed: 3,
            got: scores.len(),
        });
    }
    let (_, outcome) = trend::profile(series, config.slope_epsilon);
    let sign_flipped = outcome.trend == Trend::Negative;
    let working: Vec<f64> = if sign_flipped {
        scores.iter().map(|s| -s).collect()
    } else {
        scores
    };

    let mut report = analyze_scores(series.target(), &working, &config.sweep, outcome.trend != Trend::Zero)?;
    report.trend = outcome.trend;
    report.slope = outcome.slope;
    report.sign_flipped = sign_flipped;
    if outcome.trend == Trend::Zero {
        report
            .warnings
            .push("zero trend: missing-sentiment measure not computed".into());
    }
    Ok(report)
}

/// Positive-branch analysis of already-oriented scores.
///
/// With `measure = false` only the location, range and skewness fields are
/// filled. The returned report carries `Trend::Positive` and no slope; callers
/// overwrite those.
pub fn analyze_scores(
    entity: &str,
    working: &[f64],
    sweep: &Sweep,
    measure: bool,
) -> Result<BiasReport, BiasError> {
    let m = truncated_mean(working)?;
    let (lo, hi) = working
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(BiasError::ZeroRange);
    }
    let mut warnings = Vec::new();

    let skew_all = skewness(working)?;
    let w_max = (sweep.max() / 100.0) * range;
    let window: Vec<f64> = working
        .iter()
        .copied()
        .filter(|&x| x >= m - w_max && x <= m + w_max)
        .collect();
    let skew_window = match skewness(&window) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(format!("window skewness undefined: {e}"));
            None
        }
    };

    let mut report = BiasReport {
        entity: entity.to_owned(),
        trend: Trend::Positive,
        slope: None,
        n: working.len(),
        truncated_mean: m,
        range,
        skew_window,
        skew_all,
        alpha: None,
        beta: None,
        m_statistic: None,
        per_w: Vec::new(),
        sign_flipped: false,
        warnings,
    };
    if !measure {
        return Ok(report);
    }

    // N+ and N- do not depend on w
    let whole = band_counts(working, m, (sweep.values()[0] / 100.0) * range);
    let b = match beta(&whole) {
        Ok(b) if b > 0.0 => Some(b),
        Ok(b) => {
            report
                .warnings
                .push(format!("beta = {b}: no negative scores, missing percentage undefined"));
            Some(b)
        }
        Err(e) => {
            report.warnings.push(format!("{e}: missing percentage undefined"));
            None
        }
    };
    let m_of = |a: f64| b.filter(|&b| b > 0.0).map(|b| missing_pct(a, b)).transpose();

    for &w_pct in sweep.values() {
        let w_abs = (w_pct / 100.0) * range;
        let counts = band_counts(working, m, w_abs);
        let a = alpha(&counts).ok();
        if a.is_none() {
            report
                .warnings
                .push(format!("alpha undefined at w = {w_pct}%: empty upper half-band"));
        }
        report.per_w.push(PerWidth {
            semi_width_pct: w_pct,
            w_abs,
            counts,
            alpha: a,
            m: a.map(m_of).transpose()?.flatten(),
        });
    }

    let defined: Vec<f64> = report.per_w.iter().filter_map(|p| p.alpha).collect();
    if defined.is_empty() {
        return Err(BiasError::AllAlphaUndefined);
    }
    let alpha_mean = defined.iter().sum::<f64>() / defined.len() as f64;
    report.alpha = Some(alpha_mean);
    report.beta = b;
    report.m_statistic = m_of(alpha_mean)?;
    Ok(report)
}

/// Result of scaling a series up by a missing-sentiment percentage.
#[derive(Debug, Clone, PartialEq)]
pub struct Inflated {
    pub series: ReputationSeries,
    /// Number of scores that hit the `[-1, 1]` bounds and were clamped.
    pub clamped: usize,
}

/// Multiply every score by `1 + m_statistic / 100`, clamping to `[-1, 1]`.
/// Intended for positive-trend series.
pub fn inflate(series: &ReputationSeries, m_statistic: f64) -> Result<Inflated, BiasError> {
    if !(m_statistic >= 0.0) {
        return Err(BiasError::NegativeInflation(m_statistic));
    }
    let factor = 1.0 + m_statistic / 100.0;
    let mut clamped = 0;
    let out = series.map_scores(|s| {
        let v = s * factor;
        if !(-1.0..=1.0).contains(&v) {
            clamped += 1;
        }
        v.clamp(-1.0, 1.0)
    });
    Ok(Inflated {
        series: out,
        clamped,
    })
}
