//! Cumulative reputation profiles and their trend direction.

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::ReputationSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Positive,
    Negative,
    Zero,
}

impl Trend {
    pub fn flipped(self) -> Trend {
        match self {
            Trend::Positive => Trend::Negative,
            Trend::Negative => Trend::Positive,
            Trend::Zero => Trend::Zero,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Positive => "positive",
            Trend::Negative => "negative",
            Trend::Zero => "zero",
        }
    }
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Running sums of a reputation series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeProfile {
    pub target: String,
    pub prefix: Vec<(NaiveDate, f64)>,
    pub total: f64,
    pub trend: Option<Trend>,
}

impl CumulativeProfile {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.prefix.iter().map(|&(_, v)| v)
    }

    /// `date,cumulative` rows for plotting.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "date,cumulative")?;
        for (date, v) in &self.prefix {
            writeln!(out, "{},{}", date.format("%Y-%m-%d"), v)?;
        }
        Ok(())
    }
}

/// Prefix sums in period order. Trend is left unset.
pub fn cumulate(series: &ReputationSeries) -> CumulativeProfile {
    let prefix: Vec<(NaiveDate, f64)> = series
        .points()
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p.score;
            Some((p.period, *acc))
        })
        .collect();
    let total = prefix.last().map_or(0.0, |&(_, v)| v);
    CumulativeProfile {
        target: series.target().to_owned(),
        prefix,
        total,
        trend: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendOutcome {
    pub trend: Trend,
    /// OLS slope of cumulative value against point index; `None` if fewer than 2 points.
    pub slope: Option<f64>,
    /// Set when there were too few points to fit a slope.
    pub insufficient_points: bool,
}

/// Ordinary least squares slope of `ys` against `0..n`.
pub fn ols_slope(ys: &[f64]) -> Option<f64> {
    let n = ys.len();
    if n < 2 {
        return None;
    }
    let x_mean = (n - 1) as f64 / 2.0;
    let y_mean = ys.iter().sum::<f64>() / n as f64;
    let (sxy, sxx) = ys.iter().enumerate().fold((0.0, 0.0), |(sxy, sxx), (i, &y)| {
        let dx = i as f64 - x_mean;
        (sxy + dx * (y - y_mean), sxx + dx * dx)
    });
    Some(sxy / sxx)
}

/// Classify by the OLS slope of the cumulative profile against point index:
/// positive above `slope_epsilon`, negative below `-slope_epsilon`, zero otherwise.
pub fn classify_trend(profile: &CumulativeProfile, slope_epsilon: f64) -> TrendOutcome {
    let ys: Vec<f64> = profile.values().collect();
    match ols_slope(&ys) {
        None => TrendOutcome {
            trend: Trend::Zero,
            slope: None,
            insufficient_points: true,
        },
        Some(slope) => {
            let trend = if slope > slope_epsilon {
                Trend::Positive
            } else if slope < -slope_epsilon {
                Trend::Negative
            } else {
                Trend::Zero
            };
            TrendOutcome {
                trend,
                slope: Some(slope),
                insufficient_points: false,
            }
        }
    }
}

/// Cumulate and classify in one step.
pub fn profile(series: &ReputationSeries, slope_epsilon: f64) -> (CumulativeProfile, TrendOutcome) {
    let mut p = cumulate(series);
    let outcome = classify_trend(&p, slope_epsilon);
    p.trend = Some(outcome.trend);
    (p, outcome)
}
