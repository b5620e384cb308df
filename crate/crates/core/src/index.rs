//! Per-period aggregation of opinions into reputation scores, and
//! cross-entity composites.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::IndexError;
use crate::model::{IndexPoint, Opinion, ReputationSeries};

/// How a period's opinions are reduced to a single score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorSpec {
    /// `sum(s_i * w_i) / sum(w_i)`
    #[default]
    WeightedMean,
}

impl AggregatorSpec {
    fn reduce(self, opinions: &[&Opinion]) -> f64 {
        match self {
            AggregatorSpec::WeightedMean => {
                let (num, den) = opinions.iter().fold((0.0, 0.0), |(num, den), op| {
                    (num + op.sentiment().value() * op.weight(), den + op.weight())
                });
                num / den
            }
        }
    }
}

/// Aggregate opinions that share one target and one UTC day.
pub fn aggregate_period(opinions: &[&Opinion], spec: AggregatorSpec) -> Result<IndexPoint, IndexError> {
    let first = opinions.first().ok_or(IndexError::EmptyPeriod)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for op in opinions {
        if op.target() != first.target() {
            return Err(IndexError::MixedTargets(
                first.target().to_owned(),
                op.target().to_owned(),
            ));
        }
        if op.period() != first.period() {
            return Err(IndexError::MixedPeriods(first.period(), op.period()));
        }
        let s = op.sentiment().value();
        lo = lo.min(s);
        hi = hi.max(s);
    }
    // rounding can push the mean an ulp outside the hull of its inputs
    let score = spec.reduce(opinions).clamp(lo, hi);
    Ok(IndexPoint::new(first.period(), score, opinions.len())?)
}

/// Daily reputation series for `target`. Days without opinions are omitted.
///
/// Opinions within a day are reduced in id order, so the result does not
/// depend on the order of `opinions`.
pub fn build_series(
    opinions: &[Opinion],
    target: &str,
    spec: AggregatorSpec,
) -> Result<ReputationSeries, IndexError> {
    let mut days: BTreeMap<NaiveDate, Vec<&Opinion>> = BTreeMap::new();
    for op in opinions.iter().filter(|op| op.target() == target) {
        days.entry(op.period()).or_default().push(op);
    }
    series_from_buckets(target, days, spec)
}

/// Build one series per target present in `opinions`, keyed by target.
pub fn build_all(
    opinions: &[Opinion],
    spec: AggregatorSpec,
) -> Result<BTreeMap<String, ReputationSeries>, IndexError> {
    let mut buckets: BTreeMap<&str, BTreeMap<NaiveDate, Vec<&Opinion>>> = BTreeMap::new();
    for op in opinions {
        buckets
            .entry(op.target())
            .or_default()
            .entry(op.period())
            .or_default()
            .push(op);
    }
    buckets
        .into_iter()
        .map(|(target, days)| Ok((target.to_owned(), series_from_buckets(target, days, spec)?)))
        .collect()
}

fn series_from_buckets(
    target: &str,
    days: BTreeMap<NaiveDate, Vec<&Opinion>>,
    spec: AggregatorSpec,
) -> Result<ReputationSeries, IndexError> {
    let points = days
        .into_values()
        .map(|mut bucket| {
            bucket.sort_unstable_by(|a, b| a.id().cmp(b.id()));
            aggregate_period(&bucket, spec)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReputationSeries::new(target, points)?)
}

/// Composite series: for every period present in any input, the unweighted
/// mean of the scores of the series that have that period. Entities missing
/// a period are excluded from that period's mean; `count` is the number of
/// contributing series.
pub fn average_entities(series_set: &[ReputationSeries], label: &str) -> Result<ReputationSeries, IndexError> {
    if series_set.is_empty() {
        return Err(IndexError::NoSeries);
    }
    let mut by_day: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for series in series_set {
        for p in series.points() {
            by_day.entry(p.period).or_default().push(p.score);
        }
    }
    let points = by_day
        .into_iter()
        .map(|(period, scores)| {
            let (lo, hi) = scores
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
            let mean = (scores.iter().sum::<f64>() / scores.len() as f64).clamp(lo, hi);
            IndexPoint::new(period, mean, scores.len())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReputationSeries::new(label, points)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_opinion, RawOpinion};

    fn op(id: &str, day: u32, target: &str, s: f64, w: f64) -> Opinion {
        validate_opinion(RawOpinion {
            id: Some(id.into()),
            t: Some(format!("2014-01-{day:02}T10:00:00Z")),
            target: Some(target.into()),
            holder: Some("h".into()),
            sentiment: Some(s),
            weight: Some(w),
            categories: None,
        })
        .unwrap()
    }

    fn date(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2014, 1, d).unwrap()
    }

    #[test]
    fn single_opinion_weight_cancels() {
        let a = op("a", 1, "G", 0.5, 2.0);
        let p = aggregate_period(&[&a], AggregatorSpec::WeightedMean).unwrap();
        assert_eq!(p.score, 0.5);
        assert_eq!(p.count, 1);
    }

    #[test]
    fn symmetric_cancellation() {
        let (a, b) = (op("a", 1, "G", 1.0, 1.0), op("b", 1, "G", -1.0, 1.0));
        assert_eq!(aggregate_period(&[&a, &b], AggregatorSpec::default()).unwrap().score, 0.0);
    }

    #[test]
    fn weighted_three() {
        let ops = [op("a", 1, "G", 0.8, 3.0), op("b", 1, "G", 0.2, 1.0), op("c", 1, "G", -0.4, 1.0)];
        let refs: Vec<_> = ops.iter().collect();
        let p = aggregate_period(&refs, AggregatorSpec::default()).unwrap();
        // (2.4 + 0.2 - 0.4) / 5
        assert!((p.score - 0.44).abs() < 1e-12);
        assert_eq!(p.count, 3);
    }

    #[test]
    fn aggregate_errors() {
        assert_eq!(aggregate_period(&[], AggregatorSpec::default()), Err(IndexError::EmptyPeriod));
        let (a, b, c) = (op("a", 1, "G", 0.1, 1.0), op("b", 1, "H", 0.1, 1.0), op("c", 2, "G", 0.1, 1.0));
        assert!(matches!(
            aggregate_period(&[&a, &b], AggregatorSpec::default()),
            Err(IndexError::MixedTargets(..))
        ));
        assert!(matches!(
            aggregate_period(&[&a, &c], AggregatorSpec::default()),
            Err(IndexError::MixedPeriods(..))
        ));
    }

    #[test]
    fn series_buckets_by_day() {
        let ops = vec![
            op("c", 3, "G", 0.3, 1.0),
            op("a", 1, "G", 0.1, 1.0),
            op("x", 2, "Other", 0.9, 1.0),
            op("b", 2, "G", 0.2, 1.0),
        ];
        let s = build_series(&ops, "G", AggregatorSpec::default()).unwrap();
        let days: Vec<_> = s.points().iter().map(|p| p.period).collect();
        assert_eq!(days, [date(1), date(2), date(3)]);
        assert!(build_series(&ops, "Nobody", AggregatorSpec::default()).unwrap().is_empty());
    }

    #[test]
    fn same_day_pair() {
        let ops = vec![op("a", 5, "G", 0.6, 1.0), op("b", 5, "G", 0.2, 1.0)];
        let s = build_series(&ops, "G", AggregatorSpec::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.points()[0].score - 0.4).abs() < 1e-12);
        assert_eq!(s.points()[0].count, 2);
    }

    #[test]
    fn build_all_matches_build_series() {
        let ops = vec![op("a", 1, "G", 0.1, 1.0), op("b", 2, "H", -0.2, 2.0), op("c", 2, "G", 0.5, 3.0)];
        let all = build_all(&ops, AggregatorSpec::default()).unwrap();
        assert_eq!(all.len(), 2);
        for (t, s) in &all {
            assert_eq!(s, &build_series(&ops, t, AggregatorSpec::default()).unwrap());
        }
    }

    fn series(target: &str, pts: &[(u32, f64)]) -> ReputationSeries {
        ReputationSeries::new(
            target,
            pts.iter().map(|&(d, s)| IndexPoint::new(date(d), s, 1).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn composite_mean() {
        let c = average_entities(&[series("A", &[(1, 0.2)]), series("B", &[(1, 0.4)])], "All").unwrap();
        assert!((c.points()[0].score - 0.3).abs() < 1e-12);
        assert_eq!(c.points()[0].count, 2);
        assert_eq!(c.target(), "All");
    }

    #[test]
    fn composite_identity_and_single_contributor() {
        let a = series("A", &[(1, 0.1), (2, 0.7), (4, -0.3)]);
        let single = average_entities(std::slice::from_ref(&a), "A").unwrap();
        assert_eq!(single, a);

        let b = series("B", &[(1, 0.3)]);
        let c = series("C", &[(2, 0.5)]);
        let comp = average_entities(&[a.clone(), b, c], "All").unwrap();
        let p4 = comp.points().iter().find(|p| p.period == date(4)).unwrap();
        assert_eq!(p4.score, -0.3);
        assert_eq!(p4.count, 1);

        let copies = average_entities(&[a.clone(), a.clone(), a.clone()], "A").unwrap();
        assert_eq!(copies.scores(), a.scores());
        assert_eq!(average_entities(&[], "All"), Err(IndexError::NoSeries));
    }
}
