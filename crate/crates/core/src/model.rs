//! Domain types: sentiment values, opinions, index points and reputation series.

use std::fmt;

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A standardised sentiment value in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Sentiment(f64);

impl Sentiment {
    pub fn new(value: f64) -> Result<Self, ModelError> {
        if !value.is_finite() {
            return Err(ModelError::NonFiniteSentiment(value));
        }
        if !(-1.0..=1.0).contains(&value) {
            return Err(ModelError::SentimentOutOfRange(value));
        }
        Ok(Sentiment(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Sentiment {
    type Error = ModelError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Sentiment::new(value)
    }
}

/// One mined content: who said what about whom, when, and with what weight.
///
/// Fields are private so that every `Opinion` in circulation has passed
/// [`validate_opinion`] (or [`Opinion::new`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Opinion {
    id: String,
    timestamp: DateTime<Utc>,
    target: String,
    holder: String,
    sentiment: Sentiment,
    weight: f64,
    categories: Vec<String>,
}

impl Opinion {
    pub fn new(
        id: impl Into<String>,
        timestamp: DateTime<Utc>,
        target: impl Into<String>,
        holder: impl Into<String>,
        sentiment: Sentiment,
        weight: f64,
        categories: Vec<String>,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        let target = target.into();
        if id.is_empty() {
            return Err(ModelError::EmptyField("id"));
        }
        if target.is_empty() {
            return Err(ModelError::EmptyField("target"));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(ModelError::NonPositiveWeight(weight));
        }
        Ok(Opinion {
            id,
            timestamp,
            target,
            holder: holder.into(),
            sentiment,
            weight,
            categories,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn timestamp(&self) -> DateTime<Utc> {
        self.timestamp
    }

    /// UTC calendar day containing the timestamp.
    pub fn period(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn holder(&self) -> &str {
        &self.holder
    }

    pub fn sentiment(&self) -> Sentiment {
        self.sentiment
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    /// Canonical on-disk record for this opinion.
    pub fn to_raw(&self) -> RawOpinion {
        RawOpinion {
            id: Some(self.id.clone()),
            t: Some(self.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true)),
            target: Some(self.target.clone()),
            holder: Some(self.holder.clone()),
            sentiment: Some(self.sentiment.value()),
            weight: Some(self.weight),
            categories: Some(self.categories.clone()),
        }
    }
}

/// An opinion record as it arrives on the wire, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawOpinion {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

/// A single field-level validation failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldIssue {
    pub field: &'static str,
    pub reason: String,
}

/// Why a raw record could not become an [`Opinion`]. Carries every issue found,
/// not just the first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub issues: Vec<FieldIssue>,
}

impl Rejection {
    fn push(&mut self, field: &'static str, reason: impl Into<String>) {
        self.issues.push(FieldIssue {
            field,
            reason: reason.into(),
        });
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.issues.iter().any(|i| i.field == field)
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for issue in &self.issues {
            if !first {
                f.write_str("; ")?;
            }
            first = false;
            write!(f, "{}: {}", issue.field, issue.reason)?;
        }
        Ok(())
    }
}

impl std::error::Error for Rejection {}

/// Validate a raw record. A missing `weight` defaults to 1.0, a missing
/// `holder` to the empty string and missing `categories` to an empty list.
pub fn validate_opinion(raw: RawOpinion) -> Result<Opinion, Rejection> {
    let mut rejection = Rejection { issues: Vec::new() };

    let id = match raw.id {
        Some(id) if !id.is_empty() => Some(id),
        _ => {
            rejection.push("id", "missing id");
            None
        }
    };
    let timestamp = match raw.t.as_deref() {
        None | Some("") => {
            rejection.push("t", "missing timestamp");
            None
        }
        Some(t) => match DateTime::parse_from_rfc3339(t) {
            Ok(ts) => Some(ts.with_timezone(&Utc)),
            Err(e) => {
                rejection.push("t", format!("malformed timestamp {t:?}: {e}"));
                None
            }
        },
    };
    let target = match raw.target {
        Some(target) if !target.is_empty() => Some(target),
        _ => {
            rejection.push("target", "missing target");
            None
        }
    };
    let sentiment = match raw.sentiment {
        None => {
            rejection.push("sentiment", "missing sentiment");
            None
        }
        Some(s) => match Sentiment::new(s) {
            Ok(s) => Some(s),
            Err(e) => {
                rejection.push("sentiment", e.to_string());
                None
            }
        },
    };
    let weight = raw.weight.unwrap_or(1.0);
    if !(weight.is_finite() && weight > 0.0) {
        rejection.push("weight", format!("weight must be positive, got {weight}"));
    }

    match (id, timestamp, target, sentiment) {
        (Some(id), Some(timestamp), Some(target), Some(sentiment)) if rejection.issues.is_empty() => {
            Ok(Opinion {
                id,
                timestamp,
                target,
                holder: raw.holder.unwrap_or_default(),
                sentiment,
                weight,
                categories: raw.categories.unwrap_or_default(),
            })
        }
        _ => Err(rejection),
    }
}

/// Reputation score for one period.
///
/// `count` is the number of contributing opinions (or entities, for a composite).
/// A zero count marks an explicit gap record and carries no score constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexPoint {
    pub period: NaiveDate,
    pub score: f64,
    pub count: usize,
}

impl IndexPoint {
    pub fn new(period: NaiveDate, score: f64, count: usize) -> Result<Self, ModelError> {
        if count > 0 {
            Sentiment::new(score)?;
        }
        Ok(IndexPoint {
            period,
            score,
            count,
        })
    }
}

/// Time-ordered reputation scores for one target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReputationSeries {
    target: String,
    points: Vec<IndexPoint>,
}

impl ReputationSeries {
    /// Build a series; periods must be strictly increasing.
    pub fn new(target: impl Into<String>, points: Vec<IndexPoint>) -> Result<Self, ModelError> {
        for pair in points.windows(2) {
            if pair[1].period <= pair[0].period {
                return Err(ModelError::UnorderedPeriods {
                    previous: pair[0].period,
                    next: pair[1].period,
                });
            }
        }
        Ok(ReputationSeries {
            target: target.into(),
            points,
        })
    }

    /// Consecutive daily points starting at `start`, each with count 1.
    pub fn from_daily_scores(
        target: impl Into<String>,
        start: NaiveDate,
        scores: &[f64],
    ) -> Result<Self, ModelError> {
        let points = start
            .iter_days()
            .zip(scores)
            .map(|(day, &score)| IndexPoint::new(day, score, 1))
            .collect::<Result<Vec<_>, _>>()?;
        ReputationSeries::new(target, points)
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn points(&self) -> &[IndexPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.score).collect()
    }

    /// Same periods and counts, every score negated.
    pub fn negated(&self) -> ReputationSeries {
        self.map_scores(|s| -s)
    }

    pub fn with_target(mut self, target: impl Into<String>) -> Self {
        self.target = target.into();
        self
    }

    pub(crate) fn map_scores(&self, mut f: impl FnMut(f64) -> f64) -> ReputationSeries {
        ReputationSeries {
            target: self.target.clone(),
            points: self
                .points
                .iter()
                .map(|p| IndexPoint {
                    score: f(p.score),
                    ..*p
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(sentiment: f64) -> RawOpinion {
        RawOpinion {
            id: Some("a".into()),
            t: Some("2014-01-01T00:00:00Z".into()),
            target: Some("Bank1".into()),
            holder: Some("h".into()),
            sentiment: Some(sentiment),
            ..Default::default()
        }
    }

    #[test]
    fn default_weight_is_one() {
        let op = validate_opinion(raw(0.5)).unwrap();
        assert_eq!(op.weight(), 1.0);
        assert_eq!(op.sentiment().value(), 0.5);
        assert!(op.categories().is_empty());
        assert_eq!(op.period(), NaiveDate::from_ymd_opt(2014, 1, 1).unwrap());
    }

    #[test]
    fn sentiment_out_of_range_rejected() {
        let err = validate_opinion(raw(1.5)).unwrap_err();
        assert!(err.mentions("sentiment"));
        assert!(err.to_string().contains("sentiment out of range"), "{err}");
    }

    #[test]
    fn zero_weight_rejected() {
        let mut r = raw(0.1);
        r.weight = Some(0.0);
        let err = validate_opinion(r).unwrap_err();
        assert!(err.to_string().contains("weight must be positive"), "{err}");
    }

    #[test]
    fn missing_fields_all_reported() {
        let err = validate_opinion(RawOpinion {
            sentiment: Some(0.0),
            ..Default::default()
        })
        .unwrap_err();
        assert!(err.mentions("id"));
        assert!(err.mentions("t"));
        assert!(err.mentions("target"));
        assert_eq!(err.issues.len(), 3);
    }

    #[test]
    fn malformed_timestamp_rejected() {
        let mut r = raw(0.0);
        r.t = Some("2014-13-45".into());
        assert!(validate_opinion(r).unwrap_err().mentions("t"));
    }

    #[test]
    fn zero_sentiment_is_valid() {
        assert!(validate_opinion(raw(0.0)).is_ok());
    }

    #[test]
    fn non_finite_sentiment_rejected() {
        assert!(matches!(
            Sentiment::new(f64::NAN),
            Err(ModelError::NonFiniteSentiment(_))
        ));
        assert!(Sentiment::new(f64::INFINITY).is_err());
        assert!(Sentiment::new(f64::NEG_INFINITY).is_err());
        assert!(Sentiment::new(-1.0).is_ok());
        assert!(Sentiment::new(1.0).is_ok());
    }

    #[test]
    fn series_requires_increasing_periods() {
        let d = NaiveDate::from_ymd_opt(2014, 1, 1).unwrap();
        let p = IndexPoint::new(d, 0.1, 1).unwrap();
        assert!(ReputationSeries::new("x", vec![p, p]).is_err());
        let gap = IndexPoint::new(d, 7.0, 0).unwrap();
        assert_eq!(gap.count, 0);
        assert!(IndexPoint::new(d, 7.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn validation_matches_field_rules(
            sentiment in prop_oneof![-2.0f64..2.0, Just(f64::NAN), Just(1.0), Just(-1.0)],
            weight in proptest::option::of(prop_oneof![-1.0f64..5.0, Just(0.0)]),
            has_id in any::<bool>(),
            good_ts in any::<bool>(),
        ) {
            let r = RawOpinion {
                id: has_id.then(|| "id-1".to_string()),
                t: Some(if good_ts { "2015-06-01T12:30:00+01:00" } else { "yesterday" }.to_string()),
                target: Some("G".into()),
                holder: None,
                sentiment: Some(sentiment),
                weight,
                categories: Some(vec!["social".into()]),
            };
            let expect_ok = has_id
                && good_ts
                && (-1.0..=1.0).contains(&sentiment)
                && weight.is_none_or(|w| w > 0.0);
            match validate_opinion(r) {
                Ok(op) => {
                    prop_assert!(expect_ok);
                    prop_assert!((-1.0..=1.0).contains(&op.sentiment().value()));
                    prop_assert!(op.weight() > 0.0);
                    // round trip through the canonical record
                    prop_assert_eq!(validate_opinion(op.to_raw()).unwrap(), op);
                }
                Err(rej) => {
                    prop_assert!(!expect_ok);
                    prop_assert!(!rej.issues.is_empty());
                }
            }
        }
    }
}
