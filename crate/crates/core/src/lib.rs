//! Reputation index construction and missing-positive-sentiment analysis.
//!
//! The pipeline runs opinions ([`model::Opinion`]) through daily aggregation
//! ([`index`]) into reputation series, cumulates and classifies them
//! ([`trend`]), and estimates unexpressed positive sentiment from banded
//! counts around the truncated mean ([`bias`]). [`synth`] produces series
//! with known suppression for validating the estimator.

pub mod bias;
pub mod error;
pub mod index;
pub mod ingest;
pub mod model;
pub mod report;
pub mod synth;
pub mod trend;

pub use bias::{analyze, AnalysisConfig, BandCounts, BiasReport, Sweep};
pub use error::{BiasError, IndexError, IngestError, ModelError, Ratio, SynthError};
pub use index::{average_entities, build_series, AggregatorSpec};
pub use ingest::{parse_opinions_jsonl, parse_scores_csv, scale_linear, NativeRange};
pub use model::{validate_opinion, IndexPoint, Opinion, RawOpinion, ReputationSeries, Sentiment};
pub use synth::{expected_m, generate, GroundTruth, SynthSpec};
pub use trend::{cumulate, classify_trend, CumulativeProfile, Trend};
