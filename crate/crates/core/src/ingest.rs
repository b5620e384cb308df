//! Opinion feeds (JSONL) and pre-aggregated score series (CSV).
//!
//! The opinion feed holds one JSON object per line with fields `id`, `t`
//! (RFC 3339 / ISO-8601), `target`, `holder`, `sentiment`, and the optional
//! `weight` and `categories`. Score series are CSV files with header
//! `date,entity,score`; index files written by this crate add a trailing
//! `count` column and are accepted too.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Read, Write};

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::IngestError;
use crate::model::{validate_opinion, IndexPoint, Opinion, RawOpinion, ReputationSeries};

/// Source range of a native score scale, e.g. `[1, 10]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NativeRange {
    lo: f64,
    hi: f64,
}

impl NativeRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, IngestError> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(NativeRange { lo, hi })
        } else {
            Err(IngestError::InvalidNativeRange { lo, hi })
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Affine map from `native` onto `[-1, 1]`. Endpoints land exactly on -1 and 1.
pub fn scale_linear(x: f64, native: NativeRange) -> Result<f64, IngestError> {
    let NativeRange { lo, hi } = native;
    if !(lo..=hi).contains(&x) {
        return Err(IngestError::OutsideNativeRange { x, lo, hi });
    }
    Ok(-1.0 + 2.0 * ((x - lo) / (hi - lo)))
}

/// A feed line that did not become an opinion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineRejection {
    pub line: usize,
    pub reason: String,
}

/// Parse a JSONL opinion feed.
///
/// Each line (1-based) yields one opinion or one rejection, in input order.
/// Only a failure to read the stream aborts.
pub fn parse_opinions_jsonl<R: BufRead>(
    reader: R,
) -> Result<(Vec<Opinion>, Vec<LineRejection>), IngestError> {
    let mut opinions = Vec::new();
    let mut rejections = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let reject = |reason: String| LineRejection {
            line: line_no,
            reason,
        };
        if line.trim().is_empty() {
            rejections.push(reject("empty line".into()));
            continue;
        }
        let raw: RawOpinion = match serde_json::from_str(&line) {
            Ok(raw) => raw,
            Err(e) => {
                rejections.push(reject(format!("malformed JSON: {e}")));
                continue;
            }
        };
        let opinion = match validate_opinion(raw) {
            Ok(op) => op,
            Err(rej) => {
                rejections.push(reject(rej.to_string()));
                continue;
            }
        };
        match seen.entry(opinion.id().to_owned()) {
            Entry::Occupied(first) => {
                rejections.push(reject(format!(
                    "id: duplicate id {:?} (first seen on line {})",
                    opinion.id(),
                    first.get()
                )));
            }
            Entry::Vacant(slot) => {
                slot.insert(line_no);
                opinions.push(opinion);
            }
        }
    }
    Ok((opinions, rejections))
}

pub fn write_opinions_jsonl<W: Write>(mut out: W, opinions: &[Opinion]) -> std::io::Result<()> {
    for op in opinions {
        serde_json::to_writer(&mut out, &op.to_raw())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_rejections_jsonl<W: Write>(
    mut out: W,
    rejections: &[LineRejection],
) -> std::io::Result<()> {
    for r in rejections {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// One row of a score CSV, after any native-range scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub date: NaiveDate,
    pub entity: String,
    pub score: f64,
    /// Present only when the file carries a `count` column.
    pub count: Option<usize>,
}

/// Parse a score CSV into per-entity rows sorted by date.
pub fn parse_scores_csv<R: Read>(
    reader: R,
    native: Option<NativeRange>,
) -> Result<BTreeMap<String, Vec<ScoreRow>>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr.headers()?.clone();
    let has_count = match header.iter().collect::<Vec<_>>().as_slice() {
        ["date", "entity", "score"] => false,
        ["date", "entity", "score", "count"] => true,
        _ => return Err(IngestError::BadHeader(header.iter().collect::<Vec<_>>().join(","))),
    };

    let mut grouped: BTreeMap<String, BTreeMap<NaiveDate, ScoreRow>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |reason: String| IngestError::BadRow { line, reason };

        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|e| bad(format!("unparseable date {:?}: {e}", &record[0])))?;
        let entity = record[1].to_string();
        if entity.is_empty() {
            return Err(bad("empty entity".into()));
        }
        let raw: f64 = record[2]
            .parse()
            .map_err(|e| bad(format!("unparseable score {:?}: {e}", &record[2])))?;
        if !raw.is_finite() {
            return Err(bad(format!("non-finite score {raw}")));
        }
        let score = match native {
            Some(range) => scale_linear(raw, range).map_err(|e| bad(e.to_string()))?,
            None => raw,
        };
        if !(-1.0..=1.0).contains(&score) {
            return Err(bad(format!("score {score} outside [-1, 1] after scaling")));
        }
        let count = if has_count {
            Some(
                record[3]
                    .parse::<usize>()
                    .map_err(|e| bad(format!("unparseable count {:?}: {e}", &record[3])))?,
            )
        } else {
            None
        };

        let rows = grouped.entry(entity.clone()).or_default();
        if rows.contains_key(&date) {
            return Err(IngestError::DuplicateRow { line, date, entity });
        }
        rows.insert(
            date,
            ScoreRow {
                date,
                entity,
                score,
                count,
            },
        );
    }

    Ok(grouped
        .into_iter()
        .map(|(entity, rows)| (entity, rows.into_values().collect()))
        .collect())
}

/// Turn sorted rows for one entity into a series. Rows without a count get 1.
pub fn rows_to_series(entity: &str, rows: &[ScoreRow]) -> Result<ReputationSeries, IngestError> {
    let points = rows
        .iter()
        .map(|r| IndexPoint::new(r.date, r.score, r.count.unwrap_or(1)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| IngestError::BadRow {
            line: 0,
            reason: e.to_string(),
        })?;
    ReputationSeries::new(entity, points).map_err(|e| IngestError::BadRow {
        line: 0,
        reason: e.to_string(),
    })
}

/// Parse a score CSV straight into series, one per entity.
pub fn read_series_csv<R: Read>(
    reader: R,
    native: Option<NativeRange>,
) -> Result<Vec<ReputationSeries>, IngestError> {
    parse_scores_csv(reader, native)?
        .iter()
        .map(|(entity, rows)| rows_to_series(entity, rows))
        .collect()
}

/// Write series as `date,entity,score`.
pub fn write_scores_csv<W: Write>(out: W, series: &[ReputationSeries]) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["date", "entity", "score"])?;
    for s in series {
        for p in s.points() {
            wtr.write_record([
                p.period.format("%Y-%m-%d").to_string(),
                s.target().to_string(),
                p.score.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
