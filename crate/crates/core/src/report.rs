//! CSV and JSON renderings of series and bias reports.
//!
//! | file           | header                          |
//! |----------------|---------------------------------|
//! | `index_*.csv`  | `date,entity,score,count`       |
//! | `table1.csv`   | `entity,skew_w,skew_all,trend`  |
//! | `table2.csv`   | `entity,m`                      |
//! | `per_w.csv`    | `entity,w_pct,alpha,m`          |
//!
//! Numbers use the shortest representation that parses back to the same
//! `f64`; undefined values are empty fields.

use std::io::Write;

use crate::bias::BiasReport;
use crate::model::ReputationSeries;

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_index_csv<W: Write>(mut out: W, series: &ReputationSeries) -> std::io::Result<()> {
    writeln!(out, "date,entity,score,count")?;
    for p in series.points() {
        writeln!(
            out,
            "{},{},{},{}",
            p.period.format("%Y-%m-%d"),
            csv_field(series.target()),
            p.score,
            p.count
        )?;
    }
    Ok(())
}

/// One Table 1 row: `entity,skew_w,skew_all,trend`.
pub fn table1_row(report: &BiasReport) -> String {
    format!(
        "{},{},{},{}",
        csv_field(&report.entity),
        opt(report.skew_window),
        report.skew_all,
        report.trend
    )
}

/// One Table 2 row, or `None` when no percentage was computed.
pub fn table2_row(report: &BiasReport) -> Option<String> {
    report
        .m_statistic
        .map(|m| format!("{},{}", csv_field(&report.entity), m))
}

pub fn write_table1<W: Write>(mut out: W, reports: &[BiasReport]) -> std::io::Result<()> {
    writeln!(out, "entity,skew_w,skew_all,trend")?;
    for r in reports {
        writeln!(out, "{}", table1_row(r))?;
    }
    Ok(())
}

pub fn write_table2<W: Write>(mut out: W, reports: &[BiasReport]) -> std::io::Result<()> {
    writeln!(out, "entity,m")?;
    for row in reports.iter().filter_map(table2_row) {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn write_per_w<W: Write>(mut out: W, reports: &[BiasReport]) -> std::io::Result<()> {
    writeln!(out, "entity,w_pct,alpha,m")?;
    for r in reports {
        for p in &r.per_w {
            writeln!(
                out,
                "{},{},{},{}",
                csv_field(&r.entity),
                p.semi_width_pct,
                opt(p.alpha),
                opt(p.m)
            )?;
        }
    }
    Ok(())
}

pub fn write_report_json<W: Write>(mut out: W, reports: &[BiasReport]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, reports)?;
    out.write_all(b"\n")
}

/// Quote a CSV field when it contains a delimiter, quote or newline.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Filesystem-safe form of an entity name for `index_<entity>.csv` and friends.
pub fn file_stem(entity: &str) -> String {
    entity
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trend::Trend;

    fn report(entity: &str, skew_w: f64, skew_all: f64, trend: Trend, m: Option<f64>) -> BiasReport {
        BiasReport {
            entity: entity.into(),
            trend,
            slope: None,
            n: 0,
            truncated_mean: 0.0,
            range: 1.0,
            skew_window: Some(skew_w),
            skew_all,
            alpha: None,
            beta: None,
            m_statistic: m,
            per_w: Vec::new(),
            sign_flipped: false,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn table_rows_match_published_layout() {
        let r = report("1", -0.34, 0.2, Trend::Positive, None);
        assert_eq!(table1_row(&r), "1,-0.34,0.2,positive");
        assert_eq!(table2_row(&r), None);
        let r3 = report("3", -1.44, 0.55, Trend::Positive, Some(23.59));
        assert_eq!(table2_row(&r3).unwrap(), "3,23.59");
    }

    #[test]
    fn tables_with_headers() {
        let rs = [
            report("Bank1", -0.34, 0.2, Trend::Positive, Some(11.85)),
            report("Bank2", 1.7, 0.48, Trend::Negative, None),
        ];
        let mut t1 = Vec::new();
        write_table1(&mut t1, &rs).unwrap();
        assert_eq!(
            String::from_utf8(t1).unwrap(),
            "entity,skew_w,skew_all,trend\nBank1,-0.34,0.2,positive\nBank2,1.7,0.48,negative\n"
        );
        let mut t2 = Vec::new();
        write_table2(&mut t2, &rs).unwrap();
        assert_eq!(String::from_utf8(t2).unwrap(), "entity,m\nBank1,11.85\n");
    }

    #[test]
    fn stems_and_quoting() {
        assert_eq!(file_stem("Bank 1/UK"), "Bank_1_UK");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
