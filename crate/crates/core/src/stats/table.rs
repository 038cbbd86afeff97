use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{
    independent_t_test, Agent, ChiSquareResult, Metric, RatingSample, StatsError, TTestResult,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: Metric,
    #[serde(flatten)]
    pub result: TTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub rows: Vec<MetricRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub preference: Option<ChiSquareResult>,
}

impl TableReport {
    pub fn row(&self, metric: Metric) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always representable")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<26} {:>14} {:>14} {:>9} {:>8} {:>9}",
            "Question", "A Mean (SD)", "B Mean (SD)", "t", "p", "Cohen's d"
        );
        for r in &self.rows {
            let t = &r.result;
            let _ = writeln!(
                out,
                "{:<26} {:>14} {:>14} {:>9.4} {:>8.4} {:>9.4}",
                r.metric.title(),
                format!("{:.2} ({:.2})", t.mean_1, t.sd_1),
                format!("{:.2} ({:.2})", t.mean_2, t.sd_2),
                t.t,
                t.p,
                t.cohens_d
            );
        }
        if let Some(c) = &self.preference {
            let _ = writeln!(
                out,
                "Preference: {} vs {}, chi2(1, N = {}) = {:.2}, p = {:.4}, V = {:.2}",
                c.observed[0], c.observed[1], c.n, c.chi2, c.p, c.cramers_v
            );
        }
        out
    }
}

/// Per-metric t-tests of agent A against agent B, plus an optional preference row.
pub fn reproduce_table(
    ratings: &[RatingSample],
    preference: Option<(u64, u64)>,
) -> Result<TableReport, StatsError> {
    let mut rows = Vec::with_capacity(Metric::ALL.len());
    for metric in Metric::ALL {
        let scores = |agent: Agent| -> Result<Vec<f64>, StatsError> {
            let v: Vec<f64> = ratings
                .iter()
                .filter(|r| r.metric == metric && r.agent == agent)
                .map(|r| r.score as f64)
                .collect();
            if v.is_empty() {
                Err(StatsError::MissingMetric { metric, agent })
            } else {
                Ok(v)
            }
        };
        let result = independent_t_test(&scores(Agent::A)?, &scores(Agent::B)?)?;
        rows.push(MetricRow { metric, result });
    }
    let preference = preference
        .map(|(a, b)| super::preference_chi_square(a, b))
        .transpose()?;
    Ok(TableReport { rows, preference })
}

#[derive(Deserialize, Serialize)]
struct CsvRecord {
    participant_id: String,
    agent: String,
    metric: String,
    score: i64,
}

/// Reads `participant_id,agent,metric,score` rows.
pub fn read_ratings_csv(reader: impl Read) -> Result<Vec<RatingSample>, StatsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["participant_id", "agent", "metric", "score"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(StatsError::BadRecord {
            line: 1,
            message: format!("header must be {}", expected.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.deserialize::<CsvRecord>() {
        let rec = rec?;
        let line = out.len() as u64 + 2;
        let bad = |message: String| StatsError::BadRecord { line, message };
        let agent = rec.agent.parse().map_err(bad)?;
        let metric = rec.metric.parse().map_err(bad)?;
        let score = u8::try_from(rec.score)
            .ok()
            .filter(|s| (1..=7).contains(s))
            .ok_or_else(|| bad(format!("score {} outside 1..=7", rec.score)))?;
        out.push(RatingSample::new(rec.participant_id, agent, metric, score)?);
    }
    Ok(out)
}

pub fn write_ratings_csv(writer: impl Write, ratings: &[RatingSample]) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in ratings {
        w.serialize(CsvRecord {
            participant_id: r.participant_id.clone(),
            agent: r.agent.to_string(),
            metric: r.metric.key().to_string(),
            score: r.score as i64,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(a: &[u8], b: &[u8]) -> Vec<RatingSample> {
        let mut out = Vec::new();
        for m in Metric::ALL {
            for (i, &s) in a.iter().enumerate() {
                out.push(RatingSample::new(format!("P{i}"), Agent::A, m, s).unwrap());
            }
            for (i, &s) in b.iter().enumerate() {
                out.push(RatingSample::new(format!("P{i}"), Agent::B, m, s).unwrap());
            }
        }
        out
    }

    #[test]
    fn same_scores_for_both_agents_give_zero_t() {
        let scores = [1, 4, 6, 2, 7, 3];
        let report = reproduce_table(&dataset(&scores, &scores), None).unwrap();
        assert!(report.rows.iter().all(|r| r.result.t == 0.0));
    }

    #[test]
    fn missing_metric_reported() {
        let mut data = dataset(&[1, 2, 3], &[3, 4, 5]);
        data.retain(|r| !(r.metric == Metric::Naturalness && r.agent == Agent::B));
        assert!(matches!(
            reproduce_table(&data, None),
            Err(StatsError::MissingMetric {
                metric: Metric::Naturalness,
                agent: Agent::B
            })
        ));
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let data = dataset(&[1, 2, 3], &[7, 6, 5]);
        let mut buf = Vec::new();
        write_ratings_csv(&mut buf, &data).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("participant_id,agent,metric,score\n"));
        assert_eq!(read_ratings_csv(text.as_bytes()).unwrap(), data);

        let bad = "participant_id,agent,metric,score\nP1,A,naturalness,9\n";
        assert!(matches!(
            read_ratings_csv(bad.as_bytes()),
            Err(StatsError::BadRecord { line: 2, .. })
        ));
        let bad = "participant_id,agent,metric,score\nP1,C,naturalness,3\n";
        assert!(read_ratings_csv(bad.as_bytes()).is_err());
        let bad = "id,agent,metric,score\n";
        assert!(read_ratings_csv(bad.as_bytes()).is_err());
    }

    #[test]
    fn text_and_json_render() {
        let report = reproduce_table(&dataset(&[1, 2, 3], &[7, 6, 5]), Some((36, 14))).unwrap();
        let text = report.to_text();
        assert!(text.contains("Sync Accuracy"));
        assert!(text.contains("chi2(1, N = 50) = 9.68"));
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["rows"][0]["metric"], "general_preference");
        assert_eq!(json["preference"]["chi2"], 9.68);
        assert!(json["rows"][4]["cohens_d"].is_number());
    }
}
