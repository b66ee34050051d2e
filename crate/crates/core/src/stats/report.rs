use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ProxyCost;

use super::{kendall_tau, noise_stats, NoiseStats, StatsError};

const FIXED_COLUMNS: [&str; 3] = ["run_id", "seed", "proxy_total"];

/// One run: its proxy cost and whatever chip metrics were measured for it elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub run_id: String,
    pub seed: u64,
    pub proxy_total: f64,
    /// Full breakdown when the sample comes from this toolkit's own reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy: Option<ProxyCost>,
    pub metrics: BTreeMap<String, f64>,
}

/// Samples plus the metric column order to report in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub columns: Vec<String>,
    pub samples: Vec<MetricSample>,
}

impl MetricTable {
    /// Columns in sorted order of every metric name that appears.
    pub fn from_samples(samples: Vec<MetricSample>) -> Self {
        let mut columns: Vec<String> = samples.iter().flat_map(|s| s.metrics.keys().cloned()).collect();
        columns.sort();
        columns.dedup();
        MetricTable { columns, samples }
    }
}

/// Reads `run_id,seed,proxy_total,<metric>...`. Empty metric cells mean "not measured".
pub fn read_metrics_csv(path: &Path) -> Result<MetricTable> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, reason: String| Error::Parse { file: file.clone(), line, reason };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 3 || names[..3] != FIXED_COLUMNS {
        return Err(parse_err(1, format!("header must start with {}", FIXED_COLUMNS.join(","))));
    }
    let columns: Vec<String> = names[3..].iter().map(|s| s.to_string()).collect();
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            record[k]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("`{}` is not a number in column {}", &record[k], names[k])))
        };
        let seed = record[1]
            .parse::<u64>()
            .map_err(|_| parse_err(line, format!("`{}` is not a seed", &record[1])))?;
        let mut metrics = BTreeMap::new();
        for (k, name) in columns.iter().enumerate() {
            if !record[k + 3].is_empty() {
                metrics.insert(name.clone(), num(k + 3)?);
            }
        }
        samples.push(MetricSample {
            run_id: record[0].to_string(),
            seed,
            proxy_total: num(2)?,
            proxy: None,
            metrics,
        });
    }
    Ok(MetricTable { columns, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub metric: String,
    pub n: usize,
    /// Rank correlation against the proxy total; `None` when undefined.
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_error: Option<String>,
    pub noise: NoiseStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub variant: String,
    pub n_samples: usize,
    pub proxy: Option<NoiseStats>,
    pub rows: Vec<MetricRow>,
    pub notices: Vec<String>,
}

/// Per metric: Kendall tau-b against the proxy total over the samples that have the
/// metric, and the metric's noise statistics. Metrics seen in fewer than two samples
/// are skipped with a notice.
pub fn correlation_report(table: &MetricTable) -> std::result::Result<CorrelationReport, StatsError> {
    let mut rows = Vec::new();
    let mut notices = Vec::new();
    for metric in &table.columns {
        let (proxy, values): (Vec<f64>, Vec<f64>) = table
            .samples
            .iter()
            .filter_map(|s| s.metrics.get(metric).map(|&v| (s.proxy_total, v)))
            .unzip();
        if values.len() < 2 {
            notices.push(format!("metric `{metric}` omitted: present in {} sample(s)", values.len()));
            continue;
        }
        let noise = noise_stats(&values)?;
        let (tau, tau_error) = match kendall_tau(&proxy, &values) {
            Ok(t) => (Some(t), None),
            Err(e @ StatsError::UndefinedCorrelation) => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        rows.push(MetricRow { metric: metric.clone(), n: values.len(), tau, tau_error, noise });
    }
    let totals: Vec<f64> = table.samples.iter().map(|s| s.proxy_total).collect();
    let proxy = match noise_stats(&totals) {
        Ok(s) => Some(s),
        Err(StatsError::TooFewSamples { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CorrelationReport {
        variant: "tau-b".into(),
        n_samples: table.samples.len(),
        proxy,
        rows,
        notices,
    })
}

impl CorrelationReport {
    /// Aligned text table with columns metric, tau, mean, sigma, sigma/|mean|.
    pub fn to_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "undef".to_string(), |v| format!("{v:.4}"));
        let mut lines = vec![["metric".to_string(), "tau".into(), "mean".into(), "sigma".into(), "sigma/|mean|".into()]];
        for r in &self.rows {
            lines.push([
                r.metric.clone(),
                fmt(r.tau),
                fmt(Some(r.noise.mean)),
                fmt(Some(r.noise.std_dev)),
                fmt(r.noise.ratio),
            ]);
        }
        let widths: Vec<usize> = (0..5).map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for l in &lines {
            let _ = write!(out, "{:<w$}", l[0], w = widths[0]);
            for c in 1..5 {
                let _ = write!(out, "  {:>w$}", l[c], w = widths[c]);
            }
            out.push('\n');
        }
        for n in &self.notices {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(i: usize, proxy: f64, metrics: &[(&str, f64)]) -> MetricSample {
        MetricSample {
            run_id: format!("r{i}"),
            seed: i as u64,
            proxy_total: proxy,
            proxy: None,
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    #[test]
    fn self_and_inverse_correlation() {
        let samples: Vec<_> = (0..6)
            .map(|i| {
                let p = i as f64 * 1.5;
                sample(i, p, &[("copy", p), ("inverse", -p + 1e-9 * i as f64), ("rare", 1.0)])
            })
            .map(|mut s| {
                if s.seed > 0 {
                    s.metrics.remove("rare");
                }
                s
            })
            .collect();
        let r = correlation_report(&MetricTable::from_samples(samples)).unwrap();
        let row = |m: &str| r.rows.iter().find(|r| r.metric == m).unwrap();
        assert_eq!(row("copy").tau, Some(1.0));
        assert_eq!(row("inverse").tau, Some(-1.0));
        assert!(r.rows.iter().all(|r| r.metric != "rare"));
        assert_eq!(r.notices.len(), 1);
    }

    #[test]
    fn identical_samples_have_undefined_tau() {
        let samples: Vec<_> = (0..4).map(|i| sample(i, 2.0, &[("wl", 3.0)])).collect();
        let r = correlation_report(&MetricTable::from_samples(samples)).unwrap();
        assert_eq!(r.rows[0].tau, None);
        assert_eq!(r.rows[0].noise.std_dev, 0.0);
        assert!(r.to_table().contains("undef"));
    }

    #[test]
    fn csv_round() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "run_id,seed,proxy_total,wns,tns\na,1,0.5,-3,\nb,2,0.7,-1,-10\n").unwrap();
        let t = read_metrics_csv(&path).unwrap();
        assert_eq!(t.columns, vec!["wns", "tns"]);
        assert_eq!(t.samples[0].metrics.len(), 1);
        assert_eq!(t.samples[1].metrics["tns"], -10.0);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "run_id,seed,proxy_total,wns\na,1,0.5,x\n").unwrap();
        assert!(matches!(read_metrics_csv(&path), Err(Error::Parse { line: 2, .. })));
        std::fs::write(&path, "id,seed,proxy\n").unwrap();
        assert!(matches!(read_metrics_csv(&path), Err(Error::Parse { line: 1, .. })));
    }
}
