//! Metric registry and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::analysis::CorrelationMatrix;
use crate::error::{Error, Result};

/// The fixed set of reported metrics, in table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricKey {
    #[serde(rename = "original.cluster.kmeans")]
    OrigKMeans,
    #[serde(rename = "original.cluster.agglomerative")]
    OrigAgg,
    #[serde(rename = "original.multiclass.0shot")]
    OrigZeroShot,
    #[serde(rename = "original.multiclass.10shot")]
    OrigTenShot,
    #[serde(rename = "triplet.ori-ori.t_hard")]
    OriOriHard,
    #[serde(rename = "triplet.ori-ori.t_easy")]
    OriOriEasy,
    #[serde(rename = "triplet.ori-imp.t_hard")]
    OriImpHard,
    #[serde(rename = "triplet.ori-imp.t_easy")]
    OriImpEasy,
    #[serde(rename = "binary.original")]
    BinaryOri,
    #[serde(rename = "binary.implicature")]
    BinaryImp,
    #[serde(rename = "binary.negation")]
    BinaryNeg,
    #[serde(rename = "implicature.cluster.kmeans")]
    ImpKMeans,
    #[serde(rename = "implicature.cluster.agglomerative")]
    ImpAgg,
    #[serde(rename = "implicature.multiclass.0shot")]
    ImpZeroShot,
    #[serde(rename = "implicature.multiclass.10shot")]
    ImpTenShot,
}

impl MetricKey {
    pub const ALL: [MetricKey; 15] = [
        MetricKey::OrigKMeans,
        MetricKey::OrigAgg,
        MetricKey::OrigZeroShot,
        MetricKey::OrigTenShot,
        MetricKey::OriOriHard,
        MetricKey::OriOriEasy,
        MetricKey::OriImpHard,
        MetricKey::OriImpEasy,
        MetricKey::BinaryOri,
        MetricKey::BinaryImp,
        MetricKey::BinaryNeg,
        MetricKey::ImpKMeans,
        MetricKey::ImpAgg,
        MetricKey::ImpZeroShot,
        MetricKey::ImpTenShot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKey::OrigKMeans => "original.cluster.kmeans",
            MetricKey::OrigAgg => "original.cluster.agglomerative",
            MetricKey::OrigZeroShot => "original.multiclass.0shot",
            MetricKey::OrigTenShot => "original.multiclass.10shot",
            MetricKey::OriOriHard => "triplet.ori-ori.t_hard",
            MetricKey::OriOriEasy => "triplet.ori-ori.t_easy",
            MetricKey::OriImpHard => "triplet.ori-imp.t_hard",
            MetricKey::OriImpEasy => "triplet.ori-imp.t_easy",
            MetricKey::BinaryOri => "binary.original",
            MetricKey::BinaryImp => "binary.implicature",
            MetricKey::BinaryNeg => "binary.negation",
            MetricKey::ImpKMeans => "implicature.cluster.kmeans",
            MetricKey::ImpAgg => "implicature.cluster.agglomerative",
            MetricKey::ImpZeroShot => "implicature.multiclass.0shot",
            MetricKey::ImpTenShot => "implicature.multiclass.10shot",
        }
    }

    pub fn parse(s: &str) -> Option<MetricKey> {
        MetricKey::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Column sub-header.
    pub fn short(self) -> &'static str {
        match self {
            MetricKey::OrigKMeans | MetricKey::ImpKMeans => "KM",
            MetricKey::OrigAgg | MetricKey::ImpAgg => "Agg",
            MetricKey::OrigZeroShot | MetricKey::ImpZeroShot => "0-shot",
            MetricKey::OrigTenShot | MetricKey::ImpTenShot => "10-shot",
            MetricKey::OriOriHard | MetricKey::OriImpHard => "T_hard",
            MetricKey::OriOriEasy | MetricKey::OriImpEasy => "T_easy",
            MetricKey::BinaryOri => "Ori",
            MetricKey::BinaryImp => "Imp",
            MetricKey::BinaryNeg => "Neg",
        }
    }

    /// Column group header.
    pub fn group(self) -> &'static str {
        match self {
            MetricKey::OrigKMeans | MetricKey::OrigAgg => "Original Clustering",
            MetricKey::OrigZeroShot | MetricKey::OrigTenShot => "Original Multi-class",
            MetricKey::OriOriHard | MetricKey::OriOriEasy => "Triplet (Ori-Ori)",
            MetricKey::OriImpHard | MetricKey::OriImpEasy => "Triplet (Ori-Imp)",
            MetricKey::BinaryOri | MetricKey::BinaryImp | MetricKey::BinaryNeg => "Binary",
            MetricKey::ImpKMeans | MetricKey::ImpAgg => "Implicature Clustering",
            MetricKey::ImpZeroShot | MetricKey::ImpTenShot => "Implicature Multi-class",
        }
    }

    pub fn header(self) -> String {
        format!("{} {}", self.group(), self.short())
    }
}

/// Metric values for one model, stored as fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_id: String,
    pub metrics: BTreeMap<MetricKey, f64>,
    pub timestamp: String,
    /// Free-form counts (triplets built, anchors skipped, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl EvalReport {
    pub fn new(model_id: impl Into<String>) -> Self {
        EvalReport {
            model_id: model_id.into(),
            metrics: BTreeMap::new(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            details: BTreeMap::new(),
        }
    }

    /// Build from values listed in registry order.
    pub fn from_values(model_id: impl Into<String>, values: &[f64]) -> Result<Self> {
        if values.len() != MetricKey::ALL.len() {
            return Err(Error::invalid(format!(
                "expected {} metric values, got {}",
                MetricKey::ALL.len(),
                values.len()
            )));
        }
        let mut r = EvalReport::new(model_id);
        for (k, v) in MetricKey::ALL.into_iter().zip(values) {
            r.set(k, *v);
        }
        Ok(r)
    }

    pub fn set(&mut self, key: MetricKey, value: f64) {
        self.metrics.insert(key, value);
    }

    pub fn get(&self, key: MetricKey) -> Option<f64> {
        self.metrics.get(&key).copied()
    }

    pub fn require(&self, key: MetricKey) -> Result<f64> {
        self.get(key).ok_or_else(|| Error::MissingMetric {
            model: self.model_id.clone(),
            metric: key.as_str().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Percentage with one decimal, as printed in tables.
pub fn percent(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

fn columns(reports: &[EvalReport]) -> Vec<MetricKey> {
    MetricKey::ALL
        .into_iter()
        .filter(|k| reports.iter().any(|r| r.metrics.contains_key(k)))
        .collect()
}

fn header_rows(out: &mut String, cols: &[MetricKey]) {
    out.push_str("| Model |");
    for k in cols {
        let _ = write!(out, " {} |", k.header());
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in cols {
        out.push_str("---:|");
    }
    out.push('\n');
}

/// Markdown table with one row per report; metrics absent from every
/// report are omitted, absent cells show `-`.
pub fn markdown_table(reports: &[EvalReport]) -> String {
    let cols = columns(reports);
    let mut out = String::new();
    header_rows(&mut out, &cols);
    for r in reports {
        let _ = write!(out, "| {} |", r.model_id);
        for &k in &cols {
            let cell = r.get(k).map(percent).unwrap_or_else(|| "-".into());
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    out
}

/// Per-cell change of `report` against `baseline`, in percentage points.
pub fn deltas(report: &EvalReport, baseline: &EvalReport) -> BTreeMap<MetricKey, f64> {
    report
        .metrics
        .iter()
        .filter_map(|(k, v)| baseline.get(*k).map(|b| (*k, (v - b) * 100.0)))
        .collect()
}

/// Comparison table marking each cell `+` (improved) or `-` (worse)
/// relative to the named baseline row. Ranks, if given, are shown next to
/// the model id.
pub fn comparison_table(
    reports: &[EvalReport],
    baseline: &str,
    ranks: Option<&BTreeMap<String, f64>>,
) -> Result<String> {
    let base = reports
        .iter()
        .find(|r| r.model_id == baseline)
        .ok_or_else(|| Error::invalid(format!("baseline `{baseline}` not among reports")))?;
    let cols = columns(reports);
    let mut out = String::new();
    header_rows(&mut out, &cols);
    for r in reports {
        let name = match ranks.and_then(|m| m.get(&r.model_id)) {
            Some(rank) => format!("{} ({rank:.2})", r.model_id),
            None => r.model_id.clone(),
        };
        let _ = write!(out, "| {name} |");
        for &k in &cols {
            let cell = match (r.get(k), base.get(k)) {
                (None, _) => "-".to_string(),
                (Some(v), Some(b)) if r.model_id != baseline => {
                    let d = (v - b) * 100.0;
                    let mark = if d > 0.0 {
                        " +"
                    } else if d < 0.0 {
                        " -"
                    } else {
                        ""
                    };
                    format!("{}{mark}", percent(v))
                }
                (Some(v), _) => percent(v),
            };
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Long-form CSV: `model,metric,value`.
pub fn metrics_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("model,metric,value\n");
    for r in reports {
        for (k, v) in &r.metrics {
            let _ = writeln!(out, "{},{},{v}", r.model_id, k.as_str());
        }
    }
    out
}

/// Square CSV of Pearson coefficients; undefined entries are empty.
pub fn correlation_csv(m: &CorrelationMatrix) -> String {
    let mut out = String::from("metric");
    for k in &m.keys {
        let _ = write!(out, ",{}", k.as_str());
    }
    out.push('\n');
    for (k, row) in m.keys.iter().zip(&m.values) {
        out.push_str(k.as_str());
        for v in row {
            match v {
                Some(x) => {
                    let _ = write!(out, ",{x}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trip() {
        for k in MetricKey::ALL {
            assert_eq!(MetricKey::parse(k.as_str()), Some(k));
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
        let mut sorted = MetricKey::ALL.to_vec();
        sorted.sort();
        assert_eq!(sorted, MetricKey::ALL.to_vec());
    }

    #[test]
    fn report_json_round_trip() {
        let r = EvalReport::from_values("m", &[0.5; 15]).unwrap();
        let back: EvalReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn selector_subset_renders_only_present_columns() {
        let mut r = EvalReport::new("m");
        r.set(MetricKey::OriOriHard, 0.25);
        let md = markdown_table(&[r]);
        assert!(md.contains("T_hard"));
        assert!(!md.contains("KM"));
        assert!(md.contains("| m | 25.0 |"));
    }

    #[test]
    fn identical_reports_zero_deltas() {
        let a = EvalReport::from_values("a", &[0.3; 15]).unwrap();
        let d = deltas(&a, &a);
        assert_eq!(d.len(), 15);
        assert!(d.values().all(|&x| x == 0.0));
    }

    #[test]
    fn comparison_marks() {
        let base = EvalReport::from_values("base", &[0.5; 15]).unwrap();
        let mut vals = [0.5; 15];
        vals[0] = 0.6;
        vals[1] = 0.4;
        let other = EvalReport::from_values("new", &vals).unwrap();
        let md = comparison_table(&[base, other], "base", None).unwrap();
        let row = md.lines().find(|l| l.starts_with("| new")).unwrap();
        assert!(row.contains("60.0 +"));
        assert!(row.contains("40.0 -"));
        assert!(comparison_table(&[], "x", None).is_err());
    }
}
