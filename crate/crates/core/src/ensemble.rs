//! Link evaluation over scenario ensembles, anatomy averaging, calibration
//! against measurements and the connection-loss KPI.
//!
//! Cells are `(pose, rx)` pairs; entries that differ only in anatomy are
//! averaged into one cell, on linear magnitude by default.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::decompose::CoefficientVector;
use crate::error::{Error, Result};
use crate::network::{link, ChannelMatrix};

pub const DEFAULT_THRESHOLD_DB: f64 = -70.0;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScenarioTag {
    pub anatomy: String,
    pub pose: String,
    pub rx: String,
}

impl ScenarioTag {
    pub fn new(anatomy: &str, pose: &str, rx: &str) -> Self {
        ScenarioTag {
            anatomy: anatomy.into(),
            pose: pose.into(),
            rx: rx.into(),
        }
    }
}

impl std::fmt::Display for ScenarioTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}", self.anatomy, self.pose, self.rx)
    }
}

impl std::str::FromStr for ScenarioTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('/').collect();
        match parts.as_slice() {
            [a, p, r] if !a.is_empty() && !p.is_empty() && !r.is_empty() => Ok(ScenarioTag::new(a, p, r)),
            _ => Err(Error::InvalidArgument(format!("scenario tag `{s}` is not anatomy/pose/rx"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    pub tag: ScenarioTag,
    pub weight: f64,
    /// `M'21`.
    pub channel: ChannelMatrix,
    /// Backscatter seen by the transmitter.
    pub reflection: ChannelMatrix,
    /// `R'` of the receiver at this location.
    pub receive: CoefficientVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEnsemble {
    entries: Vec<ScenarioEntry>,
    frequency: f64,
}

impl ScenarioEnsemble {
    pub fn new(entries: Vec<ScenarioEntry>) -> Result<Self> {
        let first = entries.first().ok_or(Error::EmptyEnsemble)?;
        let frequency = first.channel.frequency;
        let j_tx = first.channel.values.ncols();
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if (total - 1.0).abs() > 1e-12 || entries.iter().any(|e| !(e.weight >= 0.0)) {
            return Err(Error::InvalidArgument(format!("scenario weights must be non-negative and sum to 1, sum is {total}")));
        }
        for e in &entries {
            for f in [e.channel.frequency, e.reflection.frequency, e.receive.frequency] {
                if (f - frequency).abs() > 1e-9 * frequency {
                    return Err(Error::FrequencyMismatch { a: frequency, b: f });
                }
            }
            if e.channel.values.ncols() != j_tx || e.reflection.values.ncols() != j_tx {
                return Err(Error::DimensionMismatch(format!("scenario {} does not share the transmit truncation {j_tx}", e.tag)));
            }
            if e.receive.truncation() != e.channel.values.nrows() {
                return Err(Error::DimensionMismatch(format!("scenario {}: receive vector does not match the channel rows", e.tag)));
            }
        }
        Ok(ScenarioEnsemble { entries, frequency })
    }

    /// Equal weights over all entries.
    pub fn uniform(mut entries: Vec<ScenarioEntry>) -> Result<Self> {
        let w = 1.0 / entries.len().max(1) as f64;
        entries.iter_mut().for_each(|e| e.weight = w);
        ScenarioEnsemble::new(entries)
    }

    pub fn entries(&self) -> &[ScenarioEntry] {
        &self.entries
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn tx_truncation(&self) -> usize {
        self.entries[0].channel.values.ncols()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragingDomain {
    /// Weighted mean of `|S21|`, then converted to dB.
    Linear,
    /// Weighted mean of `20 log10 |S21|`.
    Decibel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellAverage {
    pub pose: String,
    pub rx: String,
    pub mean_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub entries: Vec<(ScenarioTag, Complex64)>,
    /// Cells in order of first appearance of their pose, then receiver.
    pub cells: Vec<CellAverage>,
    pub threshold_db: f64,
    pub kpi_fraction: f64,
    pub kpi_count: usize,
}

pub fn to_db(magnitude: f64) -> f64 {
    20.0 * magnitude.log10()
}

pub fn evaluate_ensemble(ens: &ScenarioEnsemble, t: &CoefficientVector) -> Result<LinkReport> {
    evaluate_ensemble_with(ens, t, AveragingDomain::Linear, DEFAULT_THRESHOLD_DB)
}

pub fn evaluate_ensemble_with(ens: &ScenarioEnsemble, t: &CoefficientVector, domain: AveragingDomain, threshold_db: f64) -> Result<LinkReport> {
    if t.truncation() != ens.tx_truncation() {
        return Err(Error::DimensionMismatch(format!(
            "transmit vector has {} modes, ensemble channels have {}",
            t.truncation(),
            ens.tx_truncation()
        )));
    }
    let s21: Vec<Complex64> = ens.entries.par_iter().map(|e| link(&e.receive, &e.channel, t)).collect::<Result<_>>()?;
    let entries: Vec<(ScenarioTag, Complex64)> = ens.entries.iter().map(|e| e.tag.clone()).zip(s21).collect();
    let weighted: Vec<(ScenarioTag, f64, f64)> = ens.entries.iter().zip(&entries).map(|(e, (tag, s))| (tag.clone(), e.weight, s.norm())).collect();
    let cells = average_cells(&weighted, domain);
    let mut report = LinkReport {
        entries,
        cells,
        threshold_db,
        kpi_fraction: 0.0,
        kpi_count: 0,
    };
    let (fraction, count) = kpi(&report, threshold_db);
    report.kpi_fraction = fraction;
    report.kpi_count = count;
    Ok(report)
}

/// Averages `(tag, weight, |S21|)` triples over anatomy into `(pose, rx)` cells.
pub fn average_cells(samples: &[(ScenarioTag, f64, f64)], domain: AveragingDomain) -> Vec<CellAverage> {
    let mut keys: Vec<(String, String)> = Vec::new();
    let mut poses: Vec<&str> = Vec::new();
    let mut rxs: Vec<&str> = Vec::new();
    for (tag, _, _) in samples {
        if !poses.contains(&tag.pose.as_str()) {
            poses.push(&tag.pose);
        }
        if !rxs.contains(&tag.rx.as_str()) {
            rxs.push(&tag.rx);
        }
    }
    for p in &poses {
        for r in &rxs {
            if samples.iter().any(|(t, _, _)| t.pose == *p && t.rx == *r) {
                keys.push((p.to_string(), r.to_string()));
            }
        }
    }
    keys.into_iter()
        .map(|(pose, rx)| {
            let (mut wsum, mut acc) = (0.0, 0.0);
            let members: Vec<_> = samples.iter().filter(|(t, _, _)| t.pose == pose && t.rx == rx).collect();
            let equal = members.iter().all(|(_, w, _)| *w == 0.0);
            for (_, w, mag) in &members {
                let w = if equal { 1.0 } else { *w };
                wsum += w;
                acc += w * match domain {
                    AveragingDomain::Linear => *mag,
                    AveragingDomain::Decibel => to_db(*mag),
                };
            }
            let mean = acc / wsum;
            let mean_db = match domain {
                AveragingDomain::Linear => to_db(mean),
                AveragingDomain::Decibel => mean,
            };
            CellAverage { pose, rx, mean_db }
        })
        .collect()
}

/// Fraction and count of cells strictly below `threshold_db`.
pub fn kpi(report: &LinkReport, threshold_db: f64) -> (f64, usize) {
    let count = report.cells.iter().filter(|c| c.mean_db < threshold_db).count();
    let fraction = if report.cells.is_empty() { 0.0 } else { count as f64 / report.cells.len() as f64 };
    (fraction, count)
}

/// `simulated_avg / measured_avg`, both linear magnitudes.
pub fn calibration_factor(simulated_avg: f64, measured_avg: f64) -> Result<f64> {
    if measured_avg.is_nan() || measured_avg <= 0.0 {
        return Err(Error::ZeroMeasurement(measured_avg));
    }
    if simulated_avg.is_nan() || simulated_avg <= 0.0 {
        return Err(Error::InvalidArgument(format!("simulated average must be positive, got {simulated_avg}")));
    }
    Ok(simulated_avg / measured_avg)
}

/// One measured sample of a receiver's signal strength.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MeasurementRecord {
    pub subject: String,
    pub pose: String,
    pub rx: String,
    pub rssi_db: f64,
}

/// Five-number summary with whiskers at the most extreme samples within
/// 1.5 IQR of the quartiles.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxplotStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn boxplot(values: &[f64]) -> Result<BoxplotStats> {
    if values.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (q1, median, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
    Ok(BoxplotStats {
        q1,
        median,
        q3,
        lower_whisker: inside.first().copied().unwrap_or(q1),
        upper_whisker: inside.last().copied().unwrap_or(q3),
        outliers: v.into_iter().filter(|x| *x < lo || *x > hi).collect(),
    })
}

/// Measured samples of one `(pose, rx)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredCell {
    pub pose: String,
    pub rx: String,
    /// Per-subject statistics in order of first appearance.
    pub subjects: Vec<(String, BoxplotStats)>,
    /// Mean linear magnitude over all samples, in dB.
    pub mean_db: f64,
}

/// Groups measurements into cells with per-subject boxplots. `factor` is a
/// linear-magnitude calibration factor applied to every sample.
pub fn summarize_measurements(records: &[MeasurementRecord], factor: f64) -> Result<Vec<MeasuredCell>> {
    if records.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let offset = to_db(factor);
    let samples: Vec<(ScenarioTag, f64, f64)> = records
        .iter()
        .map(|r| (ScenarioTag::new(&r.subject, &r.pose, &r.rx), 1.0, 10f64.powf((r.rssi_db + offset) / 20.0)))
        .collect();
    average_cells(&samples, AveragingDomain::Linear)
        .into_iter()
        .map(|cell| {
            let mut subjects: Vec<(String, Vec<f64>)> = Vec::new();
            for r in records.iter().filter(|r| r.pose == cell.pose && r.rx == cell.rx) {
                match subjects.iter_mut().find(|(s, _)| *s == r.subject) {
                    Some((_, v)) => v.push(r.rssi_db + offset),
                    None => subjects.push((r.subject.clone(), vec![r.rssi_db + offset])),
                }
            }
            let subjects = subjects.into_iter().map(|(s, v)| boxplot(&v).map(|b| (s, b))).collect::<Result<_>>()?;
            Ok(MeasuredCell {
                pose: cell.pose,
                rx: cell.rx,
                subjects,
                mean_db: cell.mean_db,
            })
        })
        .collect()
}

/// Mean linear magnitude of all measured samples.
pub fn measured_average(records: &[MeasurementRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Ok(records.iter().map(|r| 10f64.powf(r.rssi_db / 20.0)).sum::<f64>() / records.len() as f64)
}

/// Mean `|S21|` over all entries of a report, unweighted.
pub fn simulated_average(report: &LinkReport) -> f64 {
    report.entries.iter().map(|(_, s)| s.norm()).sum::<f64>() / report.entries.len().max(1) as f64
}
