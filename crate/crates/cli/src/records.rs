//! Result emission: line-delimited JSON records, an optional CSV projection
//! of the distributions, and the human-readable summary.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use qref_core::JointDistribution;

/// Note attached to every distribution record so files are self-describing.
pub const BASIS_NOTE: &str = "measured bases use the half-angle convention \
    (angle 0 = z basis); device outcomes are listed per axis";

pub struct RecordSet {
    records: Vec<Value>,
    failed_checks: Vec<String>,
}

impl RecordSet {
    pub fn new(
        kind: &str,
        seed: u64,
        angles_unit: &str,
        inputs: Value,
        warnings: &[String],
    ) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut records = vec![json!({
            "record": "meta",
            "tool": "qref",
            "version": env!("CARGO_PKG_VERSION"),
            "kind": kind,
            "seed": seed,
            "angles_unit": angles_unit,
            "timestamp_unix": timestamp,
            "inputs": inputs,
        })];
        for warning in warnings {
            records.push(json!({ "record": "warning", "message": warning }));
        }
        Self {
            records,
            failed_checks: Vec::new(),
        }
    }

    pub fn push(&mut self, value: Value) {
        self.records.push(value);
    }

    pub fn distribution(&mut self, name: &str, jd: &JointDistribution) {
        self.records.push(json!({
            "record": "distribution",
            "name": name,
            "systems": jd.systems(),
            "axes": jd.axis_labels(),
            "shape": jd.shape(),
            "probabilities": jd.probabilities(),
            "basis_ambiguous": jd.basis_ambiguous(),
            "clamped_entries": jd.clamped_entries(),
            "basis_convention": BASIS_NOTE,
        }));
    }

    pub fn state(&mut self, name: &str, amplitudes: &[Complex64]) {
        let pairs: Vec<[f64; 2]> = amplitudes.iter().map(|z| [z.re, z.im]).collect();
        self.records.push(json!({
            "record": "state",
            "name": name,
            "amplitudes": pairs,
        }));
    }

    pub fn check(&mut self, name: &str, deviation: f64, tolerance: f64) {
        let pass = deviation <= tolerance;
        if !pass {
            self.failed_checks.push(name.to_string());
        }
        self.records.push(json!({
            "record": "check",
            "name": name,
            "deviation": deviation,
            "tolerance": tolerance,
            "pass": pass,
        }));
    }

    pub fn all_passed(&self) -> bool {
        self.failed_checks.is_empty()
    }

    pub fn failed_checks(&self) -> &[String] {
        &self.failed_checks
    }

    pub fn finish(&mut self) {
        self.records.push(json!({
            "record": "status",
            "ok": self.failed_checks.is_empty(),
            "failed_checks": self.failed_checks,
        }));
    }

    /// Writes one JSON object per line.
    pub fn write_jsonl(&self, path: &Path) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        for record in &self.records {
            serde_json::to_writer(&mut writer, record)?;
            writeln!(writer)?;
        }
        writer.flush()
    }

    /// CSV projection of every distribution record: one row per table cell.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        let mut writer = std::io::BufWriter::new(file);
        writeln!(writer, "distribution,outcomes,probability")?;
        for record in &self.records {
            if record["record"] != "distribution" {
                continue;
            }
            let name = record["name"].as_str().unwrap_or("?");
            let axes: Vec<Vec<String>> = record["axes"]
                .as_array()
                .map(|axes| {
                    axes.iter()
                        .map(|axis| {
                            axis.as_array()
                                .map(|labels| {
                                    labels
                                        .iter()
                                        .map(|l| l.as_str().unwrap_or("?").to_string())
                                        .collect()
                                })
                                .unwrap_or_default()
                        })
                        .collect()
                })
                .unwrap_or_default();
            let probabilities: Vec<f64> = record["probabilities"]
                .as_array()
                .map(|values| values.iter().filter_map(Value::as_f64).collect())
                .unwrap_or_default();
            let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
            for (flat, p) in probabilities.iter().enumerate() {
                let labels = unflatten_labels(flat, &shape, &axes);
                writeln!(writer, "{name},{},{p}", labels.join("/"))?;
            }
        }
        writer.flush()
    }

    /// Plain-text summary to stdout.
    pub fn print_summary(&self) {
        for record in &self.records {
            match record["record"].as_str() {
                Some("meta") => {
                    println!(
                        "qref {} run (seed {})",
                        record["kind"].as_str().unwrap_or("?"),
                        record["seed"]
                    );
                }
                Some("warning") => {
                    println!("warning: {}", record["message"].as_str().unwrap_or(""));
                }
                Some("distribution") => {
                    println!("{}:", record["name"].as_str().unwrap_or("?"));
                    let axes: Vec<Vec<String>> = record["axes"]
                        .as_array()
                        .map(|axes| {
                            axes.iter()
                                .map(|axis| {
                                    axis.as_array()
                                        .map(|labels| {
                                            labels
                                                .iter()
                                                .map(|l| l.as_str().unwrap_or("?").to_string())
                                                .collect()
                                        })
                                        .unwrap_or_default()
                                })
                                .collect()
                        })
                        .unwrap_or_default();
                    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
                    if let Some(probabilities) = record["probabilities"].as_array() {
                        for (flat, p) in probabilities.iter().enumerate() {
                            let labels = unflatten_labels(flat, &shape, &axes);
                            println!(
                                "  P({}) = {:.12}",
                                labels.join(", "),
                                p.as_f64().unwrap_or(f64::NAN)
                            );
                        }
                    }
                }
                Some("check") => {
                    println!(
                        "check {}: {} (deviation {:.3e}, tolerance {:.1e})",
                        record["name"].as_str().unwrap_or("?"),
                        if record["pass"].as_bool().unwrap_or(false) {
                            "PASS"
                        } else {
                            "FAIL"
                        },
                        record["deviation"].as_f64().unwrap_or(f64::NAN),
                        record["tolerance"].as_f64().unwrap_or(f64::NAN),
                    );
                }
                Some("value") => {
                    println!(
                        "{} = {}",
                        record["name"].as_str().unwrap_or("?"),
                        record["value"]
                    );
                }
                _ => {}
            }
        }
    }
}

fn unflatten_labels(flat: usize, shape: &[usize], axes: &[Vec<String>]) -> Vec<String> {
    let mut labels = Vec::with_capacity(shape.len());
    let mut rem = flat;
    let mut digits = vec![0usize; shape.len()];
    for k in (0..shape.len()).rev() {
        digits[k] = rem % shape[k];
        rem /= shape[k];
    }
    for (axis, &digit) in digits.iter().enumerate() {
        labels.push(axes[axis][digit].clone());
    }
    labels
}

/// Sibling path with the `.csv` extension.
pub fn csv_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

/// Draws `draws` samples from a joint table, returning per-cell counts keyed
/// by the joined outcome labels.
pub fn sample_table(
    jd: &JointDistribution,
    draws: usize,
    rng: &mut impl Rng,
) -> Vec<(String, usize)> {
    let shape: Vec<usize> = jd.shape().to_vec();
    let probabilities = jd.probabilities();
    let mut counts = vec![0usize; probabilities.len()];
    for _ in 0..draws {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = probabilities.len() - 1;
        for (k, p) in probabilities.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = k;
                break;
            }
        }
        counts[chosen] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(flat, &count)| {
            let labels = unflatten_labels(flat, &shape, jd.axis_labels());
            (labels.join(","), count)
        })
        .collect()
}

pub fn complex_pairs(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}
