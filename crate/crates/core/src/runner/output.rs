use super::{ExperimentOutcome, RunnerError};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialization is infallible");
        s.push('\n');
        s
    }
}

/// Every report file as `(relative path, contents)`, `manifest.json` last,
/// plus the manifest itself.
pub fn render_reports(outcome: &ExperimentOutcome) -> Result<(Vec<(String, String)>, Manifest), RunnerError> {
    if outcome.arms.is_empty() {
        return Err(RunnerError::InvalidPlan("nothing to report".into()));
    }
    let mut files = Vec::new();
    let mut arms = Vec::new();
    let mut curves = String::from("arm,trial_index,median_best_so_far\n");
    for arm in &outcome.arms {
        match &arm.result {
            Ok(runs) => {
                for run in &runs.runs {
                    files.push((format!("{}/seed_{}.csv", arm.name, run.seed), run.to_csv(&arm.name)));
                }
                for (t, v) in runs.summary.curve.iter().enumerate() {
                    writeln!(curves, "{},{t},{v}", csv_field(&arm.name)).expect("string write");
                }
                arms.push(json!({
                    "name": arm.name,
                    "status": "ok",
                    "algo": runs.summary.algo,
                    "seeds": runs.summary.seeds,
                    "median_best_loss": runs.summary.median_best_loss,
                    "per_seed_best": runs.summary.per_seed_best,
                }));
            }
            Err(failure) => arms.push(json!({
                "name": arm.name,
                "status": "failed",
                "error": failure,
            })),
        }
    }
    let mut summary = serde_json::to_string_pretty(&json!({ "arms": arms }))
        .expect("summary serialization is infallible");
    summary.push('\n');
    files.push(("summary.json".to_owned(), summary));
    files.push(("curves.csv".to_owned(), curves));

    let mut entries: Vec<ManifestEntry> = files
        .iter()
        .map(|(path, body)| ManifestEntry {
            path: path.clone(),
            sha256: hex::encode(Sha256::digest(body.as_bytes())),
            bytes: body.len(),
        })
        .collect();
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest { files: entries };
    files.push(("manifest.json".to_owned(), manifest.to_json()));
    Ok((files, manifest))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Writes the trial logs, `summary.json`, `curves.csv` and `manifest.json`
/// under `out_dir`. Everything is rendered before the first write.
pub fn emit_reports(outcome: &ExperimentOutcome, out_dir: &Path) -> Result<Manifest, RunnerError> {
    let (files, manifest) = render_reports(outcome)?;
    fs::create_dir_all(out_dir).map_err(|e| RunnerError::io(out_dir, e))?;
    for (rel, body) in &files {
        let path = out_dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| RunnerError::io(parent, e))?;
        }
        fs::write(&path, body).map_err(|e| RunnerError::io(&path, e))?;
    }
    Ok(manifest)
}
