//! End-to-end acceptance criteria. Each test prints one `PASS`/`FAIL` line
//! and fails when its criterion does not hold. Everything runs offline on
//! replay fixtures and the surrogate objective.

mod common;

use llmhpo::config::{parse_config, parse_search_space, Attribute, HyperparameterConfig};
use llmhpo::llm::{fixture_name, ReplayTransport, SampleOptions};
use llmhpo::objectives::{surrogate_eval, Evaluation, ObjectiveError, SurrogateParams};
use llmhpo::optimizer::{run_optimization, Algo, OptimizationRun, TpeParams};
use llmhpo::presets;
use llmhpo::runner::{run_rq1, run_rq2};
use llmhpo::stats::special::{f_survival, gamma_p, regularized_beta};
use llmhpo::stats::TestKind;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

struct Check {
    failures: Vec<String>,
}

impl Check {
    fn new() -> Check {
        Check { failures: Vec::new() }
    }

    fn that(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn within(&mut self, elapsed: Duration, limit: Duration) {
        self.that(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"));
    }

    /// Writes the verdict to the process's stdout directly, so it shows
    /// even when the harness captures test output.
    fn report(self, id: u32, title: &str, elapsed: Duration) {
        let line = if self.failures.is_empty() {
            format!("PASS criterion {id}: {title} ({elapsed:.2?})\n")
        } else {
            format!("FAIL criterion {id}: {title} ({elapsed:.2?}): {}\n", self.failures.join("; "))
        };
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(line.as_bytes());
        let _ = out.flush();
        if !self.failures.is_empty() {
            panic!("criterion {id} failed: {}", self.failures.join("; "));
        }
    }
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/experiment")
}

fn reply(config: &str) -> String {
    format!("Here is my recommendation.\n\n```json\n{config}\n```\n")
}

fn config_json(lr: &str, momentum: f64, gamma: f64) -> String {
    format!(
        "{{\"learning_rate\": {lr}, \"momentum\": {momentum}, \"batch_size\": 32, \"num_epochs\": 3, \
         \"gamma\": {gamma}, \"step_size\": [8, 12]}}"
    )
}

fn write_fixtures(dir: &Path, replies: &[String]) {
    for (i, r) in replies.iter().enumerate() {
        fs::write(dir.join(fixture_name(i)), r).unwrap();
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn experiment_run(out_dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_llmhpo"))
        .arg("experiment-run")
        .arg("--config")
        .arg(fixture_dir().join("plan.json"))
        .arg("--out-dir")
        .arg(out_dir)
        .args(["--transport", "replay", "--replay-dir"])
        .arg(fixture_dir().join("replies"))
        .output()
        .unwrap()
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn criterion_1_table_round_trips() {
    let start = Instant::now();
    let mut check = Check::new();
    for name in ["table1_space.json", "table3_space.json", "table4_space.json"] {
        let text = fs::read_to_string(data(name)).unwrap();
        match parse_search_space(&text) {
            Ok(parsed) => {
                let back = parsed.value.to_pretty_json() + "\n";
                check.that(back == text, format!("{name} does not serialize back byte-identically"));
            }
            Err(e) => check.that(false, format!("{name}: {e}")),
        }
    }
    let text = fs::read_to_string(data("table2_config.json")).unwrap();
    let config = parse_config(&text).unwrap().value;
    check.that(
        config.to_pretty_json() + "\n" == text,
        "table2_config.json does not serialize back byte-identically",
    );

    // Term by term: lr, momentum, gamma, mean step, relative to the
    // surrogate's optimum (0.02, 0.005, 3e-4, 20).
    let expected = (0.9f64.log10() - 0.02f64.log10()).powi(2)
        + ((0.015 - 0.005) / 0.1f64).powi(2)
        + (0.1f64.log10() - 3e-4f64.log10()).powi(2)
        + ((10.0 - 20.0) / 20.0f64).powi(2);
    let loss = surrogate_eval(&config, &SurrogateParams::noiseless()).loss;
    check.that((expected - 9.358).abs() <= 1e-3, format!("oracle gives {expected}"));
    check.that((loss - 9.358).abs() <= 1e-3, format!("surrogate gives {loss}"));
    check.that((loss - expected).abs() <= 1e-12, format!("surrogate {loss} vs oracle {expected}"));
    check.that(config == presets::table2_config(), "preset differs from data file");

    let elapsed = start.elapsed();
    check.within(elapsed, Duration::from_secs(1));
    check.report(1, "tables I-IV round-trip; Table II surrogate loss 9.358", elapsed);
}

#[test]
fn criterion_2_identical_replies_have_zero_dispersion() {
    let start = Instant::now();
    let mut check = Check::new();
    let dir = tempfile::tempdir().unwrap();
    let replies = vec![reply(&config_json("0.01", 0.9, 0.1)); 100];
    write_fixtures(dir.path(), &replies);
    let transport = ReplayTransport::from_dir(dir.path()).unwrap();
    let (batch, report) =
        run_rq1(&presets::usecase_security(), 100, &transport, &SampleOptions::default()).unwrap();
    check.that(batch.samples.len() == 100 && report.parsed == 100, "expected 100 parsed samples");
    for attr in Attribute::ALL {
        let a = report.attribute(attr);
        check.that(
            a.std == 0.0 && a.variance == 0.0 && a.iqr == 0.0,
            format!("{} dispersion ({}, {}, {})", a.attribute, a.std, a.variance, a.iqr),
        );
    }
    let elapsed = start.elapsed();
    check.within(elapsed, Duration::from_secs(5));
    check.report(2, "100 identical replies give zero std, variance and IQR", elapsed);
}

#[test]
fn criterion_3_batches_differing_in_learning_rate() {
    let start = Instant::now();
    let mut check = Check::new();
    let dir = tempfile::tempdir().unwrap();
    let lr_a: Vec<f64> = (0..100).map(|i| 0.010 + 0.001 * (i % 10) as f64).collect();
    let lr_b: Vec<f64> = lr_a.iter().map(|x| x + 0.00165).collect();
    let replies: Vec<String> = lr_a
        .iter()
        .chain(&lr_b)
        .map(|lr| reply(&config_json(&format!("{lr:.5}"), 0.9, 0.1)))
        .collect();
    write_fixtures(dir.path(), &replies);
    let transport = ReplayTransport::from_dir(dir.path()).unwrap();
    let (batch_a, batch_b, report) = run_rq2(
        &presets::usecase_security(),
        &presets::usecase_finance(),
        100,
        &transport,
        TestKind::Anova,
        &SampleOptions::default(),
    )
    .unwrap();

    let lr = report.attribute(Attribute::LearningRate).anova.clone().unwrap();
    check.that(lr.p_value < 1e-3, format!("learning_rate p = {}", lr.p_value));
    for attr in [Attribute::Momentum, Attribute::Gamma] {
        let p = report.attribute(attr).anova.as_ref().unwrap().p_value;
        check.that(p == 1.0, format!("{} p = {p}", attr.key()));
    }
    check.that(report.config_jaccard == 0.0, format!("config Jaccard = {}", report.config_jaccard));

    let column = |batch: &llmhpo::llm::SampleBatch| -> Vec<f64> {
        batch.configs().iter().map(|c| c.learning_rate).collect()
    };
    let (f, df_within, p) = common::anova_two_groups(&column(&batch_a), &column(&batch_b));
    let f_stat = lr.f_stat.unwrap_or(f64::INFINITY);
    check.that((f_stat - f).abs() <= 1e-9 * f, format!("F = {f_stat}, reference {f}"));
    check.that(lr.df_within as f64 == df_within, "df_within differs from reference");
    check.that((lr.p_value - p).abs() < 1e-6, format!("p = {}, reference {p}", lr.p_value));

    let elapsed = start.elapsed();
    check.within(elapsed, Duration::from_secs(5));
    check.report(3, "learning_rate separates two batches; other attributes do not", elapsed);
}

#[test]
fn criterion_4_special_functions() {
    let start = Instant::now();
    let mut check = Check::new();
    for (a, b, x) in common::beta_grid() {
        let d = (regularized_beta(a, b, x) - common::beta_reference(a, b, x)).abs();
        check.that(d < 1e-8, format!("I_{x}({a}, {b}) off by {d:e}"));
    }
    for (a, x) in common::gamma_grid() {
        let d = (gamma_p(a, x) - common::gamma_p_reference(a, x)).abs();
        check.that(d < 1e-8, format!("P({a}, {x}) off by {d:e}"));
    }
    let p: f64 = f_survival(1.5, 1.0, 4.0);
    check.that(
        (p - 0.2877).abs() <= 1e-4,
        format!("F(1,4)=1.5 gives p = {p:.7} (reference {:.7}), expected 0.2877 +- 1e-4", {
            common::t_two_sided_p(1.5f64.sqrt(), 4.0)
        }),
    );
    let elapsed = start.elapsed();
    check.report(4, "incomplete beta and gamma against quadrature; F(1,4) hand case", elapsed);
}

#[test]
fn criterion_5_arm_ordering() {
    let start = Instant::now();
    let mut check = Check::new();
    let dir = tempfile::tempdir().unwrap();
    let out = experiment_run(dir.path());
    check.that(out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let mut medians = BTreeMap::new();
    for arm in summary["arms"].as_array().unwrap() {
        check.that(arm["status"] == "ok", format!("arm {} failed", arm["name"]));
        check.that(arm["seeds"].as_array().map_or(0, Vec::len) == 20, "expected 20 seeds");
        medians.insert(
            arm["name"].as_str().unwrap().to_owned(),
            arm["median_best_loss"].as_f64().unwrap_or(f64::NAN),
        );
    }
    let m = |name: &str| medians[name];
    check.that(
        m("refined") <= m("llm_space") && m("llm_space") <= m("wide"),
        format!("refined {} / llm_space {} / wide {}", m("refined"), m("llm_space"), m("wide")),
    );
    for (name, v) in &medians {
        if name != "literature" {
            check.that(m("literature") > *v, format!("literature {} not worse than {name} {v}", m("literature")));
        }
    }
    let trial_rows = fs::read_to_string(dir.path().join("wide/seed_0.csv")).unwrap().lines().count() - 1;
    check.that(trial_rows == 10, format!("{trial_rows} trials per run"));

    let elapsed = start.elapsed();
    check.within(elapsed, Duration::from_secs(30));
    check.report(5, "refined <= LLM space <= wide < literature config (median of 20 seeds)", elapsed);
}

fn toy_objective(config: &HyperparameterConfig) -> Result<Evaluation, ObjectiveError> {
    let loss = (config.momentum - 0.2).powi(2);
    Ok(Evaluation {
        loss,
        accuracy: 1.0 / (1.0 + loss),
    })
}

#[test]
fn criterion_6_tpe_sanity_on_toy_space() {
    let start = Instant::now();
    let mut check = Check::new();
    let space = parse_search_space(
        r#"{"learning_rate": {"type": "fixed", "value": 0.01},
            "momentum": {"type": "uniform", "lo": 0, "hi": 1},
            "batch_size": {"type": "fixed", "value": 32},
            "num_epochs": {"type": "fixed", "value": 3},
            "gamma": {"type": "fixed", "value": 0.1},
            "step_size": {"type": "fixed", "value": [10]},
            "trials": 10, "epochs_per_trial": 3}"#,
    )
    .unwrap()
    .value;
    let run = |algo, seed, params: &TpeParams| -> OptimizationRun {
        run_optimization(&space, &toy_objective, algo, seed, params).unwrap()
    };
    let defaults = TpeParams::default();
    let tpe: Vec<f64> = (0..20).map(|s| run(Algo::Tpe, s, &defaults).best_loss()).collect();
    let random: Vec<f64> = (0..20).map(|s| run(Algo::Random, s, &defaults).best_loss()).collect();
    let (mt, mr) = (median(tpe), median(random));
    check.that(mt < mr, format!("median best loss TPE {mt:e} vs random {mr:e}"));

    let startup_only = TpeParams {
        n_startup: 10,
        ..TpeParams::default()
    };
    for seed in 0..20 {
        let a = run(Algo::Tpe, seed, &startup_only);
        let b = run(Algo::Random, seed, &startup_only);
        check.that(a.trials == b.trials, format!("seed {seed}: TPE with n_startup = trials differs from random"));
    }
    let elapsed = start.elapsed();
    check.report(
        6,
        &format!("TPE beats random on the toy space ({mt:.2e} < {mr:.2e}); startup-only TPE equals random"),
        elapsed,
    );
}

#[test]
fn criterion_7_experiment_is_deterministic() {
    let start = Instant::now();
    let mut check = Check::new();
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("first"), dir.path().join("second"));
    for out_dir in [&first, &second] {
        let out = experiment_run(out_dir);
        check.that(out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let (a, b) = (read_tree(&first), read_tree(&second));
    check.that(!a.is_empty(), "empty output tree");
    check.that(a.keys().eq(b.keys()), "file sets differ");
    for (path, bytes) in &a {
        check.that(b.get(path) == Some(bytes), format!("{path} differs"));
    }
    let manifest: serde_json::Value = serde_json::from_slice(&a["manifest.json"]).unwrap();
    let listed = manifest["files"].as_array().unwrap().len();
    check.that(listed + 1 == a.len(), format!("manifest lists {listed} of {} files", a.len()));
    let elapsed = start.elapsed();
    check.report(7, "two experiment runs give byte-identical trees and manifests", elapsed);
}

#[test]
fn criterion_8_malformed_replies_are_recorded() {
    let start = Instant::now();
    let mut check = Check::new();
    let dir = tempfile::tempdir().unwrap();
    let malformed = [
        "I cannot help with that request.".to_owned(),
        "```json\n{\"learning_rate\": 0.01, \"momentum\": \n```".to_owned(),
        reply("{\"learning_rate\": 0.01, \"momentum\": 0.9, \"batch_size\": 32}"),
        reply(&config_json("-0.5", 0.9, 0.1)),
        reply(&config_json("\"fast\"", 0.9, 0.1)),
        reply(&config_json("0.01", 1.5, 0.1)),
        String::new(),
    ];
    let bad_at = [3usize, 11, 29, 40, 58, 77, 99];
    let mut good_lr = Vec::new();
    let mut replies = Vec::new();
    let mut next_bad = 0;
    for i in 0..100 {
        if bad_at.contains(&i) {
            replies.push(malformed[next_bad].clone());
            next_bad += 1;
        } else {
            let lr = format!("{:.3}", 0.001 * (1 + i % 13) as f64);
            good_lr.push(lr.parse::<f64>().unwrap());
            replies.push(reply(&config_json(&lr, 0.9, 0.1)));
        }
    }
    write_fixtures(dir.path(), &replies);
    let transport = ReplayTransport::from_dir(dir.path()).unwrap();
    let (batch, report) =
        run_rq1(&presets::usecase_security(), 100, &transport, &SampleOptions::default()).unwrap();

    check.that(batch.configs().len() == 93, format!("{} parsed", batch.configs().len()));
    check.that(batch.failure_count() == 7, format!("{} failures", batch.failure_count()));
    let failed: Vec<usize> = batch.samples.iter().filter(|s| s.config().is_none()).map(|s| s.index).collect();
    check.that(failed == bad_at, format!("failures at {failed:?}"));
    check.that(report.samples == 100 && report.parsed == 93 && report.failures == 7, "report counts");

    let lr = report.attribute(Attribute::LearningRate);
    let mean = good_lr.iter().sum::<f64>() / 93.0;
    let variance = good_lr.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 92.0;
    check.that(lr.n == 93, format!("learning_rate n = {}", lr.n));
    check.that(
        (lr.variance - variance).abs() <= 1e-12 * variance,
        format!("learning_rate variance {} vs {variance}", lr.variance),
    );
    let elapsed = start.elapsed();
    check.report(8, "7 malformed of 100 replies: 93 parsed, 7 recorded, report over 93", elapsed);
}
