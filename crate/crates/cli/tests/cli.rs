use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_windcast"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    repo().join("crates/core/tests/fixtures").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p
}

/// Relative path listing of every file under `dir`, with contents.
fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn tiny_grid_config(datasets: &str) -> String {
    format!(
        r#"{{
  "out": "out",
  "model": {{ "layers": 1, "hidden_width": 2, "lookback": 4 }},
  "training": {{ "epochs": 1 }},
  "data": {{ "datasets": [{datasets}] }}
}}"#
    )
}

fn dataset_json(site: &str, month: &str, path: &Path) -> String {
    format!(r#"{{"site": "{site}", "month": "{month}", "path": "{}"}}"#, path.display())
}

#[test]
fn help_documents_every_flag() {
    for sub in ["ingest", "train", "grid", "gradcheck"] {
        let o = run(bin().args([sub, "--help"]));
        assert!(o.status.success());
        let text = stdout(&o);
        for flag in ["--config", "--seed", "--out", "--threads"] {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
    }
}

#[test]
fn unknown_flags_fail() {
    let o = run(bin().args(["gradcheck", "--verbose"]));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn gradcheck_passes_with_four_lines() {
    let a = run(bin().arg("gradcheck"));
    assert!(a.status.success(), "{}", stderr(&a));
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|l| l.ends_with("PASS")));
    let b = run(bin().arg("gradcheck"));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ingest_fixture_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("starkville_2022-07.csv");
    let out = dir.path().join("out");
    let o = run(bin().arg("ingest").arg(&input).arg("--out").arg(&out));
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("starkville_2022-07.clean.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 10);
    assert_eq!(header[0], "timestamp");
    assert!(out.join("starkville_2022-07.provenance.txt").is_file());
    assert!(out.join("resolved_config.json").is_file());

    let first = snapshot(&out);
    let o = run(bin().arg("ingest").arg(&input).arg("--out").arg(&out));
    assert!(o.status.success());
    assert_eq!(snapshot(&out), first);
}

#[test]
fn ingest_missing_file_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["ingest", "/definitely/not/here.csv", "--out"]).arg(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("/definitely/not/here.csv"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn train_validation_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"cell": "RNN", "hidden_width": 0}, "training": {"lr": 0}, "sine": {}}"#,
    );
    let o = run(bin().arg("train").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    for needle in ["RNN", "allowed values: lstm, gru", "hidden_width", "training.lr"] {
        assert!(err.contains(needle), "{needle} missing from {err}");
    }
}

#[test]
fn sine_benchmark_config_converges_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let shipped = repo().join("configs/sine_benchmark.json");
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let start = std::time::Instant::now();
        let o = run(bin().arg("train").arg("--config").arg(&shipped).arg("--out").arg(&out));
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(start.elapsed().as_secs() < 300);
        runs.push(out);
    }
    let summary = fs::read_to_string(runs[0].join("summary.txt")).unwrap();
    let rmse: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("train_rmse="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rmse < 0.02, "train RMSE {rmse}");
    for f in ["summary.txt", "plot_data.csv", "model.ckpt"] {
        assert_eq!(fs::read(runs[0].join(f)).unwrap(), fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
    let resolved = fs::read_to_string(runs[0].join("resolved_config.json")).unwrap();
    assert!(resolved.contains("\"seed\": 42"), "{resolved}");
}

#[test]
fn train_on_fixture_writes_everything_inside_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"out": "out", "model": {{"cell": "gru", "mode": "stateful", "layers": 2, "hidden_width": 3, "lookback": 6}},
  "training": {{"epochs": 1}}, "data": {{"datasets": [{}]}}}}"#,
            dataset_json("Meridian", "July", &fixture("meridian_2022-07.csv"))
        ),
    );
    let o = run(bin().arg("train").arg("--config").arg(&cfg).arg("--seed").arg("7"));
    assert!(o.status.success(), "{}", stderr(&o));
    let mut top: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    top.sort();
    assert_eq!(top, ["config.json", "out"]);
    let files: Vec<PathBuf> = snapshot(&dir.path().join("out")).into_iter().map(|(p, _)| p).collect();
    assert_eq!(
        files,
        ["model.ckpt", "plot_data.csv", "resolved_config.json", "summary.txt"].map(PathBuf::from)
    );
    let summary = fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("seed=7\n"));
    assert!(summary.contains("model=Stateful GRU\n"));
}

#[test]
fn full_shape_grid() {
    let dir = tempfile::tempdir().unwrap();
    let mut datasets = Vec::new();
    for site in ["Starkville", "Meridian"] {
        for month in ["January", "July", "October"] {
            let file = format!("{}_2022-07.csv", site.to_lowercase());
            datasets.push(dataset_json(site, month, &fixture(&file)));
        }
    }
    let cfg = write_config(dir.path(), &tiny_grid_config(&datasets.join(", ")));
    let o = run(bin().arg("grid").arg("--config").arg(&cfg).args(["--threads", "2"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    assert_eq!(fs::read_dir(out.join("cells")).unwrap().count(), 24);
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "site,month,model,train_rmse,test_rmse,train_mse,test_mse,paper_train_rmse,paper_test_rmse"
    );
    assert_eq!(lines.len(), 25);
    let keys: Vec<String> = lines[1..]
        .iter()
        .map(|l| l.split(',').take(3).collect::<Vec<_>>().join(","))
        .collect();
    let mut expected = Vec::new();
    for site in ["Starkville", "Meridian"] {
        for month in ["January", "July", "October"] {
            for model in ["Stateless LSTM", "Stateful LSTM", "Stateless GRU", "Stateful GRU"] {
                expected.push(format!("{site},{month},{model}"));
            }
        }
    }
    assert_eq!(keys, expected);
    assert!(lines[5].ends_with(",0.07,0.09"), "{}", lines[5]);
    assert!(lines[21].ends_with(",0.15,0.16"), "{}", lines[21]);
}

#[test]
fn single_cell_grid_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dataset_json("Starkville", "July", &fixture("starkville_2022-07.csv"));
    let json = tiny_grid_config(&ds).replace(
        "\"lookback\": 4 }",
        "\"lookback\": 4, \"variants\": [\"stateless-lstm\"] }",
    );
    let cfg = write_config(dir.path(), &json);
    let o = run(bin().arg("grid").arg("--config").arg(&cfg));
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let first = snapshot(&out);
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let o = run(bin().arg("grid").arg("--config").arg(&cfg).args(["--threads", "1"]));
    assert!(o.status.success());
    let second = snapshot(&out);
    // Only the echoed thread count may differ between the two runs.
    let strip = |s: &[(PathBuf, Vec<u8>)]| -> Vec<(PathBuf, Vec<u8>)> {
        s.iter().filter(|(p, _)| p != Path::new("resolved_config.json")).cloned().collect()
    };
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn grid_with_missing_data_fails_before_training() {
    let dir = tempfile::tempdir().unwrap();
    let ds = [
        dataset_json("A", "July", &dir.path().join("nope-a.csv")),
        dataset_json("B", "July", &fixture("meridian_2022-07.csv")),
        dataset_json("C", "July", &dir.path().join("nope-c.csv")),
    ];
    let cfg = write_config(dir.path(), &tiny_grid_config(&ds.join(", ")));
    let o = run(bin().arg("grid").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("nope-a.csv") && err.contains("nope-c.csv"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"out": "out", "model": {"layers": 2, "hidden_width": 4, "lookback": 6},
  "training": {"epochs": 2, "lr": 1e300, "clip": null}, "sine": {}}"#,
    );
    let o = run(bin().arg("train").arg("--config").arg(&cfg));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("epoch 1"));
}
