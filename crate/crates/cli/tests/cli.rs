use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(format!("{name}.toml"))
}

fn debtrun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_debtrun")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Copy of a preset with a coarser grid and fewer paths.
fn small_config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let text = std::fs::read_to_string(preset(name)).unwrap();
    let mut value: toml::Table = text.parse().unwrap();
    value.insert("grid".into(), toml::Value::Table("y_max = 6.0\nn_y = 150\nn_tau = 300".parse().unwrap()));
    for (k, v) in extra.parse::<toml::Table>().unwrap() {
        match (value.get_mut(&k), v) {
            (Some(toml::Value::Table(t)), toml::Value::Table(u)) => t.extend(u),
            (_, v) => {
                value.insert(k, v);
            }
        }
    }
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, toml::to_string(&value).unwrap()).unwrap();
    path
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn successful_run_prints_output_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), "fig3", "");
    let out = tmp.path().join("out");
    let o = debtrun(&["barriers", "-c", s(&config), "-o", s(&out), "--gnuplot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("barriers.csv"));
    assert!(stdout.contains("plot.gp"));
    assert!(out.join("plot.gp").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn invalid_config_reports_every_field_and_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), "fig2", "[model]\nsigma = -0.4\nbeta = 0.0\n[mc]\nn_paths = 0\n");
    let o = debtrun(&["default-prob", "-c", s(&config), "-o", s(&tmp.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8(o.stderr).unwrap();
    for field in ["model.sigma", "model.beta", "mc.n_paths"] {
        assert!(stderr.contains(field), "{field} missing from: {stderr}");
    }
}

#[test]
fn unparsable_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    std::fs::write(&config, "[model\nsigma = ").unwrap();
    let o = debtrun(&["barriers", "-c", s(&config), "-o", s(&tmp.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_barrier_file_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), "fig2", "");
    let missing = tmp.path().join("nope.csv");
    let o = debtrun(&["simulate", "-c", s(&config), "-o", s(&tmp.path().join("out")), "--barriers", s(&missing)]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn precomputed_barriers_reproduce_the_solved_run() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), "fig2", "[simulate]\nn_scenarios = 20\n");
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert!(debtrun(&["barriers", "-c", s(&config), "-o", s(&a)]).status.success());
    assert!(debtrun(&["simulate", "-c", s(&config), "-o", s(&b)]).status.success());
    let file = a.join("barrier_t0_b0.csv");
    let o = debtrun(&["simulate", "-c", s(&config), "-o", s(&c), "--barriers", s(&file)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["paths.csv", "scenarios.csv", "summary.json"] {
        assert_eq!(std::fs::read(b.join(f)).unwrap(), std::fs::read(c.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn rollover_events_agree_with_the_emitted_barriers() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), "fig2", "[simulate]\nn_scenarios = 200\nv0 = 8.0\n");
    let out = tmp.path().join("out");
    assert!(debtrun(&["barriers", "-c", s(&config), "-o", s(&out)]).status.success());
    let o = debtrun(&["simulate", "-c", s(&config), "-o", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let barriers: Vec<(f64, f64, f64)> = read_csv(&out.join("barriers.csv"))
        .iter()
        .filter(|r| !r[3].is_empty())
        .map(|r| (r[2].parse().unwrap(), r[4].parse().unwrap(), r[5].parse().unwrap()))
        .collect();
    let dates = [2.0, 4.0, 6.0, 8.0];
    let mut seen = std::collections::BTreeMap::<String, usize>::new();
    let mut decisions = 0;
    for r in read_csv(&out.join("paths.csv")) {
        let (t, v): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        let event = &r[4];
        if !dates.contains(&t) {
            assert!(matches!(event, "" | "insolvency_default" | "maturity"), "{event} at t={t}");
            continue;
        }
        decisions += 1;
        let &(_, d_run, d_ill) = barriers.iter().find(|b| b.0 == t).expect("barrier at rollover date");
        let expected = if v >= d_run {
            "rollover"
        } else if v >= d_ill {
            "unsuccessful_run"
        } else {
            "illiquidity_default"
        };
        // Insolvency can coincide with a rollover date.
        if event != "insolvency_default" {
            assert_eq!(event, expected, "t={t} V={v} D_run={d_run} D_ill={d_ill}");
        }
        *seen.entry(event.to_string()).or_default() += 1;
    }
    assert!(decisions > 0);
    assert!(seen.len() >= 2, "only {seen:?}");
}

#[test]
fn replay_detects_tampered_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_config(tmp.path(), "fig8", "");
    let out = tmp.path().join("out");
    assert!(debtrun(&["compare-tenor", "-c", s(&config), "-o", s(&out)]).status.success());
    let manifest = out.join("manifest.json");

    let o = debtrun(&["replay", s(&manifest), "-o", s(&tmp.path().join("r1"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(&manifest).unwrap();
    let mut m: serde_json::Value = serde_json::from_str(&text).unwrap();
    m["outputs"][0]["sha256"] = "0".repeat(64).into();
    std::fs::write(&manifest, serde_json::to_vec(&m).unwrap()).unwrap();
    let o = debtrun(&["replay", s(&manifest), "-o", s(&tmp.path().join("r2"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("differs"));
}
