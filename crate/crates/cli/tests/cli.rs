use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fmosim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmosim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn workdir(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn chain_config(n: usize, nu: f64, dissipation: f64, dephasing: f64) -> Value {
    let mut hop = vec![vec![0.0; n]; n];
    for j in 0..n - 1 {
        hop[j][j + 1] = nu;
        hop[j + 1][j] = nu;
    }
    json!({
        "schema_version": 1,
        "fmo": { "epsilon": vec![1.0; n], "nu": hop },
        "noise": { "dissipation": vec![dissipation; n], "dephasing": vec![dephasing; n] },
        "evolution": { "t_max": 1.0, "dt": 0.1, "method": "trotter" }
    })
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn compile_single_z_writes_schedule_and_circuit() {
    let dir = workdir("compile_z");
    let out = fmosim(&["compile", "z:1", "--tau", "1"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let schedule: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("schedule.json")).unwrap()).unwrap();
    assert_eq!(
        schedule["pulse_layers"],
        json!([[], [2, 3, 4, 5, 6, 7], [3, 5, 7], [2, 3, 4, 5, 6, 7], [3, 5, 7]])
    );
    assert_eq!(schedule["target"], "z:1 tau=1.0 omega=1.0");
    let circuit = std::fs::read_to_string(dir.join("circuit.txt")).unwrap();
    assert!(circuit.starts_with("QUBITS 7\n"));
    assert!(circuit.lines().any(|l| l == "X 2"));
}

#[test]
fn compile_pair_and_rejections() {
    let dir = workdir("compile_pair");
    let out = fmosim(
        &[
            "compile",
            "zz:3,4",
            "--schedule-out",
            "zz.json",
            "--circuit-out",
            "zz.txt",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0));
    let schedule: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("zz.json")).unwrap()).unwrap();
    let layers = &schedule["pulse_layers"];
    assert_eq!(layers[1], layers[3]);
    assert_eq!(layers[2], layers[4]);
    for bad in ["zz:1,5", "xy:2,4", "z:9", "q:1", "zz:1"] {
        assert_eq!(fmosim(&["compile", bad], &dir).status.code(), Some(2), "{bad}");
    }
}

#[test]
fn verify_fresh_mutated_and_malformed_schedules() {
    let dir = workdir("verify");
    assert_eq!(
        fmosim(&["compile", "zz:2,3", "--tau", "0.7"], &dir).status.code(),
        Some(0)
    );
    let out = fmosim(&["verify", "schedule.json"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("norm_error:") && text.contains("fidelity:") && text.contains("pass: true"));

    let mut s: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("schedule.json")).unwrap()).unwrap();
    s["pulse_layers"][1].as_array_mut().unwrap().remove(0);
    write_json(&dir, "mutated.json", &s);
    let out = fmosim(&["verify", "mutated.json"], &dir);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("pass: false"));

    std::fs::write(dir.join("broken.json"), "{ not json").unwrap();
    assert_eq!(fmosim(&["verify", "broken.json"], &dir).status.code(), Some(2));
    assert_eq!(fmosim(&["verify", "missing.json"], &dir).status.code(), Some(2));
}

#[test]
fn verify_reports_parameter_mismatch() {
    let dir = workdir("verify_mismatch");
    assert_eq!(fmosim(&["compile", "z:2", "--tau", "1"], &dir).status.code(), Some(0));
    let mut cfg = chain_config(7, 0.1, 0.0, 0.0);
    cfg["nmr"] = json!({ "omega": [1.0, 1.0, 1.0, 1.0, 3.0, 1.0, 1.0], "J": vec![1.0; 6] });
    let other = write_json(&dir, "other.json", &cfg);
    let out = fmosim(&["verify", "schedule.json", "--config", &other], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("target_mismatch"));

    cfg["nmr"]["omega"][1] = json!(2.5);
    let changed = write_json(&dir, "changed.json", &cfg);
    let out = fmosim(&["verify", "schedule.json", "--config", &changed], &dir);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("target_mismatch"));
}

#[test]
fn evolve_without_coupling_or_noise_is_constant() {
    let dir = workdir("evolve_const");
    let cfg = write_json(&dir, "cfg.json", &chain_config(3, 0.0, 0.0, 0.0));
    let out = fmosim(&["evolve", &cfg, "--output", "traj.csv"], &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.join("traj.csv"));
    assert_eq!(header, ["t", "p1", "p2", "p3", "loss", "trace", "purity"]);
    assert_eq!(rows.len(), 11);
    for row in &rows {
        assert!((row[1] - 1.0).abs() < 1e-12 && row[2].abs() < 1e-12 && row[4].abs() < 1e-12);
    }
    assert_eq!(rows.last().unwrap()[0], 1.0);
}

#[test]
fn evolve_dissipation_only_loses_monotonically() {
    let dir = workdir("evolve_loss");
    let cfg = write_json(&dir, "cfg.json", &chain_config(3, 0.1, 0.2, 0.0));
    for method in ["trotter", "exact"] {
        let out = fmosim(&["evolve", &cfg, "--method", method, "--output", "traj.csv"], &dir);
        assert_eq!(out.status.code(), Some(0));
        let (_, rows) = read_csv(&dir.join("traj.csv"));
        let loss: Vec<f64> = rows.iter().map(|r| r[4]).collect();
        assert!(loss.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{method}: {loss:?}");
        assert!(*loss.last().unwrap() > 0.1);
    }
}

#[test]
fn evolve_both_adds_trace_distance_that_shrinks_with_dt() {
    let dir = workdir("evolve_both");
    let mut errors = Vec::new();
    for dt in [0.1, 0.05] {
        let mut cfg = chain_config(4, 0.2, 0.05, 0.05);
        cfg["evolution"]["dt"] = json!(dt);
        let path = write_json(&dir, "cfg.json", &cfg);
        let out = fmosim(&["evolve", &path, "--method", "both", "--output", "traj.csv"], &dir);
        assert_eq!(out.status.code(), Some(0));
        let (header, rows) = read_csv(&dir.join("traj.csv"));
        assert_eq!(header.last().unwrap(), "trace_distance");
        assert!(rows.iter().all(|r| r.iter().all(|x| x.is_finite())));
        errors.push(rows.last().unwrap()[header.len() - 1]);
    }
    let ratio = errors[0] / errors[1];
    assert!((1.7..=2.3).contains(&ratio), "{errors:?}");
}

#[test]
fn evolve_rejects_bad_configs() {
    let dir = workdir("evolve_bad");
    let mut cfg = chain_config(3, 0.1, 0.0, 0.0);
    cfg["evolution"]["unknown"] = json!(true);
    let path = write_json(&dir, "unknown.json", &cfg);
    assert_eq!(fmosim(&["evolve", &path], &dir).status.code(), Some(2));
    let mut cfg = chain_config(3, 0.1, 0.0, 0.0);
    cfg["noise"]["dephasing"][0] = json!(-0.1);
    let path = write_json(&dir, "negative.json", &cfg);
    assert_eq!(fmosim(&["evolve", &path], &dir).status.code(), Some(2));
    assert_eq!(fmosim(&["evolve", "nowhere.json"], &dir).status.code(), Some(2));
}

#[test]
fn evolve_writes_state_dump_when_configured() {
    let dir = workdir("evolve_states");
    let mut cfg = chain_config(2, 0.1, 0.1, 0.1);
    cfg["output"] = json!({ "trajectory_csv": "out.csv", "states_json": "states.json" });
    let path = write_json(&dir, "cfg.json", &cfg);
    assert_eq!(fmosim(&["evolve", &path], &dir).status.code(), Some(0));
    assert!(dir.join("out.csv").exists());
    let states: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("states.json")).unwrap()).unwrap();
    assert_eq!(states.as_array().unwrap().len(), 11);
    assert_eq!(states[0]["entries"].as_array().unwrap().len(), 16);
}

#[test]
fn channel_reports() {
    let dir = workdir("channel");
    let run = |args: &[&str]| -> Value {
        let out = fmosim(args, &dir);
        assert_eq!(out.status.code(), Some(0));
        serde_json::from_str(&stdout(&out)).unwrap()
    };
    let id = run(&["channel", "dissipation", "--rate", "0.3", "--time", "0"]);
    assert_eq!(id["cptp_status"], "verified");
    assert_eq!(
        id["kraus"][0],
        json!([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]])
    );

    let d = run(&["channel", "dissipation", "--rate", "1", "--time", "0.1"]);
    let k22 = d["kraus"][0][1][1][0].as_f64().unwrap();
    assert!((k22 - (-0.4f64).exp()).abs() < 1e-15);
    assert!(d["circuit"].as_str().unwrap().contains("MEASURE_DISCARD 2"));

    let p = run(&["channel", "dephasing-paper", "--rate", "0.5", "--time", "1"]);
    assert_eq!(p["cptp_status"], "violated");
    assert!(p["deficit_norm"].as_f64().unwrap() > 0.0);
    assert!(p["circuit"].is_null());

    let c = run(&["channel", "dephasing-corrected", "--rate", "0.5", "--time", "1"]);
    assert_eq!(c["cptp_status"], "verified");

    assert_eq!(
        fmosim(&["channel", "dissipation", "--rate", "-1", "--time", "1"], &dir)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fmosim(&["channel", "bogus", "--rate", "1", "--time", "1"], &dir)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn shipped_config_runs() {
    let dir = workdir("shipped");
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.json");
    let out = fmosim(&["evolve", cfg, "--method", "trotter"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.join("trajectory.csv"));
    assert_eq!(header.len(), 11);
    assert_eq!(rows.len(), 41);
}
