use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const TOY_PLAN: &str = "experiment = trotter-plan\nseed = 3\nh_norm = 1.5\nt_total = 2\neps_gate = 0.0001\n\
                        gates_per_step = 4\nc_strobe = 0.5\n";
const SMALL_S3: &str = "experiment = s3-braiding\nseed = 11\nl = 12\np_pair = 0.05\nn_trials = 20\nlog_trials = 2\n";

fn ftsim(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ftsim"));
    cmd.args(args).env_remove("FTSIM_OUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_names_the_missing_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plan.cfg", &TOY_PLAN.replace("seed = 3\n", ""));
    let o = ftsim(&["validate", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    // a seed on the command line is enough
    let o = ftsim(&["validate", "--config", &cfg, "--seed", "4"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn unknown_and_malformed_lines_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plan.cfg", &format!("{TOY_PLAN}colour = blue\n"));
    let o = ftsim(&["validate", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("colour") && err.contains("line 8"), "{err}");

    let cfg = write(dir.path(), "bad.cfg", &format!("{TOY_PLAN}eps_gate\n"));
    let err = stderr(&ftsim(&["validate", "--config", &cfg], &[]));
    assert!(err.contains("line 8"), "{err}");
}

#[test]
fn run_writes_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plan.cfg", TOY_PLAN);
    let out = dir.path().join("out");
    let o = ftsim(&["trotter-plan", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("table.csv")).unwrap();
    assert_eq!(
        table.lines().next().unwrap(),
        "source,dt,ratio_to_optimum,stroboscopic,noise,model_total,measured_total"
    );
    let r = report(&out);
    assert_eq!(r["experiment"], "trotter-plan");
    assert_eq!(r["seed"], 3);
    assert_eq!(r["config_fingerprint"].as_str().unwrap().len(), 64);
    // sqrt(b/a) with a = 0.5·2·1.5², b = 2·1e-4·4
    let dt = r["records"]["optimum"]["dt"].as_f64().unwrap();
    assert!((dt - (8e-4f64 / 2.25).sqrt()).abs() < 1e-12);
    assert!(!dir
        .path()
        .read_dir()
        .unwrap()
        .any(|e| e.unwrap().file_name().to_string_lossy().contains("partial")));
}

#[test]
fn env_var_sets_output_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plan.cfg", TOY_PLAN);
    let from_env = dir.path().join("env");
    let o = ftsim(&["trotter-plan", "--config", &cfg], &[("FTSIM_OUT_DIR", &from_env)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(from_env.join("report.json").exists());

    let from_flag = dir.path().join("flag");
    let o = ftsim(
        &["trotter-plan", "--config", &cfg, "--out", from_flag.to_str().unwrap()],
        &[("FTSIM_OUT_DIR", &dir.path().join("unused"))],
    );
    assert!(o.status.success());
    assert!(from_flag.join("report.json").exists());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s3.cfg", SMALL_S3);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(
        ftsim(&["s3-braiding", "--config", &cfg, "--out", a.to_str().unwrap()], &[])
            .status
            .success()
    );
    let o = ftsim(
        &[
            "s3-braiding",
            "--config",
            &cfg,
            "--out",
            b.to_str().unwrap(),
            "--seed",
            "12",
        ],
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!((ra["seed"].as_u64(), rb["seed"].as_u64()), (Some(11), Some(12)));
    assert_ne!(ra["config_fingerprint"], rb["config_fingerprint"]);
}

#[test]
fn wrong_subcommand_for_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plan.cfg", TOY_PLAN);
    let out = dir.path().join("out");
    let o = ftsim(&["mc-sweep", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trotter-plan"));
    assert!(!out.exists());
}

#[test]
fn replay_matches_the_live_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s3.cfg", SMALL_S3);
    let out = dir.path().join("run");
    let o = ftsim(&["s3-braiding", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let logged = report(&out)["records"]["logged_trials"].as_array().unwrap().clone();
    assert_eq!(logged.len(), 4);
    for entry in logged {
        let log = out.join(entry["log"].as_str().unwrap());
        let replayed = dir
            .path()
            .join(format!("replay-{}-{}", entry["arm"].as_str().unwrap(), entry["trial"]));
        let o = ftsim(
            &[
                "replay",
                log.to_str().unwrap(),
                "--config",
                &cfg,
                "--out",
                replayed.to_str().unwrap(),
            ],
            &[],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let r = report(&replayed);
        assert_eq!(r["final_state_sha256"], entry["final_state_sha256"]);
        let fluxes: Vec<String> = std::fs::read_to_string(replayed.join("table.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|row| row.split(',').nth(2).unwrap().to_string())
            .collect();
        let expect: Vec<String> = serde_json::from_value(entry["final_fluxes"].clone()).unwrap();
        assert_eq!(fluxes, expect);
    }
}

#[test]
fn empty_log_replays_to_the_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "empty.jsonl", "");
    let out = dir.path().join("out");
    let o = ftsim(&["replay", &log, "--size", "8", "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["events"], 0);
    assert_eq!(r["total_flux"], "e");
    let table = std::fs::read_to_string(out.join("table.csv")).unwrap();
    assert_eq!(table.trim_end(), "position,id,flux,x,y,kind,partner");
}

#[test]
fn corrupt_log_names_its_line_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let log = write(dir.path(), "bad.jsonl", "{\"not\": \"an event\"}\n");
    let out = dir.path().join("out");
    let o = ftsim(&["replay", &log, "--size", "8", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
    assert!(!out.exists());
}
