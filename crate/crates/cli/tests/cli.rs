use std::fs;
use std::process::{Command, Output};

use poisson_csi::SlotSeq;

fn cli(args: &[&str]) -> Output {
    cli_env(args, None)
}

fn cli_env(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_poisson-csi"));
    cmd.args(args).env_remove("POISSON_CSI_SEED");
    if let Some(s) = seed {
        cmd.env("POISSON_CSI_SEED", s);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL: [&str; 6] = ["--T", "20", "--trials", "20", "--seed", "4"];

#[test]
fn capacity_at_zero_dark_current() {
    let o = cli(&["capacity", "--A", "1", "--lambda", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("0.530738 bits/sec"), "{text}");
    assert!(text.contains("p* = 0.367879"), "{text}");
}

#[test]
fn capacity_json_with_slot() {
    let o = cli(&["capacity", "--A", "1", "--lambda", "0.1", "--delta", "1e-4", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let c = v["capacity_bits_per_sec"].as_f64().unwrap();
    let d = v["discrete_bits_per_sec"].as_f64().unwrap();
    assert!((c - d).abs() / c < 0.05);
}

#[test]
fn causal_and_no_csi_agree() {
    let o = cli(&["causal", "--A", "1", "--lambda", "0.1", "--delta", "1e-3", "--mu", "0.05", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["difference"].as_f64().unwrap() < 1e-6);
    assert!(v["causal_bits_per_slot"].as_f64().unwrap() > 0.0);
}

#[test]
fn sanov_bound_holds() {
    let o = cli(&["sanov", "--n", "1000", "--p", "0.3", "--q", "0.5", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bound_holds"], true);
    let tail = v["exact_tail"].as_f64().unwrap();
    assert!(tail > 0.0 && tail < 1e-30);
}

#[test]
fn simulate_is_reproducible_and_seed_env_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let o = cli(&[&["simulate", "--out", path.to_str().unwrap()][..], &SMALL].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "T = 20.0\ntrials = 20\nseed = 4\n").unwrap();
    let from_file = cli(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.stdout, fs::read(&a).unwrap());
    let env = cli_env(&["simulate", "--config", cfg.to_str().unwrap()], Some("99"));
    let v: serde_json::Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 99);
    // an explicit flag still wins
    let flag = cli_env(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "4"], Some("99"));
    assert_eq!(flag.stdout, from_file.stdout);
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(
        &cfg,
        "T = 20.0\ntrials = 5\nrate_fraction = 0.5\n[params]\nlambda = 0.2\n[adversary.adversarial]\nstrategy = \"front_loaded\"\n",
    )
    .unwrap();
    let o = cli(&["simulate", "--config", cfg.to_str().unwrap(), "--lambda", "0.3", "--trials", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["params"]["lambda"], 0.3);
    assert_eq!(v["config"]["trials"], 7);
    assert_eq!(v["config"]["rate_fraction"], 0.5);
    assert_eq!(v["config"]["adversary"]["adversarial"]["strategy"], "front_loaded");
}

#[test]
fn random_states_report_the_decomposition() {
    let o = cli(&[&["simulate", "--states", "poisson:0.02"][..], &SMALL].concat());
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let d = &v["decomposition"];
    let total = d["large_state_trials"].as_u64().unwrap() + d["small_state_trials"].as_u64().unwrap();
    assert_eq!(total, 20);
}

#[test]
fn trace_dumps_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (format, ext) in [("text", "txt"), ("rle", "rle")] {
        let trace = dir.path().join(format);
        let o = cli(&[
            &["simulate", "--trace", trace.to_str().unwrap(), "--trace-format", format][..],
            &SMALL,
        ]
        .concat());
        assert!(o.status.success());
        let read = |name: &str| {
            let path = trace.join(format!("{name}.{ext}"));
            if format == "text" {
                SlotSeq::read_text(fs::read(path).unwrap().as_slice()).unwrap()
            } else {
                SlotSeq::from_rle_bytes(&fs::read(path).unwrap()).unwrap()
            }
        };
        let (s, y) = (read("states"), read("output"));
        assert_eq!(s.len(), 22_000);
        assert_eq!(s.and_count(&y).unwrap(), s.count_ones());
        assert_eq!(read("input").len(), 22_000);
    }
}

#[test]
fn sweep_writes_a_table_and_keeps_going_past_bad_points() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = cli(&[
        &["sweep", "--axis", "T", "--values", "1,20", "--out", csv.to_str().unwrap(), "--json-dir"][..],
        &[dir.path().join("points").to_str().unwrap()],
        &SMALL[2..],
    ]
    .concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("axis,value,status"));
    assert!(lines[1].starts_with("T,1,error"));
    assert!(lines[2].starts_with("T,20,ok,20"));
    assert!(dir.path().join("points/point_001.json").exists());
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["capacity", "--bogus"]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    // invalid parameters are configuration errors
    assert_eq!(cli(&["capacity", "--A", "-1"]).status.code(), Some(2));
    assert_eq!(cli(&[&["simulate", "--T", "1"][..], &SMALL[2..]].concat()).status.code(), Some(2));
    assert_eq!(cli_env(&["simulate"], Some("abc")).status.code(), Some(2));
    assert_eq!(cli(&["simulate", "--states", "poisson"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "T = \"long\"\n").unwrap();
    assert_eq!(cli(&["simulate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(cli(&["simulate", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let unwritable = dir.path().join("no/such/dir/out.json");
    let o = cli(&[&["simulate", "--out", unwritable.to_str().unwrap()][..], &SMALL].concat());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot write"));
}
