use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rdctl::output::parse_records;
use rdctl::scenario::Scenario;

fn rdctl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdctl")).args(args).output().expect("binary runs")
}

fn write_scenario(dir: &Path, name: &str, s: &Scenario) -> String {
    let path = dir.join(name);
    fs::write(&path, toml::to_string(s).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_norms(csv: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let mut c = l.split(',');
            (c.next().unwrap().parse().unwrap(), c.next().unwrap().parse().unwrap())
        })
        .collect()
}

#[test]
fn dump_defaults_round_trips() {
    let out = rdctl(&["dump-defaults"]);
    assert!(out.status.success());
    let parsed: Scenario = toml::from_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(parsed, Scenario::default());

    let out = rdctl(&["dump-defaults", "--passive"]);
    let parsed: Scenario = toml::from_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(parsed, Scenario::passive_baseline());
}

#[test]
fn shipped_scenarios_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let head: Scenario = toml::from_str(&fs::read_to_string(root.join("headline.toml")).unwrap()).unwrap();
    let passive: Scenario = toml::from_str(&fs::read_to_string(root.join("passive.toml")).unwrap()).unwrap();
    assert_eq!(head, Scenario::default());
    assert_eq!(passive, Scenario::passive_baseline());
}

#[test]
fn table1_rows() {
    let out = rdctl(&["table1", "--theta", "-5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(f64, usize)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 12);
    let ns: Vec<usize> = rows.iter().map(|r| r.1).collect();
    assert_eq!(ns, [1, 1, 2, 3, 5, 7, 10, 13, 14, 19, 25, 1]);
}

#[test]
fn open_loop_norm_grows() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario { mode: rdctl::scenario::RunMode::OpenLoop, horizon: 1.0, ..Default::default() };
    let cfg = write_scenario(dir.path(), "open.toml", &s);
    let out_dir = dir.path().join("out");
    let out = rdctl(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--stride", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let norms = read_norms(&fs::read_to_string(out_dir.join("trajectory.csv")).unwrap());
    let late: Vec<f64> = norms.iter().filter(|(t, _)| *t >= 0.1).map(|p| p.1).collect();
    assert!(late.windows(2).all(|w| w[1] > w[0]));
    assert!(!out_dir.join("events.log").exists());
    assert!(out_dir.join("plot.py").exists());
}

#[test]
fn headline_event_log_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = rdctl(&["simulate", "--out", d.to_str().unwrap(), "--stride", "100"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let log = fs::read_to_string(a.join("events.log")).unwrap();
    let events: Vec<_> = parse_records(&log).into_iter().filter(|r| r.tag == "event").collect();
    assert_eq!(events[0].get_f64("theta_after"), Some(0.1));
    let first = &events[1];
    assert_eq!(first.get_f64("theta_before"), Some(0.1));
    assert!((first.get_f64("theta_after").unwrap() - 11.0).abs() < 0.11);
    assert!((first.get_f64("tau").unwrap() - 0.05).abs() < 1e-12);
    for f in ["trajectory.csv", "events.log", "plot_data.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zero_initial_condition() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario {
        horizon: 0.2,
        initial: rdctl::scenario::InitialCondition::Named { name: rdctl::scenario::NamedProfile::Zero },
        ..Default::default()
    };
    let cfg = write_scenario(dir.path(), "zero.toml", &s);
    let out_dir = dir.path().join("out");
    let out = rdctl(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let norms = read_norms(&fs::read_to_string(out_dir.join("trajectory.csv")).unwrap());
    assert!(norms.iter().all(|(_, n)| *n == 0.0));
    let recs = parse_records(&fs::read_to_string(out_dir.join("events.log")).unwrap());
    let reasons: Vec<&str> = recs.iter().filter(|r| r.tag == "event").skip(1).map(|r| r.fields["reason"].as_str()).collect();
    assert_eq!(reasons, ["timer"; 4]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "mode = [").unwrap();
    assert_eq!(rdctl(&["simulate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    let unknown = dir.path().join("unknown.toml");
    fs::write(&unknown, "colour = 3\n").unwrap();
    assert_eq!(rdctl(&["simulate", "--config", unknown.to_str().unwrap()]).status.code(), Some(2));

    let out_dir = dir.path().join("o");
    let o = out_dir.to_str().unwrap();
    assert_eq!(rdctl(&["simulate", "--out", o, "--dt", "-1"]).status.code(), Some(3));
    assert_eq!(rdctl(&["simulate", "--out", o, "--grid", "2"]).status.code(), Some(3));

    let s = Scenario { mode: rdctl::scenario::RunMode::OpenLoop, horizon: 1.0, plant: rdctl::PlantParams { p: 1.0, theta: 100.0, c: 1.0 }, ..Default::default() };
    let cfg = write_scenario(dir.path(), "boom.toml", &s);
    let out = rdctl(&["simulate", "--config", &cfg, "--out", o]);
    assert_eq!(out.status.code(), Some(4));
    let norms = read_norms(&fs::read_to_string(out_dir.join("trajectory.csv")).unwrap());
    assert!(norms.len() > 1 && norms.last().unwrap().0 < 1.0);
}

#[test]
fn compare_self_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let s = Scenario { horizon: 0.3, ..Default::default() };
    let a = write_scenario(dir.path(), "a.toml", &s);
    let out_dir = dir.path().join("cmp");
    let out = rdctl(&["compare", "--config", &a, "--config", &a, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = parse_records(&fs::read_to_string(out_dir.join("report.txt")).unwrap());
    let delta = recs.iter().find(|r| r.tag == "delta").unwrap();
    for k in ["peak_norm", "final_norm", "final_theta_hat"] {
        assert_eq!(delta.get_f64(k), Some(0.0), "{k}");
    }

    let other = Scenario { plant: rdctl::PlantParams { p: 1.0, theta: 7.0, c: 1.0 }, ..s };
    let b = write_scenario(dir.path(), "b.toml", &other);
    let out = rdctl(&["compare", "--config", &a, "--config", &b, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}
