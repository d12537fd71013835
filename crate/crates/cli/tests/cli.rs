use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bcdsr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcdsr")).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A short table-1 scenario written into `dir`.
fn config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    let text = format!("sim_time = 2.0\nseeds = [1, 2]\n{extra}\n[network]\ngroups = 2\nnodes_per_group = 3\n");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_prints_one_row_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let o = bcdsr(&["run", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("protocol,network,"));
    assert!(lines[1].starts_with("bc-dsr,2x3,"));

    let o = bcdsr(&["run", cfg.to_str().unwrap(), "--seed", "9"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn run_writes_traces_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "trace = true");
    let out = dir.path().join("run");
    let o = bcdsr(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["config.toml", "metrics.csv", "seed-1/mobility.csv", "seed-1/events.csv", "seed-2/packets.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let echoed = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echoed.contains("sim_time = 2.0"));
    assert!(echoed.contains("[link]"));
}

#[test]
fn sweep_then_emit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let args = ["sweep", cfg.to_str().unwrap(), "--axis", "data_rate", "--seeds", "1", "--protocols", "bc-dsr,aodv-lite"];
    let o = bcdsr(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = PathBuf::from(stdout(&o).trim());
    let out = dir.path().join(out);
    assert!(out.starts_with(dir.path().join("results")));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 * 2 * 2);

    let o = bcdsr(&args, dir.path());
    assert_eq!(dir.path().join(stdout(&o).trim()), out);
    assert_eq!(std::fs::read_to_string(out.join("results.csv")).unwrap(), csv);

    let o = bcdsr(&["emit", out.to_str().unwrap(), "--figure", "fig7b"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let series = std::fs::read_to_string(out.join("fig7b.csv")).unwrap();
    assert!(series.starts_with("figure,metric,series,x,y\n"));
    assert_eq!(series.lines().count(), 1 + 3 * 6);
    assert!(series.contains("fig7b,pdr,dsr-lite,100,null"));
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = config(d, "");
    let bad_key = d.join("bad.toml");
    std::fs::write(&bad_key, "sim_tme = 3.0\n").unwrap();
    let empty = d.join("empty.csv");
    std::fs::write(&empty, "").unwrap();

    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "missing.toml"],
        vec!["run", bad_key.to_str().unwrap()],
        vec!["sweep", cfg.to_str().unwrap(), "--axis", "altitude"],
        vec!["sweep", cfg.to_str().unwrap(), "--axis", "data_rate", "--protocols", "olsr"],
        vec!["sweep", cfg.to_str().unwrap(), "--axis", "data_rate", "--seeds", "0"],
        vec!["emit", empty.to_str().unwrap(), "--figure", "fig5"],
        vec!["emit", empty.to_str().unwrap(), "--figure", "fig9"],
    ];
    for args in cases {
        let o = bcdsr(&args, d);
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(stderr(&o).starts_with("error: "), "{args:?}: {}", stderr(&o));
    }
    let o = bcdsr(&["run", bad_key.to_str().unwrap()], d);
    assert!(stderr(&o).contains("sim_tme"), "{}", stderr(&o));
}
