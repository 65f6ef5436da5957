use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equibound"))
        .args(args)
        .env_remove("EQUIBOUND_SDP_CMD")
        .env_remove("EQUIBOUND_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bound_prints_the_winning_base() {
    let o = run(&["bound", "--dim", "236", "--angle", "1/7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("15673 (K=7)"));
    assert!(stdout(&o).contains("K=5: total 10510"));
}

#[test]
fn bound_without_angle_names_the_maximizing_angles() {
    let o = run(&["bound", "--dim", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let last = stdout(&o).lines().last().unwrap().to_string();
    assert!(last.contains(" @ "), "{last}");
}

#[test]
fn table_is_reproducible() {
    let a = run(&["table", "--from", "15", "--to", "45", "--format", "csv"]);
    let b = run(&["table", "--from", "15", "--to", "45", "--format", "csv", "--jobs", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("r,overall,overall_src,angles,a3,a3_src,a5,a5_src"), "{header}");
    assert_eq!(text.lines().count(), 32);
    let row44 = text.lines().find(|l| l.starts_with("44,")).unwrap();
    assert!(row44.contains(",422,1/7,990,weaker"), "{row44}");
}

#[test]
fn markdown_and_json_tables() {
    let md = stdout(&run(&["table", "--from", "15", "--to", "17", "--format", "markdown"]));
    assert!(md.starts_with("| r | 15 | 16 | 17 |"), "{md}");
    let js = stdout(&run(&["table", "--from", "15", "--to", "16", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&js).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["r"], 15);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bound", "--dim", "10"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--dim", "50", "--angle", "1/4"]).status.code(), Some(2));
    assert_eq!(run(&["table", "--from", "40", "--to", "30"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--dim", "50", "--backends", "external"]).status.code(), Some(2));
    assert_eq!(run(&["bound", "--dim", "50", "--backends", "magic"]).status.code(), Some(2));
}

#[test]
fn missing_data_exits_three() {
    let o = run(&["bound", "--dim", "44", "--angle", "1/7", "--backends", "cache"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("s(44,"));
    let o = run(&["bound", "--dim", "44", "--angle", "1/7", "--backends", "cache", "--allow-fallback"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_passes_and_reports_failure() {
    let o = run(&["verify", "--configs", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS ")));
    let o = run(&["verify", "--configs", "0"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL projection-decomposition"));
}

#[test]
fn figure_data_has_gaps_as_na() {
    let o = run(&["figure-data", "--from", "60", "--to", "62"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "r\tgerzon\tmethod\tmethod_src\tsdp\tsdp_src");
    assert_eq!(lines[3], "61\t1891\t968\tFIFTH_CLOSED_FORM\tNA\tNA");
}

#[test]
fn config_file_and_cache_merge() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let out = dir.path().join("merged.txt");
    fs::write(&a, "50 1/13 -5/13 120 run-a\n").unwrap();
    fs::write(&b, "50 1/13 -5/13 110 run-b\n51 1/13 -5/13 130 run-b\n").unwrap();
    let o = run(&["cache", "merge", "-o", out.to_str().unwrap(), a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let merged = fs::read_to_string(&out).unwrap();
    assert!(merged.contains("50 1/13 -5/13 110 run-b"), "{merged}");
    let shown = stdout(&run(&["cache", "show", "--cache", out.to_str().unwrap(), "--format", "csv"]));
    assert!(shown.contains("51,1/13,-5/13,130,run-b"));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "50 1/13 -5/13 3 lies\n").unwrap();
    assert_eq!(run(&["cache", "show", "--cache", bad.to_str().unwrap()]).status.code(), Some(2));

    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "format = \"csv\"\njobs = 2\n").unwrap();
    let o = run(&["table", "--from", "15", "--to", "16", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("r,overall"));
    fs::write(&cfg, "colour = \"red\"\n").unwrap();
    assert_eq!(run(&["table", "--from", "15", "--to", "16", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn external_results_persist_to_the_cache_file() {
    let dir = tempfile::tempdir().unwrap();
    let sdp = dir.path().join("sdp");
    fs::write(&sdp, "#!/bin/sh\necho 100.2\n").unwrap();
    fs::set_permissions(&sdp, fs::Permissions::from_mode(0o755)).unwrap();
    let cache = dir.path().join("cache.txt");
    let o = run(&[
        "bound",
        "--dim",
        "44",
        "--angle",
        "1/7",
        "--backends",
        "external,cache",
        "--sdp-cmd",
        sdp.to_str().unwrap(),
        "--cache",
        cache.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let saved = fs::read_to_string(&cache).unwrap();
    assert!(saved.contains("44 1/13 -3/13 100 external"), "{saved}");
}
