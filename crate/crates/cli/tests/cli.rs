use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nosig::scenario::{parse_scenario, serialize_scenario};
use nosig_core::gedanken::sphere_overlap;

fn nosig(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nosig"))
        .args(args)
        .env("NOSIG_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn passing_run_exits_zero_and_writes_the_default_csv() {
    let dir = tempfile::tempdir().unwrap();
    let scn = example("traps.scn");
    let o = nosig(&["ntrap", "--scenario", scn.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.starts_with("command: ntrap\nscenario sha256: "));
    assert!(text.ends_with("verdict: PASS\n"));
    let csv = std::fs::read_to_string(dir.path().join("ntrap.csv")).unwrap();
    assert!(csv.starts_with("count,n_epsilon,exact,linearized,"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn the_digest_is_of_the_scenario_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let scn = example("minimal.scn");
    let o = nosig(
        &["com-example", "--scenario", scn.to_str().unwrap()],
        dir.path(),
    );
    let want = nosig::sha256_hex(&std::fs::read(&scn).unwrap());
    assert!(stdout(&o).contains(&format!("scenario sha256: {want}\n")));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = nosig(&["com-example", "--tolerance", "1e-300"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL exact two-particle overlap"));
    assert!(stdout(&o).ends_with("verdict: FAIL\n"));
}

#[test]
fn errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "[sphere.a]\nradius = 1\ndensity = 1\nphi = 1.5\n").unwrap();
    let o = nosig(&["sphere", "--scenario", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("out-of-range") && err.contains("phi < 1"),
        "{err}"
    );

    let o = nosig(
        &[
            "packets",
            "--out",
            "/nonexistent-dir/x.csv",
            "--trials",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    let o = nosig(&["ntrap"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[traps]"));

    let o = nosig(&["teleport"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn radius_override_gives_identical_totals() {
    let dir = tempfile::tempdir().unwrap();
    let scn = example("spheres.scn");
    let out = dir.path().join("s.csv");
    let o = nosig(
        &[
            "sphere",
            "--scenario",
            scn.to_str().unwrap(),
            "--radius",
            "1",
            "--radius",
            "10",
            "--radius",
            "100",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "total").unwrap();
    let totals: Vec<String> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().to_string())
        .collect();
    assert_eq!(totals.len(), 3);
    assert!(totals.iter().all(|t| *t == totals[0]), "{totals:?}");
}

#[test]
fn window_certificate_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = nosig(&["window", "--grid", "50"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("window.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "counterexamples,0"), "{csv}");
}

#[test]
fn sphere_file_round_trips_to_the_same_inputs() {
    let text = std::fs::read_to_string(example("spheres.scn")).unwrap();
    let f = parse_scenario(&text).unwrap();
    let g = parse_scenario(&serialize_scenario(&f)).unwrap();
    assert_eq!(f, g);
    assert_eq!(f.spheres.len(), 5);
    for (a, b) in f.spheres.iter().zip(&g.spheres) {
        let x = sphere_overlap(&a.arrangement, &f.scenario).unwrap();
        let y = sphere_overlap(&b.arrangement, &g.scenario).unwrap();
        assert_eq!(x, y);
    }
}

#[test]
fn every_bundled_scenario_parses() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        parse_scenario(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 3);
}
