use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn armchair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_armchair"))
        .args(args)
        .env("ARMCHAIR_THREADS", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV block keyed by column name.
fn rows(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty());
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect()
}

fn cos_file(dir: &Path) -> String {
    let path = dir.join("cos.toml");
    fs::write(&path, "type = \"fourier\"\ncos = [0.0, 1.0]\n").unwrap();
    path.display().to_string()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(armchair(&["gaps", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(
        armchair(&["gaps", "--N", "1", "--B", "0.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        armchair(&["lyapunov", "--xrange", "3:1:0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        armchair(&["verify", "--suite", "nothing"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(
        &bad,
        "type = \"delta\"\npositions = [1.5]\nstrengths = [1.0]\n",
    )
    .unwrap();
    assert_eq!(
        armchair(&["hill", "--potential", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(armchair(&["--help"]).status.code(), Some(0));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let q = cos_file(dir.path());
    let args = [
        "gaps",
        "--potential",
        &q,
        "--N",
        "3",
        "--B",
        "0.4",
        "--xmax",
        "12",
    ];
    let first = stdout(&armchair(&args));
    assert_eq!(first, stdout(&armchair(&args)));
    assert!(first.lines().next().unwrap().starts_with("# armchair gaps"));
    let table = rows(&first);
    assert!(table.len() > 10);
    assert_eq!(table[4]["m"], "4");
    assert_eq!(table[4]["class"], "periodic");
}

#[test]
fn bands_writes_one_file_set_per_channel() {
    let dir = tempfile::tempdir().unwrap();
    let q = cos_file(dir.path());
    let out = dir.path().join("bands");
    let o = armchair(&[
        "bands",
        "--potential",
        &q,
        "--N",
        "2",
        "--a1",
        "0.1",
        "--a2",
        "0.2",
        "--xmax",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..2 {
        for name in ["channel", "endpoints", "gaps"] {
            let text = fs::read_to_string(out.join(format!("{name}_k{k}.csv"))).unwrap();
            assert!(text.contains(&format!("# channel k={k}")));
            assert!(!rows(&text).is_empty());
        }
    }
    let flat = rows(&fs::read_to_string(out.join("flat_bands.csv")).unwrap());
    assert_eq!(flat.len(), 3);
    assert!(out.join("gaps.csv").exists());
}

#[test]
fn sweep_containment_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let q = cos_file(dir.path());
    let text = stdout(&armchair(&[
        "sweep",
        "--potential",
        &q,
        "--N",
        "2",
        "--B",
        "0:0.8:0.2",
        "--xmax",
        "12",
    ]));
    let mut by_m: BTreeMap<usize, Vec<(f64, f64, f64, bool)>> = BTreeMap::new();
    for r in rows(&text) {
        let v = |c: &str| r[c].parse::<f64>().unwrap();
        by_m.entry(r["m"].parse().unwrap()).or_default().push((
            v("a"),
            v("lo"),
            v("hi"),
            r["empty"] == "true",
        ));
    }
    assert_eq!(by_m[&4].len(), 5);
    for (m, list) in &by_m {
        for w in list.windows(2) {
            let ((_, lo0, hi0, e0), (_, lo1, hi1, e1)) = (w[0], w[1]);
            let tol = 1e-9 * hi1.abs().max(1.0);
            if m % 4 == 0 && m > &0 && !e0 {
                assert!(lo1 <= lo0 + tol && hi0 <= hi1 + tol, "G_{m} shrinks");
            }
            if m % 2 == 1 && !e1 {
                assert!(lo0 <= lo1 + tol && hi1 <= hi0 + tol, "G_{m} grows");
            }
        }
    }
}

#[test]
fn flatband_and_lyapunov_tables() {
    let dir = tempfile::tempdir().unwrap();
    let q = cos_file(dir.path());
    let text = stdout(&armchair(&[
        "flatband",
        "--potential",
        &q,
        "--N",
        "3",
        "--B",
        "0.3",
        "--k",
        "1",
        "--nu",
        "2",
    ]));
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# kirchhoff_residual="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-9);
    assert!(rows(&text).iter().all(|r| r["n"] == "0" || r["n"] == "1"));

    let out = dir.path().join("lyap.csv");
    let o = armchair(&[
        "lyapunov",
        "--potential",
        &q,
        "--a",
        "0.2",
        "--xrange",
        "1:3:0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success() && o.stdout.is_empty());
    assert_eq!(rows(&fs::read_to_string(out).unwrap()).len(), 5);
}

#[test]
fn verify_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let q = cos_file(dir.path());
    for suite in ["monodromy", "traces"] {
        let o = armchair(&[
            "verify",
            "--suite",
            suite,
            "--potential",
            &q,
            "--samples",
            "10",
            "--B",
            "0.7",
        ]);
        let text = stdout(&o);
        let table = rows(&text);
        assert!(!table.is_empty());
        assert!(table.iter().all(|r| r["status"] == "PASS"), "{text}");
    }
}

#[test]
fn free_tube_has_only_the_ground_gap() {
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.pot");
    fs::write(&zero, "type = \"fourier\"\ncos = [0.0]\n").unwrap();
    let out = dir.path().join("bands");
    let o = armchair(&[
        "bands",
        "--potential",
        zero.to_str().unwrap(),
        "--N",
        "2",
        "--B",
        "0",
        "--xmax",
        "12",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let gaps = rows(&fs::read_to_string(out.join("gaps.csv")).unwrap());
    let open: Vec<_> = gaps.iter().filter(|r| r["empty"] == "false").collect();
    assert_eq!(open.len(), 1);
    assert_eq!(
        (open[0]["m"].as_str(), open[0]["lo"].as_str()),
        ("0", "-inf")
    );
    assert!(open[0]["hi"].parse::<f64>().unwrap().abs() < 1e-10);
}

#[test]
fn verify_all_on_defaults() {
    let o = armchair(&["verify"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0));
    let suites: std::collections::BTreeSet<_> = rows(&text)
        .into_iter()
        .map(|r| r["suite"].clone())
        .collect();
    assert_eq!(suites.len(), 3);
}
