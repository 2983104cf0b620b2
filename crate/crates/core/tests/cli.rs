//! End-to-end tests of the `cartlrc` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cartlrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartlrc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every failure prints exactly one ERR line.
fn assert_err(o: &Output, exit: i32, code: &str) {
    assert_eq!(o.status.code(), Some(exit), "stderr: {}", stderr(o));
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("ERR ")).collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    assert!(
        lines[0].starts_with(&format!("ERR {code}:")),
        "got {}",
        lines[0]
    );
}

fn p(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn params_sheet() {
    let o = cartlrc(&["params", "--q", "7", "--r", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("n=36 k=27 r=5 d=5 bound=5 optimal=yes\n"));
    let o = cartlrc(&["params", "--q", "11", "--r", "4"]);
    assert!(stdout(&o).starts_with("n=100 k=77 "));
    let o = cartlrc(&["params", "--p", "2", "--m", "3", "--r", "6"]);
    assert!(stdout(&o).contains("modulus x^3 + x + 1"));
}

#[test]
fn error_paths() {
    assert_err(
        &cartlrc(&["params", "--q", "7", "--r", "3"]),
        2,
        "DivisibilityViolation",
    );
    assert_err(&cartlrc(&["params", "--q", "6", "--r", "1"]), 2, "NotPrime");
    assert_err(&cartlrc(&["params", "--q", "7"]), 1, "Usage");
    assert_err(&cartlrc(&["frobnicate"]), 1, "Usage");
    assert_err(&cartlrc(&["params", "--q", "7", "--r", "x"]), 1, "Usage");
    assert_err(&cartlrc(&["params", "--code", "/nonexistent/dir"]), 4, "Io");
    assert_err(
        &cartlrc(&["simulate", "--q", "7", "--r", "5", "--rho", "2.0"]),
        2,
        "SimulationConfig",
    );
    let o = cartlrc(&["--help"]);
    assert!(o.status.success());
}

#[test]
fn gen_is_deterministic_and_loadable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(
            cartlrc(&["--out", p(d.path()), "gen", "--q", "8", "--r", "6"])
                .status
                .success()
        );
    }
    for f in ["manifest.json", "generator.csv", "parity.csv", "basis.txt"] {
        let x = fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let g = fs::read_to_string(a.path().join("generator.csv")).unwrap();
    assert_eq!(g.lines().count(), 39);
    assert!(g.lines().all(|l| l.split(',').count() == 49));
    let basis = fs::read_to_string(a.path().join("basis.txt")).unwrap();
    assert_eq!(basis.lines().count(), 39);
    let m: serde_json::Value =
        serde_json::from_slice(&fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["field"]["modulus"], serde_json::json!([1, 1, 0, 1]));
    assert_eq!(m["code"]["d_claimed"], 5);
    assert_eq!(m["ordering"]["point_order"], "row-coset-power");

    // re-deriving from the manifest reproduces identical matrix files
    let c = tempfile::tempdir().unwrap();
    let code_dir = p(a.path());
    assert!(cartlrc(&["--out", p(c.path()), "gen", "--code", code_dir])
        .status
        .success());
    for f in ["generator.csv", "parity.csv", "basis.txt", "manifest.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(c.path().join(f)).unwrap()
        );
    }
    // no temporary files left behind
    assert!(fs::read_dir(a.path()).unwrap().all(|e| !e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .starts_with('.')));
}

#[test]
fn pipeline_encode_repair_decode() {
    let d = tempfile::tempdir().unwrap();
    let out = p(d.path());
    let zero = d.path().join("zero.txt");
    fs::write(&zero, vec!["0"; 27].join(",")).unwrap();
    let o = cartlrc(&[
        "--out",
        out,
        "encode",
        "--q",
        "7",
        "--r",
        "5",
        "--message",
        p(&zero),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), vec!["0"; 36].join(","));

    let o = cartlrc(&[
        "--out", out, "--seed", "5", "encode", "--q", "7", "--r", "5",
    ]);
    assert!(o.status.success());
    let cw: Vec<String> = stdout(&o).trim().split(',').map(String::from).collect();
    assert_eq!(cw.len(), 36);
    let again = cartlrc(&[
        "--out", out, "--seed", "5", "encode", "--q", "7", "--r", "5",
    ]);
    assert_eq!(stdout(&again), stdout(&o));

    // one erasure: local repair from five reads in the same cell
    let mut erased = cw.clone();
    erased[8] = "?".into();
    let input = d.path().join("erased.txt");
    fs::write(&input, erased.join(",")).unwrap();
    let o = cartlrc(&[
        "repair",
        "--q",
        "7",
        "--r",
        "5",
        "--input",
        p(&input),
        "--position",
        "8",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        format!("position=8 value={}\nreads=6,7,9,10,11\n", cw[8])
    );

    // two in one cell: local repair refuses, global decode succeeds
    erased[9] = "?".into();
    fs::write(&input, erased.join(",")).unwrap();
    assert_err(
        &cartlrc(&[
            "repair",
            "--q",
            "7",
            "--r",
            "5",
            "--input",
            p(&input),
            "--position",
            "8",
        ]),
        2,
        "LocalRepairImpossible",
    );
    erased[20] = "?".into();
    fs::write(&input, erased.join(",")).unwrap();
    let o = cartlrc(&[
        "--out",
        out,
        "decode",
        "--q",
        "7",
        "--r",
        "5",
        "--input",
        p(&input),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("local=20 global=8,9 "));
    assert_eq!(
        fs::read_to_string(d.path().join("decoded.txt"))
            .unwrap()
            .trim(),
        cw.join(",")
    );

    // two symbol errors corrected on the (7, 2) code, which has d >= 5
    let o = cartlrc(&[
        "--out", out, "--seed", "3", "encode", "--q", "7", "--r", "2",
    ]);
    let mut w: Vec<u64> = stdout(&o)
        .trim()
        .split(',')
        .map(|t| t.parse().unwrap())
        .collect();
    let clean = w.clone();
    w[4] = (w[4] + 1) % 7;
    w[30] = (w[30] + 3) % 7;
    let noisy = d.path().join("noisy.txt");
    fs::write(
        &noisy,
        w.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(","),
    )
    .unwrap();
    let o = cartlrc(&[
        "--out",
        out,
        "decode",
        "--q",
        "7",
        "--r",
        "2",
        "--input",
        p(&noisy),
        "--correct",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fixed: Vec<u64> = stdout(&o)
        .trim()
        .split(',')
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(fixed, clean);
}

#[test]
fn decode_reports_ambiguity() {
    // the five-erasure pattern from the minimum-weight support plus one more position
    let d = tempfile::tempdir().unwrap();
    let out = p(d.path());
    let zero = d.path().join("zero.txt");
    fs::write(&zero, vec!["0"; 27].join(",")).unwrap();
    let mut word = vec!["0".to_string(); 36];
    for i in [0, 1, 2, 33, 35] {
        word[i] = "?".into();
    }
    let input = d.path().join("amb.txt");
    fs::write(&input, word.join(",")).unwrap();
    assert_err(
        &cartlrc(&[
            "--out",
            out,
            "decode",
            "--q",
            "7",
            "--r",
            "5",
            "--input",
            p(&input),
        ]),
        2,
        "AmbiguousErasures",
    );
    assert_err(
        &cartlrc(&["decode", "--q", "7", "--r", "5", "--input", p(&zero)]),
        2,
        "LengthMismatch",
    );
}

#[test]
fn verify_reports_and_tampering() {
    let d = tempfile::tempdir().unwrap();
    let out = p(d.path());
    // (7, 2) genuinely reaches d >= 5
    let o = cartlrc(&[
        "--out", out, "verify", "--q", "7", "--r", "2", "--suite", "distance",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let first = fs::read(d.path().join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["result"], "pass");
    let report = &v["reports"][1];
    for key in [
        "claim", "mode", "trials", "result", "witness", "seed", "millis",
    ] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert!(report["millis"].is_null());
    assert!(
        cartlrc(&["--out", out, "verify", "--q", "7", "--r", "2", "--suite", "distance"])
            .status
            .success()
    );
    assert_eq!(fs::read(d.path().join("report.json")).unwrap(), first);

    let o = cartlrc(&[
        "--out", out, "--timing", "verify", "--q", "7", "--r", "2", "--suite", "bounds",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(d.path().join("report.json")).unwrap()).unwrap();
    assert!(v["reports"][0]["millis"].is_u64());

    // Tamper with one parity-check entry: H is in reduced row echelon form, so
    // clearing the 1 of a pivot column leaves a zero column, dependent on its own.
    let code = tempfile::tempdir().unwrap();
    assert!(
        cartlrc(&["--out", p(code.path()), "gen", "--q", "7", "--r", "2"])
            .status
            .success()
    );
    let hpath = code.path().join("parity.csv");
    let text = fs::read_to_string(&hpath).unwrap();
    let mut rows: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let unit = |rows: &Vec<Vec<String>>, r: usize| {
        (0..rows[0].len())
            .find(|&c| (0..rows.len()).all(|i| rows[i][c] == if i == r { "1" } else { "0" }))
            .unwrap()
    };
    let c1 = unit(&rows, 1);
    rows[1][c1] = "0".into();
    fs::write(
        &hpath,
        rows.iter()
            .map(|r| r.join(","))
            .collect::<Vec<_>>()
            .join("\n"),
    )
    .unwrap();
    let o = cartlrc(&[
        "--out",
        out,
        "verify",
        "--code",
        p(code.path()),
        "--suite",
        "distance",
    ]);
    assert_err(&o, 3, "VerificationFailed");
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["reports"][0]["result"], "fail");
    assert_eq!(v["reports"][0]["witness"]["kind"], "row_pair");
    let distance = &v["reports"][1];
    assert_eq!(distance["result"], "fail");
    assert_eq!(distance["witness"]["kind"], "dependent_columns");
    let cols = distance["witness"]["columns"].as_array().unwrap();
    assert_eq!(cols.len(), 4);
    let at = cols
        .iter()
        .position(|c| c == &serde_json::json!(c1))
        .expect("witness contains the zeroed column");
    assert_ne!(distance["witness"]["coefficients"][at], 0);
}

#[test]
fn simulate_outputs() {
    let d = tempfile::tempdir().unwrap();
    let out = p(d.path());
    let args = [
        "--out",
        out,
        "--seed",
        "7",
        "simulate",
        "--q",
        "7",
        "--r",
        "5",
        "--t",
        "1",
        "--policy",
        "local-only",
        "--trials",
        "500",
    ];
    let o = cartlrc(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("recovered=500/500"), "{s}");
    assert!(s.contains("reads_per_repaired_symbol=5.000000"), "{s}");
    let first = fs::read(d.path().join("simulation.json")).unwrap();
    let o = cartlrc(
        &["--threads", "1"]
            .iter()
            .chain(args.iter())
            .copied()
            .collect::<Vec<_>>(),
    );
    assert!(o.status.success());
    assert_eq!(fs::read(d.path().join("simulation.json")).unwrap(), first);

    let o = cartlrc(&[
        "--out", out, "--seed", "7", "simulate", "--q", "7", "--r", "5", "--t", "5", "--trials",
        "20000",
    ]);
    let s = stdout(&o);
    let line = s.lines().find(|l| l.starts_with("recovered=")).unwrap();
    let frac = line
        .trim_start_matches("recovered=")
        .split(' ')
        .next()
        .unwrap();
    let (num, den): (u64, u64) = {
        let mut it = frac.split('/').map(|x| x.parse().unwrap());
        (it.next().unwrap(), it.next().unwrap())
    };
    assert_eq!(den, 20000);
    assert!(num < den);
}
