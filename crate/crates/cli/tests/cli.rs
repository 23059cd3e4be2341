use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pit"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run pit")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Rows of a CSV as header-keyed maps.
fn rows(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = pit(&["verify"], dir.path());
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{stdout}");
    assert!(stdout.contains("0 mismatches"));
}

#[test]
fn solve_spectra_writes_cells_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = pit(
        &["solve", "--precision", "fp64,fp16", "--p", "20,30", "--noise", "1,3", "--out", "res"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    let summary = rows(&res.join("summary.csv"));
    assert_eq!(summary.len(), 8);
    for row in &summary {
        let term = row["terminated_by"].as_str();
        assert!(term == "discrepancy" || term == "max_iter");
        if term == "discrepancy" {
            assert!(num(row, "final_residual") <= num(row, "threshold"));
        }
        let cell = &row["cell"];
        let history = rows(&res.join(format!("history_{cell}.csv")));
        assert_eq!(history.len(), row["iterations"].parse::<usize>().unwrap());
        let solution = fs::read_to_string(res.join(format!("solution_{cell}.csv"))).unwrap();
        assert_eq!(solution.lines().count(), 65);
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        assert_eq!(code(&pit(&["solve", "--precision", "fp32", "--out", name], dir.path())), 0);
    }
    let read = |d: &str| fs::read(dir.path().join(d).join("summary.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    let hist = "history_spectra_fp32_p30_mu3_reorth-on.csv";
    assert_eq!(
        fs::read(dir.path().join("a").join(hist)).unwrap(),
        fs::read(dir.path().join("b").join(hist)).unwrap()
    );
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("exp.cfg"),
        "# spectra sweep\nprecision = fp64\np = 10\nnoise = 2\nmax-iter = 3\nout = from_file\n",
    )
    .unwrap();
    let out = pit(&["solve", "--config", "exp.cfg", "--p", "12"], dir.path());
    assert_eq!(code(&out), 0);
    let summary = rows(&dir.path().join("from_file/summary.csv"));
    assert_eq!(summary.len(), 1);
    assert_eq!(summary[0]["p"], "12");
    assert_eq!(summary[0]["noise"], "2");
    assert!(summary[0]["iterations"].parse::<usize>().unwrap() <= 3);
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["solve", "--p", "0"],
        vec!["solve", "--precision", "fp8"],
        vec!["solve", "--problem", "gauss2d", "--image", "missing.pgm"],
        vec!["solve", "--unknown-flag"],
        vec!["solve", "--config", "missing.cfg"],
        vec!["filters", "--problem", "gauss2d"],
        vec!["psf"],
    ] {
        let out = pit(&args, dir.path());
        assert_eq!(code(&out), 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    fs::write(dir.path().join("bad.cfg"), "colour = red\n").unwrap();
    assert_eq!(code(&pit(&["solve", "--config", "bad.cfg"], dir.path())), 1);
}

#[test]
fn overflow_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // two exponent bits cannot hold the data norm
    let out = pit(&["solve", "--precision", "e2m10"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn filters_summary_bands() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&pit(&["filters", "--out", "f"], dir.path())), 0);
    let summary = rows(&dir.path().join("f/filters_summary.csv"));
    let mean = |precision: &str, k: &str| {
        let row = summary.iter().find(|r| r["precision"] == precision && r["k"] == k).unwrap();
        num(row, "mean")
    };
    assert!(mean("fp64", "1") <= 1e-14);
    assert!((1e-8..=1e-5).contains(&mean("fp32", "25")));
    assert!((1e-4..=5e-2).contains(&mean("fp16", "10")));
    let predicted = fs::read_to_string(dir.path().join("f/filters_fp16_p30_mu3_predicted.csv")).unwrap();
    assert_eq!(predicted.lines().count(), 26);
}

#[test]
fn psf_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&pit(&["psf", "--problem", "defocus2d", "--out", "p"], dir.path())), 0);
    let terms = rows(&dir.path().join("p/psf_defocus2d_terms.csv"));
    let errors: Vec<f64> = terms.iter().map(|r| num(r, "relative_truncation_error")).collect();
    assert!(errors.windows(2).all(|w| w[1] <= w[0]));
    assert!(dir.path().join("p/psf_defocus2d.pgm").is_file());
}

#[test]
fn gauss_reorthogonalization_matters_in_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = pit(
        &["solve", "--problem", "gauss2d", "--precision", "fp16", "--reorth", "on,off", "--out", "g"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let summary = rows(&dir.path().join("g/summary.csv"));
    let rre = |r: &str| num(summary.iter().find(|row| row["reorth"] == r).unwrap(), "final_rre");
    assert!(rre("off") > rre("on"));
    assert!(dir.path().join("g/solution_gauss2d_fp16_p30_mu3_reorth-on.pgm").is_file());
}

#[test]
fn defocus_half_tracks_binary64_at_one_percent() {
    // larger noise levels exceed the 0.01 gap at p = 30; see the README
    let dir = tempfile::tempdir().unwrap();
    let out = pit(
        &["solve", "--problem", "defocus2d", "--precision", "fp64,fp16", "--noise", "1", "--out", "d"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let summary = rows(&dir.path().join("d/summary.csv"));
    let rre = |f: &str| num(summary.iter().find(|row| row["precision"] == f).unwrap(), "final_rre");
    assert!((rre("fp16") - rre("fp64")).abs() <= 0.01);
}

#[test]
fn custom_image_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let mut pgm = b"P2\n16 16\n255\n".to_vec();
    for i in 0..256 {
        pgm.extend_from_slice(format!("{} ", if (i / 16 + i % 16) % 5 == 0 { 255 } else { 0 }).as_bytes());
    }
    fs::write(dir.path().join("img.pgm"), pgm).unwrap();
    let out = pit(
        &["solve", "--problem", "gauss2d", "--image", "img.pgm", "--precision", "fp64", "--p", "10", "--out", "c"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let pgm = fs::read(dir.path().join("c/solution_gauss2d_fp64_p10_mu3_reorth-on.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n16 16\n255\n"));
}
