use std::fs;
use std::path::Path;
use std::process::Command;

use mldct::cli::{run, EXIT_CHECK_FAILED, EXIT_IO, EXIT_OK, EXIT_USAGE};
use mldct::codec::GrayImage;
use mldct::corpus::{read_pgm, write_pgm};
use mldct::kernels::{build_t, format_kernel_text, PROPOSED_T};
use mldct::IntKernel16;

fn mldct(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["mldct"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn sample_image(dir: &Path) -> std::path::PathBuf {
    let img = GrayImage::from_fn(32, 32, |x, y| ((x * 5 + y * 9) % 200 + 20) as u8).unwrap();
    let p = dir.join("in.pgm");
    write_pgm(&img, &p).unwrap();
    p
}

#[test]
fn verify_passes_and_is_deterministic() {
    let (code, out, _) = mldct(&["verify"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("additions: 60"));
    assert!(!out.contains("FAIL"));
    assert_eq!(mldct(&["verify"]).1, out);
}

#[test]
fn verify_catches_a_perturbed_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = PROPOSED_T;
    rows[5][3] = -rows[5][3];
    let text = format_kernel_text(&build_t()).replacen(
        &format_row(&PROPOSED_T[5]),
        &format_row(&rows[5]),
        1,
    );
    let path = dir.path().join("bad.txt");
    fs::write(&path, text).unwrap();
    let (code, out, err) = mldct(&["verify", "--kernel-file", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_CHECK_FAILED);
    assert!(out
        .lines()
        .any(|l| l.starts_with("factorization identity") && l.contains("FAIL")));
    assert!(err.contains("factorization identity"));
}

fn format_row(row: &[i32; 16]) -> String {
    row.iter()
        .map(|v| format!("{v:>2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn metrics_default_rows_and_explicit_rho() {
    let (code, out, _) = mldct(&["metrics"]);
    assert_eq!(code, EXIT_OK);
    let names: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(names, ["dct", "wht", "proposed"]);
    assert!(out.contains("0.3405"));
    assert_eq!(mldct(&["metrics", "--rho", "0.95"]).1, out);
}

#[test]
fn metrics_csv_and_kernel_files() {
    let dir = tempfile::tempdir().unwrap();
    let k = IntKernel16::new("mirror", PROPOSED_T).unwrap();
    let kpath = dir.path().join("k.txt");
    fs::write(&kpath, format_kernel_text(&k)).unwrap();
    let csv = dir.path().join("m.csv");
    let (code, _, err) = mldct(&[
        "metrics",
        "--kernel-file",
        kpath.to_str().unwrap(),
        "--transform",
        "mirror",
        "--transform",
        "dct",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "name,d2,epsilon,mse,cg,eta");
    assert!(lines[1].starts_with("mirror,0.340511,"));
    assert!(lines[2].starts_with("dct,"));
}

#[test]
fn metrics_usage_errors() {
    assert_eq!(mldct(&["metrics", "--transform", "nope"]).0, EXIT_USAGE);
    assert_eq!(mldct(&["metrics", "--rho", "1.5"]).0, EXIT_USAGE);
    assert_eq!(mldct(&["frobnicate"]).0, EXIT_USAGE);
}

#[test]
fn compress_lossless_and_range_checks() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_image(dir.path());
    let output = dir.path().join("out.pgm");
    let (code, out, err) = mldct(&[
        "compress",
        "--input",
        input.to_str().unwrap(),
        "--transform",
        "dct",
        "--r",
        "256",
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("PSNR: inf"));
    assert_eq!(fs::read(&input).unwrap(), fs::read(&output).unwrap());

    let args = |r: &'static str| {
        vec![
            "compress".to_owned(),
            "--input".into(),
            input.to_str().unwrap().into(),
            "--r".into(),
            r.into(),
            "--output".into(),
            output.to_str().unwrap().into(),
        ]
    };
    for r in ["0", "257"] {
        let a = args(r);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(mldct(&refs).0, EXIT_USAGE);
    }
    let a = args("16");
    let refs: Vec<&str> = a.iter().map(String::as_str).collect();
    let (code, out, _) = mldct(&refs);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("transform: proposed"));
    assert_eq!(read_pgm(&output).unwrap().width(), 32);
}

#[test]
fn compress_missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = mldct(&[
        "compress",
        "--input",
        dir.path().join("absent.pgm").to_str().unwrap(),
        "--r",
        "4",
        "--output",
        dir.path().join("o.pgm").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_IO);
}

#[test]
fn sweep_rows_ape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    sample_image(&corpus);
    let csv = dir.path().join("s.csv");
    let run_sweep = |extra: &[&str]| {
        let mut a = vec![
            "sweep",
            "--corpus",
            corpus.to_str().unwrap(),
            "--output",
            csv.to_str().unwrap(),
        ];
        a.extend_from_slice(extra);
        let (code, _, err) = mldct(&a);
        assert_eq!(code, EXIT_OK, "{err}");
        fs::read_to_string(&csv).unwrap()
    };

    let one = run_sweep(&["--transform", "proposed", "--r-grid", "16"]);
    assert_eq!(one.lines().count(), 2);

    let both = run_sweep(&["--transform", "dct", "--transform", "proposed"]);
    assert_eq!(both.lines().count(), 1 + 2 * 9);
    for line in both.lines().filter(|l| l.starts_with("dct,")) {
        assert!(line.ends_with(",0,0"), "{line}");
    }
    assert_eq!(
        run_sweep(&["--transform", "dct", "--transform", "proposed"]),
        both
    );
}

#[test]
fn sweep_empty_corpus_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = mldct(&[
        "sweep",
        "--corpus",
        dir.path().to_str().unwrap(),
        "--output",
        dir.path().join("s.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CHECK_FAILED);
    assert!(err.contains("no readable images"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_mldct");
    let ok = Command::new(bin).arg("verify").output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("additions: 60"));
    let usage = Command::new(bin)
        .args(["compress", "--r", "0"])
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_USAGE));
    let help = Command::new(bin)
        .args(["verify", "--help"])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&help.stdout).contains("0xDC716"));
}
