//! End-to-end behaviour of the `tvs` binary: outputs and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn tvs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvs"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = tvs(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    tvs(args).status.code().unwrap()
}

struct Scratch {
    dir: TempDir,
}

impl Scratch {
    fn new() -> Self {
        let s = Self {
            dir: tempfile::tempdir().unwrap(),
        };
        ok(&["phantom", "--dims", "10,9,8", "--output", &s.p("clean.raw")]);
        ok(&[
            "add-noise",
            "--input",
            &s.p("clean.raw"),
            "--sigma",
            "0.1",
            "--seed",
            "1",
            "--output",
            &s.p("noisy.raw"),
        ]);
        s
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

fn read_json(path: &Path) -> serde_json::Value {
    json(&std::fs::read_to_string(path).unwrap())
}

#[test]
fn denoise_writes_volume_header_and_report() {
    let s = Scratch::new();
    let stdout = ok(&[
        "denoise",
        "--input",
        &s.p("noisy.raw"),
        "--output",
        &s.p("out.raw"),
        "--reference",
        &s.p("clean.raw"),
        "--max-iters",
        "50",
    ]);
    let report = json(&stdout);
    assert_eq!(report["model"], "tvstokes");
    assert_eq!(report["dims"], serde_json::json!([10, 9, 8]));
    assert_eq!(report["config"]["tau"]["requested"], "auto");
    assert_eq!(report["config"]["tau"]["resolved"], 1.0 / 6.0);
    assert_eq!(report["steps"].as_array().unwrap().len(), 2);
    assert!(report["metrics"]["psnr_db"].as_f64().unwrap() > 20.0);
    assert_eq!(std::fs::metadata(s.path("out.raw")).unwrap().len(), 720 * 8);
    assert_eq!(
        read_json(&s.path("out.json"))["dims"],
        serde_json::json!([10, 9, 8])
    );
}

#[test]
fn rof_model_and_explicit_tau_are_echoed() {
    let s = Scratch::new();
    ok(&[
        "denoise",
        "--model",
        "rof",
        "--lambda",
        "0.08",
        "--tau",
        "0.3",
        "--input",
        &s.p("noisy.raw"),
        "--output",
        &s.p("rof.raw"),
        "--report",
        &s.p("rof_report.json"),
    ]);
    let report = read_json(&s.path("rof_report.json"));
    assert_eq!(report["model"], "rof");
    assert_eq!(report["config"]["lambda"], 0.08);
    assert!(report["config"]["lambda1"].is_null());
    assert_eq!(report["config"]["tau"]["overridden"], true);
    assert_eq!(report["steps"][0]["name"], "rof");
}

#[test]
fn value_range_is_normalised_and_restored() {
    let s = Scratch::new();
    let mut header = read_json(&s.path("noisy.json"));
    header["value_range"] = serde_json::json!([0.0, 1.0]);
    std::fs::write(s.path("ranged.json"), header.to_string()).unwrap();
    std::fs::copy(s.path("noisy.raw"), s.path("ranged.raw")).unwrap();
    let report = json(&ok(&[
        "denoise",
        "--input",
        &s.p("ranged.raw"),
        "--output",
        &s.p("out.raw"),
        "--max-iters",
        "20",
    ]));
    assert_eq!(
        report["normalization"],
        serde_json::json!({"offset": 0.0, "scale": 1.0})
    );
    assert_eq!(
        read_json(&s.path("out.json"))["value_range"],
        serde_json::json!([0.0, 1.0])
    );
}

#[test]
fn metrics_project_and_slice_subcommands() {
    let s = Scratch::new();
    let m = json(&ok(&[
        "metrics",
        "--ref",
        &s.p("clean.raw"),
        "--test",
        &s.p("noisy.raw"),
    ]));
    let db = m["psnr_db"].as_f64().unwrap();
    assert!((db - 20.0).abs() < 1.0, "{db}");
    assert!(m["staircase"].as_f64().unwrap() > 0.0);
    let same = json(&ok(&[
        "metrics",
        "--ref",
        &s.p("clean.raw"),
        "--test",
        &s.p("clean.raw"),
    ]));
    assert!(same["psnr_db"].is_null());

    let pr = json(&ok(&[
        "project",
        "--input",
        &s.p("noisy.raw"),
        "--output",
        &s.p("proj.raw"),
    ]));
    assert_eq!(pr["channels"].as_array().unwrap().len(), 3);
    assert!(pr["max_defect"].as_f64().unwrap() < 1e-10);
    for l in 0..3 {
        assert!(s.path(&format!("proj_g{l}.raw")).exists());
        assert!(s.path(&format!("proj_g{l}.json")).exists());
    }

    ok(&[
        "slice",
        "--input",
        &s.p("clean.raw"),
        "--axis",
        "2",
        "--index",
        "4",
        "--out",
        &s.p("s.pgm"),
    ]);
    let pgm = std::fs::read(s.path("s.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n9 10\n255\n"));
    assert_eq!(pgm.len(), b"P5\n9 10\n255\n".len() + 90);
}

#[test]
fn stack_builds_a_time_axis() {
    let s = Scratch::new();
    ok(&["phantom", "--dims", "6,5", "--output", &s.p("f0.raw")]);
    ok(&[
        "add-noise",
        "--input",
        &s.p("f0.raw"),
        "--sigma",
        "0.05",
        "--seed",
        "2",
        "--output",
        &s.p("f1.raw"),
    ]);
    ok(&[
        "stack",
        "--frames",
        &s.p("f0.raw"),
        &s.p("f1.raw"),
        &s.p("f0.raw"),
        "--output",
        &s.p("movie.raw"),
    ]);
    assert_eq!(
        read_json(&s.path("movie.json"))["dims"],
        serde_json::json!([6, 5, 3])
    );
    ok(&[
        "denoise",
        "--input",
        &s.p("movie.raw"),
        "--output",
        &s.p("movie_out.raw"),
        "--max-iters",
        "10",
    ]);
}

#[test]
fn exit_codes_follow_error_kind() {
    let s = Scratch::new();
    // usage errors
    assert_eq!(code(&["denoise"]), 2);
    assert_eq!(
        code(&[
            "denoise",
            "--input",
            &s.p("noisy.raw"),
            "--output",
            &s.p("o.raw"),
            "--tau",
            "fast"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "denoise",
            "--input",
            &s.p("noisy.raw"),
            "--output",
            &s.p("o.raw"),
            "--lambda1",
            "-1"
        ]),
        2
    );
    // shape mismatch between input and reference
    ok(&["phantom", "--dims", "4,4", "--output", &s.p("small.raw")]);
    assert_eq!(
        code(&[
            "denoise",
            "--input",
            &s.p("noisy.raw"),
            "--output",
            &s.p("o.raw"),
            "--reference",
            &s.p("small.raw")
        ]),
        2
    );
    // missing files and malformed payloads
    assert_eq!(
        code(&[
            "denoise",
            "--input",
            &s.p("absent.raw"),
            "--output",
            &s.p("o.raw")
        ]),
        3
    );
    std::fs::write(s.path("short.raw"), [0u8; 10]).unwrap();
    std::fs::copy(s.path("noisy.json"), s.path("short.json")).unwrap();
    assert_eq!(
        code(&[
            "denoise",
            "--input",
            &s.p("short.raw"),
            "--output",
            &s.p("o.raw")
        ]),
        3
    );
    std::fs::write(
        s.path("bad.json"),
        r#"{"dims":[10,9,8],"dtype":"i16","byte_order":"little","layout":"last-fastest"}"#,
    )
    .unwrap();
    assert_eq!(
        code(&[
            "denoise",
            "--input",
            &s.p("noisy.raw"),
            "--meta",
            &s.p("bad.json"),
            "--output",
            &s.p("o.raw")
        ]),
        3
    );
    // an overflowing data term makes the dual update non-finite
    assert_eq!(
        code(&[
            "denoise",
            "--model",
            "rof",
            "--lambda",
            "1e-320",
            "--input",
            &s.p("noisy.raw"),
            "--output",
            &s.p("o.raw")
        ]),
        4
    );
}
