use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn icnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icnet"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_net(dir: &Path) -> PathBuf {
    let out = dir.join("net.json");
    let o = icnet(&[
        "construct",
        "--kind",
        "elliptic",
        "--alpha",
        "2",
        "--beta",
        "1",
        "--s",
        "1.3",
        "--stilde",
        "2.9",
        "--psi0v",
        "0.1",
        "--psi0h",
        "0.7",
        "--rows",
        "6",
        "--cols",
        "6",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn construct_is_deterministic() {
    let args = [
        "construct",
        "--kind",
        "elliptic",
        "--alpha",
        "2",
        "--beta",
        "1",
        "--periodic",
        "8",
        "--kappa",
        "0.1",
    ];
    let (a, b) = (icnet(&args), icnet(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["meta"]["kind"], "elliptic");
    assert_eq!(doc["lines"].as_array().unwrap().len(), 2 * 17);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        code(&icnet(&["construct", "--kind", "elliptic", "--beta", "1"])),
        2
    );
    assert_eq!(
        code(&icnet(&[
            "construct",
            "--kind",
            "elliptic",
            "--alpha",
            "2",
            "--beta",
            "1"
        ])),
        2
    );
    assert_eq!(
        code(&icnet(&[
            "construct",
            "--kind",
            "elliptic",
            "--alpha",
            "1",
            "--beta",
            "2",
            "--periodic",
            "8"
        ])),
        2
    );
    assert_eq!(
        code(&icnet(&[
            "construct",
            "--kind",
            "generalized",
            "--alpha",
            "2",
            "--beta",
            "1"
        ])),
        2
    );
    assert_eq!(code(&icnet(&["classify", "--conic", "1,0,0"])), 2);
    assert_eq!(code(&icnet(&["verify", "/nonexistent/net.json"])), 2);
}

#[test]
fn pole_in_the_shift_is_a_domain_error() {
    let o = icnet(&[
        "construct",
        "--kind",
        "elliptic",
        "--alpha",
        "2",
        "--beta",
        "1",
        "--s",
        "0",
        "--stilde",
        "1",
    ]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_passes_and_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let file = small_net(dir.path());
    let ok = icnet(&["verify", path_str(&file), "--tol", "1e-9"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    assert!(stdout(&ok).contains("PASS"));

    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    // third vertical line
    let d = doc["lines"][2]["d"].as_f64().unwrap();
    doc["lines"][2]["d"] = Value::from(d + 1e-3);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = icnet(&["verify", path_str(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("(2, 0)"), "{}", stdout(&o));

    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&icnet(&["verify", path_str(&bad)])), 2);
}

#[test]
fn classify_reports_types() {
    let o = icnet(&["classify", "--conic", "1,0,0,-1,0,0"]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).starts_with("Ia, 4 real base points"),
        "{}",
        stdout(&o)
    );

    let o = icnet(&["classify", "--conic", "1,0,0,1,0,0"]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("diagonalizable, a=1 b=1"),
        "{}",
        stdout(&o)
    );

    let o = icnet(&["classify", "--conic", "-1,0,0,1,-1,1"]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).starts_with("IIa, 4 real base points\n"),
        "{}",
        stdout(&o)
    );
    assert!(stdout(&o).contains("not diagonalizable"));

    // member t = 1 of the normalized pencil with a = 4, b = 1
    let o = icnet(&["classify", "--quadric", "5,0,0,0,2,0,0,-1,0,-1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("a=4 b=1"), "{}", stdout(&o));

    assert_eq!(
        code(&icnet(&["classify", "--quadric", "1,0,0,0,1,0,0,-1,0,0"])),
        2
    );
}

#[test]
fn qrt_orbits() {
    let o = icnet(&[
        "qrt", "--abdiff", "3", "--A", "0.7", "--f0", "0.4", "--fhalf", "1.1", "--steps", "200",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "step,f,invariant");
    assert_eq!(rows.len(), 202);
    let stderr = String::from_utf8_lossy(&o.stderr);
    let drift: f64 = stderr
        .trim()
        .strip_prefix("drift ")
        .unwrap()
        .parse()
        .unwrap();
    assert!(drift <= 1e-8, "{drift}");

    // fixed point f = f_half = sqrt(a - b)
    let o = icnet(&[
        "qrt", "--abdiff", "4", "--A", "0.5", "--f0", "2", "--fhalf", "2", "--steps", "10",
    ]);
    assert_eq!(code(&o), 0);
    for row in stdout(&o).lines().skip(1) {
        assert_eq!(row.split(',').nth(1), Some("2"), "{row}");
    }

    let o = icnet(&[
        "qrt", "--abdiff", "1", "--A", "2", "--f0", "0.75", "--fhalf", "1", "--steps", "10",
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 1"));
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let file = small_net(dir.path());
    let svg = dir.path().join("net.svg");
    let o = icnet(&[
        "render",
        path_str(&file),
        "--out",
        path_str(&svg),
        "--width",
        "400",
        "--show-conic",
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert!(text.contains("width=\"400\""));
    assert!(text.contains("id=\"conic\"") && !text.contains("id=\"envelope\""));

    let empty = dir.path().join("empty.json");
    let doc = serde_json::json!({
        "schema": 1,
        "meta": {"kind": "empty", "version": "0", "tolerance": 1e-9, "parameters": []},
        "lines": [],
        "circles": []
    });
    std::fs::write(&empty, doc.to_string()).unwrap();
    let o = icnet(&["render", path_str(&empty)]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("<g id=\"net\"") && text.trim_end().ends_with("</svg>"));
    assert!(!text.contains("<circle") && !text.contains("<line"));

    assert_eq!(code(&icnet(&["render", "/nonexistent.json"])), 2);
}

#[test]
fn generalized_construction_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let o = icnet(&[
        "construct",
        "--kind",
        "generalized",
        "--alpha",
        "2",
        "--beta",
        "1",
        "--schedule",
        "0.8,2.5,0.3,5",
        "--psi0v",
        "0.2",
        "--psi0h",
        "1.1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(
        doc["meta"]["cells"].as_array().unwrap().len(),
        doc["circles"].as_array().unwrap().len()
    );
    assert_eq!(code(&icnet(&["verify", path_str(&out)])), 0);
}
