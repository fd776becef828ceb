use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn gsmvlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsmvlc")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = gsmvlc(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn table_dump_matches_golden_table_two() {
    let got = stdout(&["--config", fixture("table2.toml").to_str().unwrap()]);
    let want = std::fs::read_to_string(fixture("table2.csv")).unwrap();
    assert_eq!(got, want);
    assert!(!got.contains('\r'));
}

#[test]
fn output_file_reproduces_itself() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    stdout(&["--config", fixture("ber_small.toml").to_str().unwrap(), "--out", a.to_str().unwrap()]);
    stdout(&["--config", a.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn ber_sweep_is_independent_of_worker_count() {
    let cfg = fixture("ber_small.toml");
    let one = stdout(&["--config", cfg.to_str().unwrap(), "--workers", "1"]);
    let three = stdout(&["--config", cfg.to_str().unwrap(), "--workers", "3"]);
    assert_eq!(one, three);
    let rows: Vec<&str> = one.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(one.contains("# osnr_db,bits,bit_errors,frames,frame_errors,ber,fer,avg_T1,avg_T2\n"));
}

#[test]
fn flags_override_the_file() {
    let out = stdout(&[
        "--config",
        fixture("ber_small.toml").to_str().unwrap(),
        "--osnr",
        "20:21:1",
        "--frames",
        "5",
        "--g2",
        "0",
        "--seed",
        "11",
    ]);
    assert!(out.contains("# seed = 11\n"));
    assert!(out.contains("# g2 = 0\n"));
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["20,640,0,5,0,0e0,0e0,1,1", "21,640,0,5,0,0e0,0e0,1,1"]);
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(fixture("table2.toml")).unwrap().replace("M = 2", "M = 2\nMM = 3");
    std::fs::write(&p, text).unwrap();
    let out = gsmvlc(&["--config", p.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("MM"));
}

#[test]
fn check_reports_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(fixture("ber_small.toml"))
        .unwrap()
        .replace("z = 64", "z = 63")
        .replace("N_a = 2", "N_a = 5");
    std::fs::write(&p, text).unwrap();
    let out = gsmvlc(&["--config", p.to_str().unwrap(), "--check"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("info length 128"), "{err}");
    assert!(err.contains("N_a=5"), "{err}");
    assert_eq!(stdout(&["--config", fixture("ber_small.toml").to_str().unwrap(), "--check"]), "ok\n");
}

#[test]
fn missing_config_path_names_the_file() {
    let out = gsmvlc(&["--config", "/nonexistent/x.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/x.toml"));
}

#[test]
fn code_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("code.toml");
    std::fs::write(
        &p,
        "[experiment]\nmode = \"table-dump\"\n[code]\nfamily = \"eara\"\nz = 16\n[analysis]\ndump = \"base-matrix\"\n",
    )
    .unwrap();
    let json = stdout(&["--config", p.to_str().unwrap()]);
    assert_eq!(json, "{\"rows\":3,\"cols\":5,\"entries\":[[1,1,1,0,0],[3,0,2,1,1],[1,0,1,2,1]],\"punctured\":[1],\"e\":0}\n");
    let text = std::fs::read_to_string(&p).unwrap().replace("base-matrix", "alist");
    std::fs::write(&p, text).unwrap();
    let alist = stdout(&["--config", p.to_str().unwrap()]);
    assert!(alist.starts_with("80 48\n"), "{}", &alist[..20]);
}

#[test]
fn complexity_with_fixed_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cx.toml");
    std::fs::write(
        &p,
        "[experiment]\nmode = \"complexity\"\n[code]\nfamily = \"ar4ja\"\nz = 16\n[gsm]\nkind = \"ssergsm\"\nN_a = 2\nM = 2\n[analysis]\nt1 = 1.0\nt2 = 1.0\n",
    )
    .unwrap();
    let out = stdout(&["--config", p.to_str().unwrap()]);
    let row = out.lines().last().unwrap();
    // n - p = 64, 16 (5*4 + 4) + 2 = 386
    assert!(row.starts_with(",80,48,16,"), "{row}");
    assert!(row.contains(&format!(",{},", 64 * 386)), "{row}");
}
