use std::path::Path;
use std::process::{Command, Output};

fn rislab(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rislab"))
        .args(args)
        .env("RISLAB_OUT_DIR", out_dir)
        .output()
        .expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const AR_SPEC: &str = "scheme = \"ar\"\nn = 1\nq = 16\nl = 1\nk = 2\nsnr_db = [0, 5, 10]\nrate = 1\ntrials = 5000\nseed = 2\n";

#[test]
fn run_writes_csv_and_json_into_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "ar16.toml", AR_SPEC);
    let out = rislab(&["run", &spec], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("ar16.csv")).unwrap();
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "snr_db,scheme,N,L,Q,K,m,R,p_mc,ci_low,ci_high,p_analytic,trials,seed");
    assert_eq!(body.len(), 4);
    assert!(body[1].starts_with("0,AR,1,1,16,2,8,1,"));
    assert!(body[1].ends_with(",5000,2"));
    assert!(dir.path().join("ar16.json").exists());
}

#[test]
fn identical_runs_are_byte_identical_whatever_the_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "s.toml", AR_SPEC);
    let mut files = Vec::new();
    for (i, workers) in ["1", "3", "1"].iter().enumerate() {
        let path = dir.path().join(format!("r{i}.csv"));
        let out = rislab(&["--workers", workers, "run", &spec, "--out", path.to_str().unwrap()], dir.path());
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn validation_errors_exit_2_with_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "bad.toml", &AR_SPEC.replace("trials = 5000", "trials = 0"));
    let out = rislab(&["run", &spec], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 8"));

    let spec = write_spec(dir.path(), "unknown.toml", &format!("{AR_SPEC}flavour = 1\n"));
    assert_eq!(rislab(&["run", &spec], dir.path()).status.code(), Some(2));

    assert_eq!(rislab(&["figure", "fig0"], dir.path()).status.code(), Some(2));
}

#[test]
fn fig8_is_a_dmt_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = rislab(&["figure", "fig8"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("fig8.csv")).unwrap();
    assert!(csv.contains("# name: fig8\n"));
    assert!(csv.contains("\ncurve,N,Q,L,K,m,r,d\n"));
    assert!(csv.contains("\nPR,3,5,3,1,5,1,4\n"));
    assert!(csv.contains("\nFR-bound,3,10,3,10,1,0,30\n"));
}

#[test]
fn dmt_and_corr_print_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = rislab(&["dmt", "--dims", "3,5,3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("(0,9) (1,4) (2,1) (3,0)"));
    assert!(text.contains("d_max = 15, r_max = 3"));

    let out = rislab(&["corr", "--q", "4", "--k", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("zeta = 0.333"));
    assert_eq!(rislab(&["corr", "--q", "5", "--k", "2"], dir.path()).status.code(), Some(2));
}
