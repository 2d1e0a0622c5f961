use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use spinodal::cli::output::{read_energies, ENERGIES_FILE, REPORT_FILE, SNAPSHOTS_FILE};

fn spinodal(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinodal"))
        .args(args)
        .current_dir(cwd)
        .env("SPINODAL_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SMALL: &str = "[domain]\nn = 32\n[time]\nt_end = 0.1\ndt = 1e-3\nstride = 5\n";

#[test]
fn run_writes_the_three_outputs_and_a_config_copy() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.ini", SMALL);
    let out = spinodal(&["run", "--config", &cfg, "--out", "r"], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("r");
    let energies = fs::read_to_string(dir.join(ENERGIES_FILE)).unwrap();
    assert!(energies.starts_with("t,mass,l2u,l2ux,l2uxx,E0,l2ut,l2uxt,l2uxxt,E1\n"));
    assert_eq!(energies.lines().count(), 1 + 21);
    let snaps = fs::read_to_string(dir.join(SNAPSHOTS_FILE)).unwrap();
    assert!(snaps.starts_with("t,x,u\n"));
    assert_eq!(snaps.lines().count(), 1 + 21 * 32);
    let report = fs::read_to_string(dir.join(REPORT_FILE)).unwrap();
    assert!(report.contains("[energy estimate (E0)]"));
    assert!(report.contains("[time-derivative estimate (E1)]"));
    // --out changed the effective configuration, so the copy is the serialized form
    let copy = fs::read_to_string(dir.join("config.ini")).unwrap();
    assert!(copy.contains("dir = \"r\""));
}

#[test]
fn config_is_copied_verbatim_without_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("# provenance test\n{SMALL}[output]\ndir = v\n");
    let cfg = write_config(tmp.path(), "c.ini", &text);
    assert_eq!(code(&spinodal(&["run", "--config", &cfg], tmp.path())), 0);
    assert_eq!(fs::read_to_string(tmp.path().join("v/config.ini")).unwrap(), text);
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.ini", SMALL);
    for dir in ["a", "b"] {
        assert_eq!(code(&spinodal(&["run", "--config", &cfg, "--out", dir, "--seed", "9"], tmp.path())), 0);
    }
    for file in [ENERGIES_FILE, SNAPSHOTS_FILE, REPORT_FILE] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    assert_eq!(code(&spinodal(&["run", "--config", &cfg, "--out", "c", "--seed", "10"], tmp.path())), 0);
    assert_ne!(
        fs::read(tmp.path().join("a").join(SNAPSHOTS_FILE)).unwrap(),
        fs::read(tmp.path().join("c").join(SNAPSHOTS_FILE)).unwrap()
    );
}

#[test]
fn zero_data_gives_zero_energy_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "zero.ini",
        &format!("{SMALL}[initial]\nkind = cosine\nmean = 0\n"),
    );
    assert_eq!(code(&spinodal(&["run", "--config", &cfg, "--out", "z"], tmp.path())), 0);
    let recs = read_energies(&tmp.path().join("z").join(ENERGIES_FILE)).unwrap();
    assert_eq!(recs.len(), 21);
    for r in recs {
        assert!(r.columns()[1..].iter().all(|&v| v == 0.0), "{r:?}");
    }
}

#[test]
fn linear_run_energy_column_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[model]\nepsilon = 0\ndelta = 0.01\n[eos]\nkind = zero\n[domain]\nn = 64\n\
                [time]\ndt = 1e-3\nt_end = 1\nstride = 50\n\
                [initial]\nkind = cosine\nmean = 0\nmodes = 1\namplitudes = 1\n";
    let cfg = write_config(tmp.path(), "lin.ini", text);
    assert_eq!(code(&spinodal(&["run", "--config", &cfg, "--out", "lin"], tmp.path())), 0);
    let recs = read_energies(&tmp.path().join("lin").join(ENERGIES_FILE)).unwrap();
    let xi = 2.0 * PI;
    let sigma = 0.01 * xi.powi(4) / (1.0 + 0.1 * xi * xi);
    for r in &recs {
        let e0 = 0.5 * (0.5 + 0.1 * 0.5 * xi * xi) * (-2.0 * sigma * r.t).exp();
        assert!((r.e0 - e0).abs() <= 1e-12 * e0, "t = {}: {} vs {}", r.t, r.e0, e0);
    }
    let out = spinodal(&["certify", "lin"], tmp.path());
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("k = 0.0000000000000000e0"), "{stdout}");
}

#[test]
fn certify_passes_a_constant_run_and_rejects_corrupted_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "const.ini",
        &format!("{SMALL}[initial]\nkind = cosine\nmean = 0.3\n"),
    );
    assert_eq!(code(&spinodal(&["run", "--config", &cfg, "--out", "k"], tmp.path())), 0);
    assert_eq!(code(&spinodal(&["certify", "--out", "k"], tmp.path())), 0);

    let energies = tmp.path().join("k").join(ENERGIES_FILE);
    let text = fs::read_to_string(&energies).unwrap();
    fs::write(&energies, text.replacen(",", ",oops", 3)).unwrap();
    let out = spinodal(&["certify", "k"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("energies.csv"));

    assert_eq!(code(&spinodal(&["certify", "missing"], tmp.path())), 2);
}

#[test]
fn certify_reports_failure_with_exit_one() {
    // E0 grows while ||u_x|| = 0, which no k can certify
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fake");
    fs::create_dir(&dir).unwrap();
    fs::write(dir.join("config.ini"), "").unwrap();
    fs::write(dir.join(SNAPSHOTS_FILE), "t,x,u\n0,0,0.3\n0,0.5,0.3\n").unwrap();
    let mut energies = String::from("t,mass,l2u,l2ux,l2uxx,E0,l2ut,l2uxt,l2uxxt,E1\n");
    for i in 0..5 {
        let t = 0.1 * i as f64;
        energies.push_str(&format!("{t},0.3,{},0,0,{},0,0,0,0\n", 2.0 * t, t));
    }
    fs::write(dir.join(ENERGIES_FILE), energies).unwrap();
    let out = spinodal(&["certify", "fake"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("overall = FAIL"));
}

#[test]
fn bad_configuration_exits_two_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.ini", "[model]\n\nnu = -1\n");
    let out = spinodal(&["run", "--config", &cfg], tmp.path());
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("model.nu"), "{err}");
    assert_eq!(code(&spinodal(&["frobnicate"], tmp.path())), 2);
    let cfg = write_config(tmp.path(), "unknown.ini", "[time]\nsteps = 4\n");
    assert_eq!(code(&spinodal(&["run", "--config", &cfg], tmp.path())), 2);
}

#[test]
fn blow_up_exits_three_and_reports_failure_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "boom.ini",
        "[model]\nnu = 0\nepsilon = 50\ndelta = 1e-6\n[domain]\nn = 64\n[time]\nscheme = imex1\ndt = 0.05\nt_end = 100\n\
         [initial]\nkind = cosine\nmean = 0\nmodes = 1, 4\namplitudes = 1, 0.5\n",
    );
    let out = spinodal(&["run", "--config", &cfg, "--out", "boom"], tmp.path());
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(tmp.path().join("boom").join(REPORT_FILE)).unwrap();
    assert!(report.contains("status = BLOW-UP") && report.contains("failure_time"));
    let snaps = fs::read_to_string(tmp.path().join("boom").join(SNAPSHOTS_FILE)).unwrap();
    assert_eq!(snaps.lines().count(), 1 + 64);
}

#[test]
fn linear_check_passes_for_etd1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "lc.ini",
        "[model]\ndelta = 0.01\n[domain]\nn = 64\n[time]\ndt = 1e-3\nt_end = 1\nstride = 100\n",
    );
    let out = spinodal(&["linear-check", "--config", &cfg], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("status = PASS"));
}

#[test]
fn picard_and_converge_print_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "p.ini", "[domain]\nn = 64\n");
    let out = spinodal(&["picard", "--config", &cfg, "--horizon", "0.01"], tmp.path());
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("converged = true") && text.contains("agreement_linf"));

    let out = spinodal(&["picard", "--config", &cfg, "--horizon", "10", "--max-iterations", "3"], tmp.path());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("converged = false"));

    let cfg = write_config(
        tmp.path(),
        "c.ini",
        "[domain]\nn = 32\n[time]\nscheme = imex1\ndt = 1e-3\nt_end = 0.1\n\
         [initial]\nkind = cosine\nmodes = 1\namplitudes = 0.02\n",
    );
    let out = spinodal(&["converge", "--config", &cfg], tmp.path());
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("observed_order") && text.contains("error_ratio"), "{text}");
}
