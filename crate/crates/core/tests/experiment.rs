use std::fs;
use std::path::Path;
use std::process::Command;

use kbk_core::experiment::{
    output::{read_snapshot, DIAGNOSTICS_HEADER},
    parse_config_file, run_batch, run_scenario, run_scenario_in, RunStatus, Scenario, ScenarioConfig,
};
use kbk_core::exact::{good_soliton, SolitonParams};
use kbk_core::{evolve_plain, Grid, KbkModel, ModelParams};

fn small(scenario: Scenario, dir: &Path) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::defaults(scenario);
    cfg.n = 256;
    cfg.nt = 200;
    cfg.snapshot_count = 3;
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn soliton_test_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(Scenario::SolitonTest, tmp.path());
    cfg.n = 1024;
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.status, RunStatus::Completed);
    for f in [
        "diagnostics.csv",
        "densities.csv",
        "snapshot_000.dat",
        "snapshot_001.dat",
        "snapshot_002.dat",
        "waterfall_v.dat",
        "waterfall_eta.dat",
        "fit.txt",
        "error.dat",
        "run.txt",
    ] {
        assert!(tmp.path().join(f).exists(), "{f} missing");
    }
    assert!(!tmp.path().join("snapshot_003.dat").exists());

    let csv = read(tmp.path().join("diagnostics.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), DIAGNOSTICS_HEADER);
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[200][0], 1.0);
    assert!(rows.iter().all(|r| r.len() == 9 && r.iter().all(|x| x.is_finite())));

    let snap = read(tmp.path().join("snapshot_002.dat"));
    assert!(snap.starts_with("# t=1.0000000000000000e0 scenario=soliton-test L=15 N=1024"));
    let (x, _, _) = read_snapshot(&snap).unwrap();
    assert_eq!(x.len(), 1024);

    let wf = read(tmp.path().join("waterfall_v.dat"));
    let data: Vec<&str> = wf.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 101);
    // 1024 nodes subsampled by 2, plus the time column
    assert_eq!(data[0].split_whitespace().count(), 513);

    let fit = read(tmp.path().join("fit.txt"));
    assert!(fit.starts_with("status=ok\n"));
    let c_fit = out.fit.unwrap().unwrap().c_fit;
    assert!((c_fit - 0.8).abs() < 1e-6);
}

#[test]
fn error_file_matches_library_evolution() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(Scenario::SolitonTest, tmp.path());
    run_scenario(&cfg).unwrap();

    let g = Grid::new(cfg.l, cfg.n).unwrap();
    let model = KbkModel::new(&g, ModelParams::default()).unwrap();
    let p = SolitonParams::new(cfg.c, 0.0).unwrap();
    let numeric = evolve_plain(&good_soliton(&p, 0.0, &g).unwrap(), &model, cfg.t, cfg.nt).unwrap();
    let exact = good_soliton(&p, cfg.t, &g).unwrap();
    let (_, de, dv) = read_snapshot(&read(tmp.path().join("error.dat"))).unwrap();
    for j in 0..g.len() {
        assert_eq!(de[j], numeric.eta[j] - exact.eta[j]);
        assert_eq!(dv[j], numeric.v[j] - exact.v[j]);
    }
    let (_, eta_last, v_last) = read_snapshot(&read(tmp.path().join("snapshot_002.dat"))).unwrap();
    assert_eq!(eta_last, numeric.eta);
    assert_eq!(v_last, numeric.v);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = small(Scenario::GaussianV, a.path());
    run_scenario(&cfg).unwrap();
    run_scenario_in(&cfg, b.path()).unwrap();
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 8);
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn custom_scenario_restarts_from_a_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let mut first = small(Scenario::PerturbedSoliton, &tmp.path().join("a"));
    first.l = 5.0;
    let a = run_scenario(&first).unwrap();

    let mut custom = small(Scenario::Custom, &tmp.path().join("b"));
    custom.l = first.l;
    custom.init = Some(tmp.path().join("a/snapshot_000.dat"));
    let b = run_scenario(&custom).unwrap();
    assert!(b.fit.is_none());
    assert_eq!(a.final_state.unwrap().max_abs_diff(b.final_state.as_ref().unwrap()), 0.0);

    custom.n = 512;
    assert!(run_scenario(&custom).is_err());
}

#[test]
fn blow_up_and_under_resolution_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cav = small(Scenario::GaussianEta, &tmp.path().join("cav"));
    cav.a = -5.0;
    cav.l = 5.0;
    cav.t = 5.0;
    let out = run_scenario(&cav).unwrap();
    assert!(matches!(out.status, RunStatus::BlowUp { .. }));
    assert!(out.final_state.is_none());
    let csv = read(tmp.path().join("cav/diagnostics.csv"));
    assert!(!csv.contains("NaN") && !csv.contains("inf"));
    assert!(read(tmp.path().join("cav/run.txt")).contains("blow-up"));

    let mut dsw = small(Scenario::Dsw, &tmp.path().join("dsw"));
    dsw.eps = 0.01;
    dsw.nt = 500;
    let out = run_scenario(&dsw).unwrap();
    match out.status {
        RunStatus::Unresolved { tail } => assert!(tail > 1e-6),
        s => panic!("unexpected status {s:?}"),
    }
}

#[test]
fn batch_outputs_do_not_depend_on_order() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "scenario=perturbed-soliton\nname=p\nL=10\nN=512\nNt=100\n---\nscenario=gaussian-v\nname=g\nA=1\nL=5\nN=256\nNt=100\n";
    let cfgs = parse_config_file(text, &[]).unwrap();
    let mut reversed = cfgs.clone();
    reversed.reverse();
    let r1 = run_batch(&cfgs, Some(&tmp.path().join("one"))).unwrap();
    let r2 = run_batch(&reversed, Some(&tmp.path().join("two"))).unwrap();
    assert!(r1.all_succeeded() && r2.all_succeeded());
    for run in ["p", "g"] {
        for f in ["diagnostics.csv", "snapshot_005.dat", "waterfall_eta.dat", "fit.txt"] {
            let a = fs::read(tmp.path().join("one").join(run).join(f)).unwrap();
            let b = fs::read(tmp.path().join("two").join(run).join(f)).unwrap();
            assert_eq!(a, b, "{run}/{f}");
        }
    }
    assert!(r1.table().lines().count() >= 3);
}

#[test]
fn batch_keeps_going_after_a_failed_run() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "scenario=custom\nname=broken\ninit=/nonexistent/file\n---\nscenario=gaussian-v\nname=ok\nA=1\nL=5\nN=256\nNt=50\n";
    let cfgs = parse_config_file(text, &[]).unwrap();
    let report = run_batch(&cfgs, Some(tmp.path())).unwrap();
    assert!(report.runs[0].1.is_err());
    assert!(report.runs[1].1.as_ref().unwrap().status.is_success());
    assert!(!report.all_succeeded());
    assert!(report.table().contains("ERROR"));
}

fn kbk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kbk"))
}

#[test]
fn cli_flags_and_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kbk()
        .args(["--scenario", "soliton-test", "--N", "512", "--Nt", "400", "--C", "-0.5", "--snapshots", "1"])
        .arg("--out")
        .arg(tmp.path().join("st"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = read(tmp.path().join("st/run.txt"));
    assert!(run.contains("C=-0.5") && run.contains("N=512") && run.contains("Nt=400"));

    let out = kbk()
        .args(["--scenario", "dsw", "--eps", "0.01", "--N", "256", "--Nt", "300", "--snapshots", "1"])
        .arg("--out")
        .arg(tmp.path().join("dsw"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = kbk().args(["--scenario", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scenario"));

    let help = kbk().arg("--help").output().unwrap();
    let help = String::from_utf8_lossy(&help.stdout);
    for flag in [
        "--scenario", "--L", "--N", "--T", "--Nt", "--C", "--lambda", "--mu", "--A", "--eps", "--snapshots",
        "--dealias", "--out", "--batch",
    ] {
        assert!(help.contains(flag), "{flag} missing from --help");
    }
}

#[test]
fn cli_batch_flags_override_file() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("sweep.conf");
    fs::write(
        &conf,
        "scenario=soliton-test\nname=a\nNt=100\n---\nscenario=soliton-test\nname=b\nNt=200\n",
    )
    .unwrap();
    let out = kbk()
        .arg("--batch")
        .arg(&conf)
        .args(["--N", "1024", "--snapshots", "1"])
        .arg("--out")
        .arg(tmp.path().join("runs"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for (name, nt) in [("a", 100), ("b", 200)] {
        let run = read(tmp.path().join("runs").join(name).join("run.txt"));
        assert!(run.contains("N=1024") && run.contains(&format!("Nt={nt}")));
    }
    assert!(read(tmp.path().join("runs/summary.txt")).contains("max_error="));
}
