use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qsd_cli::{run, SweepConfig};

fn qsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsd"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn strategy_b_sweep_has_one_row_per_intensity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.cfg",
        "observables = fidelity\nstrategy = b\nsweep.alpha_sq = 0:4:0.1\n",
    );
    let out = qsd(&["--out", dir.path().to_str().unwrap(), "sweep", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha_sq,fidelity");
    assert_eq!(lines.len(), 42);
    assert!(!csv.contains('\r'));
    for line in &lines[1..] {
        let f: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(f > 0.0 && f <= 1.0);
    }
}

#[test]
fn sidecar_parses_back_into_the_same_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let text = "observables = fidelity, rate\n\
                detectors.kind = SPC\n\
                sweep.pattern = \"1,1,0\", \"1,2,1\"\n\
                sweep.alpha_sq = 0.2, 0.4\n";
    let cfg = SweepConfig::parse(text).unwrap();
    let written = run::run_sweep(&cfg, Some(&dir.path().join("s.csv"))).unwrap();
    let meta = written
        .iter()
        .find(|p| p.extension().unwrap() == "meta")
        .unwrap();
    let back = SweepConfig::parse(&fs::read_to_string(meta).unwrap()).unwrap();
    assert_eq!(back.settings, cfg.settings);
    assert_eq!(back.sweeps, cfg.sweeps);
    assert_eq!(back.meta["version"], env!("CARGO_PKG_VERSION"));
    run::validate(&back).unwrap();

    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "pattern,alpha_sq,fidelity,rate"
    );
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("\"1,1,0\",2.0000000000000001e-1,"));
}

#[test]
fn figure_panel_writes_field_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsd(&["--out", dir.path().to_str().unwrap(), "figure", "fig12b"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "fig12b_reference.csv",
        "fig12b_reference_phase.csv",
        "fig12b_eta.meta",
        "fig12b_eta_phase.csv",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let phase = fs::read_to_string(dir.path().join("fig12b_eta_phase.csv")).unwrap();
    assert_eq!(phase.lines().next().unwrap(), "detectors.eta,theta,p_theta");
    assert_eq!(phase.lines().count(), 1 + 3 * 360);
    let meta = fs::read_to_string(dir.path().join("fig12b_eta.meta")).unwrap();
    assert!(meta.contains("meta.axes = "));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let empty = write(dir.path(), "empty.cfg", "alpha_sq = 1\n");
    let unknown = write(
        dir.path(),
        "unknown.cfg",
        "observables = fidelity\nalpha = 1\n",
    );
    let impossible = write(
        dir.path(),
        "imp.cfg",
        "observables = ideal_fidelity\nbs.t_sq = 1\n",
    );
    let good = write(
        dir.path(),
        "good.cfg",
        "observables = fidelity\nsweep.alpha_sq = 0.1, 0.2\n",
    );

    assert_eq!(qsd(&["validate", &empty]).status.code(), Some(2));
    assert_eq!(qsd(&["validate", &unknown]).status.code(), Some(2));
    assert_eq!(qsd(&["figure", "fig3"]).status.code(), Some(2));
    assert_eq!(qsd(&["--seed", "1", "list-presets"]).status.code(), Some(2));
    assert_eq!(
        qsd(&["--out", d, "sweep", &impossible]).status.code(),
        Some(3)
    );
    assert_eq!(qsd(&["sweep", "/nonexistent/x.cfg"]).status.code(), Some(3));

    let ok = qsd(&["validate", &good]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&ok.stdout).trim(),
        "ok: 2 grid points"
    );
    let list = String::from_utf8_lossy(&qsd(&["list-presets"]).stdout).into_owned();
    for id in [
        "fig2a", "fig2b", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12",
    ] {
        assert!(list.contains(id), "{id}");
    }
}

#[test]
fn cutoff_flag_and_thread_count_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "observables = fidelity, rate\nsweep.alpha_sq = 0.2, 0.8, 1.4\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(qsd(&[
        "--out",
        a.to_str().unwrap(),
        "--threads",
        "1",
        "sweep",
        &cfg
    ])
    .status
    .success());
    assert!(qsd(&[
        "--out",
        b.to_str().unwrap(),
        "--threads",
        "3",
        "sweep",
        &cfg
    ])
    .status
    .success());
    assert_eq!(
        fs::read(a.join("c.csv")).unwrap(),
        fs::read(b.join("c.csv")).unwrap()
    );

    let small = dir.path().join("small");
    let out = qsd(&[
        "--out",
        small.to_str().unwrap(),
        "--cutoff",
        "4",
        "sweep",
        &cfg,
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "a 4-level cutoff cannot hold these inputs"
    );
}
