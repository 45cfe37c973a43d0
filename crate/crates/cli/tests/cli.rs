use std::path::Path;
use std::process::{Command, Output};

fn nfirs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfirs")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Small scenario with coarse codebooks so sweeps finish quickly.
fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    std::fs::write(
        &path,
        "n_y = 4\nn_z = 4\nn_t = 6\nn_b = 6\nslots = 8\nframes = 8\nsubcarriers = 8\npaths = 2\n\n[codebook]\ng_z = 40\ng_y = 40\ng_u = 90\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn error_kind(o: &Output) -> String {
    let line = stderr(o);
    let line = line.lines().find(|l| l.starts_with("error: kind=")).unwrap_or_else(|| panic!("no error line in {line:?}"));
    line["error: kind=".len()..].split_whitespace().next().unwrap().to_string()
}

#[test]
fn simulate_then_estimate_and_crlb() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let scen = dir.path().join("scen");
    let o = nfirs(&["simulate", "--config", &cfg, "--seed", "9", "--snr-list", "inf", "--out", scen.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["config.toml", "truth.csv", "operators.json", "tensor.csv"] {
        assert!(scen.join(f).exists(), "{f}");
    }
    let tensor = std::fs::read_to_string(scen.join("tensor.csv")).unwrap();
    assert!(tensor.contains("# dims Q=8 T_a=8 P=8"));
    assert_eq!(tensor.lines().filter(|l| !l.starts_with('#')).count(), 1 + 512);

    let est = dir.path().join("est.csv");
    let o = nfirs(&["estimate", "--input", scen.to_str().unwrap(), "--out", est.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&est).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "theta,phi,psi,tau,distance,gain_re,gain_im");
    assert_eq!(rows.len(), 3);
    assert!(stdout(&o).contains("channel NMSE"));

    let o = nfirs(&["crlb", "--input", scen.to_str().unwrap(), "--snr-list", "0,10,20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("snr_db,sigma2,crlb_total"));
    assert_eq!(lines.len(), 4);
    let tau: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert!((tau[0] / tau[1] - 10.0).abs() < 1e-9 && (tau[1] / tau[2] - 10.0).abs() < 1e-9);

    // noise-free bounds are undefined
    let o = nfirs(&["crlb", "--input", scen.to_str().unwrap(), "--snr-list", "inf"]);
    assert!(!o.status.success());
    assert_eq!(error_kind(&o), "InvalidConfig");
}

#[test]
fn sweep_writes_deterministic_results_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = nfirs(&[
            "sweep", "--config", &cfg, "--seed", "4", "--snr-list", "10,inf", "--trials", "3", "--distance-range", "1,6", "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = run("a/results.csv");
    let b = run("b/results.csv");
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    assert!(ta.starts_with("snr_db,family,median_nmse_db,mean_nmse_db,crlb_db,trials_ok,trials_failed\n"));
    assert_eq!(ta.lines().count(), 1 + 2 * 6);
    let ma = std::fs::read_to_string(a.with_extension("manifest.json")).unwrap();
    assert_eq!(ma, std::fs::read_to_string(b.with_extension("manifest.json")).unwrap());
    let v: serde_json::Value = serde_json::from_str(&ma).unwrap();
    assert_eq!(v["master_seed"], 4);
    assert_eq!(v["trials"], 3);
    assert_eq!(v["snr_db"][1], "inf");
    assert_eq!(v["scenario"]["n_y"], 4);
}

#[test]
fn full_scale_flag_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("two.toml");
    std::fs::write(&cfg, "paths = 2\ndistance_range = [15.0, 20.0]\n").unwrap();
    let out = dir.path().join("big");
    let o = nfirs(&["simulate", "--full-scale", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let written = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(written.contains("n_y = 64"));
    assert!(written.contains("paths = 2"));
    let truth = std::fs::read_to_string(out.join("truth.csv")).unwrap();
    for row in truth.lines().skip(1) {
        let d: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!((15.0..20.0).contains(&d));
    }
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing");
    let cases: [(&[&str], &str); 5] = [
        (&["estimate", "--input", missing.to_str().unwrap()], "IoError"),
        (&["sweep", "--snr-list", "ten", "--out", "x.csv"], "Parse"),
        (&["sweep", "--trials", "0", "--snr-list", "10", "--out", "x.csv"], "InvalidConfig"),
        (&["crlb", "--distance-range", "1"], "InvalidConfig"),
        (&["frobnicate"], "Usage"),
    ];
    for (args, kind) in cases {
        let o = nfirs(args);
        assert!(!o.status.success(), "{args:?}");
        assert_eq!(error_kind(&o), kind, "{args:?}");
        assert_eq!(stderr(&o).lines().count(), 1, "{args:?}");
    }
    let o = nfirs(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("simulate"));
}
