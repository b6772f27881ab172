use std::path::PathBuf;
use std::process::{Command, Output};

fn kgws(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgws"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn potential_columns_and_symmetry() {
    let o = kgws(&["potential", "--xrange", "-6:6:13"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("x,V\n"));
    let v: Vec<f64> = rows(&o).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(v.len(), 13);
    for i in 0..13 {
        assert_eq!(v[i], v[12 - i]);
    }
    assert!((v[6] - 16.40625).abs() < 1e-3);
}

#[test]
fn zero_amplitudes_give_zero_potential() {
    let dir = std::env::temp_dir().join(format!("kgws-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("flat.conf");
    let text = std::fs::read_to_string(config("barrier.conf")).unwrap();
    let flat: String = text
        .lines()
        .map(|l| match l.split('=').next().unwrap().trim() {
            "V1" | "V2" | "A" | "B" | "C" | "D" => {
                format!("{} = 0", l.split('=').next().unwrap().trim())
            }
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&path, flat).unwrap();
    let o = kgws(&[
        "--config",
        path.to_str().unwrap(),
        "potential",
        "--xrange",
        "-5:5:11",
    ]);
    assert!(o.status.success());
    assert!(rows(&o).iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn energy_sweep_conserves_and_annotates_domain_rows() {
    let o = kgws(&["scatter", "--sweep", "energy=1.5:60:0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("sweep_value,T,R,T_plus_R,note\n"));
    let rows = rows(&o);
    assert_eq!(rows.len(), 118);
    // E ≤ Mc² rows are kept with NaN markers and a quoted note
    assert_eq!(rows[0][1], "NaN");
    assert!(rows[0][4].starts_with('"'));
    for r in &rows[2..] {
        let s: f64 = r[3].parse().unwrap();
        assert!((s - 1.0).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn parameter_sweep_needs_energy() {
    let o = kgws(&["scatter", "--sweep", "alpha=0.5:10:0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = kgws(&[
        "scatter",
        "--sweep",
        "alpha=0.5:10:0.5",
        "--energy",
        "34.75",
    ]);
    assert!(o.status.success());
    let t: Vec<f64> = rows(&o).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(t[0] > 0.99 && *t.last().unwrap() < 1e-3);
}

#[test]
fn bad_input_exits_with_2() {
    assert_eq!(
        kgws(&["scatter", "--sweep", "zeta=0:1:0.1", "--energy", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(kgws(&["--mass", "-1", "potential"]).status.code(), Some(2));
    assert_eq!(
        kgws(&["--config", "/nonexistent.conf", "bound"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(kgws(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = std::env::temp_dir().join(format!("kgws-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.conf");
    let text = std::fs::read_to_string(config("barrier.conf")).unwrap();
    std::fs::write(&path, text.replace("q = 0.8", "q = zero")).unwrap();
    let o = kgws(&["--config", path.to_str().unwrap(), "potential"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 12"), "{err}");
}

#[test]
fn barrier_has_empty_spectrum() {
    let o = kgws(&["bound"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "n,parity,E_n,residual,nodes\n");
    assert!(!o.stderr.is_empty());
}

#[test]
fn well_spectrum_rows() {
    let o = kgws(&["--config", &config("well.conf"), "bound"]);
    assert!(o.status.success());
    let rows = rows(&o);
    assert_eq!(rows.len(), 27);
    for (n, r) in rows.iter().enumerate() {
        assert_eq!(r[0], n.to_string());
        assert_eq!(r[1], if n % 2 == 0 { "even" } else { "odd" });
        assert_eq!(r[4], n.to_string());
    }
}

#[test]
fn wavefunction_decays_and_has_nodes() {
    for n in [0usize, 2, 26] {
        let s = n.to_string();
        let o = kgws(&[
            "--config",
            &config("well.conf"),
            "wavefunction",
            "--state",
            &s,
        ]);
        assert!(o.status.success());
        let phi: Vec<f64> = rows(&o).iter().map(|r| r[1].parse().unwrap()).collect();
        let max = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(phi[0].abs() < 1e-6 * max && phi.last().unwrap().abs() < 1e-6 * max);
        let signs: Vec<f64> = phi
            .iter()
            .filter(|v| v.abs() > 1e-9 * max)
            .map(|v| v.signum())
            .collect();
        assert_eq!(signs.windows(2).filter(|w| w[0] != w[1]).count(), n);
    }
    let o = kgws(&[
        "--config",
        &config("well.conf"),
        "wavefunction",
        "--state",
        "27",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_modes_and_negative_control() {
    assert!(kgws(&["verify", "--mode", "special"]).status.success());
    assert!(kgws(&["verify", "--mode", "scatter"]).status.success());
    let o = kgws(&["verify", "--mode", "scatter", "--corrupt-branch"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn output_is_deterministic_and_job_independent() {
    let a = kgws(&[
        "--jobs",
        "1",
        "scatter",
        "--sweep",
        "L=0:10:0.25",
        "--energy",
        "34.75",
    ]);
    let b = kgws(&[
        "--jobs",
        "4",
        "scatter",
        "--sweep",
        "L=0:10:0.25",
        "--energy",
        "34.75",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_file_flag() {
    let path = std::env::temp_dir().join(format!("kgws-cli-out-{}.csv", std::process::id()));
    let o = kgws(&[
        "--output",
        path.to_str().unwrap(),
        "potential",
        "--xrange",
        "0:1:3",
    ]);
    assert!(o.status.success() && o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
}
