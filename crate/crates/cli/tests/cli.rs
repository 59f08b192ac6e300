use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eigenforge::commands::{bound_table, kernel_rows};
use eigenforge::config::{BoundPlotConfig, KernelPlotConfig};
use eigenforge::ExperimentConfig;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eigenforge"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn record(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("run_record.json")).unwrap()).unwrap()
}

fn geometric_modulus(omega: f64, j: usize, dim: usize) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for l in 0..dim {
        let a = std::f64::consts::TAU * l as f64 * (omega - j as f64) / dim as f64;
        re += a.cos();
        im += a.sin();
    }
    (re * re + im * im).sqrt() / dim as f64
}

#[test]
fn kernel_plot_rows() {
    let rows = kernel_rows(&KernelPlotConfig { m: 4, j: 5 }).unwrap();
    assert_eq!(rows.len(), 1600);
    assert_eq!(rows[500], (5.0, 1.0));
    for k in (0..16).filter(|&k| k != 5) {
        assert!(rows[k * 100].1 < 1e-12, "ω={k}");
    }
    assert!((rows[550].1 - geometric_modulus(5.5, 5, 16)).abs() < 1e-12);
}

#[test]
fn bound_plot_rows() {
    let cfg = BoundPlotConfig::default();
    let table = bound_table(&cfg).unwrap();
    for x in &table.crossings {
        assert!((x.bound_at_g_star - x.p).abs() < 1e-12);
        let at_zero = table.rows.iter().find(|r| r.0 == x.p && r.1 == 0.0).unwrap().2;
        assert!(at_zero > x.p);
        let expect = cfg.fqq2 * x.p / (cfg.fqq2 * x.p + table.lambda * (1.0 - x.p));
        assert!((at_zero - expect).abs() < 1e-15);
    }
    for w in table.rows.windows(2).filter(|w| w[0].0 == w[1].0) {
        assert!(w[1].2 < w[0].2);
    }
    let p01: Vec<_> = table.rows.iter().filter(|r| r.0 == 0.1).collect();
    assert_eq!(p01.len(), 181);
    assert!((p01.last().unwrap().1 - 0.9).abs() < 1e-12);
}

#[test]
fn numop_examples() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"experiment":"numop_fock","n":5,"m":3,"trunc":32}"#, 5, 1.0),
        (r#"{"experiment":"numop_fock","n":19,"m":4,"trunc":32}"#, 3, 1.0),
    ];
    for (i, (body, j, prob)) in cases.into_iter().enumerate() {
        let cfg = write_config(dir.path(), body);
        let out = dir.path().join(format!("case{i}"));
        let o = run("numop-fock", &cfg, &out, &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let r = record(&out);
        assert_eq!(r["outcome"]["j"], j);
        assert!((r["outcome"]["probability"].as_f64().unwrap() - prob).abs() < 1e-9);
    }
    // ωt = 1: the outcome table is the bare kernel of ω_9 = −9·16/2π mod 16.
    let cfg = write_config(dir.path(), r#"{"experiment":"numop_fock","n":9,"m":4,"trunc":32,"omega_t":1.0}"#);
    let out = dir.path().join("kernel");
    assert!(run("numop-fock", &cfg, &out, &[]).status.success());
    let r = record(&out);
    let omega = (-9.0f64 * 16.0 / std::f64::consts::TAU).rem_euclid(16.0);
    for (j, p) in r["distribution"].as_array().unwrap().iter().enumerate() {
        assert!((p.as_f64().unwrap() - geometric_modulus(omega, j, 16).powi(2)).abs() < 1e-9);
    }
}

#[test]
fn vacuum_and_zero_displacement_are_fixed_points() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment":"coherent_to_fock","alpha":0.0,"n_target":0,"forced_j":0}"#);
    let out = dir.path().join("vac");
    assert!(run("coherent-to-fock", &cfg, &out, &[]).status.success());
    let r = record(&out);
    assert!((r["populations_after"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let cfg = write_config(dir.path(), r#"{"experiment":"displacement_squeezed","d":0.0,"trunc":64}"#);
    let out = dir.path().join("d0");
    let o = run("displacement-squeezed", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = record(&out);
    assert_eq!(r["outcome"]["j"], 0);
    let d = &r["diagnostics"];
    assert!((d["p"].as_f64().unwrap() - d["p_prime_actual"].as_f64().unwrap()).abs() < 1e-14);
    let (before, after) = (r["populations_before"].as_array().unwrap(), r["populations_after"].as_array().unwrap());
    for (b, a) in before.iter().zip(after) {
        assert!((b.as_f64().unwrap() - a.as_f64().unwrap()).abs() < 1e-14);
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let bad = [
        ("kernel-plot", "not json"),
        ("kernel-plot", r#"{"experiment":"kernel_plot","j":16}"#),
        ("kernel-plot", r#"{"experiment":"kernel_plot","colour":1}"#),
        ("bound-plot", r#"{"experiment":"bound_plot","fqq2":0.3}"#),
        ("bound-plot", r#"{"experiment":"bound_plot","p_list":[1.0]}"#),
        ("numop-fock", r#"{"experiment":"numop_fock","trunc":4}"#),
        ("numop-fock", r#"{"experiment":"numop_fock","trunc":600}"#),
        ("numop-fock", r#"{"experiment":"numop_fock","n":40,"trunc":32}"#),
        ("coherent-to-fock", r#"{"experiment":"coherent_to_fock","forced_j":16}"#),
        ("coherent-to-fock", r#"{"experiment":"numop_fock"}"#),
        ("displacement-squeezed", r#"{"experiment":"displacement_squeezed","r":-1.0}"#),
    ];
    for (sub, body) in bad {
        let cfg = write_config(dir.path(), body);
        let o = run(sub, &cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(2), "{sub} {body}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run("kernel-plot", &dir.path().join("missing.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(dir.path(), r#"{"experiment":"kernel_plot"}"#);
    assert_eq!(run("kernel-plot", &cfg, &out, &["--seed", "3"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), r#"{"experiment":"coherent_to_fock"}"#);
    assert_eq!(run("coherent-to-fock", &cfg, &out, &["--forced-j", "99"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    // Heavy squeezing does not fit into 16 levels.
    let cfg = write_config(dir.path(), r#"{"experiment":"displacement_squeezed","r":2.0,"alpha_state":2.0,"trunc":16}"#);
    let o = run("displacement-squeezed", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ceiling"));
    // The state fits, but D(i·d·15) pushes it out.
    let cfg = write_config(dir.path(), r#"{"experiment":"displacement_squeezed","d":0.5,"trunc":64}"#);
    let o = run("displacement-squeezed", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("D(i·d·(M−1))"));
    // |5⟩ never reads out as 2.
    let cfg = write_config(dir.path(), r#"{"experiment":"numop_fock","n":5,"m":3,"trunc":32,"forced_j":2}"#);
    assert_eq!(run("numop-fock", &cfg, &out, &[]).status.code(), Some(3));
}

#[test]
fn seeded_runs_sample_and_repeat() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment":"coherent_to_fock"}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("coherent-to-fock", &cfg, &a, &["--seed", "17"]).status.success());
    assert!(run("coherent-to-fock", &cfg, &b, &["--seed", "17"]).status.success());
    let r = record(&a);
    assert_eq!(r["outcome"]["policy"], "sampled");
    assert_eq!(r["outcome"]["seed"], 17);
    assert_eq!(fs::read(a.join("run_record.json")).unwrap(), fs::read(b.join("run_record.json")).unwrap());
}

#[test]
fn reference_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(path.file_stem().unwrap().to_str().unwrap(), cfg.experiment().name());
        seen += 1;
    }
    assert_eq!(seen, 5);
}

#[test]
fn floats_use_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment":"kernel_plot"}"#);
    let out = dir.path().join("k");
    assert!(run("kernel-plot", &cfg, &out, &[]).status.success());
    let text = fs::read_to_string(out.join("kernel.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,abs_f"));
    for line in lines.take(50) {
        for cell in line.split(',') {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
            let v: f64 = cell.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), cell);
        }
    }
}

#[test]
fn complex_alpha_and_null_omega_parse() {
    let cfg = ExperimentConfig::parse(r#"{"experiment":"coherent_to_fock","alpha":[0.0,3.0]}"#).unwrap();
    let ExperimentConfig::CoherentToFock(c) = cfg else { panic!() };
    assert_eq!(c.alpha.value(), eigenforge_core::Complex::new(0.0, 3.0));
    let cfg = ExperimentConfig::parse(r#"{"experiment":"numop_fock","omega_t":null}"#).unwrap();
    let ExperimentConfig::NumopFock(c) = cfg else { panic!() };
    assert!((c.omega_t() - std::f64::consts::TAU * 7.0 / 8.0).abs() < 1e-15);
}
