use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rotsym::geometry::{DirectionalSample, Estimator, UnitVector};
use rotsym::gof::kolmogorov_sf;
use rotsym::symmetry::Method;
use rotsym_cli::commands::{cmd_sample, cmd_test, parse_angular, Family, SampleParams};
use rotsym_cli::describe::{describe, shortest_set_cells};
use rotsym_cli::ingest::{ingest_path, write_sample, Format};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rotsym"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(name: &str, v: &Value) {
    let errors: Vec<String> = schema(name).iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn params(family: Family, p: usize, n: usize, seed: u64) -> SampleParams {
    SampleParams {
        family,
        p,
        n,
        seed,
        theta: None,
        kappa: None,
        g: parse_angular("vmf:2").unwrap(),
        lambda: None,
        mu: None,
    }
}

#[test]
fn sample_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["sample", "--family", "vmf", "--kappa", "0", "--p", "3", "--n", "10", "--seed", "1", "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let o = run(&["sample", "--family", "vmf", "--kappa", "0", "--p", "3", "--n", "10", "--seed", "2"]);
    assert_ne!(o.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn te_shape_is_rescaled_with_warning() {
    let o = run(&["sample", "--family", "te", "--p", "4", "--n", "5", "--lambda", "1,2,3"]);
    assert!(o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("warning") && err.contains("trace 6"), "{err}");
    let o = run(&["sample", "--family", "te", "--p", "4", "--n", "5", "--lambda", "1,1,1"]);
    assert!(o.stderr.is_empty());
}

#[test]
fn emitted_samples_ingest_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = params(Family::Tm, 5, 200, 3);
    p.kappa = Some(2.0);
    let (s, _) = cmd_sample(&p).unwrap();
    let path = dir.path().join("s.csv");
    write_sample(&s, std::fs::File::create(&path).unwrap()).unwrap();
    let back = ingest_path(&path, Format::UnitVectorsCsv, 1e-3, false).unwrap();
    assert_eq!(back.n(), s.n());
    for (a, b) in s.as_flat().iter().zip(back.as_flat()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn test_report_matches_schema_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = params(Family::Vmf, 3, 80, 4);
    p.kappa = Some(3.0);
    let (s, _) = cmd_sample(&p).unwrap();
    let path = dir.path().join("d.csv");
    write_sample(&s, std::fs::File::create(&path).unwrap()).unwrap();
    let path = path.to_str().unwrap();

    let o = run(&["test", "--data", path, "--theta", "0,0,1", "--estimator", "mean"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("test_report.schema.json", &v);
    let labels: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["method"].as_str().unwrap()).collect();
    assert_eq!(labels, ["s-loc", "s-sc", "s-hyb", "s-hybF", "s-cov", "u-loc", "u-sc", "u-hyb", "u-hybF"]);

    let o = run(&["test", "--data", path, "--tests", "s-sc-hd,u-sc", "--theta", "0,0,1", "--estimator", "axis"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("test_report.schema.json", &v);
    assert_eq!(v[0]["reference"], "normal");
    assert_eq!(v[0]["df"], Value::Null);
    assert_eq!(v[1]["estimator"], "axis");

    // unspecified test without an estimator: test error
    let o = run(&["test", "--data", path, "--tests", "u-loc", "--theta", "0,0,1"]);
    assert_eq!(o.status.code(), Some(3));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_valid("error.schema.json", &e);
    assert_eq!(e["error"]["code"], "test_error");
    assert_eq!(e["error"]["method"], "u-loc");

    // observation on the axis: test error
    let pole = write(dir.path(), "pole.csv", "0,0,1\n1,0,0\n0,1,0\n");
    let o = run(&["test", "--data", pole.to_str().unwrap(), "--theta", "0,0,1"]);
    assert_eq!(o.status.code(), Some(3));

    // data errors
    let bad = write(dir.path(), "bad.csv", "1,0,0\n0.5,0.5,0\n");
    let o = run(&["test", "--data", bad.to_str().unwrap(), "--theta", "0,0,1"]);
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_valid("error.schema.json", &e);
    assert_eq!(e["error"]["row"], 2);
    let o = run(&["test", "--data", "/nonexistent/x.csv", "--theta", "0,0,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lonlat_ingest_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = (0..40)
        .map(|i| format!("{},{}\n", (i * 37) % 360, 20.0 + (i % 7) as f64 * 5.0))
        .collect();
    let f = write(dir.path(), "ll.csv", &format!("lon,lat\n{text}"));
    let o = run(&["test", "--data", f.to_str().unwrap(), "--format", "lonlat_degrees_csv", "--header", "--theta", "0,0,1", "--tests", "s-loc,s-sc,s-hyb"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["n"], 40);
}

#[test]
fn tm_without_skew_matches_rotsym_in_distribution() {
    let theta = UnitVector::basis(3, 2).unwrap();
    let pvals = |family: Family| -> Vec<f64> {
        (0..200)
            .map(|seed| {
                let mut p = params(family, 3, 60, 1000 + seed);
                p.kappa = Some(0.0);
                let (s, _) = cmd_sample(&p).unwrap();
                cmd_test(&s, &[Method::SLoc], Some(theta.clone()), None, 0.05).unwrap()[0].p_value
            })
            .collect()
    };
    let mut a = pvals(Family::Tm);
    let mut b = pvals(Family::Rotsym);
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    // two-sample Kolmogorov-Smirnov
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let en = (a.len() as f64 * b.len() as f64 / (a.len() + b.len()) as f64).sqrt();
    let p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
    assert!(p > 0.01, "D = {d}, p = {p}");
}

#[test]
fn uniform_data_rarely_give_extreme_p_values() {
    let theta = UnitVector::basis(3, 0).unwrap();
    let methods = [
        Method::SLoc, Method::SSc, Method::SHyb, Method::SHybF, Method::SCov,
        Method::ULoc, Method::USc, Method::UHyb, Method::UHybF,
    ];
    let runs = 200;
    let mut small = vec![0usize; methods.len()];
    for seed in 0..runs {
        let mut p = params(Family::Vmf, 3, 500, 5000 + seed);
        p.kappa = Some(0.0);
        let (s, _) = cmd_sample(&p).unwrap();
        let r = cmd_test(&s, &methods, Some(theta.clone()), Some(Estimator::SphericalMean), 0.05).unwrap();
        for (k, rec) in r.iter().enumerate() {
            if rec.p_value <= 0.001 {
                small[k] += 1;
            }
        }
    }
    for (m, c) in methods.iter().zip(&small) {
        assert!((*c as f64) <= 0.01 * runs as f64, "{}: {c} of {runs}", m.label());
    }
}

fn sample_from_cosines(v: &[f64]) -> DirectionalSample {
    let rows = v
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let a = i as f64 * 2.399963;
            let r = (1.0 - c * c).sqrt();
            UnitVector::normalize(vec![r * a.cos(), r * a.sin(), c]).unwrap()
        })
        .collect();
    DirectionalSample::from_rows(rows).unwrap()
}

// quantiles of a triangular law on [c - w, c + w]
fn triangular(n: usize, c: f64, w: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            if u < 0.5 {
                c - w + 2.0 * w * (u / 2.0).sqrt()
            } else {
                c + w - 2.0 * w * ((1.0 - u) / 2.0).sqrt()
            }
        })
        .collect()
}

#[test]
fn describe_finds_single_cluster() {
    let v = triangular(200, 0.5, 0.05);
    let s = sample_from_cosines(&v);
    let k = describe(&s, &UnitVector::basis(3, 2).unwrap(), 0.9, 512).unwrap();
    assert_eq!(k.modes.len(), 1);
    assert!((k.modes[0].cosine - 0.5).abs() < 0.01);
    assert!((k.modes[0].elevation_deg - 30.0).abs() < 1.0);
    assert!(k.shortest_set.mass >= 0.9);
    let total: f64 = k.density.iter().sum::<f64>() * k.grid_step;
    assert!((total - 1.0).abs() < 1e-3);
}

#[test]
fn describe_symmetric_bimodal() {
    let half = triangular(150, 0.4, 0.1);
    let v: Vec<f64> = half.iter().flat_map(|&c| [c, -c]).collect();
    let s = sample_from_cosines(&v);
    let k = describe(&s, &UnitVector::basis(3, 2).unwrap(), 0.9, 512).unwrap();
    assert_eq!(k.modes.len(), 2);
    assert!((k.modes[0].cosine + k.modes[1].cosine).abs() < 1e-9);
    assert!((k.modes[0].density - k.modes[1].density).abs() < 1e-9);
    let iv = &k.shortest_set.intervals;
    assert_eq!(iv.len(), 2);
    // mirrored cells can differ in the last bits, so allow one cell
    let tol = k.grid_step * 1.01;
    assert!((iv[0].lo + iv[1].hi).abs() < tol && (iv[0].hi + iv[1].lo).abs() < tol);
}

#[test]
fn threshold_sweep_matches_brute_force() {
    // every subset of a 16-cell grid: the smallest one reaching the mass
    let dens: Vec<f64> = (0..16).map(|k| 1.0 + ((k * 7) % 16) as f64 / 3.0 + if k == 5 { 4.0 } else { 0.0 }).collect();
    let step = 1.0 / dens.iter().sum::<f64>();
    for mass in [0.3, 0.5, 0.75, 0.9, 0.99] {
        let (keep, got, _) = shortest_set_cells(&dens, step, mass);
        let size = keep.iter().filter(|&&k| k).count();
        let mut best = usize::MAX;
        let mut best_mass = 0.0;
        for bits in 0u32..(1 << 16) {
            let m: f64 = (0..16).filter(|k| bits >> k & 1 == 1).map(|k| dens[k] * step).sum();
            let c = bits.count_ones() as usize;
            if m >= mass && (c < best || (c == best && m > best_mass)) {
                best = c;
                best_mass = m;
            }
        }
        assert_eq!(size, best, "mass {mass}");
        assert!((got - best_mass).abs() < 1e-12);
    }
}

#[test]
fn describe_command_validates() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = params(Family::Vmf, 3, 300, 6);
    p.kappa = Some(4.0);
    let (s, _) = cmd_sample(&p).unwrap();
    let path = dir.path().join("d.csv");
    write_sample(&s, std::fs::File::create(&path).unwrap()).unwrap();
    let o = run(&["describe", "--data", path.to_str().unwrap(), "--theta", "0,0,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("kde_summary.schema.json", &v);
    let few = write(dir.path(), "few.csv", "1,0,0\n0,1,0\n0,0,1\n");
    let o = run(&["describe", "--data", few.to_str().unwrap(), "--theta", "0,0,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_output_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "scenario = \"tm_grid\"\np = 3\nn = [50]\nreps = 200\nell = [0, 2]\ntests = [\"s-loc\", \"u-hyb\"]\n",
    );
    let mut outs = Vec::new();
    for w in ["1", "8"] {
        let csv = dir.path().join(format!("t{w}.csv"));
        let json = dir.path().join(format!("t{w}.json"));
        let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--workers", w, "--out", csv.to_str().unwrap(), "--json", json.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outs.push((std::fs::read(&csv).unwrap(), std::fs::read(&json).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
    let v: Value = serde_json::from_slice(&outs[0].1).unwrap();
    assert_valid("power_table.schema.json", &v);
    let header = String::from_utf8_lossy(&outs[0].0);
    assert!(header.starts_with("test,ell,n,p,freq,se,N\n"));
}

#[test]
fn config_errors_report_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "scenario = \"null\"\np = 3\nn = [10\n");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_valid("error.schema.json", &e);
    assert_eq!(e["error"]["code"], "config_error");
    assert!(e["error"]["message"].as_str().unwrap().contains("line 3"), "{e}");
}

#[test]
fn bundled_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        rotsym::montecarlo::ExperimentConfig::from_toml_str(&text)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn are_command_output() {
    let o = run(&["are", "--p", "3,4", "--eta", "0.5,5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,eta,are"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r[2])));
    assert!((rows[1][2] - 0.171).abs() < 1e-3);
    let o = run(&["are", "--p", "3", "--eta", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}
