use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_noisy-rf");

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn noisy_rf(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("NOISY_RF_THREADS", "2").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn run_mode(dir: &Path, mode: &str, config: &str, out: &str) -> Output {
    let cfg = write(dir, &format!("{out}.toml"), config);
    let out = dir.join(out);
    noisy_rf(&[mode, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

const TELEGRAPH: &str = "[noise]\nkind = \"telegraph\"\nbeta = 0.1\n";

const WHITE_ORACLE: &str = r#"
unit = "gamma"

[noise]
kind = "white"
diffusion = 1.0

[oracle]
seed = 11
n_trajectories = 2000
check = "spectrum"
tau_step = 0.1
"#;

const AVERAGED_ORACLE: &str = r#"
[noise]
kind = "telegraph"
beta = 0.3
asymmetry = 0.2

[oracle]
seed = 5
n_trajectories = 20000
check = "averaged-exponential"
intervals = [0.0, 1.0, 1.5, 3.0]
sign = "minus"
"#;

#[test]
fn spectrum_csv_has_header_and_unit_echo() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_mode(dir.path(), "spectrum", TELEGRAPH, "s");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.starts_with("# frequencies and rates in units of splitting\n"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "omega_offset,F_total");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4002);
}

#[test]
fn white_spectrum_has_components() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "unit = \"gamma\"\n[noise]\nkind = \"white\"\ndiffusion = 2.0\n[grid]\nmin = -5.0\nmax = 5.0\npoints = 11\n";
    let o = run_mode(dir.path(), "spectrum", cfg, "w");
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(dir.path().join("w.csv")).unwrap();
    let mut rows = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(rows.next().unwrap(), "omega_offset,F_total,F_elastic,F_inelastic");
    assert_eq!(rows.count(), 11);
    assert!(text.contains("gamma = 1.0000000000000000e0, instr_gamma = 2.5000000000000000e-1"));
}

#[test]
fn exceptional_point_lists_a_merged_side_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_mode(dir.path(), "peaks", "[noise]\nkind = \"telegraph\"\nbeta = 0.5\n", "p");
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    let merged: Vec<_> = v["peaks"]["peaks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["multiplicity"] == 2)
        .collect();
    assert_eq!(merged.len(), 1);
    assert_eq!(merged[0]["family"], "side");
    assert!(merged[0]["position"].as_f64().unwrap().abs() < 1e-6);
    let closed = v["closed_form_poles"]["peaks"].as_array().unwrap();
    assert!(closed.iter().any(|p| p["multiplicity"] == 2));
}

#[test]
fn intensities_summary_reports_limits() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_mode(dir.path(), "intensities", TELEGRAPH, "i");
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("i.json")).unwrap()).unwrap();
    let r = &v["ratios_to_i0"];
    let sum = r["elastic"].as_f64().unwrap() + r["inelastic"].as_f64().unwrap();
    assert!((sum - r["total"].as_f64().unwrap()).abs() < 1e-12);
    assert!(v["quasi_static_total"].is_f64());
    assert!(v["fast_limit_total"].is_f64());
}

/// Slow switching favours driving on either transition, fast switching the
/// mean transition.
#[test]
fn detuning_sweep_shows_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{TELEGRAPH}[sweep]\nobservable = \"intensities\"\nouter = {{ axis = \"beta\", values = [0.001, 2.0] }}\n\
         inner = {{ axis = \"mean-detuning\", min = -1.0, max = 1.0, points = 81 }}\n"
    );
    let o = run_mode(dir.path(), "sweep", &cfg, "x");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("x.csv")).unwrap();
    let mut rows = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(rows.next().unwrap(), "beta,mean_detuning,quantity,value");
    let mut best: Vec<(f64, f64, f64)> = Vec::new();
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        if f[2] != "I_tot/I0" {
            continue;
        }
        let (beta, det, val) = (f[0].parse().unwrap(), f[1].parse().unwrap(), f[3].parse().unwrap());
        match best.iter_mut().find(|b| b.0 == beta) {
            Some(b) if val > b.2 => *b = (beta, det, val),
            Some(_) => {}
            None => best.push((beta, det, val)),
        }
    }
    assert_eq!(best.len(), 2);
    assert!((best[0].1.abs() - 0.5).abs() < 0.03, "{best:?}");
    assert!(best[1].1.abs() < 0.03, "{best:?}");
}

#[test]
fn oracle_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_mode(dir.path(), "oracle", WHITE_ORACLE, "a");
    let b = run_mode(dir.path(), "oracle", WHITE_ORACLE, "b");
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    for ext in ["csv", "json"] {
        let fa = fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let fb = fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert!(fa == fb, "{ext} differs");
    }
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(text.contains("omega_offset,F_total,mc_error,F_reference\n"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "o.toml", AVERAGED_ORACLE);
    let run = |out: &str, seed: &str| {
        let out = dir.path().join(out);
        let o = noisy_rf(&["oracle", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
        assert_eq!(v["seed"].as_u64().unwrap(), seed.parse::<u64>().unwrap());
        v["monte_carlo"].clone()
    };
    assert_ne!(run("s1", "1"), run("s2", "2"));
}

#[test]
fn config_errors_exit_2_and_list_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[noise]\nkind = \"telegraph\"\nbeta = -1.0\n[physics]\ngamma = -0.1\n";
    let o = run_mode(dir.path(), "intensities", cfg, "bad");
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("beta"), "{err}");
    assert!(err.contains("gamma"), "{err}");

    let o = run_mode(dir.path(), "spectrum", "[noise]\nkind = \"white\"\ndiffusion = 1.0\ncolour = 3\n", "unk");
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let o = run_mode(dir.path(), "sweep", TELEGRAPH, "nosweep");
    assert_eq!(code(&o), 2);

    let o = run_mode(dir.path(), "peaks", &format!("mode = \"spectrum\"\n{TELEGRAPH}"), "conflict");
    assert_eq!(code(&o), 2);
}

#[test]
fn degenerate_chain_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "unit = \"gamma\"\n[noise]\nkind = \"markov\"\nlevels = [0.0, 1.0]\nrates = [[0.0, 0.0], [0.0, 0.0]]\n";
    let o = run_mode(dir.path(), "intensities", cfg, "deg");
    assert_eq!(code(&o), 3);
    assert!(!dir.path().join("deg.json").exists());
}

#[test]
fn failed_oracle_exits_4_after_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = AVERAGED_ORACLE.replace("n_trajectories = 20000", "n_trajectories = 200") + "sigmas = 1e-9\n";
    let o = run_mode(dir.path(), "oracle", &cfg, "tight");
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("tight.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn missing_config_file_exits_1() {
    let o = noisy_rf(&["spectrum", "--config", "/nonexistent/run.toml"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn presets_parse_and_sweep() {
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
    let mut n = 0;
    for entry in fs::read_dir(presets).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let cfg = noisy_rf_cli::parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(cfg.mode, Some(noisy_rf_cli::Mode::Sweep), "{}", path.display());
        n += 1;
    }
    assert!(n >= 6);
}
