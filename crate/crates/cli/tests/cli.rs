use std::path::Path;
use std::process::{Command, Output};

use reinfect::equilibrium::spectra;
use reinfect::{classify_fate, compute_r0, solve_endemic, stats_analytic, ModelParams, TimeUnit};
use reinfect_cli::commands::{simulate, summarize};
use reinfect_cli::config::preset_text;
use reinfect_cli::{equilibrium_report, parse_config, preset, CsvTable, Y_ONLY_NOTICE};
use tempfile::TempDir;

const MU: f64 = 1.0 / (70.0 * 365.0);

fn reinfect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reinfect")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in\n{report}"))
        .to_string()
}

fn num(report: &str, key: &str) -> f64 {
    value(report, key).parse().unwrap()
}

fn svi_text() -> String {
    preset_text("bjornstad-svi").unwrap().to_string()
}

fn sis_config(t_end: f64) -> String {
    format!(
        "[params]\nunits = \"day\"\nbeta = 0.3\ngamma = 0.1\nb = {MU:e}\n\n[system]\nkind = \"sis\"\n\n\
         [integration]\nt_end = {t_end}\nsample_interval = 0.1\nabs_tol = 1e-13\nrel_tol = 1e-13\n\n[observation]\nalpha = 0.6\n"
    )
}

#[test]
fn preset_gives_documented_scenario() {
    let cfg = preset("bjornstad-svi").unwrap();
    assert!((compute_r0(&cfg.params).unwrap() - 3.0).abs() < 1e-12);
    let x0 = cfg.initial_state().unwrap();
    assert_eq!((x0[4], x0[6]), (1.0 - 1e-3, 1e-3));
    assert_eq!(x0.iter().filter(|&&v| v != 0.0).count(), 4);
}

#[test]
fn empty_document_is_rejected_with_required_keys() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "empty.toml", "");
    let o = reinfect(&["simulate", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    for key in ["params.units", "params.sigma", "system.kind", "integration.t_end"] {
        assert!(e.contains(key), "{e}");
    }
}

#[test]
fn start_without_infected_is_rejected() {
    let text = svi_text().replace("infected = 1e-3", "infected = 0.0");
    let e = parse_config(&text).unwrap_err();
    assert!(e.to_string().contains("initial"), "{e}");
    let text = svi_text().replace("preset = \"primo\"\ninfected = 1e-3", "s = 0.9\nr = 0.1");
    assert!(parse_config(&text).is_err());
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "z.toml", &svi_text().replace("infected = 1e-3", "infected = 0.0"));
    assert_eq!(reinfect(&["simulate", "--config", &path]).status.code(), Some(2));
}

#[test]
fn unknown_key_names_the_key() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "typo.toml", &svi_text().replace("omega =", "omgea ="));
    let o = reinfect(&["equilibrium", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("omgea"), "{}", stderr(&o));
}

#[test]
fn preset_run_settles_at_equilibrium_prevalence() {
    let dir = TempDir::new().unwrap();
    let o = reinfect(&["simulate", "--preset", "bjornstad-svi", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = CsvTable::read(&dir.path().join("trajectory.csv")).unwrap();
    let times = t.column("t").unwrap();
    assert_eq!(*times.last().unwrap(), 25.0 * 365.0);
    let i = *t.column("I").unwrap().last().unwrap();
    let eq = solve_endemic(&ModelParams::bjornstad_svi()).unwrap();
    assert!((i - eq.i_star).abs() < 1e-4, "{i} vs {}", eq.i_star);
    assert_eq!(t.header.len(), 6 + 4 * 10);
    assert!(dir.path().join("scenario.toml").exists());
    let echoed = parse_config(&std::fs::read_to_string(dir.path().join("scenario.toml")).unwrap()).unwrap();
    assert_eq!(echoed, preset("bjornstad-svi").unwrap());
}

#[test]
fn zero_duration_run_writes_initial_row_only() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "zero.toml", &svi_text().replace("t_end = 9125.0", "t_end = 0.0"));
    let o = reinfect(&["simulate", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let t = CsvTable::read(&dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(t.column("S1").unwrap(), [1.0 - 1e-3]);
}

#[test]
fn tail_mass_shrinks_with_depth() {
    let tails: Vec<f64> = [5, 10, 20]
        .iter()
        .map(|n| {
            let text = svi_text().replace("n = 10", &format!("n = {n}"));
            let cfg = parse_config(&text).unwrap();
            summarize(&cfg, &simulate(&cfg).unwrap()).unwrap().tail_mass.unwrap()
        })
        .collect();
    assert!(tails[0] > tails[1] && tails[1] > tails[2], "{tails:?}");
    assert!(tails.iter().all(|&t| t >= 0.0));
}

#[test]
fn equilibrium_report_matches_library_bit_for_bit() {
    let o = reinfect(&["equilibrium", "--preset", "bjornstad-svi"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let p = ModelParams::bjornstad_svi();
    let eq = solve_endemic(&p).unwrap();
    let s = stats_analytic(&eq, &p).unwrap();
    assert_eq!(num(&out, "R0"), compute_r0(&p).unwrap());
    assert_eq!(num(&out, "I*"), eq.i_star);
    assert_eq!(num(&out, "phi"), eq.phi);
    assert_eq!(num(&out, "S1*"), eq.block1.s);
    assert_eq!(num(&out, "mean_reinfections_population"), s.mean_population);
    let share = num(&out, "S1*/S*");
    assert_eq!(share, eq.block1.s / eq.s_star);
    assert!((0.018..=0.022).contains(&share));
    let sp = spectra(&p, &eq, TimeUnit::PerYear).unwrap();
    let first_macro: f64 = value(&out, "macro_eigenvalues").split(", ").next().unwrap().parse().unwrap();
    assert_eq!(first_macro, sp.macro_eigs[0].re);
    assert_eq!(value(&out, "fate"), classify_fate(&p).unwrap().fate.to_string());
    assert_eq!(out, equilibrium_report(&p, TimeUnit::PerYear).unwrap().to_string());
}

#[test]
fn subcritical_report_has_no_endemic_section() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "low.toml", &svi_text().replace("r0 = 3.0", "r0 = 0.8"));
    let o = reinfect(&["equilibrium", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "equilibrium"), "disease-free");
    assert!(!out.contains("phi") && !out.contains("eigenvalues"), "{out}");
    assert!(dir.path().join("equilibrium.csv").exists());
    let o = reinfect(&["stats", "--config", &path]);
    assert_eq!(o.status.code(), Some(2));
}

fn simulate_sis(dir: &TempDir, t_end: f64) -> String {
    let cfg = write(dir, "sis.toml", &sis_config(t_end));
    let o = reinfect(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    dir.path().join("trajectory.csv").to_string_lossy().into_owned()
}

#[test]
fn identify_round_trip_through_csv() {
    let dir = TempDir::new().unwrap();
    let csv = simulate_sis(&dir, 60.0);
    let mu = format!("{MU:e}");
    let o = reinfect(&["identify", &csv, "--mu", &mu, "--window", "5:50", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for (key, want) in [("alpha", 0.6), ("beta", 0.3), ("gamma", 0.1)] {
        let got = num(&out, key);
        assert!((got - want).abs() < 0.01 * want, "{key}: {got}");
    }
    let rec = CsvTable::read(&dir.path().join("reconstructed.csv")).unwrap();
    assert_eq!(rec.header, ["t", "S", "I", "S1", "I1", "w"]);
    assert_eq!(rec.column("t").unwrap()[0], 5.0);

    let yearly = reinfect(&["identify", &csv, "--mu", &format!("{:e}", MU * 365.0), "--units", "year", "--window", "5:50", "--out", dir.path().to_str().unwrap()]);
    assert!((num(&stdout(&yearly), "beta") / 365.0 - num(&out, "beta")).abs() < 1e-12);
}

#[test]
fn identify_from_separate_files_and_missing_y1() {
    let dir = TempDir::new().unwrap();
    let csv = simulate_sis(&dir, 60.0);
    let t = CsvTable::read(Path::new(&csv)).unwrap();
    let col = |name: &str| t.column(name).unwrap().to_vec();
    let (times, y, y1) = (col("t"), col("y"), col("y1"));
    let lines = |b: &[f64]| {
        times.iter().zip(b).map(|(a, b)| format!("{a:.16e},{b:.16e}\n")).collect::<String>()
    };
    let y_path = write(&dir, "y.csv", &format!("t,y\n{}", lines(&y)));
    let y1_path = write(&dir, "y1.csv", &format!("t,y1\n{}", lines(&y1)));
    let mu = format!("{MU:e}");

    let o = reinfect(&["identify", &y_path, "--mu", &mu, "--window", "5:50", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with(Y_ONLY_NOTICE), "{out}");
    assert!((num(&out, "beta_over_alpha") - 0.5).abs() < 0.005);
    assert!((num(&out, "beta_minus_gamma") - 0.2).abs() < 0.002);
    assert!(!out.contains("\nbeta =") && !out.contains("\nalpha ="), "{out}");

    let o = reinfect(&["identify", &y_path, "--y1", &y1_path, "--mu", &mu, "--window", "5:50", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((num(&stdout(&o), "beta") - 0.3).abs() < 0.003);

    let shifted: Vec<f64> = times.iter().map(|t| t + 0.05).collect();
    let bad = write(
        &dir,
        "y1_shift.csv",
        &format!("t,y1\n{}", shifted.iter().zip(&y1).map(|(a, b)| format!("{a:e},{b:e}\n")).collect::<String>()),
    );
    let o = reinfect(&["identify", &y_path, "--y1", &bad, "--mu", &mu]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("time grid"), "{}", stderr(&o));
}

#[test]
fn identify_on_equilibrium_window_is_an_error() {
    let dir = TempDir::new().unwrap();
    let csv = simulate_sis(&dir, 150.0 * 365.0 + 10.0);
    let mu = format!("{MU:e}");
    let window = format!("{}:{}", 150.0 * 365.0, 150.0 * 365.0 + 10.0);
    let o = reinfect(&["identify", &csv, "--mu", &mu, "--window", &window]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate"), "{}", stderr(&o));
    assert!(!stdout(&o).contains("beta"));
}

#[test]
fn csv_output_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        let o = reinfect(&["simulate", "--preset", "bjornstad-svi", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    let read = |d: &TempDir| std::fs::read(d.path().join("trajectory.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn selected_columns_are_written_in_order() {
    let dir = TempDir::new().unwrap();
    let text = format!("{}\n[[output]]\npath = \"small.csv\"\nselect = [\"I1\", \"I\"]\n", svi_text().replace("t_end = 9125.0", "t_end = 50.0"));
    let path = write(&dir, "sel.toml", &text);
    let o = reinfect(&["simulate", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = CsvTable::read(&dir.path().join("small.csv")).unwrap();
    assert_eq!(t.header, ["t", "I1", "I"]);
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn numerical_failure_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let text = svi_text().replace("sample_interval = 5.0", "sample_interval = 5.0\nmethod = \"rk4\"\nstep = 500.0").replace("r0 = 3.0", "beta = 50.0");
    let path = write(&dir, "blowup.toml", &text);
    let o = reinfect(&["simulate", "--config", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn fate_command_reports_case() {
    let o = reinfect(&["fate", "--preset", "bjornstad-svi"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(value(&out, "fate_case"), "2a");
    assert_eq!(value(&out, "fate"), "N-constant");
    let o = reinfect(&["stats", "--preset", "bjornstad-svi"]);
    let out = stdout(&o);
    assert!((num(&out, "closed_form_population") - num(&out, "mean_reinfections_population")).abs() < 1e-10);
}

#[test]
fn missing_scenario_is_a_usage_error() {
    assert_eq!(reinfect(&["equilibrium"]).status.code(), Some(2));
    assert_eq!(reinfect(&["equilibrium", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(reinfect(&["identify", "x.csv"]).status.code(), Some(2));
}
