use std::path::Path;
use std::process::{Command, Output};

fn qdiff(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdiff"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn fig1_columns_and_format() {
    let d = tempfile::tempdir().unwrap();
    assert!(qdiff(d.path(), &["fig1", "--samples", "10"]).status.success());
    let (h, rows) = read_csv(&d.path().join("fig1.csv"));
    assert_eq!(h, ["tau", "xi_sq", "dxi_sq_dtau"]);
    assert_eq!(rows.len(), 11);
    let re = |s: &str| {
        let (m, e) = s.split_once('e').unwrap();
        m.trim_start_matches('-').len() == 13 && (e.starts_with('+') || e.starts_with('-')) && e.len() >= 3
    };
    assert!(rows.iter().flatten().all(|c| re(c)), "{rows:?}");
    assert_eq!(rows[0][1], "1.00000000000e-01");
}

#[test]
fn fig1_zero_horizon_gives_one_row() {
    let d = tempfile::tempdir().unwrap();
    assert!(qdiff(d.path(), &["fig1", "--xi0-sq", "1", "--tau-end", "0"])
        .status
        .success());
    let (_, rows) = read_csv(&d.path().join("fig1.csv"));
    assert_eq!(
        rows,
        vec![vec!["0.00000000000e+00", "1.00000000000e+00", "0.00000000000e+00"]]
    );
}

#[test]
fn manifest_lists_outputs_and_parameters() {
    let d = tempfile::tempdir().unwrap();
    assert!(qdiff(d.path(), &["fig3", "--samples", "5"]).status.success());
    let m = std::fs::read_to_string(d.path().join("fig3.manifest")).unwrap();
    for key in [
        "command=fig3",
        "param.alpha=1.00000000000e+00",
        "param.samples=5",
        "const.hbar=",
        "output.0=fig3.csv",
        "wall_time_s=",
    ] {
        assert!(m.contains(key), "{key} missing from\n{m}");
    }
}

#[test]
fn fig2_fit_column_and_empty_list() {
    let d = tempfile::tempdir().unwrap();
    assert!(qdiff(d.path(), &["fig2", "--xi0-sq", "0.02,0.2"]).status.success());
    let (h, rows) = read_csv(&d.path().join("fig2.csv"));
    assert_eq!(h, ["xi0_sq", "tau_at_max", "max_rate", "fit_value"]);
    for r in &rows {
        assert!((num(&r[3]) * 2.0 * num(&r[0]) - 1.0).abs() < 1e-11);
    }
    assert_eq!(qdiff(d.path(), &["fig2", "--xi0-sq", ""]).status.code(), Some(2));
    let cfg = d.path().join("empty.toml");
    std::fs::write(&cfg, "xi0_sq = []\n").unwrap();
    assert_eq!(
        qdiff(d.path(), &["--config", cfg.to_str().unwrap(), "fig2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn fig3_ground_state_is_constant() {
    let d = tempfile::tempdir().unwrap();
    assert!(
        qdiff(d.path(), &["fig3", "--xi0-sq", "1", "--alpha", "1", "--samples", "20"])
            .status
            .success()
    );
    let (h, rows) = read_csv(&d.path().join("fig3.csv"));
    assert_eq!(h, ["tau", "xi_sq"]);
    assert!(rows.iter().all(|r| (num(&r[1]) - 1.0).abs() < 1e-10));
}

#[test]
fn fig4_columns_and_flags() {
    let d = tempfile::tempdir().unwrap();
    assert!(qdiff(
        d.path(),
        &["fig4", "--points", "4", "--t-min", "20", "--isotopes", "H,e"]
    )
    .status
    .success());
    let (h, rows) = read_csv(&d.path().join("fig4.csv"));
    assert_eq!(
        h,
        ["isotope", "T", "inv_T", "D_eff_eq19", "D_eff_eq18", "validity_flag"]
    );
    assert_eq!(rows.len(), 8);
    // 20 K sits below the proton crossover temperature
    assert_eq!(rows[0][5], "below_crossover");
    assert!(rows
        .iter()
        .filter(|r| r[0] == "e")
        .all(|r| r[5] == "not_semiclassical" && r[3].is_empty()));
    for r in rows.iter().filter(|r| r[0] == "H") {
        assert!((num(&r[2]) * num(&r[1]) - 1.0).abs() < 1e-11);
    }
}

#[test]
fn fig4_from_arrhenius_parameters() {
    let d = tempfile::tempdir().unwrap();
    assert!(qdiff(
        d.path(),
        &["fig4", "--ea-kj-mol", "20", "--d0", "3.2e-7", "--points", "2"]
    )
    .status
    .success());
    let m = std::fs::read_to_string(d.path().join("fig4.manifest")).unwrap();
    assert!(m.contains("param.amplitude=1.66053906717e-20"), "{m}");
    assert_eq!(qdiff(d.path(), &["fig4", "--ea-kj-mol", "20"]).status.code(), Some(2));
    assert_eq!(
        qdiff(
            d.path(),
            &["fig4", "--amplitude", "1e-20", "--ea-kj-mol", "20", "--d0", "1e-7"]
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn sigma_t_free_and_log_domain() {
    let d = tempfile::tempdir().unwrap();
    assert!(qdiff(d.path(), &["sigma-t", "--amplitude", "0", "--points", "5"])
        .status
        .success());
    let (h, rows) = read_csv(&d.path().join("sigma_t.csv"));
    assert_eq!(
        h,
        [
            "t",
            "sigma_sq_exact",
            "sigma_sq_log_asymptote",
            "sigma_sq_free",
            "round_trip_residual"
        ]
    );
    assert!(rows.iter().all(|r| r[1] == r[3] && r[2].is_empty()));

    assert!(qdiff(d.path(), &["sigma-t", "--times", "1e-20,1e-12,0"])
        .status
        .success());
    let (_, rows) = read_csv(&d.path().join("sigma_t.csv"));
    assert!(rows[0][2].is_empty(), "below the log-law threshold");
    assert!(!rows[1][2].is_empty());
    assert!(rows.iter().all(|r| num(&r[4]) < 1e-8));
}

#[test]
fn fit_examples() {
    let d = tempfile::tempdir().unwrap();
    let row = |args: &[&str]| -> Vec<f64> {
        assert!(qdiff(d.path(), args).status.success());
        let (h, rows) = read_csv(&d.path().join("fit.csv"));
        assert_eq!(h, ["A", "b", "m_over_b", "T_q", "T_free"]);
        assert_eq!(rows.len(), 1);
        rows[0].iter().map(|c| num(c)).collect()
    };
    let base = row(&["fit"]);
    assert!((base[0] / 1.67e-20 - 1.0).abs() < 0.01);
    assert!((base[4] * 2.0 / base[3] - 1.0).abs() < 1e-11);
    let doubled = row(&["fit", "--d0", "6.4e-7"]);
    assert!((doubled[1] * 2.0 / base[1] - 1.0).abs() < 1e-11);
    // 20 kJ/mol per particle
    let per_particle = 20e3 / qdiff_core::constants::N_A;
    let j = row(&["fit", "--ea", &per_particle.to_string(), "--ea-unit", "J"]);
    let jmol = row(&["fit", "--ea", "20000", "--ea-unit", "J/mol"]);
    assert!((j[0] / base[0] - 1.0).abs() < 1e-14);
    assert!((jmol[0] / base[0] - 1.0).abs() < 1e-14);
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "xi0_sq = 0.5\nsamples = 4\n").unwrap();
    let c = cfg.to_str().unwrap();
    assert!(qdiff(d.path(), &["--config", c, "fig1"]).status.success());
    let (_, rows) = read_csv(&d.path().join("fig1.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][1], "5.00000000000e-01");
    assert!(qdiff(d.path(), &["--config", c, "fig1", "--xi0-sq", "0.2"])
        .status
        .success());
    let (_, rows) = read_csv(&d.path().join("fig1.csv"));
    assert_eq!(rows[0][1], "2.00000000000e-01");

    std::fs::write(&cfg, "xi0_sqq = 0.5\n").unwrap();
    let out = qdiff(d.path(), &["--config", c, "fig1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("xi0_sqq"));
    std::fs::write(&cfg, "xi0_sq = \"big\"\n").unwrap();
    assert_eq!(qdiff(d.path(), &["--config", c, "fig1"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(qdiff(d.path(), &["fig1", "--xi0-sq=-1"]).status.code(), Some(2));
    assert_eq!(qdiff(d.path(), &["fig1", "--bogus"]).status.code(), Some(2));
    assert_eq!(qdiff(d.path(), &["fit", "--d0=-1"]).status.code(), Some(2));
    // fewer cells than the grid minimum
    assert_eq!(
        qdiff(d.path(), &["pde-check", "--scenario", "eq9_free", "--resolution", "40"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn pde_check_zero_duration_reports_initial_moments() {
    let d = tempfile::tempdir().unwrap();
    let out = qdiff(d.path(), &["pde-check", "--scenario", "eq16_cosine", "--duration", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("status=initial") && text.contains("initial_sigma_sq="));
    assert!(!text.contains("d_eff_measured"));
    let (h, rows) = read_csv(&d.path().join("pde_eq16_cosine.csv"));
    assert_eq!(h, ["t", "mean", "sigma_sq", "kurtosis", "mass", "sigma_sq_reference"]);
    assert_eq!(rows.len(), 1);
}

#[test]
fn pde_check_free_runs_pass() {
    let d = tempfile::tempdir().unwrap();
    for scenario in ["eq9_free", "eq10_free"] {
        let out = qdiff(d.path(), &["pde-check", "--scenario", scenario, "--resolution", "128"]);
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(out.status.success(), "{text}");
        assert!(text.contains("status=pass") && text.contains("sigma4_law_max_deviation="));
    }
}
