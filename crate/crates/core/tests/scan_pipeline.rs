use std::path::Path;

use gemcsm_core::assembly::ChannelBasis;
use gemcsm_core::basis::GaussBasisSpec;
use gemcsm_core::jacobi::JacobiSet;
use gemcsm_core::scan::{emit_tilde_view, read_csv, run_scan, BetaGrid, RecordStatus, RunConfig, ScanOptions, CSV_HEADER};
use gemcsm_core::units::Dimension;

fn quick(dim: Dimension, betas: &[f64], out: &Path) -> RunConfig {
    let mut cfg = RunConfig::production(dim);
    cfg.basis = match dim {
        Dimension::Three => ChannelBasis {
            dimension: dim,
            pair: GaussBasisSpec::new(6, 40.0, 0.01).with_omega(0.8),
            third: GaussBasisSpec::new(6, 40.0, 0.02).with_omega(0.8),
            blocks: vec![(0, 0)],
            jacobi_set: JacobiSet::Two,
        },
        Dimension::One => ChannelBasis {
            dimension: dim,
            pair: GaussBasisSpec::new(8, 100.0, 0.04).with_ell(1),
            third: GaussBasisSpec::new(8, 40.0, 0.03).with_ell(1),
            blocks: vec![(0, 0), (1, 1)],
            jacobi_set: JacobiSet::Two,
        },
    };
    cfg.beta_grid = BetaGrid::List { values: betas.to_vec() };
    cfg.refine_levels = 0;
    cfg.output_dir = Some(out.to_path_buf());
    cfg
}

#[test]
fn single_point_gives_one_row_per_family() {
    for dim in [Dimension::Three, Dimension::One] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick(dim, &[2.0], dir.path());
        let out = run_scan(&cfg, &ScanOptions::default()).unwrap();
        assert_eq!(out.records.len(), cfg.families.len());
        assert!(out.all_ok());
        for (r, f) in out.records.iter().zip(&cfg.families) {
            assert_eq!(r.family, *f);
            assert_eq!(r.beta, 2.0);
            assert_ne!(r.status, RecordStatus::Error);
        }
        let text = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
        assert_eq!(text.lines().next(), Some(CSV_HEADER));
        assert_eq!(read_csv(&dir.path().join("scan.csv")).unwrap(), out.records);
        assert!(dir.path().join("scan.json").exists());
        let saved = RunConfig::from_path(&dir.path().join("scan_config.toml")).unwrap();
        assert_eq!(saved, cfg);
    }
}

#[test]
fn repeated_runs_are_byte_identical_for_any_worker_count() {
    let betas = [0.5, 1.0, 3.0];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut ca = quick(Dimension::Three, &betas, a.path());
    ca.workers = Some(1);
    let mut cb = quick(Dimension::Three, &betas, b.path());
    cb.workers = Some(3);
    run_scan(&ca, &ScanOptions::default()).unwrap();
    run_scan(&cb, &ScanOptions::default()).unwrap();
    let ta = std::fs::read(a.path().join("scan.csv")).unwrap();
    let tb = std::fs::read(b.path().join("scan.csv")).unwrap();
    assert_eq!(ta, tb);
    run_scan(&ca, &ScanOptions::default()).unwrap();
    assert_eq!(std::fs::read(a.path().join("scan.csv")).unwrap(), ta);
}

#[test]
fn resume_only_computes_missing_points() {
    let dir = tempfile::tempdir().unwrap();
    let first = quick(Dimension::Three, &[1.0, 2.0], dir.path());
    let out = run_scan(&first, &ScanOptions::default()).unwrap();
    assert_eq!(out.computed_betas, vec![1.0, 2.0]);
    let second = quick(Dimension::Three, &[1.0, 2.0, 4.0], dir.path());
    let out = run_scan(&second, &ScanOptions { resume: true }).unwrap();
    assert_eq!(out.computed_betas, vec![4.0]);
    assert_eq!(out.records.len(), 3);

    let fresh_dir = tempfile::tempdir().unwrap();
    let fresh = run_scan(&quick(Dimension::Three, &[1.0, 2.0, 4.0], fresh_dir.path()), &ScanOptions::default()).unwrap();
    assert_eq!(fresh.records, out.records);
}

#[test]
fn resume_ignores_rows_from_other_settings() {
    let dir = tempfile::tempdir().unwrap();
    let first = quick(Dimension::Three, &[1.0, 2.0], dir.path());
    run_scan(&first, &ScanOptions::default()).unwrap();
    let mut other = quick(Dimension::Three, &[1.0, 2.0], dir.path());
    other.thetas_deg = vec![9.0, 11.0, 13.0];
    let out = run_scan(&other, &ScanOptions { resume: true }).unwrap();
    assert_eq!(out.computed_betas, vec![1.0, 2.0]);
}

#[test]
fn refinement_adds_points_around_width_minima() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(Dimension::Three, &[0.5, 1.0, 2.0, 4.0, 8.0, 16.0], dir.path());
    cfg.refine_levels = 2;
    let out = run_scan(&cfg, &ScanOptions::default()).unwrap();
    let betas: Vec<f64> = out.records.iter().map(|r| r.beta).collect();
    assert!(betas.windows(2).all(|w| w[0] < w[1]));
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    let extra: Vec<f64> = betas.iter().copied().filter(|b| !grid.contains(b)).collect();
    let series: Vec<(f64, f64)> = out
        .records
        .iter()
        .filter(|r| grid.contains(&r.beta))
        .filter_map(|r| r.gamma_prime.map(|g| (r.beta, g)))
        .collect();
    let interior_min = series.windows(3).any(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1);
    assert_eq!(interior_min, !extra.is_empty(), "series {series:?}, extra {extra:?}");
}

#[test]
fn tilde_view_retunes_the_depth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick(Dimension::Three, &[0.5, 4.0], dir.path());
    let out = emit_tilde_view(&cfg, &ScanOptions::default()).unwrap();
    assert!(dir.path().join("tilde_scan.csv").exists());
    assert!(out.records.iter().all(|r| r.scaling == "tilde"));
    let v0: Vec<f64> = out.records.iter().map(|r| r.v0_prime.unwrap()).collect();
    assert!(v0[0] != v0[1]);
    for r in out.records.iter().filter(|r| r.status == RecordStatus::Ok) {
        let factor = 2.0 * (1.0 + r.beta) / r.beta;
        let e = r.e_r_prime.unwrap() * factor;
        assert!((r.e_r_scaled.unwrap() - e).abs() < 1e-12 * e.abs());
    }
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    assert!(RunConfig::from_toml_str("dimension = \"3D\"\nbogus = 1\n").is_err());
    assert!(RunConfig::from_toml_str("dimension = \"3D\"\nthetas_deg = [50.0]\n").is_err());
    assert!(RunConfig::from_toml_str("dimension = \"1D\"\nfamilies = [\"(3D,2s)\"]\n").is_err());
    let cfg = RunConfig::from_toml_str("dimension = \"1D\"\n").unwrap();
    assert_eq!(cfg, RunConfig::production(Dimension::One));
    let text = cfg.to_toml_string().unwrap();
    assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
}
