//! Acceptance run: one pass/fail line per criterion, non-zero exit if any fails.
//!
//! `cargo test -p gemcsm-validation --test acceptance -- 3 4` runs only criteria 3 and 4.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use gemcsm_core::assembly::{assemble_parts, ChannelBasis, HamiltonianParts};
use gemcsm_core::csm::{family, ClassifyOptions, FamilyLabel, StateClass};
use gemcsm_core::eigen::{solve_parts, EigOptions};
use gemcsm_core::jacobi::JacobiSet;
use gemcsm_core::scan::{run_scan, BetaGrid, PreparedScan, RecordStatus, RunConfig, ScanMode, ScanOptions, ScanRecord};
use gemcsm_core::twobody::{default_two_body_basis, solve_two_body, GaussPotential, LevelLabel, Sector};
use gemcsm_core::units::{Dimension, MassConfig};
use gemcsm_oracle::checks::{
    dense_pencil_agreement, enlargement_rise, level_gap, thresholds_bitwise_constant, two_body_vs_grid,
};
use gemcsm_oracle::dense::matched_distance;
use gemcsm_oracle::elements::{sweep, KernelKind};
use gemcsm_oracle::C;

const DIMS: [Dimension; 2] = [Dimension::Three, Dimension::One];

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("info {line}"));
    }
}

fn depth(dim: Dimension) -> f64 {
    match dim {
        Dimension::Three => -19.77,
        Dimension::One => -5.44,
    }
}

fn level(dim: Dimension, sector: Sector, index: usize) -> Option<f64> {
    let spec = solve_two_body(&GaussPotential::new(depth(dim)), dim, sector, &default_two_body_basis()).ok()?;
    spec.levels.get(index).copied()
}

fn within(x: Option<f64>, centre: f64, tol: f64) -> bool {
    x.is_some_and(|v| (v - centre).abs() <= tol)
}

fn show(x: Option<f64>) -> String {
    x.map_or("none".into(), |v| format!("{v:.6}"))
}

fn two_body_anchors() -> Verdict {
    let mut v = Verdict::new();
    let s2 = level(Dimension::Three, Sector::Even, 1);
    v.check(within(s2, -0.100, 0.002), format!("3D second s level {} (want -0.100 ± 0.002)", show(s2)));
    let e2 = level(Dimension::One, Sector::Even, 1);
    v.check(within(e2, -0.100, 0.002), format!("1D first excited even level {} (want -0.100 ± 0.002)", show(e2)));
    v
}

fn threshold_positions() -> Verdict {
    let mut v = Verdict::new();
    let p = level(Dimension::Three, Sector::Odd, 0);
    v.check(within(p, -0.25, 0.02), format!("3D 1p level {} (want -0.25 ± 0.02)", show(p)));
    let o = level(Dimension::One, Sector::Odd, 0);
    v.check(within(o, -1.5, 0.1), format!("1D lowest odd level {} (want -1.5 ± 0.1)", show(o)));
    v
}

fn two_s(dim: Dimension) -> FamilyLabel {
    FamilyLabel::new(dim, LevelLabel::new(2, Sector::Even))
}

fn resonance_anchors() -> Verdict {
    let mut v = Verdict::new();
    for (dim, centre, tol) in [(Dimension::Three, -3.0, 0.3), (Dimension::One, -0.2, 0.05)] {
        let scan = PreparedScan::new(RunConfig::production(dim), ScanMode::Prime).expect("config");
        let dump = scan.spectrum(1.0).expect("spectrum");
        let fam = family(two_s(dim), &dump.spectrum, &dump.thresholds).expect("family window");
        let deepest = fam.members.first().map(|s| s.energy);
        let text = deepest.map_or("none found".into(), |e| format!("E_r {:.4}, Γ {:.4}", e.e_r, e.gamma));
        v.check(
            within(deepest.map(|e| e.e_r), centre, tol),
            format!("deepest {} at β = 1: {text} (want E_r {centre} ± {tol})", two_s(dim)),
        );
    }
    v
}

/// Principal direction (degrees) of points relative to `origin`, by total least squares
/// through the origin.
fn ray_angle(points: &[C], origin: f64) -> f64 {
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for z in points {
        let d = z - origin;
        sxx += d.re * d.re;
        syy += d.im * d.im;
        sxy += d.re * d.im;
    }
    0.5 * (2.0 * sxy).atan2(sxx - syy).to_degrees()
}

fn theta_stability() -> Verdict {
    let mut v = Verdict::new();
    let thetas = [4.0, 7.0, 10.0];
    for dim in DIMS {
        let mut cfg = RunConfig::production(dim);
        cfg.thetas_deg = thetas.to_vec();
        // loose linking so that states drifting by more than the target are still reported
        cfg.classify = ClassifyOptions { bound_tol: 1e-1, resonance_tol: 1e-1, ..ClassifyOptions::default() };
        let scan = PreparedScan::new(cfg.clone(), ScanMode::Prime).expect("config");
        for (beta, tol) in [(1.0, 1e-3), (20.0, 1e-5)] {
            let dump = scan.spectrum(beta).expect("spectrum");
            let mut tracked: Vec<(String, f64)> = dump
                .spectrum
                .states
                .iter()
                .filter(|s| s.class == StateClass::Bound)
                .map(|s| (format!("bound {:.5}", s.energy.e_r), s.dispersion))
                .collect();
            for f in &cfg.families {
                if let Some(s) = family(*f, &dump.spectrum, &dump.thresholds).ok().and_then(|m| m.members.first().cloned()) {
                    tracked.push((format!("{f} {:.5}-{:.2e}i", s.energy.e_r, s.energy.gamma / 2.0), s.dispersion));
                }
            }
            let worst = tracked.iter().map(|t| t.1).fold(0.0, f64::max);
            let detail: Vec<String> = tracked.iter().map(|(n, d)| format!("{n}: {d:.1e}")).collect();
            v.check(
                !tracked.is_empty() && worst <= tol,
                format!("{dim} β = {beta}: worst spread {worst:.2e} (want ≤ {tol:.0e}) over [{}]", detail.join(", ")),
            );

            // continuum rays: fit each threshold's branch at each angle
            let thresholds = dump.thresholds.energies();
            let mut worst_dev: f64 = 0.0;
            let mut fitted = 0;
            for &th in &dump.spectrum.thetas {
                let rot = C::from_polar(1.0, 2.0 * th);
                let pts: Vec<C> = dump
                    .spectrum
                    .points
                    .iter()
                    .filter(|p| p.theta == th && !matches!(p.class, StateClass::Bound | StateClass::Resonance))
                    .map(|p| p.eigenvalue())
                    .collect();
                for (i, &t) in thresholds.iter().enumerate() {
                    // points whose nearest ray (by perpendicular distance) is this one, within 3°
                    let branch: Vec<C> = pts
                        .iter()
                        .copied()
                        .filter(|&z| {
                            let dist = |t: f64| {
                                let w = (z - t) * rot;
                                if w.re > 0.0 { w.im.abs() } else { f64::INFINITY }
                            };
                            let own = dist(t);
                            let angle = ((z - t) * rot).arg().to_degrees().abs();
                            angle < 3.0 && thresholds.iter().enumerate().all(|(j, &u)| j == i || dist(u) >= own)
                        })
                        .collect();
                    if branch.len() < 3 {
                        continue;
                    }
                    let dev = (ray_angle(&branch, t) + 2.0 * th.to_degrees()).abs();
                    worst_dev = worst_dev.max(dev);
                    fitted += 1;
                }
            }
            v.check(
                fitted > 0 && worst_dev <= 0.5,
                format!("{dim} β = {beta}: {fitted} continuum branches, worst slope deviation {worst_dev:.3}° (want ≤ 0.5°)"),
            );
        }
    }
    v
}

fn gamma_series(records: &[ScanRecord], fam: FamilyLabel) -> Vec<(f64, f64)> {
    let mut s: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.family == fam && r.status == RecordStatus::Ok)
        .filter_map(|r| r.gamma_prime.map(|g| (r.beta, g)))
        .collect();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    s
}

/// Interior local maxima and minima, treating runs of equal values as one point.
/// Returns the β of each extremum (first point of its run).
fn extrema(series: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut runs: Vec<(f64, f64)> = Vec::new();
    for &(b, g) in series {
        if runs.last().is_none_or(|r| r.1 != g) {
            runs.push((b, g));
        }
    }
    let (mut maxima, mut minima) = (Vec::new(), Vec::new());
    for w in runs.windows(3) {
        if w[1].1 > w[0].1 && w[1].1 > w[2].1 {
            maxima.push(w[1].0);
        }
        if w[1].1 < w[0].1 && w[1].1 < w[2].1 {
            minima.push(w[1].0);
        }
    }
    (maxima, minima)
}

fn row(rows: &[ScanRecord], fam: FamilyLabel) -> Option<&ScanRecord> {
    rows.iter().find(|r| r.family == fam && r.status == RecordStatus::Ok)
}

fn mass_ratio_trend() -> Verdict {
    let mut v = Verdict::new();
    let fam3 = two_s(Dimension::Three);

    // full default scan
    let dir = tempfile::tempdir().expect("scratch directory");
    let mut cfg = RunConfig::production(Dimension::Three);
    cfg.output_dir = Some(dir.path().to_path_buf());
    let start = Instant::now();
    let out = run_scan(&cfg, &ScanOptions::default()).expect("scan");
    let series = gamma_series(&out.records, fam3);
    let elapsed = start.elapsed();
    let peak = series.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1));
    v.check(
        peak.is_some_and(|p| (0.5..=2.0).contains(&p.0)),
        format!(
            "{fam3} full scan ({} points, {:.0} s): global Γ' maximum {} (want β in [0.5, 2])",
            series.len(),
            elapsed.as_secs_f64(),
            peak.map_or("none".into(), |p| format!("{:.4} at β = {:.4}", p.1, p.0))
        ),
    );
    let (_, minima) = extrema(&series);
    let late: Vec<f64> = minima.iter().copied().filter(|b| (10.0..=20.0).contains(b)).collect();
    v.check(!late.is_empty(), format!("{fam3} local Γ' minima at β = {minima:.3?} (want one in [10, 20])"));

    // lifetimes from β = 1 to β = 20 for every tracked family, as the inverse width ratio
    for dim in DIMS {
        let scan = PreparedScan::new(RunConfig::production(dim), ScanMode::Prime).expect("config");
        let (at1, _) = scan.records(1.0);
        let (at20, _) = scan.records(20.0);
        for fam in FamilyLabel::defaults(dim) {
            let (r1, r20) = (row(&at1, fam), row(&at20, fam));
            let ratio = match (r1.and_then(|r| r.gamma_prime), r20.and_then(|r| r.gamma_prime)) {
                (Some(g1), Some(g20)) if g20 > 0.0 => Some(g1 / g20),
                (Some(g1), Some(_)) if g1 > 0.0 => Some(f64::INFINITY),
                _ => None,
            };
            let tau = |r: Option<&ScanRecord>| r.and_then(|r| r.tau_prime).map_or("absent".into(), |t| t.token());
            v.check(
                ratio.is_some_and(|r| r >= 1e3),
                format!("{fam} τ'(1) = {}, τ'(20) = {}, Γ'(1)/Γ'(20) = {} (want ≥ 1e3)", tau(r1), tau(r20), show(ratio)),
            );
        }
    }

    // 12-point smoke scan
    let dir = tempfile::tempdir().expect("scratch directory");
    let mut smoke = RunConfig::production(Dimension::Three);
    smoke.beta_grid = BetaGrid::Log { min: 1.0, max: 20.0, count: 12 };
    smoke.refine_levels = 0;
    smoke.output_dir = Some(dir.path().to_path_buf());
    let start = Instant::now();
    let out = run_scan(&smoke, &ScanOptions::default()).expect("smoke scan");
    let elapsed = start.elapsed();
    let series = gamma_series(&out.records, fam3);
    // upper envelope: the first point and every interior local maximum
    let (maxima, _) = extrema(&series);
    let mut peaks: Vec<(f64, f64)> = series.first().copied().into_iter().collect();
    peaks.extend(maxima.iter().filter_map(|b| series.iter().copied().find(|p| p.0 == *b)));
    let decreasing = peaks.windows(2).all(|w| w[1].1 < w[0].1);
    v.check(
        series.len() == 12 && decreasing && elapsed <= Duration::from_secs(30 * 60),
        format!(
            "smoke scan: {} of 12 points with a width, {:.0} s, envelope peaks {:?} (want strictly decreasing, ≤ 1800 s)",
            series.len(),
            elapsed.as_secs_f64(),
            peaks.iter().map(|p| format!("{:.3}@{:.2}", p.1, p.0)).collect::<Vec<_>>()
        ),
    );
    v
}

fn one_dimensional_oscillations() -> Verdict {
    let mut v = Verdict::new();
    let fam = FamilyLabel::new(Dimension::One, LevelLabel::new(1, Sector::Odd));
    let dir = tempfile::tempdir().expect("scratch directory");
    let mut cfg = RunConfig::production(Dimension::One);
    cfg.beta_grid = BetaGrid::Log { min: 1.0, max: 20.0, count: 30 };
    cfg.families = vec![fam];
    cfg.output_dir = Some(dir.path().to_path_buf());
    let out = run_scan(&cfg, &ScanOptions::default()).expect("scan");
    let series = gamma_series(&out.records, fam);
    let (maxima, minima) = extrema(&series);
    v.check(
        maxima.len() >= 2 && minima.len() >= 2,
        format!(
            "{fam} over β in [1, 20] ({} of {} points with a width): maxima at {maxima:.3?}, minima at {minima:.3?} (want ≥ 2 each)",
            series.len(),
            out.records.len()
        ),
    );
    v
}

fn oracle_suites() -> Verdict {
    let mut v = Verdict::new();
    for (d, dim) in DIMS.iter().enumerate() {
        for (k, kind) in KernelKind::ALL.iter().enumerate() {
            let (worst, at) = sweep(*dim, *kind, 100 + 10 * d as u64 + k as u64, 100);
            v.check(worst < 1e-9, format!("{dim} {kind:?}: 100 draws, worst relative deviation {worst:.1e} (draw {at})"));
        }
    }
    for (dim, sector) in [
        (Dimension::Three, Sector::Even),
        (Dimension::Three, Sector::Odd),
        (Dimension::One, Sector::Even),
        (Dimension::One, Sector::Odd),
    ] {
        let (gem, grid) = two_body_vs_grid(depth(dim), dim, sector);
        let gap = level_gap(&gem, &grid);
        v.check(gap < 1e-4, format!("{dim} {sector:?} two-body levels vs grid: {} levels, gap {gap:.1e}", gem.len()));
    }
    let d = dense_pencil_agreement(7, 40);
    v.check(d < 1e-10, format!("40 random 8×8 pencils vs determinant roots: worst distance {d:.1e}"));
    for dim in DIMS {
        let rise = enlargement_rise(dim, 1.0, 3);
        v.check(rise <= 1e-9, format!("{dim} nested basis enlargement: largest level rise {rise:.1e}"));
        let same = thresholds_bitwise_constant(dim, &[1.0, 0.05, 0.7, 5.0, 20.0]);
        v.check(same, format!("{dim} depth and thresholds bitwise identical across β"));
    }
    v
}

fn exchange_consistency() -> Verdict {
    let mut v = Verdict::new();
    for dim in DIMS {
        let cfg = RunConfig::production(dim);
        let pot = cfg.resolve_potential().expect("potential");
        let theta = [cfg.thetas_rad()[1]];
        let parts = |basis: &ChannelBasis, beta: f64| {
            let mc = MassConfig::new(beta).expect("mass ratio");
            assemble_parts(&mc, &pot, basis, &theta).expect("assembly")
        };
        let spectrum = |p: &HamiltonianParts| {
            solve_parts(p, false, &EigOptions::for_dimension(dim)).expect("solve").remove(0).eigenvalues
        };
        for beta in [1.0, 5.0, 20.0] {
            let p2 = parts(&cfg.basis, beta);
            let p3 = parts(&cfg.basis.clone().with_set(JacobiSet::Three), beta);
            let gap = |x: f64| x.abs();
            let ds = (&p2.s - &p3.s).iter().copied().map(gap).fold(0.0, f64::max);
            let dt = (&p2.t - &p3.t).iter().copied().map(gap).fold(0.0, f64::max);
            let dv = (&p2.v[0] - &p3.v[0]).iter().map(|z| z.norm()).fold(0.0, f64::max);
            v.note(format!("{dim} β = {beta}: largest matrix element difference S {ds:.1e}, T {dt:.1e}, V {dv:.1e}"));
            let (a, b) = (spectrum(&p2), spectrum(&p3));
            let worst = if a.len() == b.len() {
                let scale: Vec<C> = a.iter().map(|z| z / z.norm().max(1.0)).collect();
                let other: Vec<C> = b.iter().map(|z| z / z.norm().max(1.0)).collect();
                matched_distance(&scale, &other)
            } else {
                f64::INFINITY
            };
            v.check(
                worst <= 1e-10,
                format!("{dim} β = {beta}: {} vs {} eigenvalues, worst relative difference {worst:.1e}", a.len(), b.len()),
            );
        }
    }
    v
}

fn main() {
    let criteria: [(u32, &str, fn() -> Verdict); 8] = [
        (1, "two-body anchors", two_body_anchors),
        (2, "threshold positions", threshold_positions),
        (3, "resonance position anchors", resonance_anchors),
        (4, "θ-stability and continuum rays", theta_stability),
        (5, "mass-ratio trend", mass_ratio_trend),
        (6, "1D width oscillations", one_dimensional_oscillations),
        (7, "oracle suites", oracle_suites),
        (8, "exchange-symmetry consistency", exchange_consistency),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Verdict { pass: false, lines: vec![format!("MISS panicked: {}", msg.unwrap_or_default())] }
        });
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {n}: {name} ({:.1} s)", start.elapsed().as_secs_f64());
        for l in &verdict.lines {
            println!("         {l}");
        }
        if !verdict.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: criteria {failed:?} failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
