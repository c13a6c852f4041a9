//! Mass-ratio scans: run configuration, the per-β pipeline, CSV/JSON persistence and
//! plot-ready text output.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_cached, assemble_parts, ChannelBasis, MatrixCache};
use crate::basis::GaussBasisSpec;
use crate::csm::{classify, extract_resonance, ClassifiedSpectrum, ClassifyOptions, FamilyLabel, ThresholdSet};
use crate::eigen::{solve_parts, solve_pencil, EigOptions};
use crate::error::{Error, Result};
use crate::gaussint::ANALYTICITY_BOUND;
use crate::twobody::{default_two_body_basis, tune_depth, GaussPotential, LevelLabel, Sector, TuneRequest};
use crate::units::{convert_energy, width_to_lifetime, ComplexEnergy, Dimension, Lifetime, MassConfig, ScalingKind};

/// Scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub const DEFAULT_THETAS_DEG: [f64; 3] = [8.0, 10.0, 12.0];

/// Two-body energy fixed by the depth in the tilde view.
pub const TILDE_TARGET: f64 = -0.1;

/// Mass ratios to visit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BetaGrid {
    List { values: Vec<f64> },
    Log { min: f64, max: f64, count: usize },
}

impl Default for BetaGrid {
    fn default() -> Self {
        BetaGrid::Log { min: 0.05, max: 20.0, count: 80 }
    }
}

impl BetaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            BetaGrid::List { values } => values.clone(),
            BetaGrid::Log { min, max, count } => {
                if *count == 0 {
                    vec![]
                } else if *count == 1 {
                    vec![*min]
                } else {
                    let (a, b) = (min.ln(), max.ln());
                    let mut v: Vec<f64> =
                        (0..*count).map(|k| (a + (b - a) * k as f64 / (*count - 1) as f64).exp()).collect();
                    v[0] = *min;
                    v[*count - 1] = *max;
                    v
                }
            }
        };
        for &b in &pts {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::Config(format!("mass ratio {b} outside (0, inf)")));
            }
        }
        if let BetaGrid::Log { min, max, .. } = self {
            if !(min > &0.0 && max >= min) {
                return Err(Error::Config(format!("bad log grid [{min}, {max}]")));
            }
        }
        let mut pts = pts;
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(pts)
    }
}

/// Interaction depth: fixed, or tuned once so that a two-body level sits at a target energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PotentialSpec {
    Fixed { v0_prime: f64 },
    Tune { level: LevelLabel, energy: f64 },
}

impl PotentialSpec {
    /// Depths giving an excited even level at `-0.1`.
    pub fn default_for(dim: Dimension) -> Self {
        match dim {
            Dimension::Three => PotentialSpec::Fixed { v0_prime: -19.77 },
            Dimension::One => PotentialSpec::Fixed { v0_prime: -5.44 },
        }
    }
}

/// Complete description of a scan. Every field except `dimension` has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dimension: Dimension,
    pub beta_grid: BetaGrid,
    /// Bisection levels around detected width minima.
    pub refine_levels: usize,
    pub thetas_deg: Vec<f64>,
    pub basis: ChannelBasis,
    pub two_body_basis: GaussBasisSpec,
    pub potential: PotentialSpec,
    pub families: Vec<FamilyLabel>,
    pub scaling: ScalingKind,
    pub output_dir: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub dump_spectra: bool,
    pub workers: Option<usize>,
    pub eig: EigOptions,
    pub classify: ClassifyOptions,
}

/// On-disk form: everything optional, filled from [`RunConfig::production`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dimension: Dimension,
    beta_grid: Option<BetaGrid>,
    refine_levels: Option<usize>,
    thetas_deg: Option<Vec<f64>>,
    basis: Option<ChannelBasis>,
    two_body_basis: Option<GaussBasisSpec>,
    potential: Option<PotentialSpec>,
    families: Option<Vec<FamilyLabel>>,
    scaling: Option<ScalingKind>,
    output_dir: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    dump_spectra: Option<bool>,
    workers: Option<usize>,
    eig: Option<EigOptions>,
    classify: Option<ClassifyOptions>,
}

impl RunConfig {
    pub fn production(dimension: Dimension) -> Self {
        Self {
            dimension,
            beta_grid: BetaGrid::default(),
            refine_levels: 3,
            thetas_deg: DEFAULT_THETAS_DEG.to_vec(),
            basis: ChannelBasis::production(dimension),
            two_body_basis: default_two_body_basis(),
            potential: PotentialSpec::default_for(dimension),
            families: FamilyLabel::defaults(dimension),
            scaling: ScalingKind::Prime,
            output_dir: None,
            cache_dir: None,
            dump_spectra: false,
            workers: None,
            eig: EigOptions::for_dimension(dimension),
            classify: ClassifyOptions::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let d = Self::production(raw.dimension);
        let cfg = Self {
            dimension: raw.dimension,
            beta_grid: raw.beta_grid.unwrap_or(d.beta_grid),
            refine_levels: raw.refine_levels.unwrap_or(d.refine_levels),
            thetas_deg: raw.thetas_deg.unwrap_or(d.thetas_deg),
            basis: raw.basis.unwrap_or(d.basis),
            two_body_basis: raw.two_body_basis.unwrap_or(d.two_body_basis),
            potential: raw.potential.unwrap_or(d.potential),
            families: raw.families.unwrap_or(d.families),
            scaling: raw.scaling.unwrap_or(d.scaling),
            output_dir: raw.output_dir,
            cache_dir: raw.cache_dir,
            dump_spectra: raw.dump_spectra.unwrap_or(false),
            workers: raw.workers,
            eig: raw.eig.unwrap_or(d.eig),
            classify: raw.classify.unwrap_or(d.classify),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn thetas_rad(&self) -> Vec<f64> {
        self.thetas_deg.iter().map(|d| d.to_radians()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.beta_grid.points()?;
        if self.thetas_deg.is_empty() {
            return Err(Error::Config("at least one scaling angle is required".into()));
        }
        let mut seen = BTreeSet::new();
        for &t in &self.thetas_deg {
            let r = t.to_radians();
            if !(0.0..ANALYTICITY_BOUND).contains(&r) || !t.is_finite() {
                return Err(Error::Config(format!(
                    "scaling angle {t} deg outside [0, {:.1}) deg",
                    ANALYTICITY_BOUND.to_degrees()
                )));
            }
            if !seen.insert(t.to_bits()) {
                return Err(Error::Config(format!("duplicate scaling angle {t}")));
            }
        }
        if self.basis.dimension != self.dimension {
            return Err(Error::Config("basis dimension differs from run dimension".into()));
        }
        self.basis.validate()?;
        self.two_body_basis.validate()?;
        for f in &self.families {
            if f.dimension != self.dimension {
                return Err(Error::Config(format!("family {f} does not belong to a {} run", self.dimension)));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("worker count must be positive".into()));
        }
        match self.potential {
            PotentialSpec::Fixed { v0_prime } if !v0_prime.is_finite() => {
                return Err(Error::Config("v0_prime must be finite".into()))
            }
            PotentialSpec::Tune { energy, .. } if !(energy < 0.0) => {
                return Err(Error::Config("tuning target must be negative".into()))
            }
            _ => {}
        }
        Ok(())
    }

    /// Depth for the prime-scaling run (tuned once when requested).
    pub fn resolve_potential(&self) -> Result<GaussPotential> {
        match self.potential {
            PotentialSpec::Fixed { v0_prime } => Ok(GaussPotential::new(v0_prime)),
            PotentialSpec::Tune { level, energy } => {
                let mut req = TuneRequest::new(self.dimension, level.sector, level.n as usize, energy);
                if let PotentialSpec::Fixed { v0_prime } = PotentialSpec::default_for(self.dimension) {
                    req.initial_guess = Some(v0_prime);
                }
                tune_depth(&req, &self.two_body_basis)
            }
        }
    }
}

/// Which scaling a pipeline runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    /// One depth for all β.
    Prime,
    /// Depth retuned at each β so the tilde-scaled two-body level is fixed.
    Tilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordStatus {
    Ok,
    /// The family has no member at this β.
    Absent,
    Error,
}

impl RecordStatus {
    fn token(self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::Absent => "absent",
            RecordStatus::Error => "error",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RecordStatus::Ok),
            "absent" => Ok(RecordStatus::Absent),
            "error" => Ok(RecordStatus::Error),
            other => Err(Error::Config(format!("bad status {other:?}"))),
        }
    }
}

/// One (β, family) row of a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub beta: f64,
    pub family: FamilyLabel,
    pub status: RecordStatus,
    pub e_r_prime: Option<f64>,
    pub gamma_prime: Option<f64>,
    pub tau_prime: Option<Lifetime>,
    pub accuracy: Option<f64>,
    /// `prime`, `tilde` or `physical`.
    pub scaling: String,
    pub e_r_scaled: Option<f64>,
    pub gamma_scaled: Option<f64>,
    pub tau_scaled: Option<Lifetime>,
    pub v0_prime: Option<f64>,
    pub detail: String,
}

fn scaling_name(s: &ScalingKind) -> &'static str {
    match s {
        ScalingKind::Prime => "prime",
        ScalingKind::Tilde => "tilde",
        ScalingKind::Physical { .. } => "physical",
    }
}

/// Width indistinguishable from zero at the accuracy estimate means an infinite lifetime.
pub fn lifetime_for(gamma: f64, accuracy: f64) -> Result<Lifetime> {
    if gamma <= accuracy {
        return Ok(Lifetime::Infinite);
    }
    width_to_lifetime(gamma)
}

impl ScanRecord {
    fn failed(beta: f64, family: FamilyLabel, scaling: &ScalingKind, v0: Option<f64>, status: RecordStatus, detail: String) -> Self {
        Self {
            beta,
            family,
            status,
            e_r_prime: None,
            gamma_prime: None,
            tau_prime: None,
            accuracy: None,
            scaling: scaling_name(scaling).into(),
            e_r_scaled: None,
            gamma_scaled: None,
            tau_scaled: None,
            v0_prime: v0,
            detail,
        }
    }

    pub fn found(
        beta: f64,
        family: FamilyLabel,
        e_r: f64,
        gamma: f64,
        accuracy: f64,
        scaling: &ScalingKind,
        v0: Option<f64>,
    ) -> Result<Self> {
        let cfg = MassConfig::new(beta)?;
        let tau = lifetime_for(gamma, accuracy)?;
        let scaled = convert_energy(ComplexEnergy::new(e_r, gamma), ScalingKind::Prime, *scaling, &cfg)?;
        let f = if gamma > 0.0 { scaled.gamma / gamma } else { 1.0 };
        let tau_scaled = lifetime_for(scaled.gamma, accuracy * f)?;
        Ok(Self {
            beta,
            family,
            status: RecordStatus::Ok,
            e_r_prime: Some(e_r),
            gamma_prime: Some(gamma),
            tau_prime: Some(tau),
            accuracy: Some(accuracy),
            scaling: scaling_name(scaling).into(),
            e_r_scaled: Some(scaled.e_r),
            gamma_scaled: Some(scaled.gamma),
            tau_scaled: Some(tau_scaled),
            v0_prime: v0,
            detail: String::new(),
        })
    }
}

/// Full result of one β point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumDump {
    pub beta: f64,
    pub dimension: Dimension,
    pub v0_prime: f64,
    pub thresholds: ThresholdSet,
    pub spectrum: ClassifiedSpectrum,
}

/// Scan inputs that do not depend on β.
pub struct PreparedScan {
    pub config: RunConfig,
    pub mode: ScanMode,
    pub potential: GaussPotential,
    pub thresholds: ThresholdSet,
    pub thetas: Vec<f64>,
    cache: Option<MatrixCache>,
}

impl PreparedScan {
    pub fn new(config: RunConfig, mode: ScanMode) -> Result<Self> {
        config.validate()?;
        let potential = config.resolve_potential()?;
        let thresholds = ThresholdSet::compute(&potential, config.dimension, &config.two_body_basis)?;
        let cache = config.cache_dir.as_ref().map(MatrixCache::new).transpose()?;
        let thetas = config.thetas_rad();
        Ok(Self { config, mode, potential, thresholds, thetas, cache })
    }

    fn tilde_level(&self) -> LevelLabel {
        match self.config.potential {
            PotentialSpec::Tune { level, .. } => level,
            PotentialSpec::Fixed { .. } => LevelLabel::new(2, Sector::Even),
        }
    }

    /// Depth and thresholds used at `beta`.
    pub fn potential_at(&self, beta: f64) -> Result<(GaussPotential, ThresholdSet)> {
        match self.mode {
            ScanMode::Prime => Ok((self.potential, self.thresholds.clone())),
            ScanMode::Tilde => {
                let cfg = MassConfig::new(beta)?;
                let level = self.tilde_level();
                let target = TILDE_TARGET / (2.0 * cfg.mx_over_mu_pair());
                let mut req = TuneRequest::new(self.config.dimension, level.sector, level.n as usize, target);
                req.initial_guess = Some(self.potential.v0_prime);
                let pot = tune_depth(&req, &self.config.two_body_basis)?;
                let th = ThresholdSet::compute(&pot, self.config.dimension, &self.config.two_body_basis)?;
                Ok((pot, th))
            }
        }
    }

    /// Assemble, solve and classify at one mass ratio.
    pub fn spectrum(&self, beta: f64) -> Result<SpectrumDump> {
        let cfg = MassConfig::new(beta)?;
        let (pot, thresholds) = self.potential_at(beta)?;
        let results = match &self.cache {
            Some(cache) => assemble_cached(&cfg, &pot, &self.config.basis, &self.thetas, Some(cache))?
                .iter()
                .map(|p| solve_pencil(&p.h_matrix, &p.s_matrix, false, &self.config.eig))
                .collect::<Result<Vec<_>>>()?,
            None => {
                let parts = assemble_parts(&cfg, &pot, &self.config.basis, &self.thetas)?;
                solve_parts(&parts, false, &self.config.eig)?
            }
        };
        let spectra: Vec<(f64, Vec<num_complex::Complex64>)> =
            self.thetas.iter().copied().zip(results.into_iter().map(|r| r.eigenvalues)).collect();
        let spectrum = classify(&spectra, &thresholds.energies(), &self.config.classify)?;
        Ok(SpectrumDump { beta, dimension: self.config.dimension, v0_prime: pot.v0_prime, thresholds, spectrum })
    }

    fn output_scaling(&self) -> ScalingKind {
        match self.mode {
            ScanMode::Prime => self.config.scaling,
            ScanMode::Tilde => ScalingKind::Tilde,
        }
    }

    /// Records for one β, never failing: errors become tagged rows.
    pub fn records(&self, beta: f64) -> (Vec<ScanRecord>, Option<SpectrumDump>) {
        let scaling = self.output_scaling();
        let dump = match self.spectrum(beta) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("beta = {beta}: {e}");
                let rows = self
                    .config
                    .families
                    .iter()
                    .map(|&f| ScanRecord::failed(beta, f, &scaling, None, RecordStatus::Error, e.to_string()))
                    .collect();
                return (rows, None);
            }
        };
        let v0 = Some(dump.v0_prime);
        let rows = self
            .config
            .families
            .iter()
            .map(|&f| match extract_resonance(f, &dump.spectrum, &dump.thresholds, None) {
                Ok(est) => ScanRecord::found(beta, f, est.e_r, est.gamma, est.accuracy, &scaling, v0)
                    .unwrap_or_else(|e| ScanRecord::failed(beta, f, &scaling, v0, RecordStatus::Error, e.to_string())),
                Err(Error::NotFound(m)) => ScanRecord::failed(beta, f, &scaling, v0, RecordStatus::Absent, m),
                Err(e) => ScanRecord::failed(beta, f, &scaling, v0, RecordStatus::Error, e.to_string()),
            })
            .collect();
        (rows, Some(dump))
    }
}

#[derive(Clone, Debug, Default)]
pub struct ScanOptions {
    /// Reuse rows of an existing CSV in the output directory.
    pub resume: bool,
}

#[derive(Clone, Debug)]
pub struct ScanOutcome {
    /// Sorted by (β, family).
    pub records: Vec<ScanRecord>,
    /// Mass ratios with at least one errored row.
    pub failed_betas: Vec<f64>,
    /// Mass ratios computed in this invocation (as opposed to resumed).
    pub computed_betas: Vec<f64>,
}

impl ScanOutcome {
    pub fn all_ok(&self) -> bool {
        self.failed_betas.is_empty()
    }

    pub fn series(&self, family: FamilyLabel) -> Vec<&ScanRecord> {
        self.records.iter().filter(|r| r.family == family && r.status == RecordStatus::Ok).collect()
    }
}

/// Prime-scaling scan (constant depth).
pub fn run_scan(config: &RunConfig, opts: &ScanOptions) -> Result<ScanOutcome> {
    run_pipeline(config, opts, ScanMode::Prime)
}

/// Tilde-scaling scan: recomputes every β with the depth retuned so that the tilde two-body
/// level is `TILDE_TARGET`, and reports tilde-scaled energies, widths and lifetimes.
pub fn emit_tilde_view(config: &RunConfig, opts: &ScanOptions) -> Result<ScanOutcome> {
    run_pipeline(config, opts, ScanMode::Tilde)
}

fn stem(mode: ScanMode) -> &'static str {
    match mode {
        ScanMode::Prime => "scan",
        ScanMode::Tilde => "tilde_scan",
    }
}

/// The settings that change the numbers, with grid and bookkeeping fields cleared.
fn physics_key(config: &RunConfig) -> RunConfig {
    let mut c = config.clone();
    c.beta_grid = BetaGrid::List { values: Vec::new() };
    c.refine_levels = 0;
    c.output_dir = None;
    c.cache_dir = None;
    c.workers = None;
    c.dump_spectra = false;
    c
}

/// Earlier rows are reused only if they were produced with the same physics settings.
fn resumable(config: &RunConfig, mode: ScanMode) -> bool {
    let Some(dir) = &config.output_dir else { return false };
    let path = dir.join(format!("{}_config.toml", stem(mode)));
    match RunConfig::from_path(&path) {
        Ok(saved) if physics_key(&saved) == physics_key(config) => true,
        Ok(_) => {
            log::warn!("{} has different settings; recomputing every point", path.display());
            false
        }
        Err(_) => false,
    }
}

pub fn run_pipeline(config: &RunConfig, opts: &ScanOptions, mode: ScanMode) -> Result<ScanOutcome> {
    let prepared = PreparedScan::new(config.clone(), mode)?;
    let out_dir = config.output_dir.clone();
    let csv_path = out_dir.as_ref().map(|d| d.join(format!("{}.csv", stem(mode))));

    // β (bit pattern) -> rows
    let mut rows: BTreeMap<u64, Vec<ScanRecord>> = BTreeMap::new();
    if opts.resume && resumable(config, mode) {
        if let Some(p) = csv_path.as_ref().filter(|p| p.exists()) {
            for r in read_csv(p)? {
                rows.entry(r.beta.to_bits()).or_default().push(r);
            }
            rows.retain(|_, rs| {
                rs.iter().all(|r| r.status != RecordStatus::Error)
                    && config.families.iter().all(|f| rs.iter().any(|r| r.family == *f))
            });
            for rs in rows.values_mut() {
                rs.retain(|r| config.families.contains(&r.family));
            }
        }
    }

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = config.workers {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?
    };

    let spectra_dir = match (&out_dir, config.dump_spectra) {
        (Some(d), true) => {
            let s = d.join(format!("{}_spectra", stem(mode)));
            std::fs::create_dir_all(&s)?;
            Some(s)
        }
        _ => None,
    };

    let mut computed = Vec::new();
    let mut compute = |betas: Vec<f64>, rows: &mut BTreeMap<u64, Vec<ScanRecord>>| -> Result<()> {
        let todo: Vec<f64> = betas.into_iter().filter(|b| !rows.contains_key(&b.to_bits())).collect();
        if todo.is_empty() {
            return Ok(());
        }
        log::info!("computing {} mass ratios", todo.len());
        let results: Vec<(f64, Vec<ScanRecord>, Option<SpectrumDump>)> = pool.install(|| {
            use rayon::prelude::*;
            todo.par_iter()
                .map(|&b| {
                    let (r, d) = prepared.records(b);
                    (b, r, d)
                })
                .collect()
        });
        for (b, r, d) in results {
            if let (Some(dir), Some(d)) = (&spectra_dir, d) {
                let path = dir.join(format!("beta_{}.json", format_float(b)));
                std::fs::write(path, serde_json::to_vec_pretty(&d)?)?;
            }
            rows.insert(b.to_bits(), r);
            computed.push(b);
        }
        Ok(())
    };

    compute(config.beta_grid.points()?, &mut rows)?;
    for _ in 0..config.refine_levels {
        let all: Vec<ScanRecord> = rows.values().flatten().cloned().collect();
        let extra = refinement_points(&all, &config.families);
        if extra.iter().all(|b| rows.contains_key(&b.to_bits())) {
            break;
        }
        compute(extra, &mut rows)?;
    }

    let mut records: Vec<ScanRecord> = rows.into_values().flatten().collect();
    sort_records(&mut records);
    let failed_betas: Vec<f64> = {
        let mut v: Vec<f64> = records.iter().filter(|r| r.status == RecordStatus::Error).map(|r| r.beta).collect();
        v.dedup();
        v
    };
    computed.sort_by(f64::total_cmp);

    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir)?;
        write_csv(&dir.join(format!("{}.csv", stem(mode))), &records)?;
        std::fs::write(dir.join(format!("{}.json", stem(mode))), serde_json::to_vec_pretty(&records)?)?;
        std::fs::write(dir.join(format!("{}_config.toml", stem(mode))), config.to_toml_string()?)?;
    }
    Ok(ScanOutcome { records, failed_betas, computed_betas: computed })
}

pub fn sort_records(records: &mut [ScanRecord]) {
    records.sort_by(|a, b| a.beta.total_cmp(&b.beta).then(a.family.cmp(&b.family)));
}

/// Geometric midpoints on both sides of every interior local minimum of `Γ'(β)`.
pub fn refinement_points(records: &[ScanRecord], families: &[FamilyLabel]) -> Vec<f64> {
    let mut out = BTreeSet::new();
    for f in families {
        let mut s: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.family == *f && r.status == RecordStatus::Ok)
            .filter_map(|r| r.gamma_prime.map(|g| (r.beta, g)))
            .collect();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        for i in 1..s.len().saturating_sub(1) {
            if s[i].1 < s[i - 1].1 && s[i].1 < s[i + 1].1 {
                out.insert((s[i - 1].0 * s[i].0).sqrt().to_bits());
                out.insert((s[i].0 * s[i + 1].0).sqrt().to_bits());
            }
        }
    }
    let mut v: Vec<f64> = out.into_iter().map(f64::from_bits).collect();
    v.sort_by(f64::total_cmp);
    v
}

pub const CSV_HEADER: &str = "beta,family,status,e_r_prime,gamma_prime,tau_prime,accuracy,scaling,e_r_scaled,gamma_scaled,tau_scaled,v0_prime,detail";

fn opt_float(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn opt_tau(x: &Option<Lifetime>) -> String {
    x.as_ref().map(|t| t.token()).unwrap_or_default()
}

fn csv_fields(r: &ScanRecord) -> [String; 13] {
    [
        format_float(r.beta),
        r.family.to_string(),
        r.status.token().to_string(),
        opt_float(r.e_r_prime),
        opt_float(r.gamma_prime),
        opt_tau(&r.tau_prime),
        opt_float(r.accuracy),
        r.scaling.clone(),
        opt_float(r.e_r_scaled),
        opt_float(r.gamma_scaled),
        opt_tau(&r.tau_scaled),
        opt_float(r.v0_prime),
        r.detail.clone(),
    ]
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("CSV: {e}"))
}

/// One quoted CSV row without the trailing newline.
pub fn csv_line(r: &ScanRecord) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(csv_fields(r)).expect("writing to memory");
    let mut bytes = w.into_inner().expect("writing to memory");
    bytes.pop();
    String::from_utf8(bytes).expect("fields are UTF-8")
}

pub fn write_csv(path: &Path, records: &[ScanRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_error)?;
    w.write_record(CSV_HEADER.split(',')).map_err(csv_error)?;
    for r in records {
        w.write_record(csv_fields(r)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_opt_float(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
}

fn parse_opt_tau(s: &str) -> Result<Option<Lifetime>> {
    if s.is_empty() {
        return Ok(None);
    }
    Lifetime::parse_token(s).map(Some)
}

pub fn parse_csv(text: &str) -> Result<Vec<ScanRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rd.headers().map_err(csv_error)?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Config("unexpected CSV header".into()));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let c = row.map_err(csv_error)?;
        if c.len() != 13 {
            return Err(Error::Config(format!("bad CSV row {c:?}")));
        }
        out.push(ScanRecord {
            beta: c[0].parse().map_err(|e| Error::Config(format!("bad beta {:?}: {e}", &c[0])))?,
            family: c[1].parse()?,
            status: RecordStatus::parse(&c[2])?,
            e_r_prime: parse_opt_float(&c[3])?,
            gamma_prime: parse_opt_float(&c[4])?,
            tau_prime: parse_opt_tau(&c[5])?,
            accuracy: parse_opt_float(&c[6])?,
            scaling: c[7].to_string(),
            e_r_scaled: parse_opt_float(&c[8])?,
            gamma_scaled: parse_opt_float(&c[9])?,
            tau_scaled: parse_opt_tau(&c[10])?,
            v0_prime: parse_opt_float(&c[11])?,
            detail: c[12].to_string(),
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<ScanRecord>> {
    parse_csv(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    /// Complex spectra with threshold rays.
    Fig2,
    /// Widths against mass ratio.
    Fig3,
    /// Lifetimes against mass ratio.
    Fig4,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig2" => Ok(PlotKind::Fig2),
            "fig3" => Ok(PlotKind::Fig3),
            "fig4" => Ok(PlotKind::Fig4),
            other => Err(Error::Config(format!("unknown plot kind {other:?}"))),
        }
    }
}

fn tau_column(t: &Option<Lifetime>) -> String {
    match t {
        Some(l) => l.token(),
        None => "nan".into(),
    }
}

/// Width or lifetime table from scan records (`Fig3`/`Fig4`); only rows with a result.
pub fn emit_plot_data(records: &[ScanRecord], kind: PlotKind, out: &mut dyn Write) -> Result<()> {
    match kind {
        PlotKind::Fig2 => {
            return Err(Error::Config("fig2 plot data is produced from spectra, not scan records".into()))
        }
        PlotKind::Fig3 => {
            writeln!(out, "# resonance widths against mass ratio")?;
            writeln!(out, "# columns: beta family gamma_prime gamma_scaled accuracy scaling")?;
        }
        PlotKind::Fig4 => {
            writeln!(out, "# resonance lifetimes against mass ratio; inf marks a vanishing width")?;
            writeln!(out, "# columns: beta family tau_prime tau_scaled scaling")?;
        }
    }
    let mut rs: Vec<&ScanRecord> = records.iter().filter(|r| r.status == RecordStatus::Ok).collect();
    rs.sort_by(|a, b| a.family.cmp(&b.family).then(a.beta.total_cmp(&b.beta)));
    for r in rs {
        let fam = r.family.to_string().replace(',', ";");
        match kind {
            PlotKind::Fig3 => writeln!(
                out,
                "{} {} {} {} {} {}",
                format_float(r.beta),
                fam,
                opt_float(r.gamma_prime),
                opt_float(r.gamma_scaled),
                opt_float(r.accuracy),
                r.scaling
            )?,
            _ => writeln!(
                out,
                "{} {} {} {} {}",
                format_float(r.beta),
                fam,
                tau_column(&r.tau_prime),
                tau_column(&r.tau_scaled),
                r.scaling
            )?,
        }
    }
    Ok(())
}

fn class_token(c: crate::csm::StateClass) -> &'static str {
    use crate::csm::StateClass::*;
    match c {
        Bound => "bound",
        Resonance => "resonance",
        Continuum => "continuum",
        Unidentified => "unidentified",
    }
}

/// Complex-plane spectra plus, for each angle and threshold, the ray `t + ρ e^{-2iθ}`.
pub fn emit_spectrum_plot(dumps: &[SpectrumDump], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "# complex-scaled spectra; energies E' = re + i im")?;
    writeln!(out, "# point rows: point beta theta_deg re im class")?;
    writeln!(out, "# ray rows:   ray beta theta_deg threshold slope re_end im_end")?;
    for d in dumps {
        for p in &d.spectrum.points {
            let z = p.eigenvalue();
            writeln!(
                out,
                "point {} {} {} {} {}",
                format_float(d.beta),
                format_float(p.theta.to_degrees()),
                format_float(z.re),
                format_float(z.im),
                class_token(p.class)
            )?;
        }
        let re_max = d.spectrum.points.iter().map(|p| p.energy.e_r).fold(0.0, f64::max);
        for &th in &d.spectrum.thetas {
            for &t in &d.spectrum.thresholds {
                let len = (re_max - t).max(1.0) / (2.0 * th).cos();
                let end = num_complex::Complex64::from(t) + num_complex::Complex64::from_polar(len, -2.0 * th);
                writeln!(
                    out,
                    "ray {} {} {} {} {} {}",
                    format_float(d.beta),
                    format_float(th.to_degrees()),
                    format_float(t),
                    format_float((-2.0 * th).tan()),
                    format_float(end.re),
                    format_float(end.im)
                )?;
            }
        }
    }
    Ok(())
}

pub fn read_spectrum_dump(path: &Path) -> Result<SpectrumDump> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}
