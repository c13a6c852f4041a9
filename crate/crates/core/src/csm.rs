//! Classification of complex-scaled spectra into bound states, resonances and rotated
//! continua, and extraction of resonance families.
//!
//! Eigenvalues on a ray `t + ρ e^{-2iθ}` leaving a two-body threshold `t` (or the
//! three-body breakup threshold 0) are continuum. The remaining eigenvalues are linked
//! across angles by nearest neighbours; a linked cluster whose dispersion stays below
//! `resonance_tol` is a discrete state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::GaussBasisSpec;
use crate::error::{Error, Result};
use crate::twobody::{solve_two_body, GaussPotential, LevelLabel, Sector};
use crate::units::{ComplexEnergy, Dimension};

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateClass {
    Bound,
    Resonance,
    Continuum,
    Unidentified,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub energy: ComplexEnergy,
    pub theta: f64,
    pub class: StateClass,
    /// Largest distance between linked eigenvalues at different angles; absent with a single angle.
    pub stability_score: Option<f64>,
}

impl SpectrumPoint {
    pub fn eigenvalue(&self) -> C {
        self.energy.to_complex()
    }
}

/// A discrete state followed across angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteState {
    pub class: StateClass,
    /// Mean over angles.
    pub energy: ComplexEnergy,
    pub per_theta: Vec<ComplexEnergy>,
    pub dispersion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedSpectrum {
    pub thetas: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub points: Vec<SpectrumPoint>,
    pub states: Vec<DiscreteState>,
}

impl ClassifiedSpectrum {
    pub fn count(&self, class: StateClass) -> usize {
        self.states.iter().filter(|s| s.class == class).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub bound_tol: f64,
    pub resonance_tol: f64,
    pub min_resonance_tol: f64,
    /// Half-width of the continuum corridor around each `-2θ` ray, degrees.
    pub corridor_deg: f64,
    /// A cluster whose spread exceeds this fraction of the displacement a continuum point
    /// at the same distance from the nearest threshold would undergo is treated as continuum.
    pub corotation_fraction: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { bound_tol: 1e-3, resonance_tol: 1e-3, min_resonance_tol: 1e-6, corridor_deg: 1.0, corotation_fraction: 0.25 }
    }
}

/// Two-body levels that open continua, sorted by energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub dimension: Dimension,
    pub levels: Vec<(LevelLabel, f64)>,
}

impl ThresholdSet {
    pub fn new(dimension: Dimension, mut levels: Vec<(LevelLabel, f64)>) -> Self {
        levels.sort_by(|a, b| a.1.total_cmp(&b.1));
        Self { dimension, levels }
    }

    /// Thresholds reachable with the three-body blocks used for `dimension`: s-waves in 3D,
    /// both parities in 1D.
    pub fn compute(pot: &GaussPotential, dimension: Dimension, basis: &GaussBasisSpec) -> Result<Self> {
        let sectors: &[Sector] = match dimension {
            Dimension::Three => &[Sector::Even],
            Dimension::One => &[Sector::Even, Sector::Odd],
        };
        let mut levels = Vec::new();
        for &s in sectors {
            levels.extend(solve_two_body(pot, dimension, s, basis)?.labelled());
        }
        Ok(Self::new(dimension, levels))
    }

    pub fn energy(&self, label: LevelLabel) -> Option<f64> {
        self.levels.iter().find(|(l, _)| *l == label).map(|(_, e)| *e)
    }

    /// All continuum thresholds including the breakup threshold 0.
    pub fn energies(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.levels.iter().map(|(_, e)| *e).collect();
        v.push(0.0);
        v
    }

    pub fn lowest(&self) -> f64 {
        self.levels.first().map(|(_, e)| *e).unwrap_or(0.0)
    }

    /// `(lower, upper)` energy window of the family below `parent`.
    pub fn window(&self, parent: LevelLabel) -> Option<(f64, f64)> {
        let upper = self.energy(parent)?;
        let lower = self
            .levels
            .iter()
            .map(|(_, e)| *e)
            .filter(|&e| e < upper)
            .fold(f64::NEG_INFINITY, f64::max);
        Some((lower, upper))
    }
}

fn in_corridor(z: C, theta: f64, thresholds: &[f64], half_width: f64) -> bool {
    thresholds.iter().any(|&t| {
        let d = z - t;
        if d.norm() < 1e-10 {
            return true;
        }
        (d.arg() + 2.0 * theta).abs() < half_width
    })
}

/// Classifies every eigenvalue at every angle.
pub fn classify(spectra: &[(f64, Vec<C>)], thresholds: &[f64], opts: &ClassifyOptions) -> Result<ClassifiedSpectrum> {
    if spectra.is_empty() {
        return Err(Error::Domain("no spectra to classify".into()));
    }
    let mut order: Vec<usize> = (0..spectra.len()).collect();
    order.sort_by(|&a, &b| spectra[a].0.total_cmp(&spectra[b].0));
    for w in order.windows(2) {
        if spectra[w[0]].0 == spectra[w[1]].0 {
            return Err(Error::Domain("scaling angles must be distinct".into()));
        }
    }
    let half = opts.corridor_deg.to_radians();
    let mut ths: Vec<f64> = thresholds.to_vec();
    if !ths.iter().any(|&t| t == 0.0) {
        ths.push(0.0);
    }
    ths.sort_by(f64::total_cmp);
    let lowest = ths[0];

    // candidates[k] = indices into spectra[order[k]] of non-continuum eigenvalues
    let candidates: Vec<Vec<usize>> = order
        .iter()
        .map(|&k| {
            let (th, ev) = &spectra[k];
            (0..ev.len()).filter(|&i| !in_corridor(ev[i], *th, &ths, half)).collect()
        })
        .collect();

    let mut class_of: Vec<Vec<StateClass>> = order
        .iter()
        .map(|&k| vec![StateClass::Continuum; spectra[k].1.len()])
        .collect();
    let mut score_of: Vec<Vec<Option<f64>>> = order.iter().map(|&k| vec![None; spectra[k].1.len()]).collect();
    for (k, c) in candidates.iter().enumerate() {
        for &i in c {
            class_of[k][i] = StateClass::Unidentified;
        }
    }

    let discrete_class = |z: C| -> StateClass {
        if z.re < lowest {
            if z.im.abs() <= opts.bound_tol {
                StateClass::Bound
            } else {
                StateClass::Unidentified
            }
        } else if z.im <= opts.resonance_tol {
            StateClass::Resonance
        } else {
            StateClass::Unidentified
        }
    };

    let mut states = Vec::new();
    if order.len() == 1 {
        let ev = &spectra[order[0]].1;
        for &i in &candidates[0] {
            let c = discrete_class(ev[i]);
            class_of[0][i] = c;
            if c != StateClass::Unidentified {
                states.push(DiscreteState {
                    class: c,
                    energy: ComplexEnergy::from_eigenvalue(ev[i]),
                    per_theta: vec![ComplexEnergy::from_eigenvalue(ev[i])],
                    dispersion: 0.0,
                });
            }
        }
    } else {
        let links = link_clusters(spectra, &order, &candidates, opts);
        let sweep = 2.0 * (spectra[order[order.len() - 1]].0 - spectra[order[0]].0);
        for chain in links {
            let zs: Vec<C> = chain.iter().enumerate().map(|(k, &i)| spectra[order[k]].1[i]).collect();
            let disp = dispersion(&zs);
            let mean = zs.iter().sum::<C>() / zs.len() as f64;
            let rho = ths.iter().map(|&t| (mean - t).norm()).fold(f64::INFINITY, f64::min);
            let class = if disp >= opts.corotation_fraction * rho * sweep {
                StateClass::Continuum
            } else {
                discrete_class(mean)
            };
            for (k, &i) in chain.iter().enumerate() {
                class_of[k][i] = class;
                score_of[k][i] = Some(disp);
            }
            if matches!(class, StateClass::Bound | StateClass::Resonance) {
                states.push(DiscreteState {
                    class,
                    energy: ComplexEnergy::from_eigenvalue(mean),
                    per_theta: zs.iter().map(|&z| ComplexEnergy::from_eigenvalue(z)).collect(),
                    dispersion: disp,
                });
            }
        }
    }
    states.sort_by(|a, b| a.energy.e_r.total_cmp(&b.energy.e_r));

    let mut points = Vec::new();
    for (k, &orig) in order.iter().enumerate() {
        let (th, ev) = &spectra[orig];
        for (i, &z) in ev.iter().enumerate() {
            points.push(SpectrumPoint {
                energy: ComplexEnergy::from_eigenvalue(z),
                theta: *th,
                class: class_of[k][i],
                stability_score: score_of[k][i],
            });
        }
    }
    Ok(ClassifiedSpectrum { thetas: order.iter().map(|&k| spectra[k].0).collect(), thresholds: ths, points, states })
}

fn dispersion(zs: &[C]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in zs.iter().enumerate() {
        for b in &zs[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// Chains of candidate indices, one per angle (in sorted order), each with dispersion
/// below the tolerance and linked unambiguously.
fn link_clusters(
    spectra: &[(f64, Vec<C>)],
    order: &[usize],
    candidates: &[Vec<usize>],
    opts: &ClassifyOptions,
) -> Vec<Vec<usize>> {
    let reference = &spectra[order[0]].1;
    let mut proposals: Vec<Option<Vec<usize>>> = Vec::new();
    for &i in &candidates[0] {
        let z0 = reference[i];
        let mut tol = opts.resonance_tol;
        let chain = loop {
            match try_chain(z0, i, spectra, order, candidates, tol) {
                Link::Found(c) => break Some(c),
                Link::Missing => break None,
                Link::Ambiguous => {
                    tol *= 0.1;
                    if tol < opts.min_resonance_tol * (1.0 - 1e-9) {
                        break None;
                    }
                }
            }
        };
        proposals.push(chain);
    }
    // a partner claimed by two chains is ambiguous for both
    let mut claims: Vec<Vec<usize>> = order.iter().map(|&k| vec![0; spectra[k].1.len()]).collect();
    for c in proposals.iter().flatten() {
        for (k, &i) in c.iter().enumerate() {
            claims[k][i] += 1;
        }
    }
    proposals
        .into_iter()
        .flatten()
        .filter(|c| c.iter().enumerate().all(|(k, &i)| claims[k][i] == 1))
        .collect()
}

enum Link {
    Found(Vec<usize>),
    Missing,
    Ambiguous,
}

fn try_chain(z0: C, i0: usize, spectra: &[(f64, Vec<C>)], order: &[usize], candidates: &[Vec<usize>], tol: f64) -> Link {
    let mut chain = vec![i0];
    for k in 1..order.len() {
        let ev = &spectra[order[k]].1;
        let near: Vec<usize> = candidates[k].iter().copied().filter(|&j| (ev[j] - z0).norm() < tol).collect();
        match near.len() {
            0 => return Link::Missing,
            1 => chain.push(near[0]),
            _ => return Link::Ambiguous,
        }
    }
    // competing reference eigenvalues within tolerance are also ambiguous
    let reference = &spectra[order[0]].1;
    if candidates[0].iter().any(|&j| j != i0 && (reference[j] - z0).norm() < tol) {
        return Link::Ambiguous;
    }
    Link::Found(chain)
}

/// Resonance family label, e.g. `(3D,2s)`: states below the parent two-body level and above
/// the next lower threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FamilyLabel {
    pub dimension: Dimension,
    pub parent: LevelLabel,
}

impl FamilyLabel {
    pub fn new(dimension: Dimension, parent: LevelLabel) -> Self {
        Self { dimension, parent }
    }

    /// Families tracked by default: (3D,2s); (1D,1p) and (1D,2s).
    pub fn defaults(dimension: Dimension) -> Vec<FamilyLabel> {
        match dimension {
            Dimension::Three => vec![Self::new(dimension, LevelLabel::new(2, Sector::Even))],
            Dimension::One => vec![
                Self::new(dimension, LevelLabel::new(1, Sector::Odd)),
                Self::new(dimension, LevelLabel::new(2, Sector::Even)),
            ],
        }
    }
}

impl std::fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.dimension, self.parent)
    }
}

impl std::str::FromStr for FamilyLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (d, l) = inner
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("family label {s:?} must look like (1D,2s)")))?;
        Ok(Self { dimension: d.trim().parse()?, parent: l.trim().parse()? })
    }
}

impl TryFrom<String> for FamilyLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FamilyLabel> for String {
    fn from(l: FamilyLabel) -> String {
        l.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFamily {
    pub label: FamilyLabel,
    pub window: (f64, f64),
    /// Ordered by real part, deepest first.
    pub members: Vec<DiscreteState>,
}

pub fn family(label: FamilyLabel, spectrum: &ClassifiedSpectrum, thresholds: &ThresholdSet) -> Result<ResonanceFamily> {
    let window = thresholds
        .window(label.parent)
        .ok_or_else(|| Error::NotFound(format!("{label}: parent level absent")))?;
    let members: Vec<DiscreteState> = spectrum
        .states
        .iter()
        .filter(|s| s.class == StateClass::Resonance && s.energy.e_r > window.0 && s.energy.e_r < window.1)
        .cloned()
        .collect();
    Ok(ResonanceFamily { label, window, members })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceEstimate {
    pub e_r: f64,
    pub gamma: f64,
    pub accuracy: f64,
}

/// Deepest member of a family: position and width averaged over angles, accuracy from the
/// angular spread and, if given, the shift against a spectrum from a different basis.
pub fn extract_resonance(
    label: FamilyLabel,
    spectrum: &ClassifiedSpectrum,
    thresholds: &ThresholdSet,
    other_basis: Option<&ClassifiedSpectrum>,
) -> Result<ResonanceEstimate> {
    let fam = family(label, spectrum, thresholds)?;
    let deepest = fam.members.first().ok_or_else(|| Error::NotFound(label.to_string()))?;
    let mut accuracy = deepest.dispersion;
    if let Some(other) = other_basis {
        if let Some(alt) = family(label, other, thresholds)?.members.first() {
            accuracy = accuracy.max((alt.energy.to_complex() - deepest.energy.to_complex()).norm());
        }
    }
    Ok(ResonanceEstimate { e_r: deepest.energy.e_r, gamma: deepest.energy.gamma.max(0.0), accuracy })
}
