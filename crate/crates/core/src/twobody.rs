//! The rescaled BX two-body problem `(-κ∇² + v0' e^{-r²}) ψ = E ψ`, which does not depend on
//! the mass ratio, and tuning of `v0'` to pin a level.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{gauss_moment, BasisFunction, GaussBasisSpec};
use crate::eigen::{solve_real_symmetric, EigOptions};
use crate::error::{Error, Result};
use crate::units::Dimension;

type C = Complex64;

/// `V'(r) = v0' e^{-r²}` in prime units (range 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussPotential {
    pub v0_prime: f64,
}

impl GaussPotential {
    pub fn new(v0_prime: f64) -> Self {
        Self { v0_prime }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.v0_prime * (-r * r).exp()
    }
}

/// Parity sector in 1D, partial wave in 3D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// 1D even / 3D s-wave
    Even,
    /// 1D odd / 3D p-wave
    Odd,
}

impl Sector {
    pub fn ell(self) -> u8 {
        match self {
            Sector::Even => 0,
            Sector::Odd => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Sector::Even => 's',
            Sector::Odd => 'p',
        }
    }
}

impl std::str::FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "even" | "s" | "s-wave" => Ok(Sector::Even),
            "odd" | "p" | "p-wave" => Ok(Sector::Odd),
            other => Err(Error::Config(format!("unknown sector {other:?}"))),
        }
    }
}

/// Two-body level name, e.g. `2s` (second even level) or `1p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LevelLabel {
    pub n: u8,
    pub sector: Sector,
}

impl LevelLabel {
    pub fn new(n: u8, sector: Sector) -> Self {
        Self { n, sector }
    }
}

impl std::fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.n, self.sector.letter())
    }
}

impl std::str::FromStr for LevelLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, letter) = s.split_at(s.len().saturating_sub(1));
        let n: u8 = num.parse().map_err(|_| Error::Config(format!("bad level label {s:?}")))?;
        let sector = letter.parse()?;
        if n == 0 {
            return Err(Error::Config(format!("bad level label {s:?}")));
        }
        Ok(Self { n, sector })
    }
}

impl TryFrom<String> for LevelLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LevelLabel> for String {
    fn from(l: LevelLabel) -> String {
        l.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoBodySpectrum {
    pub dimension: Dimension,
    pub sector: Sector,
    /// Bound levels, most deeply bound first.
    pub levels: Vec<f64>,
}

impl TwoBodySpectrum {
    pub fn labelled(&self) -> Vec<(LevelLabel, f64)> {
        self.levels
            .iter()
            .enumerate()
            .map(|(i, &e)| (LevelLabel::new(i as u8 + 1, self.sector), e))
            .collect()
    }
}

/// Overlap, `-∇²` and potential elements between two basis functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoBodyElements {
    pub overlap: C,
    pub kinetic: C,
    pub potential: C,
}

pub fn two_body_matrix_elements(
    bra: &BasisFunction,
    ket: &BasisFunction,
    pot: &GaussPotential,
    dim: Dimension,
) -> Result<TwoBodyElements> {
    if bra.ell != ket.ell {
        return Ok(TwoBodyElements { overlap: C::from(0.0), kinetic: C::from(0.0), potential: C::from(0.0) });
    }
    let s = bra.ell as f64 + 0.5 * dim.spatial() as f64;
    let mut out = TwoBodyElements { overlap: C::from(0.0), kinetic: C::from(0.0), potential: C::from(0.0) };
    for (ci, a) in bra.primitives() {
        for (cj, b) in ket.primitives() {
            let p = a + b;
            if !(p.re > 0.0) {
                return Err(Error::Domain("Gaussian exponents must have positive real part".into()));
            }
            let j = gauss_moment(dim, bra.ell, p);
            let w = ci * cj;
            out.overlap += w * j;
            out.kinetic += w * j * (4.0 * s) * a * b / p;
            out.potential += w * gauss_moment(dim, bra.ell, p + 1.0);
        }
    }
    out.potential *= pot.v0_prime;
    Ok(out)
}

/// A denser basis than the three-body pair ranges, used for thresholds and depth tuning.
pub fn default_two_body_basis() -> GaussBasisSpec {
    GaussBasisSpec::new(40, 400.0, 5e-4)
}

pub fn solve_two_body(
    pot: &GaussPotential,
    dim: Dimension,
    sector: Sector,
    basis: &GaussBasisSpec,
) -> Result<TwoBodySpectrum> {
    let plain = GaussBasisSpec { complex_omega: None, ..basis.clone() };
    let funcs = plain.functions(sector.ell(), dim)?;
    let n = funcs.len();
    let mut h = Array2::<f64>::zeros((n, n));
    let mut s = Array2::<f64>::zeros((n, n));
    let kappa = dim.kinetic_scale();
    for i in 0..n {
        for j in i..n {
            let e = two_body_matrix_elements(&funcs[i], &funcs[j], pot, dim)?;
            let hv = kappa * e.kinetic.re + e.potential.re;
            h[[i, j]] = hv;
            h[[j, i]] = hv;
            s[[i, j]] = e.overlap.re;
            s[[j, i]] = e.overlap.re;
        }
    }
    let (vals, _) = solve_real_symmetric(&h, &s, &EigOptions::default())
        .map_err(|e| Error::Assembly(format!("two-body {dim} {sector:?}: {e}")))?;
    let levels = vals.into_iter().filter(|&e| e < 0.0).collect();
    Ok(TwoBodySpectrum { dimension: dim, sector, levels })
}

/// Depth-tuning request; `level_index` counts from 1 within the sector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneRequest {
    pub dimension: Dimension,
    pub sector: Sector,
    pub level_index: usize,
    pub target: f64,
    #[serde(default = "default_tune_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub initial_guess: Option<f64>,
}

fn default_tune_tolerance() -> f64 {
    1e-8
}

impl TuneRequest {
    pub fn new(dimension: Dimension, sector: Sector, level_index: usize, target: f64) -> Self {
        Self { dimension, sector, level_index, target, tolerance: 1e-8, initial_guess: None }
    }
}

/// Level energy as a function of depth, with absent levels mapped onto the threshold 0.
fn level_at(v0: f64, req: &TuneRequest, basis: &GaussBasisSpec) -> Result<(f64, bool)> {
    let spec = solve_two_body(&GaussPotential::new(v0), req.dimension, req.sector, basis)?;
    Ok(match spec.levels.get(req.level_index - 1) {
        Some(&e) => (e, true),
        None => (0.0, false),
    })
}

/// Finds `v0'` with `|E_level(v0') - target| ≤ tolerance` by bisection with secant steps.
pub fn tune_depth(req: &TuneRequest, basis: &GaussBasisSpec) -> Result<GaussPotential> {
    if req.level_index == 0 {
        return Err(Error::Domain("level_index counts from 1".into()));
    }
    if !(req.target < 0.0) || !req.target.is_finite() {
        return Err(Error::Domain(format!("target must be a negative binding energy, got {}", req.target)));
    }
    if !(req.tolerance > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let f = |v0: f64| -> Result<(f64, bool)> {
        let (e, exists) = level_at(v0, req, basis)?;
        Ok((e - req.target, exists))
    };

    let guess = req.initial_guess.filter(|g| *g < 0.0 && g.is_finite());
    if let Some(g) = guess {
        let (fg, exists) = f(g)?;
        if exists && fg.abs() <= req.tolerance {
            return Ok(GaussPotential::new(g));
        }
    }

    // f increases with v0 (shallower well, higher level); f(0) = -target > 0.
    let (mut hi, mut f_hi, mut hi_exists) = (0.0, -req.target, false);
    let mut lo = guess.unwrap_or(-1.0);
    let (mut f_lo, mut lo_exists) = f(lo)?;
    let mut expansions = 0;
    while f_lo >= 0.0 {
        hi = lo;
        f_hi = f_lo;
        hi_exists = lo_exists;
        lo *= 2.0;
        expansions += 1;
        if expansions > 40 {
            return Err(Error::NoRoot(format!(
                "level {} of the {:?} sector never reaches {} for depths down to {lo}",
                req.level_index, req.sector, req.target
            )));
        }
        (f_lo, lo_exists) = f(lo)?;
    }

    for _ in 0..300 {
        let width = hi - lo;
        let mid = 0.5 * (lo + hi);
        let mut x = mid;
        if lo_exists && hi_exists && f_hi != f_lo {
            let sec = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            if sec > lo + 0.05 * width && sec < hi - 0.05 * width {
                x = sec;
            }
        }
        let (fx, ex) = f(x)?;
        if ex && fx.abs() <= req.tolerance {
            return Ok(GaussPotential::new(x));
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            lo_exists = ex;
        } else {
            hi = x;
            f_hi = fx;
            hi_exists = ex;
        }
        if (hi - lo).abs() <= 1e-15 * lo.abs() {
            break;
        }
    }
    Err(Error::NoRoot(format!(
        "depth tuning for level {} ({:?}, {}) did not converge to {:e}",
        req.level_index, req.sector, req.dimension, req.tolerance
    )))
}
