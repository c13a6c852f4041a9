//! Gaussian range progressions and normalized (possibly complex-ranged) basis functions.
//!
//! A basis function has the form `N r^l e^{-ν r²}` (1D: `N z^l e^{-ν z²}`). In 3D the
//! angular factor for `l = 1` is the Cartesian solid harmonic `z`, so all integrals factor
//! over Cartesian components. Complex-ranged members use the real combinations
//!
//! ```text
//! cos-flavor:  N r^l e^{-ν r²} cos(ω ν r²) = N/2  [g(ν(1-iω)) + g(ν(1+iω))]
//! sin-flavor:  N r^l e^{-ν r²} sin(ω ν r²) = N/2i [g(ν(1-iω)) - g(ν(1+iω))]
//! ```
//!
//! which span the same space as the conjugate pair `e^{-(1±iω)ν r²}` while keeping every
//! function real.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Dimension;

/// Parameters of one geometric progression of Gaussian ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussBasisSpec {
    pub n_max: usize,
    pub nu_first: f64,
    pub nu_last: f64,
    /// Highest polynomial degree used with these ranges (0 or 1).
    #[serde(default)]
    pub ell: u8,
    #[serde(default)]
    pub complex_omega: Option<f64>,
}

impl GaussBasisSpec {
    pub fn new(n_max: usize, nu_first: f64, nu_last: f64) -> Self {
        Self { n_max, nu_first, nu_last, ell: 0, complex_omega: None }
    }

    pub fn with_ell(mut self, ell: u8) -> Self {
        self.ell = ell;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.complex_omega = Some(omega);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidBasis(format!("n_max must be at least 2, got {}", self.n_max)));
        }
        for (name, v) in [("nu_first", self.nu_first), ("nu_last", self.nu_last)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidBasis(format!("{name} must be positive, got {v}")));
            }
        }
        if self.nu_first == self.nu_last {
            return Err(Error::InvalidBasis("nu_first and nu_last must differ".into()));
        }
        if self.ell > 1 {
            return Err(Error::InvalidBasis(format!("polynomial degree {} not supported (max 1)", self.ell)));
        }
        if let Some(w) = self.complex_omega {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidBasis(format!("complex omega must be positive, got {w}")));
            }
        }
        Ok(())
    }

    /// Number of radial functions per polynomial degree (doubled when complex-ranged).
    pub fn len(&self) -> usize {
        if self.complex_omega.is_some() {
            2 * self.n_max
        } else {
            self.n_max
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_max == 0
    }

    /// Normalized functions of degree `ell` built on this progression.
    pub fn functions(&self, ell: u8, dim: Dimension) -> Result<Vec<BasisFunction>> {
        self.validate()?;
        if ell > 1 {
            return Err(Error::InvalidBasis(format!("polynomial degree {ell} not supported")));
        }
        let ranges = geometric_ranges(self)?;
        let raw = match self.complex_omega {
            Some(w) => complex_double(&ranges, w, ell)?,
            None => ranges.iter().map(|&nu| BasisFunction::plain(nu, ell)).collect(),
        };
        raw.into_iter().map(|bf| bf.normalized(dim)).collect()
    }
}

/// `ν_n = ν_first (ν_last/ν_first)^((n-1)/(n_max-1))`, endpoints exact.
pub fn geometric_ranges(spec: &GaussBasisSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.n_max;
    let ratio = spec.nu_last / spec.nu_first;
    let mut out: Vec<f64> = (0..n)
        .map(|k| spec.nu_first * ratio.powf(k as f64 / (n - 1) as f64))
        .collect();
    out[0] = spec.nu_first;
    out[n - 1] = spec.nu_last;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Plain,
    Cosine,
    Sine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisFunction {
    /// Real range `ν`.
    pub range: f64,
    /// Oscillation parameter `ω` (0 for plain Gaussians).
    pub omega: f64,
    pub ell: u8,
    pub flavor: Flavor,
    /// Normalization constant; 1 until [`BasisFunction::normalized`] is applied.
    pub norm: f64,
}

impl BasisFunction {
    pub fn plain(range: f64, ell: u8) -> Self {
        Self { range, omega: 0.0, ell, flavor: Flavor::Plain, norm: 1.0 }
    }

    pub fn cosine(range: f64, omega: f64, ell: u8) -> Self {
        Self { range, omega, ell, flavor: Flavor::Cosine, norm: 1.0 }
    }

    pub fn sine(range: f64, omega: f64, ell: u8) -> Self {
        Self { range, omega, ell, flavor: Flavor::Sine, norm: 1.0 }
    }

    /// The complex Gaussian exponents `ν(1 ± iω)` this function is built from.
    pub fn complex_ranges(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.range, -self.range * self.omega),
            Complex64::new(self.range, self.range * self.omega),
        )
    }

    /// `(coefficient, exponent)` pairs: the function equals `Σ c r^l e^{-a r²}`.
    pub fn primitives(&self) -> Vec<(Complex64, Complex64)> {
        let n = self.norm;
        match self.flavor {
            Flavor::Plain => vec![(Complex64::new(n, 0.0), Complex64::new(self.range, 0.0))],
            Flavor::Cosine => {
                let (m, p) = self.complex_ranges();
                vec![(Complex64::new(0.5 * n, 0.0), m), (Complex64::new(0.5 * n, 0.0), p)]
            }
            Flavor::Sine => {
                let (m, p) = self.complex_ranges();
                vec![(Complex64::new(0.0, -0.5 * n), m), (Complex64::new(0.0, 0.5 * n), p)]
            }
        }
    }

    /// Real-space value at radius `r` (1D: coordinate `z`), without angular factor.
    pub fn eval(&self, r: f64) -> f64 {
        let x = self.range * r * r;
        let poly = if self.ell == 1 { r } else { 1.0 };
        let osc = match self.flavor {
            Flavor::Plain => 1.0,
            Flavor::Cosine => (self.omega * x).cos(),
            Flavor::Sine => (self.omega * x).sin(),
        };
        self.norm * poly * (-x).exp() * osc
    }

    pub fn normalized(mut self, dim: Dimension) -> Result<Self> {
        self.norm = 1.0;
        self.norm = normalization(&self, dim)?;
        Ok(self)
    }
}

/// `∫ (angular factor)² r^{2l} e^{-p r²}` over all space for `l ≤ 1`:
/// `(π/p)^{D/2} (2p)^{-l}`.
pub fn gauss_moment(dim: Dimension, ell: u8, p: Complex64) -> Complex64 {
    let root = (Complex64::new(std::f64::consts::PI, 0.0) / p).sqrt();
    let base = match dim {
        Dimension::One => root,
        Dimension::Three => root * root * root,
    };
    match ell {
        0 => base,
        _ => base / (2.0 * p),
    }
}

/// Each real range yields a cosine- and a sine-flavored member.
pub fn complex_double(ranges: &[f64], omega: f64, ell: u8) -> Result<Vec<BasisFunction>> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::InvalidBasis(format!("complex omega must be positive, got {omega}")));
    }
    Ok(ranges
        .iter()
        .flat_map(|&nu| [BasisFunction::cosine(nu, omega, ell), BasisFunction::sine(nu, omega, ell)])
        .collect())
}

/// Constant making the self-overlap of `bf` equal to one.
pub fn normalization(bf: &BasisFunction, dim: Dimension) -> Result<f64> {
    if !(bf.range > 0.0) || !bf.range.is_finite() {
        return Err(Error::Domain(format!("Gaussian range must have positive real part, got {}", bf.range)));
    }
    let unit = BasisFunction { norm: 1.0, ..*bf };
    let prims = unit.primitives();
    let mut self_overlap = Complex64::new(0.0, 0.0);
    for &(ci, ai) in &prims {
        for &(cj, aj) in &prims {
            self_overlap += ci * cj * gauss_moment(dim, bf.ell, ai + aj);
        }
    }
    // the function is real, so the bilinear self-overlap is real and positive
    if !(self_overlap.re > 0.0) {
        return Err(Error::Domain(format!("non-normalizable basis function {bf:?}")));
    }
    Ok(1.0 / self_overlap.re.sqrt())
}
