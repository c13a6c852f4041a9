//! Dimensionless units, masses and energy/lifetime conversions.
//!
//! Everything inside the solver works in the *prime* scaling: lengths in units
//! of the interaction range `r0`, masses in units of `2 μ_bx` (so the BX reduced
//! mass is exactly 1/2), energies in units of a characteristic energy `E_char`.
//!
//! `E_char` depends on the spatial dimension:
//!
//! | dimension | `E_char`              | rescaled two-body kinetic operator |
//! |-----------|-----------------------|------------------------------------|
//! | 3D        | `ħ² / (2 μ_bx r0²)`   | `-∇²`                              |
//! | 1D        | `ħ² / (μ_bx r0²)`     | `-½ d²/dz²`                        |
//!
//! The 1D unit is the one under which the reference depth `v0' = -5.44` puts the
//! first excited even dimer level at `-0.1` and the odd level near `-1.5`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atomic unit of time in seconds (ħ / E_h).
pub const ATOMIC_TIME_SECONDS: f64 = 2.418_884_326_585_7e-17;

/// Unified atomic mass unit in electron masses.
pub const AMU_IN_ELECTRON_MASSES: f64 = 1_822.888_486_209;

/// Spatial dimension of the configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimension {
    #[serde(rename = "1d", alias = "1D")]
    One,
    #[serde(rename = "3d", alias = "3D")]
    Three,
}

impl Dimension {
    pub fn spatial(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Three => 3,
        }
    }

    /// Prefactor of `-∇²/(2μ')` relative to the 3D convention (see module docs).
    pub fn kinetic_scale(self) -> f64 {
        match self {
            Dimension::One => 0.5,
            Dimension::Three => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Dimension::One => "1D",
            Dimension::Three => "3D",
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "1d" => Ok(Dimension::One),
            "3" | "3d" => Ok(Dimension::Three),
            other => Err(Error::Config(format!("unknown dimension {other:?}"))),
        }
    }
}

/// Particle labels: the distinct particle X is particle 1, the bosons are 2 and 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Particle {
    X,
    B2,
    B3,
}

impl Particle {
    pub const ALL: [Particle; 3] = [Particle::X, Particle::B2, Particle::B3];

    pub fn index(self) -> usize {
        match self {
            Particle::X => 0,
            Particle::B2 => 1,
            Particle::B3 => 2,
        }
    }
}

/// Masses of the B + B + X system in prime units for a given mass ratio `β = m_b / m_x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassConfig {
    beta: f64,
    m_x: f64,
    m_b: f64,
}

impl MassConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Domain(format!("mass ratio must be positive and finite, got {beta}")));
        }
        // m' = m / (2 μ_bx) with μ_bx = m_x β / (1 + β)
        Ok(Self {
            beta,
            m_x: (1.0 + beta) / (2.0 * beta),
            m_b: (1.0 + beta) / 2.0,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn m_x_prime(&self) -> f64 {
        self.m_x
    }

    pub fn m_b_prime(&self) -> f64 {
        self.m_b
    }

    pub fn mass(&self, p: Particle) -> f64 {
        match p {
            Particle::X => self.m_x,
            Particle::B2 | Particle::B3 => self.m_b,
        }
    }

    pub fn masses(&self) -> [f64; 3] {
        [self.m_x, self.m_b, self.m_b]
    }

    pub fn total_mass(&self) -> f64 {
        self.m_x + 2.0 * self.m_b
    }

    /// BX reduced mass; 1/2 by construction of the prime scaling.
    pub fn mu_pair_prime(&self) -> f64 {
        self.mu_of_pair(Particle::X, Particle::B2)
    }

    pub fn mu_of_pair(&self, i: Particle, j: Particle) -> f64 {
        let (mi, mj) = (self.mass(i), self.mass(j));
        mi * mj / (mi + mj)
    }

    /// Reduced mass of particle `k` against the centre of mass of the other two.
    pub fn mu_third_prime(&self, k: Particle) -> f64 {
        let mk = self.mass(k);
        let rest = self.total_mass() - mk;
        mk * rest / (mk + rest)
    }

    /// Ratio `m_x / μ_bx = (1 + β) / β`.
    pub fn mx_over_mu_pair(&self) -> f64 {
        self.m_x / self.mu_pair_prime()
    }
}

/// A complex eigenenergy `E = E_r - iΓ/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub e_r: f64,
    pub gamma: f64,
}

impl ComplexEnergy {
    pub fn new(e_r: f64, gamma: f64) -> Self {
        Self { e_r, gamma }
    }

    /// Maps an eigenvalue from below the real axis onto a positive width.
    pub fn from_eigenvalue(z: Complex64) -> Self {
        Self { e_r: z.re, gamma: -2.0 * z.im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.e_r, -0.5 * self.gamma)
    }

    pub fn is_finite(&self) -> bool {
        self.e_r.is_finite() && self.gamma.is_finite()
    }

    fn scaled(self, f: f64) -> Self {
        Self { e_r: self.e_r * f, gamma: self.gamma * f }
    }
}

/// Unit system an energy is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScalingKind {
    /// Units of `E_char` (reduced-mass scaling).
    Prime,
    /// Units of `ħ² / (m_x r0²)`, related to prime by `Ẽ = 2 (m_x/μ_bx) E'`.
    Tilde,
    /// Hartree, given the interaction range in Bohr radii and `m_x` in electron masses.
    Physical {
        r0_bohr: f64,
        m_x_electron: f64,
        dimension: Dimension,
    },
}

impl ScalingKind {
    /// Factor `f` such that `E_kind = f · E'`.
    fn factor_from_prime(&self, cfg: &MassConfig) -> Result<f64> {
        match *self {
            ScalingKind::Prime => Ok(1.0),
            ScalingKind::Tilde => Ok(2.0 * cfg.mx_over_mu_pair()),
            ScalingKind::Physical { r0_bohr, m_x_electron, dimension } => {
                if !(r0_bohr > 0.0 && m_x_electron > 0.0) || !r0_bohr.is_finite() || !m_x_electron.is_finite() {
                    return Err(Error::Domain("physical scaling needs positive finite r0 and m_x".into()));
                }
                Ok(characteristic_energy_hartree(cfg, r0_bohr, m_x_electron, dimension))
            }
        }
    }
}

/// `E_char` in Hartree for the given physical length and mass scales.
pub fn characteristic_energy_hartree(cfg: &MassConfig, r0_bohr: f64, m_x_electron: f64, dim: Dimension) -> f64 {
    let mu_bx = m_x_electron * cfg.beta() / (1.0 + cfg.beta());
    1.0 / (2.0 * dim.kinetic_scale() * mu_bx * r0_bohr * r0_bohr)
}

pub fn convert_energy(e: ComplexEnergy, from: ScalingKind, to: ScalingKind, cfg: &MassConfig) -> Result<ComplexEnergy> {
    if !e.is_finite() {
        return Err(Error::Domain("cannot convert a non-finite energy".into()));
    }
    if from == to {
        return Ok(e);
    }
    let f_from = from.factor_from_prime(cfg)?;
    let f_to = to.factor_from_prime(cfg)?;
    Ok(e.scaled(f_to / f_from))
}

/// Resonance lifetime in units of `ħ / E_char`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lifetime {
    Finite(f64),
    Infinite,
}

impl Lifetime {
    pub fn value(&self) -> Option<f64> {
        match self {
            Lifetime::Finite(t) => Some(*t),
            Lifetime::Infinite => None,
        }
    }

    /// Token used in CSV/JSON output; infinity is never written as a float.
    pub fn token(&self) -> String {
        match self {
            Lifetime::Finite(t) => crate::scan::format_float(*t),
            Lifetime::Infinite => "inf".to_string(),
        }
    }

    pub fn parse_token(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" => Ok(Lifetime::Infinite),
            other => other
                .parse::<f64>()
                .map(Lifetime::Finite)
                .map_err(|e| Error::Config(format!("bad lifetime token {other:?}: {e}"))),
        }
    }

    /// Lifetime in seconds for a physical system.
    pub fn seconds(&self, cfg: &MassConfig, r0_bohr: f64, m_x_electron: f64, dim: Dimension) -> Option<f64> {
        let e_char = characteristic_energy_hartree(cfg, r0_bohr, m_x_electron, dim);
        self.value().map(|t| t / e_char * ATOMIC_TIME_SECONDS)
    }
}

impl Serialize for Lifetime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Lifetime::Finite(t) => s.serialize_f64(*t),
            Lifetime::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Lifetime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tok(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(t) => Ok(Lifetime::Finite(t)),
            Repr::Tok(s) => Lifetime::parse_token(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// `τ' = 1/Γ'`; a vanishing width is an infinite lifetime.
pub fn width_to_lifetime(gamma_prime: f64) -> Result<Lifetime> {
    if !gamma_prime.is_finite() || gamma_prime < 0.0 {
        return Err(Error::Domain(format!("width must be finite and non-negative, got {gamma_prime}")));
    }
    if gamma_prime == 0.0 {
        return Ok(Lifetime::Infinite);
    }
    Ok(Lifetime::Finite(1.0 / gamma_prime))
}
