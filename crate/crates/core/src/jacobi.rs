//! Jacobi coordinate sets and the linear maps between them.
//!
//! Sign conventions (particle 1 = X, particles 2, 3 = B):
//!
//! | set | (i, j, k) | pair coordinate `r_c` | spectator coordinate `R_c`           |
//! |-----|-----------|-----------------------|--------------------------------------|
//! | 1   | (2, 3, 1) | `r_23 = r_3 - r_2`    | `r_1 - (m_2 r_2 + m_3 r_3)/(m_2+m_3)` |
//! | 2   | (3, 1, 2) | `r_31 = r_1 - r_3`    | `r_2 - (m_3 r_3 + m_1 r_1)/(m_3+m_1)` |
//! | 3   | (1, 2, 3) | `r_12 = r_2 - r_1`    | `r_3 - (m_1 r_1 + m_2 r_2)/(m_1+m_2)` |
//!
//! The same 2×2 matrix acts on every Cartesian component.

use serde::{Deserialize, Serialize};

use crate::units::{MassConfig, Particle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JacobiSet {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

impl JacobiSet {
    /// Cyclic `(i, j, k)`: the pair is `(i, j)`, the spectator `k`.
    pub fn particles(self) -> (Particle, Particle, Particle) {
        match self {
            JacobiSet::One => (Particle::B2, Particle::B3, Particle::X),
            JacobiSet::Two => (Particle::B3, Particle::X, Particle::B2),
            JacobiSet::Three => (Particle::X, Particle::B2, Particle::B3),
        }
    }

    pub fn index(self) -> usize {
        match self {
            JacobiSet::One => 1,
            JacobiSet::Two => 2,
            JacobiSet::Three => 3,
        }
    }

    pub fn from_index(c: usize) -> Option<Self> {
        match c {
            1 => Some(JacobiSet::One),
            2 => Some(JacobiSet::Two),
            3 => Some(JacobiSet::Three),
            _ => None,
        }
    }

    /// Set obtained by swapping the boson labels 2 ↔ 3.
    pub fn exchanged(self) -> Self {
        match self {
            JacobiSet::One => JacobiSet::One,
            JacobiSet::Two => JacobiSet::Three,
            JacobiSet::Three => JacobiSet::Two,
        }
    }

    /// Rows `(r_c, R_c)` as linear combinations of absolute positions.
    pub fn absolute_rows(self, cfg: &MassConfig) -> [[f64; 3]; 2] {
        let (i, j, k) = self.particles();
        let (mi, mj) = (cfg.mass(i), cfg.mass(j));
        let mut rows = [[0.0; 3]; 2];
        rows[0][j.index()] += 1.0;
        rows[0][i.index()] -= 1.0;
        rows[1][k.index()] += 1.0;
        rows[1][i.index()] -= mi / (mi + mj);
        rows[1][j.index()] -= mj / (mi + mj);
        rows
    }

    /// Evaluates `(r_c, R_c)` for absolute positions (one Cartesian component).
    pub fn coordinates(self, cfg: &MassConfig, positions: [f64; 3]) -> [f64; 2] {
        let rows = self.absolute_rows(cfg);
        [0, 1].map(|a| (0..3).map(|p| rows[a][p] * positions[p]).sum())
    }

    /// Reduced masses `(μ_ij, μ_k)` attached to `(r_c, R_c)`.
    pub fn reduced_masses(self, cfg: &MassConfig) -> [f64; 2] {
        let (i, j, k) = self.particles();
        [cfg.mu_of_pair(i, j), cfg.mu_third_prime(k)]
    }
}

/// `(r', R')ᵀ = M (r, R)ᵀ`, applied per Cartesian component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiTransform {
    pub m: [[f64; 2]; 2],
}

impl JacobiTransform {
    pub const IDENTITY: Self = Self { m: [[1.0, 0.0], [0.0, 1.0]] };

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * x[0] + self.m[0][1] * x[1],
            self.m[1][0] * x[0] + self.m[1][1] * x[1],
        ]
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &JacobiTransform) -> JacobiTransform {
        let a = &self.m;
        let b = &first.m;
        let mut m = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        JacobiTransform { m }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> JacobiTransform {
        let d = self.det();
        JacobiTransform {
            m: [[self.m[1][1] / d, -self.m[0][1] / d], [-self.m[1][0] / d, self.m[0][0] / d]],
        }
    }

    /// Row giving the pair coordinate of the target set.
    pub fn pair_row(&self) -> [f64; 2] {
        self.m[0]
    }

    pub fn max_abs_diff(&self, other: &JacobiTransform) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).abs());
            }
        }
        d
    }
}

/// Exact linear map from set `from` to set `to`.
pub fn transform(from: JacobiSet, to: JacobiSet, cfg: &MassConfig) -> JacobiTransform {
    if from == to {
        return JacobiTransform::IDENTITY;
    }
    // Invert the `from` rows augmented with the centre of mass; the `to` rows annihilate
    // uniform translations, so only the first two columns of the inverse matter.
    let rows = from.absolute_rows(cfg);
    let total = cfg.total_mass();
    let com = cfg.masses().map(|m| m / total);
    let aug = [rows[0], rows[1], com];
    let inv = invert3(aug);
    let target = to.absolute_rows(cfg);
    let mut m = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] = (0..3).map(|p| target[r][p] * inv[p][c]).sum();
        }
    }
    JacobiTransform { m }
}

/// Action of the boson exchange `P₂₃` on the coordinates of `set`: the coordinates of the
/// configuration with particles 2 and 3 swapped.
pub fn exchange(set: JacobiSet, cfg: &MassConfig) -> JacobiTransform {
    // Swapping labels turns set c into set P(c) with the pair coordinate reversed when the
    // pair contains a boson: r_31 -> r_21 = -r_12, r_12 -> r_13 = -r_31, r_23 -> r_32 = -r_23.
    let relabel = transform(set, set.exchanged(), cfg);
    JacobiTransform {
        m: [[-relabel.m[0][0], -relabel.m[0][1]], [relabel.m[1][0], relabel.m[1][1]]],
    }
}

/// `P₂₃` on set-2 coordinates.
pub fn exchange_p23(cfg: &MassConfig) -> JacobiTransform {
    exchange(JacobiSet::Two, cfg)
}

fn invert3(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            // cofactor of (c, r)
            let (r1, r2) = match c {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (c1, c2) = match r {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let minor = a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1];
            let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
            inv[r][c] = sign * minor / det;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const SETS: [JacobiSet; 3] = [JacobiSet::One, JacobiSet::Two, JacobiSet::Three];

    #[test]
    fn identity_for_same_set() {
        let cfg = MassConfig::new(3.0).unwrap();
        assert_eq!(transform(JacobiSet::Two, JacobiSet::Two, &cfg), JacobiTransform::IDENTITY);
    }

    #[test]
    fn equal_mass_two_to_three() {
        // r_1 = 0: x = -r_3, X = r_2 - r_3/2  =>  y = r_2 = X - x/2,  Y = r_3 - r_2/2 = -3x/4 - X/2
        let cfg = MassConfig::new(1.0).unwrap();
        let t = transform(JacobiSet::Two, JacobiSet::Three, &cfg);
        let expect = JacobiTransform { m: [[-0.5, 1.0], [-0.75, -0.5]] };
        assert!(t.max_abs_diff(&expect) < 1e-15, "{t:?}");
    }

    #[test]
    fn exchange_is_involution_and_matches_set_three() {
        for beta in [0.05, 1.0, 7.3, 20.0] {
            let cfg = MassConfig::new(beta).unwrap();
            let p = exchange_p23(&cfg);
            assert!(p.after(&p).max_abs_diff(&JacobiTransform::IDENTITY) < 1e-14);
            // the image of set-2 coordinates under P is (-r_12, R_3)
            let t = transform(JacobiSet::Two, JacobiSet::Three, &cfg);
            assert_abs_diff_eq!(p.m[0][0], -t.m[0][0], epsilon = 1e-15);
            assert_abs_diff_eq!(p.m[1][1], t.m[1][1], epsilon = 1e-15);
        }
    }

    #[test]
    fn exchange_preserves_boson_distance() {
        let cfg = MassConfig::new(2.5).unwrap();
        let pos = [0.3, -1.1, 2.4];
        let x = JacobiSet::Two.coordinates(&cfg, pos);
        let swapped = [pos[0], pos[2], pos[1]];
        let y = exchange_p23(&cfg).apply(x);
        let direct = JacobiSet::Two.coordinates(&cfg, swapped);
        assert_abs_diff_eq!(y[0], direct[0], epsilon = 1e-14);
        assert_abs_diff_eq!(y[1], direct[1], epsilon = 1e-14);
        let to1 = transform(JacobiSet::Two, JacobiSet::One, &cfg);
        let r23 = to1.apply(x)[0].abs();
        let r23_after = to1.apply(y)[0].abs();
        assert_abs_diff_eq!(r23, r23_after, epsilon = 1e-14);
        assert_abs_diff_eq!(r23, (pos[2] - pos[1]).abs(), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn transforms_match_direct_evaluation(beta in 0.01f64..100.0,
                                              p in prop::array::uniform3(-5.0f64..5.0)) {
            let cfg = MassConfig::new(beta).unwrap();
            for from in SETS {
                for to in SETS {
                    let t = transform(from, to, &cfg);
                    let got = t.apply(from.coordinates(&cfg, p));
                    let want = to.coordinates(&cfg, p);
                    prop_assert!((got[0] - want[0]).abs() < 1e-12);
                    prop_assert!((got[1] - want[1]).abs() < 1e-12);
                    let back = transform(to, from, &cfg).after(&t);
                    prop_assert!(back.max_abs_diff(&JacobiTransform::IDENTITY) < 1e-13);
                }
            }
        }

        #[test]
        fn volume_element_is_unimodular(beta in 0.01f64..100.0) {
            // mass-weighted Jacobi maps all have |det| = 1 between sets
            let cfg = MassConfig::new(beta).unwrap();
            for from in SETS {
                for to in SETS {
                    prop_assert!((transform(from, to, &cfg).det().abs() - 1.0).abs() < 1e-13);
                }
            }
        }

        #[test]
        fn kinetic_form_invariant(beta in 0.01f64..100.0, g in prop::array::uniform2(-3.0f64..3.0)) {
            // momenta transform contragrediently: p_from = Mᵀ p_to
            let cfg = MassConfig::new(beta).unwrap();
            for from in SETS {
                for to in SETS {
                    let t = transform(from, to, &cfg);
                    let p_to = g;
                    let p_from = [
                        t.m[0][0] * p_to[0] + t.m[1][0] * p_to[1],
                        t.m[0][1] * p_to[0] + t.m[1][1] * p_to[1],
                    ];
                    let mf = from.reduced_masses(&cfg);
                    let mt = to.reduced_masses(&cfg);
                    let ef = p_from[0].powi(2) / (2.0 * mf[0]) + p_from[1].powi(2) / (2.0 * mf[1]);
                    let et = p_to[0].powi(2) / (2.0 * mt[0]) + p_to[1].powi(2) / (2.0 * mt[1]);
                    prop_assert!((ef - et).abs() <= 1e-10 * et.abs().max(1e-12));
                }
            }
        }
    }
}
