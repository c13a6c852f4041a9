//! Closed-form integrals of polynomial × Gaussian functions of two Jacobi coordinates.
//!
//! Every integrand met in the assembly is `P(z, Z) exp(-xᵀ A x)` with `x = (z, Z)` one
//! Cartesian component of `(r, R)`, `A` complex symmetric with positive definite real part
//! and `P` a polynomial of low degree. Its integral over the plane is
//!
//! ```text
//! π / sqrt(det A) · Σ c_pq E[z^p Z^q],    E[x xᵀ] = A⁻¹ / 2
//! ```
//!
//! with the higher moments from Isserlis' recursion. 3D s-wave integrals are products over
//! the three Cartesian components.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jacobi::JacobiTransform;
use crate::units::Dimension;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Largest total polynomial degree handled (gradient × gradient with `l = L = 1`).
pub const MAX_DEGREE: usize = 6;
const N: usize = MAX_DEGREE + 1;

/// Largest complex-scaling angle for which the scaled Gaussian potential stays decaying.
pub const ANALYTICITY_BOUND: f64 = std::f64::consts::FRAC_PI_4;

/// Complex symmetric 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    pub a: C,
    pub b: C,
    pub d: C,
}

impl Sym2 {
    pub fn diag(a: C, d: C) -> Self {
        Self { a, b: ZERO, d }
    }

    pub fn add(&self, o: &Sym2) -> Sym2 {
        Sym2 { a: self.a + o.a, b: self.b + o.b, d: self.d + o.d }
    }

    /// `Mᵀ self M` for a real map `M`.
    pub fn congruence(&self, m: &JacobiTransform) -> Sym2 {
        let m = &m.m;
        let (m00, m01, m10, m11) = (m[0][0], m[0][1], m[1][0], m[1][1]);
        Sym2 {
            a: self.a * (m00 * m00) + self.b * (2.0 * m00 * m10) + self.d * (m10 * m10),
            b: self.a * (m00 * m01) + self.b * (m00 * m11 + m01 * m10) + self.d * (m10 * m11),
            d: self.a * (m01 * m01) + self.b * (2.0 * m01 * m11) + self.d * (m11 * m11),
        }
    }

    /// `γ w wᵀ`
    pub fn rank_one(w: [f64; 2], gamma: C) -> Sym2 {
        Sym2 { a: gamma * (w[0] * w[0]), b: gamma * (w[0] * w[1]), d: gamma * (w[1] * w[1]) }
    }

    pub fn det(&self) -> C {
        self.a * self.d - self.b * self.b
    }

    pub fn real_part_positive_definite(&self) -> bool {
        self.a.re > 0.0 && self.a.re * self.d.re - self.b.re * self.b.re > 0.0
    }
}

/// Dense bivariate polynomial `Σ c[p][q] z^p Z^q` of total degree ≤ `MAX_DEGREE`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly2 {
    c: [[C; N]; N],
    deg: usize,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self { c: [[ZERO; N]; N], deg: 0 }
    }

    pub fn constant(v: C) -> Self {
        let mut p = Self::zero();
        p.c[0][0] = v;
        p
    }

    /// `u0 z + u1 Z`
    pub fn linear(u0: C, u1: C) -> Self {
        let mut p = Self::zero();
        p.c[1][0] = u0;
        p.c[0][1] = u1;
        p.deg = 1;
        p
    }

    pub fn monomial(pz: usize, pzz: usize, v: C) -> Self {
        let mut p = Self::zero();
        p.c[pz][pzz] = v;
        p.deg = pz + pzz;
        p
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    pub fn coeff(&self, p: usize, q: usize) -> C {
        self.c[p][q]
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let deg = self.deg + o.deg;
        assert!(deg <= MAX_DEGREE, "polynomial degree {deg} exceeds {MAX_DEGREE}");
        let mut out = Poly2::zero();
        out.deg = deg;
        for p1 in 0..=self.deg {
            for q1 in 0..=(self.deg - p1) {
                let a = self.c[p1][q1];
                if a == ZERO {
                    continue;
                }
                for p2 in 0..=o.deg {
                    for q2 in 0..=(o.deg - p2) {
                        let b = o.c[p2][q2];
                        if b != ZERO {
                            out.c[p1 + p2][q1 + q2] += a * b;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let mut out = *self;
        out.deg = self.deg.max(o.deg);
        for p in 0..=o.deg {
            for q in 0..=(o.deg - p) {
                out.c[p][q] += o.c[p][q];
            }
        }
        out
    }

    pub fn scale(&self, s: C) -> Poly2 {
        let mut out = *self;
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Partial derivative along coordinate `k` (0 = z, 1 = Z).
    pub fn derivative(&self, k: usize) -> Poly2 {
        let mut out = Poly2::zero();
        out.deg = self.deg.saturating_sub(1);
        for p in 0..=self.deg {
            for q in 0..=(self.deg - p) {
                let v = self.c[p][q];
                if v == ZERO {
                    continue;
                }
                if k == 0 && p > 0 {
                    out.c[p - 1][q] += v * p as f64;
                } else if k == 1 && q > 0 {
                    out.c[p][q - 1] += v * q as f64;
                }
            }
        }
        out
    }

    /// `P(M x)` for a real linear map.
    pub fn compose(&self, m: &JacobiTransform) -> Poly2 {
        let lz = Poly2::linear(C::from(m.m[0][0]), C::from(m.m[0][1]));
        let lzz = Poly2::linear(C::from(m.m[1][0]), C::from(m.m[1][1]));
        let mut out = Poly2::zero();
        for p in 0..=self.deg {
            for q in 0..=(self.deg - p) {
                let v = self.c[p][q];
                if v == ZERO {
                    continue;
                }
                let mut term = Poly2::constant(v);
                for _ in 0..p {
                    term = term.mul(&lz);
                }
                for _ in 0..q {
                    term = term.mul(&lzz);
                }
                out = out.add(&term);
            }
        }
        out
    }

    pub fn eval(&self, z: C, zz: C) -> C {
        let mut s = ZERO;
        for p in 0..=self.deg {
            for q in 0..=(self.deg - p) {
                let v = self.c[p][q];
                if v != ZERO {
                    s += v * z.powu(p as u32) * zz.powu(q as u32);
                }
            }
        }
        s
    }
}

/// `P(x) exp(-xᵀ Q x)` for one Cartesian component.
#[derive(Clone, Copy, Debug)]
pub struct GaussTerm {
    pub poly: Poly2,
    pub quad: Sym2,
}

impl GaussTerm {
    /// `∂_k` of the term, same Gaussian: `(∂_k P - 2 (Q x)_k P) e^{-xᵀQx}`.
    pub fn gradient(&self, k: usize) -> Poly2 {
        let q = &self.quad;
        let row = if k == 0 { Poly2::linear(q.a, q.b) } else { Poly2::linear(q.b, q.d) };
        self.poly.derivative(k).add(&row.mul(&self.poly).scale(C::from(-2.0)))
    }

    pub fn eval(&self, z: f64, zz: f64) -> C {
        let (z, zz) = (C::from(z), C::from(zz));
        let e = self.quad.a * z * z + self.quad.b * 2.0 * z * zz + self.quad.d * zz * zz;
        self.poly.eval(z, zz) * (-e).exp()
    }
}

/// Primitive `z^l Z^L exp(-a z² - b Z²)` in its own Jacobi set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub l: u8,
    pub big_l: u8,
    pub a: C,
    pub b: C,
}

impl Primitive {
    pub fn new(l: u8, big_l: u8, a: C, b: C) -> Self {
        Self { l, big_l, a, b }
    }

    /// The primitive expressed in coordinates `x` of another set, where its own
    /// coordinates are `M x`.
    pub fn term(&self, map: &JacobiTransform) -> GaussTerm {
        let own = Poly2::monomial(self.l as usize, self.big_l as usize, ONE);
        GaussTerm { poly: own.compose(map), quad: Sym2::diag(self.a, self.b).congruence(map) }
    }
}

/// Gaussian moments `E[z^p Z^q]` for total degree ≤ `deg` and the plane integral prefactor.
#[derive(Clone, Copy, Debug)]
pub struct Moments {
    pub prefactor: C,
    m: [[C; N]; N],
}

impl Moments {
    pub fn new(a: &Sym2, deg: usize) -> Result<Self> {
        if !a.real_part_positive_definite() {
            return Err(Error::Assembly(format!("Gaussian quadratic form lost positive definiteness: {a:?}")));
        }
        let det = a.det();
        let prefactor = C::from(std::f64::consts::PI) / det.sqrt();
        // Σ = A⁻¹ / 2
        let s00 = a.d / (2.0 * det);
        let s01 = -a.b / (2.0 * det);
        let s11 = a.a / (2.0 * det);
        let mut m = [[ZERO; N]; N];
        m[0][0] = ONE;
        for total in 1..=deg {
            for p in 0..=total {
                let q = total - p;
                m[p][q] = if p > 0 {
                    let mut v = ZERO;
                    if p >= 2 {
                        v += s00 * (p - 1) as f64 * m[p - 2][q];
                    }
                    if q >= 1 {
                        v += s01 * q as f64 * m[p - 1][q - 1];
                    }
                    v
                } else if q >= 2 {
                    s11 * (q - 1) as f64 * m[0][q - 2]
                } else {
                    ZERO
                };
            }
        }
        Ok(Self { prefactor, m })
    }

    pub fn moment(&self, p: usize, q: usize) -> C {
        self.m[p][q]
    }

    /// `∫ P(x) exp(-xᵀ A x) dx`
    pub fn integrate(&self, poly: &Poly2) -> C {
        self.prefactor * self.expect(poly)
    }

    fn expect(&self, poly: &Poly2) -> C {
        let mut s = ZERO;
        for p in 0..=poly.deg {
            for q in 0..=(poly.deg - p) {
                let v = poly.c[p][q];
                if v != ZERO {
                    s += v * self.m[p][q];
                }
            }
        }
        s
    }

    /// `∫ P1 P2 exp(-xᵀAx)` without forming the product polynomial.
    pub fn integrate_product(&self, p1: &Poly2, p2: &Poly2) -> C {
        let mut s = ZERO;
        for a in 0..=p1.deg {
            for b in 0..=(p1.deg - a) {
                let u = p1.c[a][b];
                if u == ZERO {
                    continue;
                }
                let mut inner = ZERO;
                for c in 0..=p2.deg {
                    for d in 0..=(p2.deg - c) {
                        let v = p2.c[c][d];
                        if v != ZERO {
                            inner += v * self.m[a + c][b + d];
                        }
                    }
                }
                s += u * inner;
            }
        }
        self.prefactor * s
    }
}

/// A term with its gradient polynomials precomputed.
#[derive(Clone, Copy, Debug)]
pub struct PreparedTerm {
    pub term: GaussTerm,
    pub grad: [Poly2; 2],
}

impl PreparedTerm {
    pub fn new(term: GaussTerm) -> Self {
        Self { term, grad: [term.gradient(0), term.gradient(1)] }
    }
}

/// One-component integrals between two prepared terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentIntegrals {
    pub overlap: C,
    /// `∫ ∂_z f ∂_z g` and `∫ ∂_Z f ∂_Z g`
    pub gradient: [C; 2],
}

pub fn component_integrals(bra: &PreparedTerm, ket: &PreparedTerm) -> Result<ComponentIntegrals> {
    let a = bra.term.quad.add(&ket.term.quad);
    let deg = (bra.grad[0].deg + ket.grad[0].deg)
        .max(bra.grad[1].deg + ket.grad[1].deg)
        .max(bra.term.poly.deg + ket.term.poly.deg);
    let mo = Moments::new(&a, deg)?;
    Ok(ComponentIntegrals {
        overlap: mo.integrate_product(&bra.term.poly, &ket.term.poly),
        gradient: [
            mo.integrate_product(&bra.grad[0], &ket.grad[0]),
            mo.integrate_product(&bra.grad[1], &ket.grad[1]),
        ],
    })
}

/// `∫ f exp(-γ (w·x)²) g` for one component.
pub fn component_gaussian(bra: &PreparedTerm, ket: &PreparedTerm, w: [f64; 2], gamma: C) -> Result<C> {
    let a = bra.term.quad.add(&ket.term.quad).add(&Sym2::rank_one(w, gamma));
    let mo = Moments::new(&a, bra.term.poly.deg + ket.term.poly.deg)?;
    Ok(mo.integrate_product(&bra.term.poly, &ket.term.poly))
}

/// Matrix-element kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    Overlap,
    /// `Σ_k c_k ∫ ∇_k f · ∇_k g`, i.e. `⟨f| -Σ c_k ∇_k² |g⟩`, times `e^{-2iθ}`.
    Kinetic { coeffs: [f64; 2] },
    /// Unit-depth Gaussian in the pair distance `|w · (r, R)|`, complex scaled.
    GaussianPair { row: [f64; 2] },
}

/// Integral between a bra primitive in the working set and a ket primitive whose own
/// coordinates are `ket_map` applied to the working-set coordinates.
pub fn rearranged_gauss_integral(
    bra: &Primitive,
    ket: &Primitive,
    kernel: &Kernel,
    ket_map: &JacobiTransform,
    theta: f64,
    dim: Dimension,
) -> Result<C> {
    check_theta(theta)?;
    if dim == Dimension::Three && (bra.l | bra.big_l | ket.l | ket.big_l) != 0 {
        return Err(Error::InvalidBasis("3D integrals are implemented for s-waves only".into()));
    }
    let b = PreparedTerm::new(bra.term(&JacobiTransform::IDENTITY));
    let k = PreparedTerm::new(ket.term(ket_map));
    let d = dim.spatial() as i32;
    match *kernel {
        Kernel::Overlap => Ok(component_integrals(&b, &k)?.overlap.powi(d)),
        Kernel::Kinetic { coeffs } => {
            let ci = component_integrals(&b, &k)?;
            let g = ci.gradient[0] * coeffs[0] + ci.gradient[1] * coeffs[1];
            let per = g * (d as f64) * ci.overlap.powi(d - 1);
            Ok(per * C::from_polar(1.0, -2.0 * theta))
        }
        Kernel::GaussianPair { row } => {
            let gamma = C::from_polar(1.0, 2.0 * theta);
            Ok(component_gaussian(&b, &k, row, gamma)?.powi(d))
        }
    }
}

pub fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || !(0.0..ANALYTICITY_BOUND).contains(&theta) {
        return Err(Error::Analyticity { theta, bound: ANALYTICITY_BOUND });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_overlap_of_normalized_primitive() {
        // (2a/π)^{1/2} (2b/π)^{1/2} ∫ e^{-2a z² - 2b Z²} = 1
        let (a, b) = (0.8, 2.5);
        let p = Primitive::new(0, 0, C::from(a), C::from(b));
        let v = rearranged_gauss_integral(&p, &p, &Kernel::Overlap, &JacobiTransform::IDENTITY, 0.0, Dimension::One)
            .unwrap();
        let n2 = (2.0 * a / std::f64::consts::PI).sqrt() * (2.0 * b / std::f64::consts::PI).sqrt();
        assert_relative_eq!(v.re * n2, 1.0, max_relative = 1e-14);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn moments_match_isserlis() {
        let a = Sym2 { a: C::from(1.3), b: C::from(0.4), d: C::from(0.9) };
        let mo = Moments::new(&a, 4).unwrap();
        let det = a.det();
        let s00 = a.d / (2.0 * det);
        let s01 = -a.b / (2.0 * det);
        let s11 = a.a / (2.0 * det);
        assert_relative_eq!(mo.moment(2, 0).re, s00.re, max_relative = 1e-14);
        assert_relative_eq!(mo.moment(4, 0).re, 3.0 * (s00 * s00).re, max_relative = 1e-14);
        assert_relative_eq!(mo.moment(2, 2).re, (s00 * s11 + 2.0 * s01 * s01).re, max_relative = 1e-14);
        assert_relative_eq!(mo.moment(3, 1).re, (3.0 * s00 * s01).re, max_relative = 1e-14);
        assert_eq!(mo.moment(1, 0), ZERO);
    }

    #[test]
    fn kinetic_of_normalized_s_gaussian() {
        // ⟨-∇²⟩ = 3ν in 3D for one coordinate with unit coefficient
        let nu = 1.7;
        let p = Primitive::new(0, 0, C::from(nu), C::from(5.0));
        let t = rearranged_gauss_integral(
            &p,
            &p,
            &Kernel::Kinetic { coeffs: [1.0, 0.0] },
            &JacobiTransform::IDENTITY,
            0.0,
            Dimension::Three,
        )
        .unwrap();
        let s = rearranged_gauss_integral(&p, &p, &Kernel::Overlap, &JacobiTransform::IDENTITY, 0.0, Dimension::Three)
            .unwrap();
        assert_relative_eq!((t / s).re, 3.0 * nu, max_relative = 1e-13);
    }

    #[test]
    fn theta_outside_bound_rejected() {
        let p = Primitive::new(0, 0, C::from(1.0), C::from(1.0));
        let k = Kernel::Overlap;
        assert!(matches!(
            rearranged_gauss_integral(&p, &p, &k, &JacobiTransform::IDENTITY, 0.8, Dimension::One),
            Err(Error::Analyticity { .. })
        ));
        assert!(rearranged_gauss_integral(&p, &p, &k, &JacobiTransform::IDENTITY, -0.1, Dimension::One).is_err());
    }

    #[test]
    fn p_waves_rejected_in_three_dimensions() {
        let p = Primitive::new(1, 1, C::from(1.0), C::from(1.0));
        assert!(rearranged_gauss_integral(&p, &p, &Kernel::Overlap, &JacobiTransform::IDENTITY, 0.0, Dimension::Three)
            .is_err());
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let map = JacobiTransform { m: [[-0.5, 1.0], [-0.75, -0.5]] };
        let t = Primitive::new(1, 1, C::new(0.7, 0.2), C::new(1.1, -0.3)).term(&map);
        let (z, zz, h) = (0.31, -0.47, 1e-5);
        for k in 0..2 {
            let g = t.gradient(k);
            let e = (-(t.quad.a * z * z + t.quad.b * 2.0 * z * zz + t.quad.d * zz * zz)).exp();
            let analytic = g.eval(C::from(z), C::from(zz)) * e;
            let (dz, dzz) = if k == 0 { (h, 0.0) } else { (0.0, h) };
            let fd = (t.eval(z + dz, zz + dzz) - t.eval(z - dz, zz - dzz)) / (2.0 * h);
            assert!((analytic - fd).norm() < 1e-8, "{analytic} vs {fd}");
        }
    }
}
