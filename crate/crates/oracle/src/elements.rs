//! Random primitive integrals and their quadrature references.

use std::f64::consts::PI;

use gemcsm_core::gaussint::{rearranged_gauss_integral, Kernel, Primitive};
use gemcsm_core::jacobi::{exchange, transform, JacobiSet, JacobiTransform};
use gemcsm_core::units::{Dimension, MassConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quad::{angular0_scaled, angular1_scaled, integrate_2d};
use crate::C;

/// One random bra/ket pair with a coordinate map and kernel parameters.
#[derive(Clone, Copy, Debug)]
pub struct Draw {
    pub bra: Primitive,
    pub ket: Primitive,
    pub map: JacobiTransform,
    pub row: [f64; 2],
    pub coeffs: [f64; 2],
    pub theta: f64,
}

fn exponent(rng: &mut ChaCha8Rng) -> C {
    let re = (rng.gen_range(0.03f64.ln()..30f64.ln())).exp();
    C::new(re, re * rng.gen_range(-0.8..0.8))
}

pub fn draw(rng: &mut ChaCha8Rng, dim: Dimension) -> Draw {
    let beta = (rng.gen_range(0.05f64.ln()..20f64.ln())).exp();
    let cfg = MassConfig::new(beta).unwrap();
    let map = match rng.gen_range(0..4) {
        0 => JacobiTransform::IDENTITY,
        1 => exchange(JacobiSet::Two, &cfg),
        2 => transform(JacobiSet::Two, JacobiSet::Three, &cfg),
        _ => exchange(JacobiSet::Three, &cfg).after(&transform(JacobiSet::Two, JacobiSet::Three, &cfg)),
    };
    let row = if rng.gen_bool(0.5) {
        transform(JacobiSet::Two, JacobiSet::Three, &cfg).pair_row()
    } else {
        transform(JacobiSet::Two, JacobiSet::Two, &cfg).pair_row()
    };
    let mu = JacobiSet::Two.reduced_masses(&cfg);
    let kappa = dim.kinetic_scale();
    let coeffs = [kappa / (2.0 * mu[0]), kappa / (2.0 * mu[1])];
    let (degs_bra, degs_ket) = match dim {
        Dimension::Three => ((0, 0), (0, 0)),
        Dimension::One => ((rng.gen_range(0..2), rng.gen_range(0..2)), (rng.gen_range(0..2), rng.gen_range(0..2))),
    };
    Draw {
        bra: Primitive::new(degs_bra.0, degs_bra.1, exponent(rng), exponent(rng)),
        ket: Primitive::new(degs_ket.0, degs_ket.1, exponent(rng), exponent(rng)),
        map,
        row,
        coeffs,
        theta: rng.gen_range(0.0..0.35),
    }
}

/// `(∫ |z^l e^{-a z²}|²)` per coordinate, raised to the spatial dimension.
pub fn norm_sq(p: &Primitive, dim: Dimension) -> f64 {
    let m = |l: u8, a: C| {
        let alpha = a.re;
        (PI / (2.0 * alpha)).sqrt() * (1.0 / (4.0 * alpha)).powi(l as i32)
    };
    (m(p.l, p.a) * m(p.big_l, p.b)).powi(dim.spatial() as i32)
}

/// Real part `(a, b, d)` of the combined bra + ket quadratic form `a z² + 2b zZ + d Z²`.
fn envelope(d: &Draw) -> (f64, f64, f64) {
    let m = d.map.m;
    let (ka, kb) = (d.ket.a.re, d.ket.b.re);
    let a = d.bra.a.re + ka * m[0][0] * m[0][0] + kb * m[1][0] * m[1][0];
    let b = ka * m[0][0] * m[0][1] + kb * m[1][0] * m[1][1];
    let dd = d.bra.b.re + ka * m[0][1] * m[0][1] + kb * m[1][1] * m[1][1];
    (a, b, dd)
}

// e^{-64} is far below the target accuracy
const CUT: f64 = 64.0;

/// Outer half-width and inner `(centre slope, half-width)` of the region where the
/// Gaussian envelope exceeds `e^{-CUT}`.
fn limits(d: &Draw) -> (f64, f64, f64) {
    let (a, b, dd) = envelope(d);
    let marginal = (a * dd - b * b) / dd;
    ((CUT / marginal).sqrt(), -b / dd, (CUT / dd).sqrt())
}

fn mono(x: f64, l: u8) -> f64 {
    if l == 0 {
        1.0
    } else {
        x
    }
}

/// `d/dx [x^l e^{-a x²}] / e^{-a x²}`.
fn mono_deriv(x: f64, l: u8, a: C) -> C {
    let base = if l == 0 { C::from(0.0) } else { C::from(1.0) };
    base - 2.0 * a * x * mono(x, l)
}

pub fn oracle_1d(d: &Draw, kernel: &Kernel) -> C {
    let (outer, slope, inner) = limits(d);
    let m = d.map.m;
    let f = |z: f64, zz: f64| {
        let y0 = m[0][0] * z + m[0][1] * zz;
        let y1 = m[1][0] * z + m[1][1] * zz;
        let eb = (-d.bra.a * z * z - d.bra.b * zz * zz).exp();
        let ek = (-d.ket.a * y0 * y0 - d.ket.b * y1 * y1).exp();
        match *kernel {
            Kernel::Overlap => eb * ek * mono(z, d.bra.l) * mono(zz, d.bra.big_l) * mono(y0, d.ket.l) * mono(y1, d.ket.big_l),
            Kernel::GaussianPair { row } => {
                let s = row[0] * z + row[1] * zz;
                let gamma = C::from_polar(1.0, 2.0 * d.theta);
                eb * ek * (-gamma * s * s).exp()
                    * mono(z, d.bra.l)
                    * mono(zz, d.bra.big_l)
                    * mono(y0, d.ket.l)
                    * mono(y1, d.ket.big_l)
            }
            Kernel::Kinetic { coeffs } => {
                // bra gradient in its own coordinates
                let fb = [
                    mono_deriv(z, d.bra.l, d.bra.a) * mono(zz, d.bra.big_l),
                    mono(z, d.bra.l) * mono_deriv(zz, d.bra.big_l, d.bra.b),
                ];
                // ket gradient by the chain rule through the linear map
                let gy = [
                    mono_deriv(y0, d.ket.l, d.ket.a) * mono(y1, d.ket.big_l),
                    mono(y0, d.ket.l) * mono_deriv(y1, d.ket.big_l, d.ket.b),
                ];
                let gk = [gy[0] * m[0][0] + gy[1] * m[1][0], gy[0] * m[0][1] + gy[1] * m[1][1]];
                let dot = fb[0] * gk[0] * coeffs[0] + fb[1] * gk[1] * coeffs[1];
                eb * ek * dot * C::from_polar(1.0, -2.0 * d.theta)
            }
        }
    };
    integrate_2d(f, (-outer, outer), |z| (slope * z - inner, slope * z + inner), 1e-12)
}

pub fn oracle_3d(d: &Draw, kernel: &Kernel) -> C {
    // the angular integral can undo the cross term's sign, so bound with -|b|
    let (outer, slope, inner) = limits(d);
    let slope = slope.abs();
    let m = d.map.m;
    let p = [d.ket.a, d.ket.b];
    let gamma = C::from_polar(1.0, 2.0 * d.theta);
    let f = |r: f64, rr: f64| {
        // exponent = q0 + q1 u, u the cosine between r and R
        let mut q0 = d.bra.a * r * r + d.bra.b * rr * rr;
        let mut q1 = C::from(0.0);
        for j in 0..2 {
            q0 += p[j] * (m[j][0] * m[j][0] * r * r + m[j][1] * m[j][1] * rr * rr);
            q1 += p[j] * 2.0 * m[j][0] * m[j][1] * r * rr;
        }
        let ang = match *kernel {
            Kernel::Overlap => angular0_scaled(q1, q0),
            Kernel::GaussianPair { row } => {
                q0 += gamma * (row[0] * row[0] * r * r + row[1] * row[1] * rr * rr);
                q1 += gamma * 2.0 * row[0] * row[1] * r * rr;
                angular0_scaled(q1, q0)
            }
            Kernel::Kinetic { coeffs } => {
                // -Σ c_k ∇_k² acting on the ket: (6 Σ_j p_j M_jk² - |G_k|²) g
                let mut alpha = C::from(0.0);
                let mut beta = C::from(0.0);
                for k in 0..2 {
                    let mut a_k = C::from(0.0);
                    for j in 0..2 {
                        a_k += 6.0 * p[j] * m[j][k] * m[j][k];
                    }
                    let mut g_r2 = C::from(0.0);
                    let mut g_big2 = C::from(0.0);
                    let mut g_u = C::from(0.0);
                    for j in 0..2 {
                        for jp in 0..2 {
                            let w = 4.0 * p[j] * p[jp] * m[j][k] * m[jp][k];
                            g_r2 += w * m[j][0] * m[jp][0];
                            g_big2 += w * m[j][1] * m[jp][1];
                            g_u += w * (m[j][0] * m[jp][1] + m[j][1] * m[jp][0]);
                        }
                    }
                    alpha += coeffs[k] * (a_k - g_r2 * r * r - g_big2 * rr * rr);
                    beta -= coeffs[k] * g_u * r * rr;
                }
                (alpha * angular0_scaled(q1, q0) + beta * angular1_scaled(q1, q0)) * C::from_polar(1.0, -2.0 * d.theta)
            }
        };
        8.0 * PI * PI * r * r * rr * rr * ang
    };
    integrate_2d(f, (0.0, outer), |r| ((slope * r - inner).max(0.0), slope * r + inner), 1e-12)
}

/// Which kernel a sweep exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Overlap,
    Kinetic,
    GaussianPair,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Overlap, KernelKind::Kinetic, KernelKind::GaussianPair];

    fn kernel(self, d: &Draw) -> Kernel {
        match self {
            KernelKind::Overlap => Kernel::Overlap,
            KernelKind::Kinetic => Kernel::Kinetic { coeffs: d.coeffs },
            KernelKind::GaussianPair => Kernel::GaussianPair { row: d.row },
        }
    }
}

/// Closed form against quadrature for one draw, relative to the product of the primitive norms.
pub fn deviation(d: &Draw, kind: KernelKind, dim: Dimension) -> f64 {
    let kernel = kind.kernel(d);
    let theta = if kind == KernelKind::Overlap { 0.0 } else { d.theta };
    let got = rearranged_gauss_integral(&d.bra, &d.ket, &kernel, &d.map, theta, dim).expect("closed form");
    let want = match dim {
        Dimension::One => oracle_1d(d, &kernel),
        Dimension::Three => oracle_3d(d, &kernel),
    };
    let scale = 1.0 / (norm_sq(&d.bra, dim) * norm_sq(&d.ket, dim)).sqrt();
    (got - want).norm() * scale / (want.norm() * scale).max(1e-3)
}

/// Worst deviation over `draws` seeded draws, with the index of the worst draw.
pub fn sweep(dim: Dimension, kind: KernelKind, seed: u64, draws: usize) -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0, 0);
    for i in 0..draws {
        let d = draw(&mut rng, dim);
        let e = deviation(&d, kind, dim);
        if !(e <= worst.0) {
            worst = (e, i);
        }
    }
    worst
}
