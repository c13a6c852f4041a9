//! Adaptive Gauss-Kronrod quadrature and closed-form angular averages.

use crate::C;

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss 7 weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> C>(f: &mut F, a: f64, b: f64) -> (C, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut mag = fc.norm() * WGK[7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (lo, hi) = (f(c - dx), f(c + dx));
        kron += (lo + hi) * WGK[j];
        mag += (lo.norm() + hi.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (lo + hi) * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm(), mag * h.abs())
}

/// Globally adaptive G7K15 quadrature of a complex integrand on `[a, b]`.
pub fn integrate<F: FnMut(f64) -> C>(f: F, a: f64, b: f64, rel_tol: f64) -> C {
    integrate_pieces(f, &[a, b], rel_tol)
}

/// Adaptive quadrature over consecutive `breaks`, which seed the subdivision.
///
/// Splits the piece with the largest error estimate until the total estimate drops below
/// `rel_tol` times the larger of `|I|` and a roundoff floor `1e-3 ∫|f|`.
pub fn integrate_pieces<F: FnMut(f64) -> C>(mut f: F, breaks: &[f64], rel_tol: f64) -> C {
    let mut parts: Vec<(f64, f64, C, f64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e, m) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e, m)
        })
        .collect();
    for _ in 0..2000 {
        let total: C = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let mag: f64 = parts.iter().map(|p| p.4).sum();
        if err <= rel_tol * total.norm().max(1e-3 * mag) || mag == 0.0 {
            break;
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1, m1) = gk15(&mut f, lo, mid);
        let (v2, e2, m2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1, m1));
        parts.push((mid, hi, v2, e2, m2));
    }
    parts.iter().map(|p| p.2).sum()
}

/// Nested adaptive quadrature; the inner limits may depend on the outer variable.
pub fn integrate_2d<F, L>(f: F, x: (f64, f64), y_limits: L, rel_tol: f64) -> C
where
    F: Fn(f64, f64) -> C,
    L: Fn(f64) -> (f64, f64),
{
    integrate(
        |xv| {
            let (y0, y1) = y_limits(xv);
            if y1 <= y0 {
                return C::from(0.0);
            }
            integrate(|yv| f(xv, yv), y0, y1, rel_tol)
        },
        x.0,
        x.1,
        rel_tol,
    )
}

/// Nested quadrature over `outer × inner` with fixed seed breakpoints in both directions.
pub fn integrate_grid<F: Fn(f64, f64) -> C>(f: F, outer: &[f64], inner: &[f64], rel_tol: f64) -> C {
    integrate_pieces(|xv| integrate_pieces(|yv| f(xv, yv), inner, rel_tol), outer, rel_tol)
}

/// Breakpoints `0, ±h, ±2h, ±4h, ...` up to `±extent`, resolving features of width `h`
/// anywhere between the origin and the edge.
pub fn symmetric_breaks(h: f64, extent: f64) -> Vec<f64> {
    let mut half = vec![0.0];
    let mut x = h;
    while x < extent {
        half.push(x);
        x *= 2.0;
    }
    half.push(extent);
    let mut out: Vec<f64> = half.iter().rev().map(|v| -v).collect();
    out.pop();
    out.extend(half);
    out
}

/// `∫_{-1}^{1} e^{-s u} du`.
pub fn angular0(s: C) -> C {
    if s.norm() < 0.5 {
        // 2 Σ s^{2k} / ((2k)! (2k + 1))
        let mut term = C::from(1.0);
        let mut sum = C::from(0.0);
        for k in 0..20 {
            sum += term / (2 * k + 1) as f64;
            term *= s * s / (((2 * k + 1) * (2 * k + 2)) as f64);
        }
        2.0 * sum
    } else {
        2.0 * s.sinh() / s
    }
}

/// `∫_{-1}^{1} u e^{-s u} du`.
pub fn angular1(s: C) -> C {
    if s.norm() < 0.5 {
        // -2 Σ s^{2k+1} / ((2k+1)! (2k + 3))
        let mut term = s;
        let mut sum = C::from(0.0);
        for k in 0..20 {
            sum += term / (2 * k + 3) as f64;
            term *= s * s / (((2 * k + 2) * (2 * k + 3)) as f64);
        }
        -2.0 * sum
    } else {
        -2.0 * s.cosh() / s + 2.0 * s.sinh() / (s * s)
    }
}

/// `e^{-q} ∫_{-1}^{1} e^{-s u} du`, finite wherever the product is.
pub fn angular0_scaled(s: C, q: C) -> C {
    if s.norm() < 0.5 {
        angular0(s) * (-q).exp()
    } else {
        ((s - q).exp() - (-s - q).exp()) / s
    }
}

/// `e^{-q} ∫_{-1}^{1} u e^{-s u} du`.
pub fn angular1_scaled(s: C, q: C) -> C {
    if s.norm() < 0.5 {
        angular1(s) * (-q).exp()
    } else {
        let (up, down) = ((s - q).exp(), (-s - q).exp());
        -(up + down) / s + (up - down) / (s * s)
    }
}

