//! Finite-difference reference levels for the radial and half-line problems.

/// Eigenvalues of a symmetric tridiagonal matrix below `x`, by Sturm sequence.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q == 0.0 { 1e-300 } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th (0-based) eigenvalue of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Boundary condition at the origin for the radial / half-line grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Origin {
    /// `u(0) = 0`.
    Dirichlet,
    /// `u'(0) = 0`, grid offset by half a step.
    Neumann,
}

/// Negative eigenvalues of `-κ u'' + (κ l(l+1)/r² + v0 e^{-r²}) u` on `(0, box)` with a
/// three-point finite-difference grid and `u(box) = 0`.
pub fn grid_levels(v0: f64, kappa: f64, ell: u32, origin: Origin, h: f64, extent: f64) -> Vec<f64> {
    let n = (extent / h).round() as usize;
    let mut diag = Vec::with_capacity(n);
    for i in 0..n {
        let r = match origin {
            Origin::Dirichlet => (i + 1) as f64 * h,
            Origin::Neumann => (i as f64 + 0.5) * h,
        };
        let cent = if ell > 0 { kappa * (ell * (ell + 1)) as f64 / (r * r) } else { 0.0 };
        diag.push(2.0 * kappa / (h * h) + cent + v0 * (-r * r).exp());
    }
    if origin == Origin::Neumann {
        // ghost point mirrors the first one
        diag[0] -= kappa / (h * h);
    }
    let off = vec![-kappa / (h * h); n - 1];
    let bound = sturm_count(&diag, &off, 0.0);
    (0..bound).map(|k| tridiagonal_eigenvalue(&diag, &off, k, v0 - 1.0, 0.0)).collect()
}

