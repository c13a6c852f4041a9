//! Generalized complex-symmetric eigenproblem `H A = E S A` with canonical orthogonalization.
//!
//! The overlap is diagonalized first; directions with eigenvalue below
//! `overlap_threshold · max` are dropped, the remainder is whitened into `X` with
//! `Xᵀ S X = 1`, and the standard problem `Xᵀ H X y = E y` is solved densely. Transposes
//! (not adjoints) are used throughout so complex symmetry is preserved.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, EigVals, Eigh, UPLO};
use num_complex::Complex64;

use crate::assembly::{AssembledProblem, HamiltonianParts};
use crate::error::{Error, Result};

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EigOptions {
    /// Relative threshold below which overlap eigen-directions are discarded.
    pub overlap_threshold: f64,
    /// Fraction of discarded directions above which the basis is rejected.
    pub max_discard_fraction: f64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { overlap_threshold: 1e-12, max_discard_fraction: 0.25 }
    }
}

impl EigOptions {
    /// Defaults for three-body problems. The symmetrized 1D product basis is close to twice
    /// overcomplete, so far more overlap directions are redundant there.
    pub fn for_dimension(dim: crate::units::Dimension) -> Self {
        match dim {
            crate::units::Dimension::Three => Self::default(),
            crate::units::Dimension::One => Self { max_discard_fraction: 0.75, ..Self::default() },
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneralizedEigResult {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C>,
    /// Columns normalized to `aᵀ S a = 1`.
    pub eigenvectors: Option<Array2<C>>,
    pub discarded_dim: usize,
    /// Ratio of the largest to the smallest overlap eigenvalue magnitude.
    pub condition_estimate: f64,
}

pub fn solve_generalized(problem: &AssembledProblem, want_vectors: bool) -> Result<GeneralizedEigResult> {
    solve_pencil(&problem.h_matrix, &problem.s_matrix, want_vectors, &EigOptions::default())
}

pub fn solve_generalized_with(
    problem: &AssembledProblem,
    want_vectors: bool,
    opts: &EigOptions,
) -> Result<GeneralizedEigResult> {
    solve_pencil(&problem.h_matrix, &problem.s_matrix, want_vectors, opts)
}

fn is_real(m: &Array2<C>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Whitening `X` (n × kept) with `Xᵀ S X = 1`.
struct Whitening {
    x: Array2<C>,
    real_x: Option<Array2<f64>>,
    discarded: usize,
    condition: f64,
}

fn whiten(s: &Array2<C>, opts: &EigOptions) -> Result<Whitening> {
    let n = s.nrows();
    if is_real(s) {
        let sr = s.mapv(|z| z.re);
        let (w, u) = sr.eigh(UPLO::Lower).map_err(|e| Error::Solver(format!("overlap diagonalization: {e}")))?;
        let wmax = w.iter().cloned().fold(f64::MIN, f64::max);
        if !(wmax > 0.0) {
            return Err(Error::Solver("overlap matrix has no positive eigenvalue".into()));
        }
        let wmin = w.iter().cloned().fold(f64::MAX, f64::min);
        let keep: Vec<usize> = (0..n).filter(|&i| w[i] > opts.overlap_threshold * wmax).collect();
        let mut x = Array2::<f64>::zeros((n, keep.len()));
        for (col, &i) in keep.iter().enumerate() {
            let f = 1.0 / w[i].sqrt();
            x.column_mut(col).assign(&u.column(i).mapv(|v| v * f));
        }
        Ok(Whitening {
            x: x.mapv(C::from),
            real_x: Some(x),
            discarded: n - keep.len(),
            condition: wmax / wmin.abs().max(f64::MIN_POSITIVE),
        })
    } else {
        let (lam, v) = s.eig().map_err(|e| Error::Solver(format!("overlap diagonalization: {e}")))?;
        let mags: Vec<f64> = lam.iter().map(|z| z.norm()).collect();
        let wmax = mags.iter().cloned().fold(0.0, f64::max);
        let wmin = mags.iter().cloned().fold(f64::MAX, f64::min);
        let keep: Vec<usize> = (0..n).filter(|&i| mags[i] > opts.overlap_threshold * wmax).collect();
        let mut x = Array2::<C>::zeros((n, keep.len()));
        for (col, &i) in keep.iter().enumerate() {
            let vi = v.column(i);
            let vtv: C = vi.iter().map(|z| z * z).sum();
            if vtv.norm() < 1e-10 {
                return Err(Error::Solver("overlap has a quasi-null (self-orthogonal) eigenvector".into()));
            }
            let f = 1.0 / (vtv.sqrt() * lam[i].sqrt());
            x.column_mut(col).assign(&vi.mapv(|z| z * f));
        }
        Ok(Whitening { x, real_x: None, discarded: n - keep.len(), condition: wmax / wmin.max(f64::MIN_POSITIVE) })
    }
}

/// `Xᵀ M X`, split into real products when `X` is real.
fn congruence(w: &Whitening, m: &Array2<C>) -> Array2<C> {
    match &w.real_x {
        Some(xr) => {
            let re = m.mapv(|z| z.re);
            let im = m.mapv(|z| z.im);
            let hre = xr.t().dot(&re.dot(xr));
            if im.iter().all(|&v| v == 0.0) {
                hre.mapv(C::from)
            } else {
                let him = xr.t().dot(&im.dot(xr));
                let mut out = Array2::<C>::zeros(hre.raw_dim());
                ndarray::Zip::from(&mut out).and(&hre).and(&him).for_each(|o, &r, &i| *o = C::new(r, i));
                out
            }
        }
        None => w.x.t().dot(&m.dot(&w.x)),
    }
}

pub fn solve_pencil(h: &Array2<C>, s: &Array2<C>, want_vectors: bool, opts: &EigOptions) -> Result<GeneralizedEigResult> {
    let n = h.nrows();
    if h.ncols() != n || s.dim() != (n, n) {
        return Err(Error::Solver(format!("shape mismatch: H {:?}, S {:?}", h.dim(), s.dim())));
    }
    if n == 0 {
        return Ok(GeneralizedEigResult {
            eigenvalues: vec![],
            eigenvectors: want_vectors.then(|| Array2::zeros((0, 0))),
            discarded_dim: 0,
            condition_estimate: 1.0,
        });
    }
    let w = checked_whitening(s, opts)?;
    solve_whitened(h, s, &w, want_vectors)
}

fn checked_whitening(s: &Array2<C>, opts: &EigOptions) -> Result<Whitening> {
    let n = s.nrows();
    let w = whiten(s, opts)?;
    if w.discarded as f64 > opts.max_discard_fraction * n as f64 {
        return Err(Error::Conditioning { dropped: w.discarded, total: n });
    }
    Ok(w)
}

/// Eigenvalues at every angle of an assembly, sharing the overlap factorization.
pub fn solve_parts(parts: &HamiltonianParts, want_vectors: bool, opts: &EigOptions) -> Result<Vec<GeneralizedEigResult>> {
    let first = parts.problem(0);
    let w = checked_whitening(&first.s_matrix, opts)?;
    let mut out = vec![solve_whitened(&first.h_matrix, &first.s_matrix, &w, want_vectors)?];
    for k in 1..parts.thetas.len() {
        let p = parts.problem(k);
        out.push(solve_whitened(&p.h_matrix, &p.s_matrix, &w, want_vectors)?);
    }
    Ok(out)
}

fn solve_whitened(h: &Array2<C>, s: &Array2<C>, w: &Whitening, want_vectors: bool) -> Result<GeneralizedEigResult> {
    let n = h.nrows();
    let mut hp = congruence(w, h);
    // restore exact symmetry lost to rounding in the two products
    let k = hp.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let avg = 0.5 * (hp[[i, j]] + hp[[j, i]]);
            hp[[i, j]] = avg;
            hp[[j, i]] = avg;
        }
    }

    let (vals, vecs): (Vec<C>, Option<Array2<C>>) = if w.real_x.is_some() && is_real(&hp) {
        let hr = hp.mapv(|z| z.re);
        if want_vectors {
            let (e, y) = hr.eigh(UPLO::Lower).map_err(|e| Error::Solver(e.to_string()))?;
            (e.iter().map(|&v| C::from(v)).collect(), Some(y.mapv(C::from)))
        } else {
            let e = ndarray_linalg::EigValsh::eigvalsh(&hr, UPLO::Lower).map_err(|e| Error::Solver(e.to_string()))?;
            (e.iter().map(|&v| C::from(v)).collect(), None)
        }
    } else if want_vectors {
        let (e, y) = hp.eig().map_err(|e| Error::Solver(e.to_string()))?;
        (e.to_vec(), Some(y))
    } else {
        let e = hp.eigvals().map_err(|e| Error::Solver(e.to_string()))?;
        (e.to_vec(), None)
    };
    if vals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Solver("non-finite eigenvalue".into()));
    }

    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| {
        vals[a].re.total_cmp(&vals[b].re).then(vals[a].im.total_cmp(&vals[b].im))
    });
    let eigenvalues: Vec<C> = order.iter().map(|&i| vals[i]).collect();

    let eigenvectors = vecs.map(|y| {
        let a = w.x.dot(&y);
        let mut out = Array2::<C>::zeros((n, order.len()));
        for (col, &i) in order.iter().enumerate() {
            let ai = a.column(i);
            let sa = s.dot(&ai);
            let norm: C = ai.iter().zip(sa.iter()).map(|(x, y)| x * y).sum();
            let f = if norm.norm() > 0.0 { 1.0 / norm.sqrt() } else { C::from(1.0) };
            out.column_mut(col).assign(&ai.mapv(|z| z * f));
        }
        out
    });

    Ok(GeneralizedEigResult { eigenvalues, eigenvectors, discarded_dim: w.discarded, condition_estimate: w.condition })
}

/// Real symmetric pencil, eigenvalues only (used for bound-state problems).
pub fn solve_real_symmetric(h: &Array2<f64>, s: &Array2<f64>, opts: &EigOptions) -> Result<(Vec<f64>, usize)> {
    let r = solve_pencil(&h.mapv(C::from), &s.mapv(C::from), false, opts)?;
    Ok((r.eigenvalues.iter().map(|z| z.re).collect(), r.discarded_dim))
}

/// Relative residual `‖H a - E S a‖ / ((‖H‖ + |E| ‖S‖) ‖a‖)` of one pair (Frobenius norms).
pub fn relative_residual(h: &Array2<C>, s: &Array2<C>, e: C, a: ndarray::ArrayView1<C>) -> f64 {
    let ha = h.dot(&a);
    let sa = s.dot(&a);
    let r: Array1<C> = &ha - &sa.mapv(|z| z * e);
    let fro = |m: &Array2<C>| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nrm = |v: &Array1<C>| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let an = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    nrm(&r) / ((fro(h) + e.norm() * fro(s)) * an)
}

/// `max |(AᵀSA)_ij - δ_ij|` over all pairs.
pub fn biorthogonality_defect(s: &Array2<C>, a: &Array2<C>) -> f64 {
    let g = a.t().dot(&s.dot(a));
    let mut worst: f64 = 0.0;
    for ((i, j), v) in g.indexed_iter() {
        let target = if i == j { C::from(1.0) } else { C::from(0.0) };
        worst = worst.max((v - target).norm());
    }
    worst
}

/// Rows and columns permuted by `perm` (new index i takes old index perm[i]).
pub fn permute_symmetric(m: &Array2<C>, perm: &[usize]) -> Array2<C> {
    let rows = m.select(Axis(0), perm);
    rows.select(Axis(1), perm)
}
