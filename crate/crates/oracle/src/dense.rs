//! Brute-force dense reference for small generalized eigenproblems.

use ndarray::Array2;

use crate::C;

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<C>>) -> C {
    let n = a.len();
    let mut d = C::from(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        if a[piv][col].norm() == 0.0 {
            return C::from(0.0);
        }
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        d *= a[col][col];
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
        }
    }
    d
}

/// Roots of `det(H - z S)` by Durand-Kerner iteration on the monic characteristic
/// polynomial `det(H - z S) / det(-S)`.
pub fn pencil_roots(h: &[Vec<C>], s: &[Vec<C>]) -> Vec<C> {
    let n = h.len();
    let minus_s: Vec<Vec<C>> = s.iter().map(|row| row.iter().map(|v| -v).collect()).collect();
    let lead = det(minus_s);
    let p = |z: C| {
        let m: Vec<Vec<C>> = (0..n).map(|i| (0..n).map(|j| h[i][j] - z * s[i][j]).collect()).collect();
        det(m) / lead
    };
    let seed = C::new(0.4, 0.9);
    let mut z: Vec<C> = (0..n).map(|k| 3.0 * seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let mut denom = C::from(1.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let step = p(z[i]) / denom;
            z[i] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 {
            break;
        }
    }
    z
}

/// Largest distance between two equally sized point sets under greedy nearest matching.
pub fn matched_distance(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// Random complex-symmetric `H` (real if `complex_h` is false) and positive-definite real `S`.
pub fn random_pencil<R: rand::Rng>(rng: &mut R, n: usize, complex_h: bool) -> (Array2<C>, Array2<C>) {
    let mut h = Array2::<C>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let im = if complex_h { rng.gen_range(-1.0..1.0) } else { 0.0 };
            let v = C::new(rng.gen_range(-1.0..1.0), im);
            h[[i, j]] = v;
            h[[j, i]] = v;
        }
    }
    // S = L Lᵀ with a unit-dominated lower factor
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..i {
            l[[i, j]] = rng.gen_range(-0.5..0.5);
        }
        l[[i, i]] = rng.gen_range(0.8..1.5);
    }
    let s = l.dot(&l.t()).mapv(C::from);
    (h, s)
}

pub fn rows(m: &Array2<C>) -> Vec<Vec<C>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}
