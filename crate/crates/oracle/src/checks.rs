//! Compact checks shared by the integration tests and the acceptance run.

use gemcsm_core::assembly::{assemble, ChannelBasis};
use gemcsm_core::basis::GaussBasisSpec;
use gemcsm_core::eigen::{solve_pencil, EigOptions};
use gemcsm_core::jacobi::JacobiSet;
use gemcsm_core::scan::{PreparedScan, RunConfig, ScanMode};
use gemcsm_core::twobody::{default_two_body_basis, solve_two_body, GaussPotential, Sector};
use gemcsm_core::units::{Dimension, MassConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dense::{matched_distance, pencil_roots, random_pencil, rows};
use crate::grid::{grid_levels, Origin};

pub const GRID_STEP: f64 = 1e-3;
pub const GRID_EXTENT: f64 = 40.0;

/// Two-body levels from the Gaussian basis and from the finite-difference grid.
pub fn two_body_vs_grid(v0: f64, dim: Dimension, sector: Sector) -> (Vec<f64>, Vec<f64>) {
    let gem = solve_two_body(&GaussPotential::new(v0), dim, sector, &default_two_body_basis()).expect("two-body solve");
    let kappa = dim.kinetic_scale();
    let grid = match (dim, sector) {
        (Dimension::Three, s) => grid_levels(v0, kappa, s.ell() as u32, Origin::Dirichlet, GRID_STEP, GRID_EXTENT),
        (Dimension::One, Sector::Even) => grid_levels(v0, kappa, 0, Origin::Neumann, GRID_STEP, GRID_EXTENT),
        (Dimension::One, Sector::Odd) => grid_levels(v0, kappa, 0, Origin::Dirichlet, GRID_STEP, GRID_EXTENT),
    };
    (gem.levels, grid)
}

/// Largest level difference, or infinity if the level counts differ.
pub fn level_gap(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Worst matched distance between the solver and the determinant roots on random 8×8 pencils.
pub fn dense_pencil_agreement(seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let (h, s) = random_pencil(&mut rng, 8, trial % 4 != 0);
        let got = solve_pencil(&h, &s, false, &EigOptions::default()).expect("solve");
        let d = if got.eigenvalues.len() == 8 {
            matched_distance(&got.eigenvalues, &pencil_roots(&rows(&h), &rows(&s)))
        } else {
            f64::INFINITY
        };
        worst = worst.max(d);
    }
    worst
}

/// A few-hundred-function basis on the same footing as the production one.
pub fn small_basis(dim: Dimension, n: usize) -> ChannelBasis {
    match dim {
        Dimension::Three => ChannelBasis {
            dimension: dim,
            pair: GaussBasisSpec::new(n, 25.0, 0.04),
            third: GaussBasisSpec::new(n, 20.0, 0.03),
            blocks: vec![(0, 0)],
            jacobi_set: JacobiSet::Two,
        },
        Dimension::One => ChannelBasis {
            dimension: dim,
            pair: GaussBasisSpec::new(n, 25.0, 0.04).with_ell(1),
            third: GaussBasisSpec::new(n, 20.0, 0.03).with_ell(1),
            blocks: vec![(0, 0), (1, 1)],
            jacobi_set: JacobiSet::Two,
        },
    }
}

pub fn production_depth(dim: Dimension) -> GaussPotential {
    match dim {
        Dimension::Three => GaussPotential::new(-19.77),
        Dimension::One => GaussPotential::new(-5.44),
    }
}

/// Real (θ = 0) three-body levels, ascending.
pub fn real_levels(beta: f64, basis: &ChannelBasis) -> Vec<f64> {
    let cfg = MassConfig::new(beta).expect("mass ratio");
    let p = assemble(&cfg, &production_depth(basis.dimension), basis, 0.0).expect("assembly");
    let r = solve_pencil(&p.h_matrix, &p.s_matrix, false, &EigOptions::for_dimension(basis.dimension)).expect("solve");
    r.eigenvalues.iter().map(|z| z.re).collect()
}

/// Largest rise of the lowest `count` levels when the nested 5-range progression is enlarged to 9.
pub fn enlargement_rise(dim: Dimension, beta: f64, count: usize) -> f64 {
    let coarse = real_levels(beta, &small_basis(dim, 5));
    let fine = real_levels(beta, &small_basis(dim, 9));
    (0..count).map(|k| fine[k] - coarse[k]).fold(f64::NEG_INFINITY, f64::max)
}

/// True if depth and thresholds are bitwise identical at every listed β.
pub fn thresholds_bitwise_constant(dim: Dimension, betas: &[f64]) -> bool {
    let scan = PreparedScan::new(RunConfig::production(dim), ScanMode::Prime).expect("prepare");
    let bits = |beta: f64| {
        let (pot, th) = scan.potential_at(beta).expect("potential");
        let mut v = vec![pot.v0_prime.to_bits()];
        v.extend(th.energies().iter().map(|e| e.to_bits()));
        v
    };
    let first = bits(betas[0]);
    betas.iter().all(|&b| bits(b) == first)
}
