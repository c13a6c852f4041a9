//! Gaussian-basis two-body levels against dense finite-difference diagonalization.

use gemcsm_core::twobody::{default_two_body_basis, tune_depth, Sector, TuneRequest};
use gemcsm_core::units::Dimension;
use gemcsm_oracle::checks::{level_gap, thresholds_bitwise_constant, two_body_vs_grid, GRID_EXTENT, GRID_STEP};
use gemcsm_oracle::grid::{grid_levels, Origin};

const TOL: f64 = 1e-4;

fn compare(v0: f64, dim: Dimension, sector: Sector) -> Vec<f64> {
    let (gem, grid) = two_body_vs_grid(v0, dim, sector);
    let gap = level_gap(&gem, &grid);
    assert!(gap < TOL, "{dim} {sector:?} v0 = {v0}: basis {gem:?}, grid {grid:?}");
    gem
}

#[test]
fn three_dimensional_production_depth() {
    let s = compare(-19.77, Dimension::Three, Sector::Even);
    assert_eq!(s.len(), 2);
    let p = compare(-19.77, Dimension::Three, Sector::Odd);
    assert_eq!(p.len(), 1);
}

#[test]
fn one_dimensional_production_depth() {
    let even = compare(-5.44, Dimension::One, Sector::Even);
    assert_eq!(even.len(), 2);
    let odd = compare(-5.44, Dimension::One, Sector::Odd);
    assert_eq!(odd.len(), 1);
}

#[test]
fn other_depths() {
    for v0 in [-3.0, -8.0, -30.0] {
        compare(v0, Dimension::Three, Sector::Even);
        compare(v0, Dimension::Three, Sector::Odd);
    }
    for v0 in [-1.0, -12.0] {
        compare(v0, Dimension::One, Sector::Even);
        compare(v0, Dimension::One, Sector::Odd);
    }
}

#[test]
fn tuned_depth_reproduces_target_on_grid() {
    let req = TuneRequest::new(Dimension::Three, Sector::Even, 2, -0.1);
    let pot = tune_depth(&req, &default_two_body_basis()).unwrap();
    let grid = grid_levels(pot.v0_prime, 1.0, 0, Origin::Dirichlet, GRID_STEP, GRID_EXTENT);
    assert!((grid[1] + 0.1).abs() < TOL, "v0 = {}, grid level {}", pot.v0_prime, grid[1]);
}

#[test]
fn thresholds_do_not_depend_on_mass_ratio() {
    // prime units keep the pair Hamiltonian free of β, so every β sees bitwise the same inputs
    for dim in [Dimension::One, Dimension::Three] {
        assert!(thresholds_bitwise_constant(dim, &[1.0, 0.05, 0.7, 5.0, 20.0]), "{dim}");
    }
}
