use gemcsm_core::assembly::{assemble, ChannelBasis};
use gemcsm_core::basis::GaussBasisSpec;
use gemcsm_core::csm::{classify, ClassifyOptions, StateClass};
use gemcsm_core::eigen::{solve_pencil, EigOptions};
use gemcsm_core::jacobi::JacobiSet;
use gemcsm_core::twobody::GaussPotential;
use gemcsm_core::units::{Dimension, MassConfig};
use num_complex::Complex64 as C;
use proptest::prelude::*;

const THRESHOLDS: [f64; 2] = [-8.4, -0.1];

fn ray(t: f64, theta: f64, rho: &[f64]) -> Vec<C> {
    rho.iter().map(|&r| C::from(t) + C::from_polar(r, -2.0 * theta)).collect()
}

/// Rotated continua from every threshold plus fixed discrete eigenvalues with a tiny
/// angle-dependent jitter.
fn synthetic(thetas_deg: &[f64], discrete: &[C], rho: &[f64]) -> Vec<(f64, Vec<C>)> {
    thetas_deg
        .iter()
        .map(|&d| {
            let th = d.to_radians();
            let mut v = Vec::new();
            for &t in THRESHOLDS.iter().chain([0.0].iter()) {
                v.extend(ray(t, th, rho));
            }
            v.extend(discrete.iter().map(|z| z + C::new(1e-7 * d, 0.0)));
            (th, v)
        })
        .collect()
}

fn discrete_strategy() -> impl Strategy<Value = Vec<C>> {
    // resonances with angle from their threshold well outside the swept rays
    prop::collection::vec((-8.0f64..-0.5, 0.0f64..0.02), 1..5).prop_map(|v| {
        let mut out: Vec<C> = v.into_iter().map(|(re, g)| C::new(re, -g)).collect();
        out.sort_by(|a, b| a.re.total_cmp(&b.re));
        out.dedup_by(|a, b| (a.re - b.re).abs() < 0.05);
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthetic_resonances_are_recovered(discrete in discrete_strategy(), seed in 0u64..1000) {
        let rho: Vec<f64> = (1..6).map(|k| 0.37 * k as f64 + (seed % 7) as f64 * 0.01).collect();
        let spectra = synthetic(&[8.0, 10.0, 12.0], &discrete, &rho);
        let c = classify(&spectra, &THRESHOLDS, &ClassifyOptions::default()).unwrap();
        prop_assert_eq!(c.count(StateClass::Resonance), discrete.len());
        for (s, z) in c.states.iter().zip(&discrete) {
            prop_assert!(s.energy.gamma >= 0.0);
            prop_assert!((s.energy.e_r - z.re).abs() < 1e-5);
            prop_assert!((s.energy.gamma + 2.0 * z.im).abs() < 1e-12);
        }
        let continuum = c.points.iter().filter(|p| p.class == StateClass::Continuum).count();
        prop_assert_eq!(continuum, 3 * 3 * rho.len());
    }

    #[test]
    fn classification_ignores_eigenvalue_and_angle_order(discrete in discrete_strategy(), rot in 0usize..20) {
        let rho = [0.3, 0.9, 2.2];
        let spectra = synthetic(&[8.0, 10.0, 12.0], &discrete, &rho);
        let a = classify(&spectra, &THRESHOLDS, &ClassifyOptions::default()).unwrap();
        let mut shuffled: Vec<(f64, Vec<C>)> = spectra
            .iter()
            .map(|(th, v)| {
                let mut v = v.clone();
                let n = v.len();
                v.rotate_left(rot % n);
                v.reverse();
                (*th, v)
            })
            .collect();
        shuffled.reverse();
        let b = classify(&shuffled, &THRESHOLDS, &ClassifyOptions::default()).unwrap();
        prop_assert_eq!(a.states, b.states);
    }

    #[test]
    fn reclassifying_discrete_states_is_idempotent(discrete in discrete_strategy()) {
        let spectra = synthetic(&[8.0, 10.0, 12.0], &discrete, &[0.5, 1.5]);
        let first = classify(&spectra, &THRESHOLDS, &ClassifyOptions::default()).unwrap();
        let kept: Vec<(f64, Vec<C>)> = first
            .thetas
            .iter()
            .enumerate()
            .map(|(k, &th)| (th, first.states.iter().map(|s| s.per_theta[k].to_complex()).collect()))
            .collect();
        let second = classify(&kept, &THRESHOLDS, &ClassifyOptions::default()).unwrap();
        prop_assert_eq!(first.states, second.states);
    }

    #[test]
    fn widths_are_never_negative(re in -8.0f64..-0.5, im in -0.02f64..0.0, jitter in 0.0f64..5e-4) {
        let spectra: Vec<(f64, Vec<C>)> = [8.0f64, 10.0, 12.0]
            .iter()
            .map(|&d| (d.to_radians(), vec![C::new(re, im + jitter * (d - 10.0) / 2.0)]))
            .collect();
        let c = classify(&spectra, &THRESHOLDS, &ClassifyOptions::default()).unwrap();
        for s in &c.states {
            prop_assert!(s.energy.gamma >= 0.0 || s.class == StateClass::Bound);
        }
    }
}

fn bound_count(beta: f64, n: usize) -> usize {
    let basis = ChannelBasis {
        dimension: Dimension::Three,
        pair: GaussBasisSpec::new(n, 30.0, 0.02),
        third: GaussBasisSpec::new(n, 25.0, 0.015),
        blocks: vec![(0, 0)],
        jacobi_set: JacobiSet::Two,
    };
    let cfg = MassConfig::new(beta).unwrap();
    let p = assemble(&cfg, &GaussPotential::new(-19.77), &basis, 0.0).unwrap();
    let r = solve_pencil(&p.h_matrix, &p.s_matrix, false, &EigOptions::default()).unwrap();
    let spectra = vec![(0.0, r.eigenvalues)];
    let c = classify(&spectra, &[-8.40927, -0.099665], &ClassifyOptions::default()).unwrap();
    c.count(StateClass::Bound)
}

#[test]
fn bound_count_grows_with_basis() {
    for beta in [0.3, 1.0, 8.0] {
        let small = bound_count(beta, 5);
        let large = bound_count(beta, 9);
        assert!(large >= small, "β = {beta}: {small} bound with 5 ranges, {large} with 9");
    }
}

#[test]
fn bound_count_grows_with_mass_ratio() {
    let counts: Vec<usize> = [0.1, 0.5, 1.0, 4.0, 20.0].iter().map(|&b| bound_count(b, 8)).collect();
    assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
    assert!(counts[0] >= 1);
}
