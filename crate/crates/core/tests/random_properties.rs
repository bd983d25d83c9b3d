mod common;

use heston_core::random::{
    sample_gamma, sample_nccs, sobol_point, NccsParams, PseudoStream, SobolSequence, UniformSource,
    UniformStream,
};
use heston_core::schemes::{euler_update, milstein_update, PathState};
use heston_core::HestonParams;
use proptest::prelude::*;

#[test]
fn gamma_matches_statrs_cdf_and_quadrature() {
    // the quadrature oracle itself agrees with the regularised incomplete Gamma
    let xs = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    let q = common::gamma_cdf_quadrature(0.634, 2.0, &xs);
    for (x, f) in xs.iter().zip(q) {
        let want = statrs::function::gamma::gamma_lr(0.634, x / 2.0);
        assert!((f - want).abs() < 1e-7, "{x}: {f} vs {want}");
    }
    let mut s = PseudoStream::new(1, 0);
    let draws = common::sorted(
        (0..200_000)
            .map(|_| sample_gamma(&mut s, 0.634, 2.0))
            .collect(),
    );
    let cdf: Vec<f64> = draws
        .iter()
        .map(|&x| statrs::function::gamma::gamma_lr(0.634, x / 2.0))
        .collect();
    assert!(common::ks_one_sample(&draws, &cdf) < 0.004);
}

#[test]
fn nccs_matches_squared_normals() {
    let p = NccsParams::new(3.0, 4.5).unwrap();
    let mut s = UniformStream::pseudo(2, 0);
    let draws = common::sorted(
        (0..200_000)
            .map(|_| sample_nccs(&mut s, p).unwrap())
            .collect(),
    );
    let oracle = common::sorted(common::nccs_by_squares(3, 4.5, 1_000_000, 3));
    assert!(common::ks_two_sample(&draws, &oracle) < 0.005);
}

#[test]
fn property_a_low_dimensions() {
    for d in 1..=6 {
        assert!(common::has_property_a(d), "dimension {d}");
    }
}

#[test]
fn sobol_stream_walks_points_then_coordinates() {
    let mut s = UniformStream::sobol(0, 3, 5, 4).unwrap();
    let mut got = [0.0; 6];
    got.iter_mut().for_each(|x| *x = s.next_uniform());
    let first = sobol_point(3, 21).unwrap();
    let second = sobol_point(3, 22).unwrap();
    assert_eq!(&got[..3], &first[..]);
    assert_eq!(&got[3..], &second[..]);
}

proptest! {
    #[test]
    fn streams_are_reproducible(seed in any::<u64>(), index in any::<u64>()) {
        let mut a = UniformStream::pseudo(seed, index);
        let mut b = UniformStream::pseudo(seed, index);
        for _ in 0..16 {
            let u = a.next_uniform();
            prop_assert!(u > 0.0 && u < 1.0);
            prop_assert_eq!(u.to_bits(), b.next_uniform().to_bits());
        }
    }

    #[test]
    fn sobol_points_lie_in_open_cube(dim in 1usize..64, index in 1u64..1_000_000) {
        let mut seq = SobolSequence::new(dim, index).unwrap();
        let mut p = vec![0.0; dim];
        seq.next_point(&mut p);
        prop_assert!(p.iter().all(|&x| x > 0.0 && x < 1.0));
        prop_assert_eq!(p, sobol_point(dim, index).unwrap());
    }

    #[test]
    fn aligned_sobol_blocks_keep_property_a(d in 1usize..=4, block in 0u64..64) {
        let n = 1u64 << d;
        let mut cells = vec![false; n as usize];
        for i in block * n..(block + 1) * n {
            let p = sobol_point(d, i).unwrap();
            let c = p.iter().enumerate().fold(0usize, |c, (k, &x)| c | (usize::from(x >= 0.5) << k));
            prop_assert!(!cells[c]);
            cells[c] = true;
        }
    }

    #[test]
    fn nccs_draws_are_non_negative(dof in 1.01f64..20.0, lambda in 0.0f64..50.0, seed in any::<u64>()) {
        let mut s = UniformStream::pseudo(seed, 0);
        let p = NccsParams::new(dof, lambda).unwrap();
        for _ in 0..32 {
            prop_assert!(sample_nccs(&mut s, p).unwrap() >= 0.0);
        }
    }

    #[test]
    fn truncated_variance_never_negative(
        sigma in 0.05f64..2.0,
        v in 0.0f64..0.2,
        z1 in -6.0f64..6.0,
        z2 in -6.0f64..6.0,
        dt in 1e-4f64..0.5,
    ) {
        let p = HestonParams::new(2.0, 0.04, sigma, -0.5, 0.03, v).unwrap();
        let state = PathState { s: 100.0, v, t: 0.0 };
        let e = euler_update(&p, state, dt, z1, z2);
        let m = milstein_update(&p, state, dt, z1, z2);
        prop_assert!(e.v >= 0.0 && m.v >= 0.0);
        prop_assert!(e.s > 0.0 && m.s > 0.0);
        // both schemes share the asset update given the start state
        prop_assert_eq!(e.s, m.s);
    }
}
