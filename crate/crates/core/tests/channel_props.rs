use nosig_core::channels::{
    from_unitary, random_channel, random_measurement_from, random_state, random_unitary,
};
use nosig_core::qcore::{
    c, identity, lift, CMatrix, DensityMatrix, HilbertDims, SectorIndex, Tolerances,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A factor layout, a non-empty sector inside it and the sector's dims.
fn layout() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>)> {
    prop::collection::vec(2usize..=4, 1..=3).prop_flat_map(|dims| {
        let f = dims.len();
        let d = dims.clone();
        prop::sample::subsequence((0..f).collect::<Vec<_>>(), 1..=f).prop_map(move |s| {
            let sd = s.iter().map(|&k| d[k]).collect();
            (d.clone(), s, sd)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_channels_are_complete_and_map_states_to_states(
        (dims, sector, sdims) in layout(),
        kraus in 1usize..=4,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let tol = Tolerances::default();
        let ch = random_channel(
            SectorIndex::new(sector.clone()).unwrap(),
            HilbertDims::new(sdims).unwrap(),
            kraus,
            s1,
        ).unwrap();
        let report = ch.validate(&tol).unwrap();
        prop_assert!(report.valid && report.max_deviation < 1e-10);
        let hd = HilbertDims::new(dims).unwrap();
        let rho = random_state(&hd, s2).unwrap().to_density();
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.min_eigenvalue() >= -1e-9);
        // oracle: sum_i K_i rho K_i^dag with each K_i embedded in the full space
        let mut want = CMatrix::zeros(hd.total(), hd.total());
        for k in ch.operators() {
            let big = lift(k, ch.sector(), &hd).unwrap();
            want += &big * rho.matrix() * big.adjoint();
        }
        prop_assert!(max_diff(out.matrix(), &want) < 1e-12);
    }

    #[test]
    fn adjoint_convention_operators_are_co_isometric(
        dim in 2usize..=6,
        kraus in 1usize..=4,
        seed in any::<u64>(),
    ) {
        let ch = random_channel(
            SectorIndex::single(0),
            HilbertDims::new(vec![dim]).unwrap(),
            kraus,
            seed,
        ).unwrap();
        let mut sum = CMatrix::zeros(dim, dim);
        for k in ch.adjoint_convention_operators() {
            sum += &k * k.adjoint();
        }
        prop_assert!(max_diff(&sum, &identity(dim)) < 1e-10);
    }

    #[test]
    fn unitary_channels_preserve_purity(
        (dims, sector, sdims) in layout(),
        mix in 0.0f64..1.0,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
        s3 in any::<u64>(),
    ) {
        let tol = Tolerances::default();
        let sd = HilbertDims::new(sdims).unwrap();
        let u = random_unitary(sd.total(), s1).unwrap();
        let ch = from_unitary(u, SectorIndex::new(sector).unwrap(), sd, &tol).unwrap();
        let hd = HilbertDims::new(dims).unwrap();
        let a = random_state(&hd, s2).unwrap().to_density();
        let b = random_state(&hd, s3).unwrap().to_density();
        let m = a.matrix() * c(mix, 0.0) + b.matrix() * c(1.0 - mix, 0.0);
        let rho = DensityMatrix::new(m, hd, &tol).unwrap();
        let out = ch.apply(&rho).unwrap();
        prop_assert!((out.purity() - rho.purity()).abs() < 1e-10);
    }

    #[test]
    fn nonselective_measurements_are_idempotent(
        (dims, sector, sdims) in layout(),
        s1 in any::<u64>(),
        s2 in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(s1);
        let ch = random_measurement_from(
            SectorIndex::new(sector).unwrap(),
            HilbertDims::new(sdims).unwrap(),
            &mut rng,
        ).unwrap();
        let rho = random_state(&HilbertDims::new(dims).unwrap(), s2).unwrap().to_density();
        let once = ch.apply(&rho).unwrap();
        let twice = ch.apply(&once).unwrap();
        prop_assert!(max_diff(once.matrix(), twice.matrix()) < 1e-10);
    }
}
