use nosig_core::gedanken::{
    alice_coherence_ok, bob_can_decohere, entangled_traps_overlap, ntrap_brute_force,
    ntrap_overlap, release_coordination, sphere_overlap, sphere_total_closed_form,
    EntangledTrapModel, Regime, Scenario, SphereArrangement, TrapArray, FULL_SPHERE,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// `sum_i a_i (x)_k v_i^k` as one dense vector.
fn dense(coeffs: &[Complex64], per_branch: &[&Vec<Vec<Complex64>>]) -> Vec<Complex64> {
    let mut total: Option<Vec<Complex64>> = None;
    for (a, traps) in coeffs.iter().zip(per_branch) {
        let mut v = vec![*a];
        for t in traps.iter() {
            v = v
                .iter()
                .flat_map(|x| t.iter().map(move |y| x * y))
                .collect();
        }
        total = Some(match total {
            None => v,
            Some(acc) => acc.iter().zip(&v).map(|(p, q)| p + q).collect(),
        });
    }
    total.expect("at least one branch")
}

fn coefficients() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=4).prop_filter_map(
        "non-zero coefficients",
        |raw| {
            let v: Vec<Complex64> = raw.iter().map(|&(r, i)| Complex64::new(r, i)).collect();
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (n > 1e-3).then(|| v.iter().map(|z| z / n).collect())
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entangled_overlap_matches_dense_model(
        coeffs in coefficients(),
        traps in 1usize..=4,
        eps in 0.0f64..0.5,
        leak in 0.0f64..0.8,
    ) {
        let m = EntangledTrapModel::block_model(coeffs.clone(), traps, eps, leak).unwrap();
        let o = entangled_traps_overlap(&m);
        let lefts: Vec<_> = m.branches().iter().map(|b| &b.left).collect();
        let rights: Vec<_> = m.branches().iter().map(|b| &b.right).collect();
        let l = dense(&coeffs, &lefts);
        let r = dense(&coeffs, &rights);
        let want: Complex64 = l.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
        prop_assert!((o.exact - want).norm() < 1e-12);
        prop_assert!(o.bound_holds());
    }

    #[test]
    fn orthogonal_cross_branches_leave_the_diagonal_sum(
        coeffs in coefficients(),
        traps in 1usize..=6,
        eps in 0.0f64..0.5,
    ) {
        let m = EntangledTrapModel::block_model(coeffs, traps, eps, 0.0).unwrap();
        let o = entangled_traps_overlap(&m);
        prop_assert!(o.deviation() < 1e-12);
        prop_assert!((o.approx.re - (1.0 - eps).powi(traps as i32)).abs() < 1e-12);
    }

    #[test]
    fn causal_window_implication_holds_pointwise(
        d in 1e-3f64..1e3,
        u in 0.0f64..1.0,
        v in 0.0f64..1.0,
        w in 0.0f64..2.0,
        grav in any::<bool>(),
    ) {
        let regime = if grav { Regime::Gravitational } else { Regime::Electromagnetic };
        let k = if grav { 2 } else { 1 };
        let s = Scenario {
            distance: d,
            t_alice: u * d,
            t_bob: v * d,
            dipole: w * d,
            quadrupole: w * d.powi(k),
            regime,
            ..Scenario::default()
        };
        if alice_coherence_ok(&s) && s.in_causal_window() {
            prop_assert!(!bob_can_decohere(&s).unwrap());
        }
    }

    #[test]
    fn sphere_total_is_bit_identical_across_radii(
        l1 in 0.1f64..1e3,
        l2 in 0.1f64..1e3,
        density in 0.01f64..10.0,
        phi in 0.01f64..0.99,
        omega in 0.01f64..FULL_SPHERE,
        dipole in 0.0f64..3.0,
        sigma in 0.1f64..3.0,
    ) {
        let s = Scenario { dipole, charge_bob: sigma, mass_bob: 1.0, ..Scenario::default() };
        let a = sphere_overlap(&SphereArrangement::new(l1, density, phi, omega).unwrap(), &s).unwrap();
        let b = sphere_overlap(&SphereArrangement::new(l2, density, phi, omega).unwrap(), &s).unwrap();
        prop_assert_eq!(a.total.to_bits(), b.total.to_bits());
        prop_assert!(a.rounding_ratio() <= 1.0, "{a:?}");
    }

    #[test]
    fn decoherence_grows_with_every_parameter(
        density in 0.01f64..10.0,
        phi in 0.01f64..0.99,
        omega in 0.01f64..6.0,
        dipole in 0.0f64..3.0,
        bump in 1.0f64..2.0,
    ) {
        let base = sphere_total_closed_form(omega, density, dipole, phi).unwrap();
        let more = [
            sphere_total_closed_form(omega, density * bump, dipole, phi).unwrap(),
            sphere_total_closed_form(omega * bump, density, dipole, phi).unwrap(),
            sphere_total_closed_form(omega, density, dipole * bump, phi).unwrap(),
            sphere_total_closed_form(omega, density, dipole, (phi * bump).min(1.0)).unwrap(),
        ];
        for t in more {
            prop_assert!(1.0 - t >= 1.0 - base);
        }
    }

    #[test]
    fn trap_decoherence_grows_with_count(n in 1usize..200, eps in 0.0f64..0.99) {
        let a = ntrap_overlap(&TrapArray::new(n, eps, None).unwrap());
        let b = ntrap_overlap(&TrapArray::new(n + 1, eps, None).unwrap());
        prop_assert!(1.0 - b.exact >= 1.0 - a.exact);
        prop_assert!(b.linearized <= a.linearized);
    }

    #[test]
    fn sufficient_release_condition_implies_spacelike(
        radii in prop::collection::vec(0.1f64..100.0, 1..12),
        t_alice in 0.0f64..50.0,
    ) {
        for c in release_coordination(&radii, t_alice) {
            prop_assert!(c.consistent(), "{c:?}");
        }
    }
}

#[test]
fn brute_force_matches_closed_form_on_the_grid() {
    for n in 1..=8 {
        for eps in [0.0, 0.01, 0.1, 0.5] {
            let dense = ntrap_brute_force(n, eps).unwrap();
            let closed = ntrap_overlap(&TrapArray::new(n, eps, None).unwrap()).exact;
            assert!(
                (dense - closed).abs() < 1e-12,
                "n={n} eps={eps}: {dense} vs {closed}"
            );
        }
    }
}
