//! Whole-circuit equivalence of the gate-set lowerings: every synthesized
//! circuit family, lowered to the CX gate set and to the trapped-ion native
//! set, must implement the same unitary as the abstract circuit up to one
//! global phase.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dcqo_core::circuit::{
    build_dcqo_circuit, build_dqa_circuit, build_hdcqo_circuit, build_qaoa_circuit, AnsatzSpec,
    AnsatzVariant, Circuit, DcqoVariant,
};
use dcqo_core::ising::random_spin_glass;
use dcqo_core::lower::{lower_to_cx, lower_to_ms};
use dcqo_core::sim::{dense_unitary, unitaries_equal_up_to_phase};

fn assert_lowerings_preserve_unitary(c: &Circuit, label: &str) {
    let reference = dense_unitary(c).unwrap();
    let cx = lower_to_cx(c).unwrap();
    let ms = lower_to_ms(c).unwrap();
    let u_cx = dense_unitary(&cx).unwrap();
    let u_ms = dense_unitary(&ms).unwrap();
    assert!(
        unitaries_equal_up_to_phase(&reference, &u_cx, 1e-9),
        "{label}: CX lowering changed the unitary"
    );
    assert!(
        unitaries_equal_up_to_phase(&reference, &u_ms, 1e-9),
        "{label}: ion-native lowering changed the unitary"
    );
}

#[test]
fn every_circuit_family_survives_both_lowerings() {
    for seed in 0..6u64 {
        let m = random_spin_glass(4, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut angles = |k: usize| -> Vec<f64> {
            (0..k)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect()
        };

        let dqa = build_dqa_circuit(&m, 2, 0.7).unwrap();
        assert_lowerings_preserve_unitary(&dqa, &format!("seed {seed} annealing"));

        let full = build_dcqo_circuit(&m, 2, 0.35, DcqoVariant::Full).unwrap();
        assert_lowerings_preserve_unitary(&full, &format!("seed {seed} counterdiabatic full"));

        let cd = build_dcqo_circuit(&m, 3, 1.0, DcqoVariant::CdOnly).unwrap();
        assert_lowerings_preserve_unitary(&cd, &format!("seed {seed} counterdiabatic impulse"));

        let qaoa = build_qaoa_circuit(&m, 2, &angles(4)).unwrap();
        assert_lowerings_preserve_unitary(&qaoa, &format!("seed {seed} alternating ansatz"));

        for variant in [
            AnsatzVariant::TwoParam,
            AnsatzVariant::PerSite,
            AnsatzVariant::PerSiteZyOnly,
        ] {
            let spec = AnsatzSpec { variant, layers: 2 };
            let params = angles(spec.param_count(m.n()));
            let hd = build_hdcqo_circuit(&m, &spec, &params).unwrap();
            assert_lowerings_preserve_unitary(
                &hd,
                &format!("seed {seed} parameterized {variant:?}"),
            );
        }
    }
}

#[test]
fn lowerings_handle_sparse_models_without_one_body_terms() {
    use dcqo_core::ising::IsingModel;
    // A ring of couplings with no fields exercises the pair-only gate paths.
    let m = IsingModel::new(
        vec![0.0; 4],
        [((0, 1), 0.8), ((1, 2), -0.6), ((2, 3), 0.4), ((0, 3), -0.9)],
        0.0,
    )
    .unwrap();
    let cd = build_dcqo_circuit(&m, 2, 1.0, DcqoVariant::CdOnly).unwrap();
    assert_lowerings_preserve_unitary(&cd, "coupling ring impulse");
    let full = build_dcqo_circuit(&m, 2, 0.4, DcqoVariant::Full).unwrap();
    assert_lowerings_preserve_unitary(&full, "coupling ring full");
}

#[test]
fn lowerings_handle_field_only_models_without_pair_terms() {
    use dcqo_core::ising::IsingModel;
    let m = IsingModel::new(vec![0.9, -0.4, 0.7], [], 0.0).unwrap();
    let cd = build_dcqo_circuit(&m, 2, 1.0, DcqoVariant::CdOnly).unwrap();
    assert_lowerings_preserve_unitary(&cd, "field-only impulse");
    let dqa = build_dqa_circuit(&m, 3, 0.9).unwrap();
    assert_lowerings_preserve_unitary(&dqa, "field-only annealing");
}
