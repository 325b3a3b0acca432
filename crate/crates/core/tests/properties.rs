mod common;

use common::*;
use infobalance::dilation::dilate;
use infobalance::encodings::{
    classical_mutual_information, ensemble_from_reference_povm, holevo_check, joint_distribution,
    joint_distribution_dual,
};
use infobalance::families::perturbed_reversible;
use infobalance::measures::{chi_quantity, mutual_information, MeasurementAnalysis};
use infobalance::objects::{outcome_probabilities, povm_of, theta_state, Channel, PurifiedInput};
use infobalance::random::{density_with_spectrum, haar_unitary, random_density, random_povm_elements, rng_from_seed};
use infobalance::recovery::{corrected_channel, entanglement_fidelity, entanglement_fidelity_purified, fano_bound_check, petz_family};
use infobalance::tensor::{kron, max_abs, partial_trace_matrix, von_neumann_entropy, ComplexMatrix};
use infobalance::{purify, Instrument, LabeledState, Povm, Subsystem};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn labeled(names: &[(&str, usize)], m: ComplexMatrix) -> LabeledState {
    LabeledState::new(names.iter().map(|&(n, d)| Subsystem::new(n, d)).collect(), m).unwrap()
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn kron_matches_loops(seed in any::<u64>(), r1 in 1usize..4, c1 in 1usize..4, r2 in 1usize..4, c2 in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let a = infobalance::random::ginibre(&mut rng, r1, c1);
        let b = infobalance::random::ginibre(&mut rng, r2, c2);
        prop_assert!(max_abs(&(kron(&a, &b) - kron_loops(&a, &b))) < 1e-14);
    }

    #[test]
    fn partial_trace_matches_brute_force(seed in any::<u64>(), dims in prop::collection::vec(1usize..4, 1..4), mask in any::<u8>()) {
        let mut rng = rng_from_seed(seed);
        let total: usize = dims.iter().product();
        let m = random_density(&mut rng, total, total);
        let keep: Vec<usize> = (0..dims.len()).filter(|p| mask >> p & 1 == 1).collect();
        let fast = partial_trace_matrix(&m, &dims, &keep);
        prop_assert!(max_abs(&(fast - partial_trace_brute(&m, &dims, &keep))) < 1e-12);
    }

    #[test]
    fn full_trace_and_product_marginals(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let a = random_density(&mut rng, da, da);
        let b = random_density(&mut rng, db, db);
        let ab = labeled(&[("A", da), ("B", db)], kron(&a, &b));
        prop_assert!((ab.partial_trace(&[]).unwrap().matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        prop_assert!(max_abs(&(ab.partial_trace(&["A"]).unwrap().matrix() - &a)) < 1e-12);
        let sa = von_neumann_entropy(&LabeledState::on("A", a).unwrap());
        let sb = von_neumann_entropy(&LabeledState::on("B", b).unwrap());
        prop_assert!((ab.entropy() - sa - sb).abs() < 1e-9);
        prop_assert!(ab.entropy() >= 0.0 && ab.entropy() <= ((da * db) as f64).log2() + 1e-9);
    }

    #[test]
    fn entropy_of_known_spectrum(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let spec = random_spectrum(&mut rng, d);
        let rho = density_with_spectrum(&mut rng, &spec);
        prop_assert!((von_neumann_entropy(&state(rho)) - entropy_from_spectrum(&spec)).abs() < 1e-9);
    }

    #[test]
    fn purification_reproduces_state(seed in any::<u64>(), d in 2usize..7) {
        let mut rng = rng_from_seed(seed);
        let rank = rng.random_range(1..=d);
        let rho = random_density(&mut rng, d, rank);
        let p = purify(&state(rho.clone()));
        let back = partial_trace_matrix(p.joint_state().matrix(), &[d, d], &[1]);
        prop_assert!(max_abs(&(back - rho)) < 1e-9);
    }

    #[test]
    fn probabilities_and_povm(seed in any::<u64>()) {
        let instr = random_case(seed, false);
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, instr.d_in());
        let probs = outcome_probabilities(&instr, &rho).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(povm_of(&instr).is_ok());
        let theta = theta_state(&instr, &rho).unwrap();
        let n = instr.n_outcomes();
        for i in 0..theta.dim() {
            for j in 0..theta.dim() {
                if i % n != j % n {
                    prop_assert_eq!(theta.matrix()[(i, j)], num_complex::Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn dilation_extends_average_state(seed in any::<u64>()) {
        let instr = random_case(seed, false);
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, instr.d_in());
        let bundle = dilate(&instr, &purify(&rho)).unwrap();
        let reduced = bundle.theta_full().partial_trace(&["Qp", "X"]).unwrap();
        prop_assert!(max_abs(&(reduced.matrix() - theta_state(&instr, &rho).unwrap().matrix())) < 1e-9);
        let probs = outcome_probabilities(&instr, &rho).unwrap();
        for (a, b) in bundle.probabilities().iter().zip(&probs) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        // revalidates PSD and unit trace
        let full = bundle.theta_full();
        prop_assert!(LabeledState::new(full.labels().to_vec(), full.matrix().clone()).is_ok());
    }

    #[test]
    fn single_kraus_apparatus_factorizes(seed in any::<u64>()) {
        let instr = random_case(seed, true);
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, instr.d_in());
        let bundle = dilate(&instr, &purify(&rho)).unwrap();
        for m in 0..bundle.n_outcomes() {
            if bundle.conditional(m).is_none() {
                continue;
            }
            let ra = bundle.reduced_at(&["R", "App"], m).unwrap();
            let r = bundle.reduced_at(&["R"], m).unwrap();
            prop_assert!(max_abs(&(ra.matrix() - r.matrix())) < 1e-10);
        }
    }

    #[test]
    fn balance_and_tradeoff(seed in any::<u64>(), single in any::<bool>()) {
        let instr = random_case(seed, single);
        let mut rng = rng_from_seed(seed.wrapping_add(1));
        let rho = random_state(&mut rng, instr.d_in());
        let a = MeasurementAnalysis::new(&instr, &rho).unwrap();
        let r = a.balance_report().unwrap();
        prop_assert!(r.residual_balance <= 1e-9);
        prop_assert!(r.unclipped.iota <= r.unclipped.delta + 1e-9);
        prop_assert!(r.unclipped.noise >= -1e-9 && r.unclipped.iota >= -1e-9);
        for v in r.residual_routes.values() {
            prop_assert!(*v <= 1e-9, "{:?}", r.residual_routes);
        }
        prop_assert!(r.disturbance_no_outcomes >= r.unclipped.delta - 1e-9);
        if single {
            prop_assert!(r.unclipped.noise <= 1e-9);
            prop_assert!((r.iota - r.delta).abs() <= 1e-9);
            prop_assert!((r.iota_g - r.iota).abs() <= 1e-9);
        }
    }

    #[test]
    fn iota_depends_only_on_povm(seed in any::<u64>(), d in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, d);
        let povm = random_povm_elements(&mut rng, d);
        let iotas: Vec<f64> = (0..4)
            .map(|_| {
                let d_out = rng.random_range(d..=3);
                let mult = rng.random_range(1..=3);
                let instr = realize_povm(&mut rng, &povm, d_out, mult);
                MeasurementAnalysis::new(&instr, &rho).unwrap().information_gain().unwrap().primary
            })
            .collect();
        let lo = iotas.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = iotas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(hi - lo <= 1e-9);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn corrected_channel_is_trace_preserving(seed in any::<u64>()) {
        let instr = random_case(seed, false);
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, instr.d_in());
        let family = petz_family(&instr, &rho).unwrap();
        prop_assert!(family.members().iter().all(|m| m.channel.tp_deviation() <= 1e-8));
        // zero-probability outcomes have no member, so the composite is TP only on the support
        if outcome_probabilities(&instr, &rho).unwrap().iter().all(|&p| p > 1e-12) {
            prop_assert!(corrected_channel(&instr, &rho, &family).unwrap().tp_deviation() <= 1e-8);
        }
    }

    #[test]
    fn fidelity_ignores_reference_basis(seed in any::<u64>(), d in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, d);
        let ch = Channel::new(d, d, {
            let v = infobalance::random::haar_isometry(&mut rng, 2 * d, d);
            vec![v.rows(0, d).into_owned(), v.rows(d, d).into_owned()]
        }).unwrap();
        let canonical = purify(&rho);
        let u = haar_unitary(&mut rng, d);
        let rotated = PurifiedInput::from_vector(kron(&u, &infobalance::tensor::identity(d)) * canonical.psi(), d, d).unwrap();
        let f1 = entanglement_fidelity_purified(&canonical, &ch).unwrap();
        let f2 = entanglement_fidelity_purified(&rotated, &ch).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-10);
        prop_assert!((f1 - fidelity_trace_formula(rho.matrix(), &ch)).abs() <= 1e-10);
        prop_assert!((-1e-10..=1.0 + 1e-10).contains(&f1));
    }

    #[test]
    fn fano_converse_holds(seed in any::<u64>()) {
        let instr = random_case(seed, false);
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, instr.d_in());
        let family = petz_family(&instr, &rho).unwrap();
        prop_assert!(fano_bound_check(&instr, &rho, &family).unwrap().holds);
    }

    #[test]
    fn exact_reversal_equivalence(seed in any::<u64>(), d in 1usize..4, n in 1usize..4, eta in prop_oneof![Just(0.0), 1e-3f64..1e-1]) {
        let instr = perturbed_reversible(seed, d, n, 2, eta).unwrap();
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, d);
        let delta = MeasurementAnalysis::new(&instr, &rho).unwrap().disturbance().unwrap().primary;
        let f = entanglement_fidelity(&rho, &corrected_channel(&instr, &rho, &petz_family(&instr, &rho).unwrap()).unwrap()).unwrap();
        prop_assert_eq!((f - 1.0).abs() <= 1e-9, delta <= 1e-7, "F_e {} delta {}", f, delta);
    }

    #[test]
    fn holevo_bound_and_routes(seed in any::<u64>()) {
        let instr = random_case(seed, false);
        let mut rng = rng_from_seed(seed);
        let rho = random_state(&mut rng, instr.d_in());
        let input = purify(&rho);
        let r = holevo_check(&input, &instr, 10, seed).unwrap();
        prop_assert!(r.all_within && r.route_residual <= 1e-10);

        let povm = Povm::from_elements(input.r_dim(), random_povm_elements(&mut rng, input.r_dim())).unwrap();
        let enc = ensemble_from_reference_povm(&input, &povm).unwrap();
        let sum = enc.states().iter().fold(ComplexMatrix::zeros(rho.dim(), rho.dim()), |a, s| a + s);
        prop_assert!(max_abs(&(sum - rho.matrix())) <= 1e-9);
        let p = joint_distribution(&enc, &instr).unwrap();
        let dual = joint_distribution_dual(&enc, &dilate(&instr, &input).unwrap()).unwrap();
        prop_assert!((&p - &dual).amax() <= 1e-10);
        let mi = classical_mutual_information(&p).unwrap();
        let mi_t = classical_mutual_information(&p.transpose()).unwrap();
        prop_assert!((mi - mi_t).abs() <= 1e-12);

        // I(X:M) <= χ of the reference ensemble = ι
        let a = MeasurementAnalysis::new(&instr, &rho).unwrap();
        let ens: Vec<(f64, LabeledState)> = a
            .reference_ensemble()
            .into_iter()
            .map(|(w, m)| (w, LabeledState::on("R", m).unwrap()))
            .collect();
        let total: f64 = ens.iter().map(|(w, _)| w).sum();
        let ens: Vec<_> = ens.into_iter().map(|(w, s)| (w / total, s)).collect();
        let chi = chi_quantity(&ens).unwrap();
        prop_assert!(mi <= chi + 1e-9);
        prop_assert!((chi - a.information_gain().unwrap().clipped()).abs() <= 1e-9);
    }
}

#[test]
fn mutual_information_of_classical_copy_matches_shannon() {
    let p = [0.1, 0.6, 0.3];
    let mut m = ComplexMatrix::zeros(9, 9);
    for (i, &pi) in p.iter().enumerate() {
        m[(i * 3 + i, i * 3 + i)] = num_complex::Complex64::new(pi, 0.0);
    }
    let s = labeled(&[("A", 3), ("B", 3)], m);
    let h = entropy_from_spectrum(&p);
    assert!((mutual_information(&s, &["A"], &["B"]).unwrap() - h).abs() < 1e-12);
    let joint = DMatrix::from_fn(3, 3, |i, j| if i == j { p[i] } else { 0.0 });
    assert!((classical_mutual_information(&joint).unwrap() - h).abs() < 1e-12);
}

#[test]
fn realize_povm_keeps_the_povm() {
    let mut rng = rng_from_seed(3);
    let povm = random_povm_elements(&mut rng, 3);
    let instr: Instrument = realize_povm(&mut rng, &povm, 3, 2);
    for ((_, e), p) in povm_of(&instr).unwrap().elements().iter().zip(&povm) {
        assert!(max_abs(&(e - p)) < 1e-12);
    }
}
