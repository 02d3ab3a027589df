//! Property-based invariants across modules.

use proptest::prelude::*;

use efpqubo_core::anneal::{resample, Population};
use efpqubo_core::efp::{efp_value, graphs, EfpConfig};
use efpqubo_core::encoding::{decode, BitLayout, BitRole, Scheme};
use efpqubo_core::events::{generate_events, truncate_to_m, JetEvent, Particle};
use efpqubo_core::qubo::QuboProblem;
use efpqubo_core::regress::quantile_summary;
use efpqubo_core::rng::stream_rng;

fn arb_event(max_m: usize) -> impl Strategy<Value = JetEvent> {
    prop::collection::vec((0.1f64..100.0, -1.0f64..1.0, 0.0f64..6.0), 1..=max_m).prop_map(|ps| {
        JetEvent::new(
            ps.into_iter().map(|(pt, y, phi)| Particle::new(pt, y, phi).unwrap()).collect(),
        )
        .unwrap()
    })
}

fn arb_qubo(n: usize) -> impl Strategy<Value = QuboProblem> {
    prop::collection::vec(-2.0f64..2.0, n * (n + 1) / 2)
        .prop_map(move |coeffs| QuboProblem::new(n, coeffs, 0.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn efp_is_permutation_invariant(ev in arb_event(6), which in 0usize..9, seed in 0u64..1000) {
        let catalog = graphs::catalog();
        let graph = &catalog[which].1;
        let config = EfpConfig::default();
        let base = efp_value(graph, &ev, &config);

        // deterministic shuffle of the particle list
        let mut rng = stream_rng(seed, 9, 0);
        let mut particles: Vec<Particle> = ev.particles().to_vec();
        use rand::seq::SliceRandom;
        particles.shuffle(&mut rng);
        let shuffled = JetEvent::new(particles).unwrap();

        let permuted = efp_value(graph, &shuffled, &config);
        prop_assert!((base - permuted).abs() <= 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn decode_ignores_ancillas(bits_seed in 0u64..5000, scheme_single in any::<bool>()) {
        let scheme = if scheme_single { Scheme::L0Single } else { Scheme::L0Double };
        let layout = BitLayout::power_of_two(scheme, -1, 1, 2).unwrap();
        let n = layout.total_bits();
        let mut rng = stream_rng(bits_seed, 8, 0);
        let mut bits: Vec<bool> = (0..n).map(|_| rand::Rng::gen_bool(&mut rng, 0.5)).collect();
        let base = decode(&bits, &layout).unwrap();

        // flipping any ancilla never changes the decoded coefficients
        for offset in 0..layout.bits_per_coeff() {
            if matches!(layout.role_at(offset), BitRole::R | BitRole::Q) {
                for coeff in 0..layout.k_coeffs() {
                    let bit = coeff * layout.bits_per_coeff() + offset;
                    bits[bit] = !bits[bit];
                    prop_assert_eq!(&decode(&bits, &layout).unwrap(), &base);
                    bits[bit] = !bits[bit];
                }
            }
        }
    }

    #[test]
    fn delta_energy_matches_energy_difference(problem in arb_qubo(8), mask in 0u32..256, flip in 0usize..8) {
        let bits: Vec<bool> = (0..8).map(|i| mask >> i & 1 == 1).collect();
        let e0 = problem.energy(&bits).unwrap();
        let delta = problem.delta_energy(&bits, flip).unwrap();
        let mut flipped = bits.clone();
        flipped[flip] = !flipped[flip];
        let e1 = problem.energy(&flipped).unwrap();
        prop_assert!((e1 - e0 - delta).abs() < 1e-9);
    }

    #[test]
    fn generation_and_truncation_preserve_total_pt(seed in 0u64..500, target_m in 1usize..6) {
        let events = generate_events(3, (2, 8), 250.0, 0.4, seed).unwrap();
        for ev in &events {
            prop_assert!((ev.total_pt() - 250.0).abs() < 1e-9 * 250.0);
            let truncated = truncate_to_m(ev, target_m, seed).unwrap();
            prop_assert!(truncated.multiplicity() <= target_m.max(1));
            prop_assert!((truncated.total_pt() - 250.0).abs() < 1e-9 * 250.0);
        }
    }

    #[test]
    fn resample_hits_target_size_exactly(problem in arb_qubo(6), seed in 0u64..500, r0 in 2usize..40) {
        let mut rng = stream_rng(seed, 7, 0);
        let mut pop = Population::random(&problem, r0, &mut rng).unwrap();
        resample(&mut pop, 1.0, 5.0, &mut rng).unwrap();
        prop_assert_eq!(pop.size(), r0);
    }

    #[test]
    fn quantiles_are_ordered_and_bounded(mut values in prop::collection::vec(-100.0f64..100.0, 1..50)) {
        let (med, q25, q75) = quantile_summary(&values).unwrap();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert!(q25 <= med && med <= q75);
        prop_assert!(values[0] <= q25 && q75 <= values[values.len() - 1]);
    }
}
