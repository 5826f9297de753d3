//! Randomized invariant checks across the library.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revpref::consumer::{best_bundle, best_bundle_for, merchant_best_bundle, SimulatedConsumer};
use revpref::exog::{run_exog, ExogConfig, RandomGridPrices};
use revpref::learnval::{learn_valuations, LearnedValue, SearchStrategy};
use revpref::optprice::{best_candidate, candidate_prices};
use revpref::polytope::HalfspaceSystem;
use revpref::{optimal_prices, MarketInstance, PriceVector, TieBreakPolicy};

fn instance(max_n: usize) -> impl Strategy<Value = MarketInstance> {
    (prop_oneof![Just(0.25f64), Just(0.2), Just(0.1)], 1..=max_n).prop_flat_map(|(delta, n)| {
        let levels = (1.0 / delta).round() as u32;
        (
            proptest::collection::vec(1..=levels, n),
            proptest::collection::vec(0.0..=1.0f64, n),
            0.0..=(n as f64 + 0.5),
        )
            .prop_map(move |(mult, c, b)| {
                let v = mult.iter().map(|&m| m as f64 * delta).collect();
                MarketInstance::new(v, c, b, delta).unwrap()
            })
    })
}

fn with_prices(max_n: usize) -> impl Strategy<Value = (MarketInstance, PriceVector)> {
    instance(max_n).prop_flat_map(|inst| {
        let n = inst.n;
        proptest::collection::vec(0.01..=1.0f64, n)
            .prop_map(move |p| (inst.clone(), PriceVector::new(p).unwrap()))
    })
}

const POLICIES: [TieBreakPolicy; 3] = [
    TieBreakPolicy::Lexicographic,
    TieBreakPolicy::CheapestFirst,
    TieBreakPolicy::MerchantBest,
];

proptest! {
    #[test]
    fn budget_saturation_and_single_fraction((inst, p) in with_prices(5)) {
        for policy in POLICIES {
            let x = best_bundle(&inst, &p, policy);
            let expected = inst.budget.min(p.total());
            prop_assert!((x.spend(&p) - expected).abs() <= 1e-9);
            let frac = x.0.iter().filter(|&&t| t > 1e-9 && t < 1.0 - 1e-9).count();
            prop_assert!(frac <= 1);
            prop_assert!(x.0.iter().all(|&t| (-1e-12..=1.0 + 1e-12).contains(&t)));
        }
    }

    #[test]
    fn bundle_is_scale_invariant((inst, p) in with_prices(5), scale in 0.1..=10.0f64) {
        let scaled: Vec<f64> = inst.v.iter().map(|v| v * scale).collect();
        for policy in POLICIES {
            let a = best_bundle_for(&inst.v, &p, inst.budget, policy, &inst.c);
            let b = best_bundle_for(&scaled, &p, inst.budget, policy, &inst.c);
            prop_assert!(a.approx_eq(&b, 1e-9));
        }
    }

    #[test]
    fn merchant_best_dominates_other_policies((inst, p) in with_prices(5)) {
        let (_, best) = merchant_best_bundle(&inst, &p);
        for policy in POLICIES {
            let x = best_bundle(&inst, &p, policy);
            prop_assert!(best >= x.profit(&p, &inst.c) - 1e-9);
        }
    }

    #[test]
    fn perturbed_prices_are_unique_and_near_optimal(inst in instance(4)) {
        let out = optimal_prices(&inst, 0.01).unwrap();
        let reference = best_candidate(&candidate_prices(&inst)).profit;
        for policy in POLICIES {
            let x = best_bundle(&inst, &out.prices, policy);
            prop_assert!(x.profit(&out.prices, &inst.c) >= reference - 0.01 - 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn learned_ratios_match_truth(inst in instance(4)) {
        let mut oracle = SimulatedConsumer::new(inst.clone(), TieBreakPolicy::CheapestFirst);
        let learned = learn_valuations(&mut oracle, SearchStrategy::Binary).unwrap();
        let mult: Vec<u64> = (0..inst.n).map(|i| inst.grid_multiple(i) as u64).collect();
        for i in 0..inst.n {
            for j in 0..inst.n {
                if let (LearnedValue::Ratio(si), LearnedValue::Ratio(sj)) =
                    (&learned.s[i], &learned.s[j])
                {
                    // s_i / s_j must equal v_i / v_j exactly
                    prop_assert_eq!(
                        si.num as u128 * sj.den as u128 * mult[j] as u128,
                        sj.num as u128 * si.den as u128 * mult[i] as u128
                    );
                }
            }
        }
        // unlearnable goods really are purchased at random prices
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for i in 0..inst.n {
            if learned.s[i] == LearnedValue::Unlearnable {
                for _ in 0..100 {
                    let p = PriceVector::new(
                        (0..inst.n).map(|_| rng.gen_range(0.01..=1.0)).collect(),
                    )
                    .unwrap();
                    let x = best_bundle(&inst, &p, TieBreakPolicy::Lexicographic);
                    prop_assert!(x.0[i] > 1e-9);
                }
            }
        }
    }

    #[test]
    fn polytope_widths_shrink_and_samples_stay_feasible(
        ratios in proptest::collection::vec((0usize..3, 0usize..3, 0.05..=20.0f64), 0..6),
        seed in any::<u64>(),
    ) {
        let mut sys = HalfspaceSystem::new(3);
        let before = sys.widths().unwrap().widths;
        for (i, j, r) in ratios {
            if i != j {
                let mut a = vec![0.0; 3];
                a[i] = 1.0;
                a[j] = -r;
                sys.add_constraint(a, 0.0);
            }
        }
        let after = sys.widths().unwrap().widths;
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(a <= &(b + 2e-7));
        }
        if after.iter().all(|&w| w >= 1e-9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z = sys.sample_uniform(&mut rng, 60, None).unwrap();
            prop_assert!(sys.contains(&z, 1e-9));
        }
    }

    #[test]
    fn exog_truth_containment(inst in instance(3), seed in any::<u64>()) {
        let mut cfg = ExogConfig::new(inst.delta);
        cfg.mixing_steps = Some(40);
        let mut src = RandomGridPrices {
            n: inst.n,
            step: inst.delta,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
        let log = run_exog(&inst, &mut src, 30, TieBreakPolicy::Lexicographic, &mut rng, cfg)
            .unwrap();
        for r in &log.rounds {
            for (a, b) in &r.constraints_added {
                if *b == 0.0 {
                    let slack: f64 = a.iter().zip(&inst.v).map(|(x, y)| x * y).sum();
                    prop_assert!(slack >= -1e-9);
                }
            }
        }
    }
}
