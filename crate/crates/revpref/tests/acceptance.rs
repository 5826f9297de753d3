//! Acceptance gate: one test per criterion, each printing a PASS line with
//! the measured figures. Tolerances and constants are pinned here.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use revpref::consumer::{best_bundle, SimulatedConsumer};
use revpref::exog::{run_exog, ExogConfig, RandomGridPrices};
use revpref::learnval::{learn_valuations, LearnedValue, SearchStrategy};
use revpref::optprice::{best_candidate, brute_force_opt, candidate_prices};
use revpref::polytope::{HalfspaceSystem, PolytopeError, Sense};
use revpref::profitmax::{regret_curve, run_profit_max};
use revpref::{
    is_uniquely_specified, optimal_prices, MarketInstance, PriceVector, TieBreakPolicy,
};

fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    delta: f64,
    b_range: (f64, f64),
) -> MarketInstance {
    let levels = (1.0 / delta).round() as u32;
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=levels) as f64 * delta).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let b = rng.gen_range(b_range.0..=b_range.1);
    MarketInstance::new(v, c, b, delta).unwrap()
}

/// Criterion 1: greedy consumer vs exhaustive 0.05-grid bundle search.
#[test]
fn criterion_1_consumer_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE5501);
    for trial in 0..500 {
        let n = 1 + trial % 3;
        let delta = if trial % 2 == 0 { 0.25 } else { 0.2 };
        let inst = random_instance(&mut rng, n, delta, (0.0, n as f64 + 0.5));
        let p = PriceVector::new((0..n).map(|_| rng.gen_range(0.01..=1.0)).collect()).unwrap();
        let x = best_bundle(&inst, &p, TieBreakPolicy::Lexicographic);

        let spend_target = inst.budget.min(p.total());
        assert!((x.spend(&p) - spend_target).abs() <= 1e-9, "budget saturation");
        let frac = x.0.iter().filter(|&&t| t > 1e-9 && t < 1.0 - 1e-9).count();
        assert!(frac <= 1, "more than one fractional coordinate");

        let utility = x.dot(&inst.v);
        let mut grid_best = 0.0f64;
        let steps = 21usize;
        let mut idx = vec![0usize; n];
        loop {
            let cand: Vec<f64> = idx.iter().map(|&i| i as f64 * 0.05).collect();
            let spend: f64 = cand.iter().zip(p.as_slice()).map(|(a, b)| a * b).sum();
            if spend <= inst.budget + 1e-9 {
                let u: f64 = cand.iter().zip(&inst.v).map(|(a, b)| a * b).sum();
                grid_best = grid_best.max(u);
            }
            let mut d = 0;
            loop {
                if d == n {
                    break;
                }
                idx[d] += 1;
                if idx[d] < steps {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == n {
                break;
            }
        }
        assert!(utility >= grid_best - 1e-6, "utility {} < grid {}", utility, grid_best);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 1 took {:?}", elapsed);
    println!("criterion 1: PASS (500 instances, {:?})", elapsed);
}

fn criterion_2_3_instances() -> Vec<MarketInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE5502);
    (0..200)
        .map(|trial| {
            let n = 2 + trial % 2;
            let delta = if trial % 4 < 2 { 0.25 } else { 0.2 };
            random_instance(&mut rng, n, delta, (0.0, n as f64 + 0.5))
        })
        .collect()
}

/// Criterion 2: candidate family vs brute-force price grid.
#[test]
fn criterion_2_optprice_optimality() {
    let start = Instant::now();
    for inst in criterion_2_3_instances() {
        let best = best_candidate(&candidate_prices(&inst)).profit;
        let (_, grid_opt) = brute_force_opt(&inst, 0.02).unwrap();
        let slack = (inst.n as f64 / inst.delta) * 0.02 * inst.n as f64;
        assert!(
            best >= grid_opt - slack,
            "candidate profit {} below grid OPT {} - {}",
            best,
            grid_opt,
            slack
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 2 took {:?}", elapsed);
    println!("criterion 2: PASS (200 instances, {:?})", elapsed);
}

/// Criterion 3: perturbed prices are unique and lose at most eps profit
/// under every tie-break policy.
#[test]
fn criterion_3_uniqueness_perturbation() {
    let start = Instant::now();
    for inst in criterion_2_3_instances() {
        let best = best_candidate(&candidate_prices(&inst)).profit;
        let out = optimal_prices(&inst, 0.01).unwrap();
        assert!(is_uniquely_specified(&inst, &out.prices));
        for policy in [
            TieBreakPolicy::Lexicographic,
            TieBreakPolicy::CheapestFirst,
            TieBreakPolicy::MerchantBest,
        ] {
            let x = best_bundle(&inst, &out.prices, policy);
            let profit = x.profit(&out.prices, &inst.c);
            assert!(profit >= best - 0.01 - 1e-9, "profit {} vs bound {}", profit, best - 0.01);
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 3: PASS (200 instances, {:?})", elapsed);
}

/// Criterion 4: exact ratio recovery, query budget, unlearnable audit.
#[test]
fn criterion_4_learnval_exactness_and_queries() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE5504);
    for n in 2..=8usize {
        for delta in [0.25f64, 0.2, 0.1] {
            let budget_bound = 10.0 * n as f64 * ((1.0 - delta) / (delta * delta)).log2();
            for _ in 0..100 {
                let inst = random_instance(&mut rng, n, delta, (0.5, n as f64));
                let inst = MarketInstance::new(inst.v, vec![0.0; n], inst.budget, delta).unwrap();
                let mut oracle = SimulatedConsumer::new(inst.clone(), TieBreakPolicy::CheapestFirst);
                let learned = learn_valuations(&mut oracle, SearchStrategy::Binary).unwrap();

                assert!(
                    (learned.log.count() as f64) <= budget_bound,
                    "{} queries > {}",
                    learned.log.count(),
                    budget_bound
                );
                let mult: Vec<u64> = (0..n).map(|i| inst.grid_multiple(i) as u64).collect();
                for i in 0..n {
                    for j in 0..n {
                        if let (LearnedValue::Ratio(si), LearnedValue::Ratio(sj)) =
                            (&learned.s[i], &learned.s[j])
                        {
                            assert_eq!(
                                si.num as u128 * sj.den as u128 * mult[j] as u128,
                                sj.num as u128 * si.den as u128 * mult[i] as u128,
                                "ratio mismatch at ({}, {}) for v={:?}",
                                i,
                                j,
                                inst.v
                            );
                        }
                    }
                }
                for i in 0..n {
                    if learned.s[i] == LearnedValue::Unlearnable {
                        for _ in 0..1000 {
                            let p = PriceVector::new(
                                (0..n).map(|_| rng.gen_range(0.01..=1.0)).collect(),
                            )
                            .unwrap();
                            let x = best_bundle(&inst, &p, TieBreakPolicy::Lexicographic);
                            assert!(x.0[i] > 1e-9, "unlearnable good {} unpurchased", i);
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "criterion 4 took {:?}", elapsed);
    println!("criterion 4: PASS (2100 instances, {:?})", elapsed);
}

/// Criterion 5: regret shape on the 2-good reference instance.
#[test]
fn criterion_5_profitmax_regret_shape() {
    let start = Instant::now();
    let inst = MarketInstance::new(vec![1.0, 0.5], vec![0.1, 0.2], 1.0, 0.5).unwrap();
    let (_, opt) = brute_force_opt(&inst, 0.01).unwrap();
    assert!((opt - 0.9).abs() < 1e-9);

    let eps = 0.01;
    let horizons = [250usize, 500, 1000, 2000];
    let mut excesses = Vec::new();
    let mut learning_rounds = 0;
    for &t in &horizons {
        let ledger = run_profit_max(&inst, t, Some(eps), Some(opt), TieBreakPolicy::Lexicographic)
            .unwrap();
        learning_rounds = ledger.learning_rounds;
        let regret = ledger.per_round_regret();
        let bound = eps + ledger.learning_rounds as f64 * inst.n as f64 / t as f64;
        assert!(regret <= bound + 1e-9, "regret {} > bound {} at T={}", regret, bound, t);
        // plateau = steady-state regret of the exploit prices; the excess
        // above it is the amortized learning cost, which halves per doubling
        let plateau = ledger.opt_reference - ledger.exploit_profit;
        excesses.push(regret_curve(&ledger, &[t])[0].1 - plateau);
    }
    for (i, pair) in excesses.windows(2).enumerate() {
        if horizons[i] >= 4 * learning_rounds {
            let factor = pair[0] / pair[1];
            assert!(
                (1.8..=2.2).contains(&factor),
                "halving factor {} at T={}",
                factor,
                horizons[i]
            );
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 5: PASS (T in {:?}, learning rounds {}, {:?})", horizons, learning_rounds, elapsed);
}

/// Criterion 6: statistical mistake bound for the exogenous learner.
#[test]
fn criterion_6_exog_mistake_bound() {
    let start = Instant::now();
    for (n, delta) in [(2usize, 0.2f64), (3, 0.1)] {
        let bound = 3.0 * (n as f64 + (n * n) as f64 * (1.0 / delta).ln());
        let mut within_bound = 0;
        let mut quiet_tail = 0;
        for trial in 0..100u64 {
            let seed = 0xACCE5506 ^ (trial.wrapping_mul(0x9e3779b97f4a7c15)) ^ n as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, n, delta, (0.5, n as f64));
            let inst =
                MarketInstance::new(inst.v, vec![0.0; n], inst.budget, delta).unwrap();
            let mut src = RandomGridPrices {
                n,
                step: delta,
                rng: ChaCha8Rng::seed_from_u64(seed ^ 0xDEAD),
            };
            let cfg = ExogConfig::new(delta);
            let log = run_exog(
                &inst,
                &mut src,
                500,
                TieBreakPolicy::Lexicographic,
                &mut rng,
                cfg,
            )
            .unwrap();
            if (log.mistakes as f64) <= bound {
                within_bound += 1;
            }
            let tail: usize = log.rounds[300..].iter().filter(|r| r.mistake).count();
            if tail <= 2 {
                quiet_tail += 1;
            }
            for r in &log.rounds {
                for (a, b) in &r.constraints_added {
                    if *b == 0.0 {
                        let slack: f64 = a.iter().zip(&inst.v).map(|(x, y)| x * y).sum();
                        assert!(slack >= -1e-9, "truth containment violated");
                    }
                }
            }
        }
        assert!(
            within_bound >= 95,
            "(n={}, delta={}): only {}/100 trials within {} mistakes",
            n,
            delta,
            within_bound,
            bound
        );
        assert!(
            quiet_tail >= 90,
            "(n={}, delta={}): only {}/100 trials quiet in final 200 rounds",
            n,
            delta,
            quiet_tail
        );
        println!(
            "criterion 6: (n={}, delta={}) {}/100 within bound {:.1}, {}/100 quiet tails",
            n, delta, within_bound, bound, quiet_tail
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "criterion 6 took {:?}", elapsed);
    println!("criterion 6: PASS ({:?})", elapsed);
}

/// Criterion 7: polytope engine basics.
#[test]
fn criterion_7_polytope_engine() {
    let start = Instant::now();
    let sys = HalfspaceSystem::new(2);
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE5507);
    let mut sum = [0.0f64; 2];
    let mut warm: Option<Vec<f64>> = None;
    for _ in 0..10_000 {
        let z = sys.sample_uniform(&mut rng, 30, warm.as_deref()).unwrap();
        sum[0] += z[0];
        sum[1] += z[1];
        warm = Some(z);
    }
    let mean = [sum[0] / 1e4, sum[1] / 1e4];
    assert!((mean[0] - 0.5).abs() < 0.05 && (mean[1] - 0.5).abs() < 0.05, "mean {:?}", mean);

    let mut cut = HalfspaceSystem::new(2);
    cut.add_constraint(vec![1.0, -4.0], 0.0);
    let w2 = cut.width(1).unwrap();
    assert!((w2 - 0.25).abs() <= 1e-6, "width {}", w2);

    let mut bad = HalfspaceSystem::new(1);
    bad.add_constraint(vec![1.0], 0.6);
    bad.add_constraint(vec![-1.0], -0.4);
    assert_eq!(bad.solve_lp(&[1.0], Sense::Maximize), Err(PolytopeError::Infeasible));

    let elapsed = start.elapsed();
    println!(
        "criterion 7: PASS (mean ({:.3}, {:.3}), width_2 {:.7}, {:?})",
        mean[0], mean[1], w2, elapsed
    );
}
