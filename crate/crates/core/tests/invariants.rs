use banksim::engine::run_scenario_checked;
use banksim::interbank::{allocate_pooled_credit, compute_pooling_state, transfer_reserves, Matching};
use banksim::{
    BankBalanceSheet, CheckMode, InterbankLoanLedger, LendingBehaviour, MatchingMode, ReserveBase, RngStream,
    ScenarioConfig, StreamLabel, TriangularParams,
};
use proptest::prelude::*;

fn base_strategy() -> impl Strategy<Value = ReserveBase> {
    prop_oneof![
        Just(ReserveBase::Narrow),
        Just(ReserveBase::Broad),
        Just(ReserveBase::Securitised)
    ]
}

fn law(max: f64) -> impl Strategy<Value = TriangularParams> {
    (0.0..max, 0.0..max, 0.0..max).prop_map(|(a, b, c)| {
        let mut v = [a, b, c];
        v.sort_by(f64::total_cmp);
        TriangularParams::new(v[0], v[1], v[2]).unwrap()
    })
}

prop_compose! {
    fn small_config()(
        seed in 0..=i64::MAX as u64,
        periods in 1usize..6,
        banks in 2usize..6,
        customers in 8usize..60,
        gamma in 0.02f64..0.5,
        fr in any::<bool>(),
        base in base_strategy(),
        theta in law(1.0),
        psi in law(1.0),
        omega in 0.0f64..=1.0,
        phi in 0.0f64..=1.0,
        endogenous in any::<bool>(),
        xi1 in 0.0f64..=1.0,
        xi2 in 0.0f64..=1.0,
        flags in any::<(bool, bool, bool)>(),
    ) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::baseline(seed);
        cfg.periods = periods;
        cfg.banks = banks;
        cfg.customers = customers;
        cfg.gamma_rr = gamma;
        cfg.lending = if fr { LendingBehaviour::FractionalReserve } else { LendingBehaviour::MoneyMultiplication };
        cfg.reserve_base = base;
        cfg.absorption = theta;
        cfg.repayment = psi;
        cfg.omega = omega;
        cfg.phi = phi;
        if endogenous {
            cfg.matching = MatchingMode::Endogenous;
            cfg.alpha = Some(1.0);
            cfg.lambda = Some(1.0);
        }
        cfg.xi1 = xi1;
        cfg.xi2 = xi2;
        (cfg.fixed_payment_matrix, cfg.transfer_on_issue, cfg.relax_target_base) = flags;
        cfg
    }
}

fn sheet(a1: f64, a2: f64, l1: f64) -> BankBalanceSheet {
    BankBalanceSheet {
        a1,
        a2,
        l1,
        l2: a1 + a2 - l1,
        a4: 10.0,
        l4: 10.0,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    // Every phase keeps each bank's identities, the ledger and total currency intact.
    #[test]
    fn random_scenarios_keep_the_books(cfg in small_config()) {
        let trace = run_scenario_checked(&cfg, CheckMode::PerPhase).unwrap();
        prop_assert_eq!(trace.periods.len(), cfg.periods);
        for record in &trace.periods {
            let a1: f64 = record.banks.iter().map(|b| b.a1).sum();
            prop_assert!((a1 - cfg.base_money).abs() <= 1e-9 * cfg.base_money);
            let a3: f64 = record.banks.iter().map(|b| b.a3).sum();
            let l3: f64 = record.banks.iter().map(|b| b.l3).sum();
            let scale: f64 = record.banks.iter().map(|b| b.scale()).sum();
            prop_assert!((a3 - l3).abs() <= 1e-9 * scale, "A3 {} L3 {}", a3, l3);
            for b in &record.banks {
                prop_assert!(b.a2 >= -1e-6);
                prop_assert!(b.l5 >= 0.0 && b.a5 == b.l5);
            }
        }
    }

    #[test]
    fn same_seed_same_trace(cfg in small_config()) {
        let a = run_scenario_checked(&cfg, CheckMode::PerPeriod).unwrap();
        let b = run_scenario_checked(&cfg, CheckMode::PerPhase).unwrap();
        for (x, y) in a.periods.iter().zip(&b.periods) {
            prop_assert_eq!(&x.banks, &y.banks);
            prop_assert_eq!(&x.profit, &y.profit);
            prop_assert_eq!(x.flows, y.flows);
        }
    }

    #[test]
    fn no_pooling_and_no_wires_means_no_interbank(mut cfg in small_config()) {
        cfg.phi = 1.0;
        cfg.xi2 = 0.0;
        let trace = run_scenario_checked(&cfg, CheckMode::PerPeriod).unwrap();
        for record in &trace.periods {
            for b in &record.banks {
                prop_assert_eq!(b.a3, 0.0);
                prop_assert_eq!(b.l3, 0.0);
            }
        }
    }

    #[test]
    fn config_round_trips_through_toml(cfg in small_config()) {
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn triangular_draws_stay_in_support(l in law(5.0), seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, StreamLabel::Rates, 0);
        for _ in 0..64 {
            let x = l.sample(&mut rng);
            prop_assert!(x >= l.lower() && x <= l.upper());
        }
    }

    // A reserve transfer moves value between the two sheets without creating any.
    #[test]
    fn transfers_conserve_reserves(
        a1 in 0.0f64..500.0,
        a2 in 0.0f64..500.0,
        amount in 0.0f64..1500.0,
        w in (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0),
        base in base_strategy(),
    ) {
        let mut banks = vec![sheet(a1, a2, a1 * 0.5), sheet(100.0, 50.0, 80.0)];
        let total = w.0 + w.1 + w.2;
        let weights = if total > 0.0 { [w.0 / total, w.1 / total, w.2 / total] } else { [1.0, 0.0, 0.0] };
        let mut loans = InterbankLoanLedger::new();
        let before: f64 = banks.iter().map(|b| b.a1 + b.a2 + b.a3).sum();
        let moved = transfer_reserves(&mut banks, &mut loans, 0, 1, amount, weights, base);
        let after: f64 = banks.iter().map(|b| b.a1 + b.a2 + b.a3).sum();
        prop_assert!(moved >= 0.0 && moved <= amount + 1e-9);
        prop_assert!((before - after).abs() < 1e-9 * before.max(1.0));
        prop_assert!(banks[0].a1 >= -1e-9 && banks[0].a2 >= -1e-9);
    }

    // Pooling never lends beyond a lender's excess or a borrower's need.
    #[test]
    fn pooling_respects_excess_and_need(
        reserves in prop::collection::vec(1.0f64..400.0, 2..7),
        phi in 0.0f64..1.0,
        seed in any::<u64>(),
        base in base_strategy(),
        transfer in any::<bool>(),
    ) {
        let mut banks: Vec<BankBalanceSheet> = reserves.iter().map(|&r| sheet(r, 1000.0 - r, 1000.0)).collect();
        let targets = vec![0.2; banks.len()];
        let mut rng = RngStream::new(seed, StreamLabel::Matching, 1);
        let state = compute_pooling_state(&banks, base, &targets, phi, Matching::ExogenousRandom, &mut rng).unwrap();
        let mut loans = InterbankLoanLedger::new();
        let out = allocate_pooled_credit(&mut banks, &mut loans, &state, base, 1, transfer).unwrap();
        let n = banks.len();
        let mut lent = vec![0.0; n];
        let mut borrowed = vec![0.0; n];
        for &(l, b, x) in &out.loans {
            prop_assert!(x >= 0.0);
            prop_assert!(state.is_actual(l, b));
            lent[l] += x;
            borrowed[b] += x;
        }
        for i in 0..n {
            prop_assert!(lent[i] <= state.excess[i] * (1.0 + 1e-9) + 1e-9);
            prop_assert!(borrowed[i] <= state.need[i] * (1.0 + 1e-9) + 1e-9);
            prop_assert!((borrowed[i] + out.unmet[i] - state.need[i]).abs() < 1e-6);
            prop_assert!(state.excess[i] * state.need[i] == 0.0);
        }
        prop_assert!(loans.check_consistency(&banks, 1e-9).is_ok());
    }
}
