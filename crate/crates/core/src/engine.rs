//! The period pipeline, run traces, multi-seed ensembles and φ comparisons.

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bank_credit::{realise_lending, repay_customer_loans, LendingPolicy};
use crate::central_bank::{grant_guarantees, remove_guarantees};
use crate::config::ScenarioConfig;
use crate::equity::accrue_equity;
use crate::error::{Error, Result};
use crate::interbank::{
    allocate_pooled_credit, compute_pooling_state, repay_interbank_loans, InterbankLoanLedger, Matching,
};
use crate::ledger::{check_identities, initialise, BankBalanceSheet, CustomerBook};
use crate::payments::{settle_cash_payments, settle_wire_transfers, PaymentFlows};
use crate::stochastics::{draw_period_rates, RngStreams, StreamLabel};
use crate::Money;

/// Relative tolerance of every accounting check.
pub const TOLERANCE: f64 = 1e-9;

/// When identities are verified inside a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckMode {
    /// Once, after the period's last phase.
    #[default]
    PerPeriod,
    /// After every phase.
    PerPhase,
}

/// Flow statistics of one period.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PeriodFlows {
    pub guarantees_removed: Money,
    pub cash_interbank: Money,
    pub wire_gross: Money,
    pub wire_interbank: Money,
    pub customer_repaid: Money,
    pub new_customer_loans: Money,
    pub interbank_triggered: usize,
    pub interbank_repaid: Money,
    pub interbank_unpaid: Money,
    pub pooled_interbank: Money,
    pub guarantees: usize,
    pub guarantee_volume: Money,
    pub interbank_rate: f64,
}

/// End-of-period state of one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodRecord {
    /// 1-based; period 0 is the initial state.
    pub period: usize,
    pub banks: Vec<BankBalanceSheet>,
    pub profit: Vec<Money>,
    pub target_ratio: Vec<f64>,
    pub flows: PeriodFlows,
    /// Largest relative identity residual seen during the period.
    pub max_residual: f64,
    pub loans_outstanding: usize,
}

/// Names of the aggregate series, in CSV order.
pub const AGGREGATE_SERIES: [&str; 19] = [
    "A1",
    "A2",
    "A3",
    "A4",
    "A5",
    "L1",
    "L2",
    "L3",
    "L4",
    "L5",
    "money",
    "profit",
    "new_customer_loans",
    "customer_repaid",
    "new_interbank",
    "wire_interbank",
    "pooled_interbank",
    "interbank_repaid",
    "guarantees",
];

/// Index of a name in [`AGGREGATE_SERIES`].
pub fn series_index(name: &str) -> Option<usize> {
    AGGREGATE_SERIES.iter().position(|s| *s == name)
}

impl PeriodRecord {
    /// System totals of each item, `A1..A5, L1..L5`.
    pub fn totals(&self) -> [Money; 10] {
        let mut out = [0.0; 10];
        for bank in &self.banks {
            for (o, v) in out.iter_mut().zip(bank.items()) {
                *o += v;
            }
        }
        out
    }

    /// Aggregate money `L1 + L2 + L3`.
    pub fn money(&self) -> Money {
        self.banks.iter().map(|b| b.deposits()).sum()
    }

    /// Values in [`AGGREGATE_SERIES`] order.
    pub fn aggregates(&self) -> [f64; 19] {
        let t = self.totals();
        let f = &self.flows;
        let mut out = [0.0; 19];
        out[..10].copy_from_slice(&t);
        out[10] = t[5] + t[6] + t[7];
        out[11] = self.profit.iter().sum();
        out[12] = f.new_customer_loans;
        out[13] = f.customer_repaid;
        out[14] = f.wire_interbank + f.pooled_interbank;
        out[15] = f.wire_interbank;
        out[16] = f.pooled_interbank;
        out[17] = f.interbank_repaid;
        out[18] = f.guarantees as f64;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTrace {
    pub config: ScenarioConfig,
    /// SHA-256 of the canonical TOML form of `config`.
    pub config_hash: String,
    pub initial: Vec<BankBalanceSheet>,
    pub periods: Vec<PeriodRecord>,
}

impl SimulationTrace {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn series(&self, name: &str) -> Vec<f64> {
        let k = series_index(name).unwrap_or_else(|| panic!("unknown series {name}"));
        self.periods.iter().map(|p| p.aggregates()[k]).collect()
    }

    pub fn money_series(&self) -> Vec<Money> {
        self.periods.iter().map(PeriodRecord::money).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.periods.iter().map(|p| p.max_residual).fold(0.0, f64::max)
    }

    pub fn metrics(&self) -> RunMetrics {
        RunMetrics::from_trace(self)
    }
}

pub fn config_hash(config: &ScenarioConfig) -> String {
    format!("{:x}", Sha256::digest(config.to_toml().as_bytes()))
}

/// A single run in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: ScenarioConfig,
    policy: LendingPolicy,
    matching: Matching,
    streams: RngStreams,
    banks: Vec<BankBalanceSheet>,
    book: CustomerBook,
    loans: InterbankLoanLedger,
    period: usize,
    check: CheckMode,
    fixed_flows: Option<PaymentFlows>,
    residual: f64,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let (banks, book) = initialise(&config)?;
        let streams = RngStreams::new(config.seed);
        let matching = match config.partner_search() {
            None => Matching::ExogenousRandom,
            Some((alpha, lambda)) => Matching::EndogenousPartnerSearch { alpha, lambda },
        };
        let fixed_flows = config.fixed_payment_matrix.then(|| {
            PaymentFlows::draw(
                config.customers,
                config.banks,
                config.xi1,
                config.xi2,
                &mut streams.stream(StreamLabel::CashMatrix, 0),
                &mut streams.stream(StreamLabel::WireMatrix, 0),
            )
        });
        Ok(Self {
            policy: LendingPolicy::from_config(&config),
            matching,
            streams,
            banks,
            book,
            loans: InterbankLoanLedger::new(),
            period: 0,
            check: CheckMode::default(),
            fixed_flows,
            residual: 0.0,
            config,
        })
    }

    pub fn with_check_mode(mut self, check: CheckMode) -> Self {
        self.check = check;
        self
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn banks(&self) -> &[BankBalanceSheet] {
        &self.banks
    }

    pub fn book(&self) -> &CustomerBook {
        &self.book
    }

    pub fn loans(&self) -> &InterbankLoanLedger {
        &self.loans
    }

    /// Periods completed so far.
    pub fn period(&self) -> usize {
        self.period
    }

    fn verify(&mut self, phase: &'static str, last: bool) -> Result<()> {
        if self.check == CheckMode::PerPeriod && !last {
            return Ok(());
        }
        let period = self.period + 1;
        let report = check_identities(&self.banks, &self.book, TOLERANCE);
        self.residual = self.residual.max(report.max_relative());
        if !report.is_ok() {
            return Err(Error::IdentityViolation {
                period,
                phase,
                detail: report.describe(),
            });
        }
        self.loans
            .check_consistency(&self.banks, TOLERANCE)
            .map_err(|e| Error::IdentityViolation {
                period,
                phase,
                detail: e.to_string(),
            })?;
        let currency: Money = self.banks.iter().map(|b| b.a1).sum();
        let drift = (currency - self.config.base_money).abs() / self.config.base_money;
        self.residual = self.residual.max(drift);
        if drift > TOLERANCE {
            return Err(Error::IdentityViolation {
                period,
                phase,
                detail: format!("total currency {currency} differs from {}", self.config.base_money),
            });
        }
        Ok(())
    }

    /// Runs the next period and returns its record.
    pub fn run_period(&mut self) -> Result<PeriodRecord> {
        let t = self.period + 1;
        let cfg = self.config.clone();
        let base = cfg.reserve_base;
        let mut flows = PeriodFlows::default();
        self.residual = 0.0;

        flows.guarantees_removed = remove_guarantees(&mut self.banks);
        self.verify("guarantee removal", false)?;

        let drawn;
        let payment = match &self.fixed_flows {
            Some(f) => f,
            None => {
                drawn = PaymentFlows::draw(
                    cfg.customers,
                    cfg.banks,
                    cfg.xi1,
                    cfg.xi2,
                    &mut self.streams.stream(StreamLabel::CashMatrix, t),
                    &mut self.streams.stream(StreamLabel::WireMatrix, t),
                );
                &drawn
            }
        };
        flows.cash_interbank =
            settle_cash_payments(&mut self.banks, &mut self.book, payment, TOLERANCE)?.interbank_volume;
        let wires = settle_wire_transfers(
            &mut self.banks,
            &mut self.book,
            &mut self.loans,
            payment,
            base,
            t,
            TOLERANCE,
        )?;
        flows.wire_gross = wires.gross;
        flows.wire_interbank = wires.volume();
        self.verify("payments", false)?;

        debug_assert!(self.banks.iter().all(|b| b.a5 == 0.0 && b.l5 == 0.0));
        flows.customer_repaid = repay_customer_loans(
            &mut self.banks,
            &mut self.book,
            &cfg.repayment,
            &mut self.streams.stream(StreamLabel::RepaymentRatio, t),
        );
        self.verify("customer repayment", false)?;

        let target_ratio = self
            .policy
            .draw_target_ratios(cfg.banks, &mut self.streams.stream(StreamLabel::TargetRatio, t));
        let realised = realise_lending(
            &mut self.banks,
            &mut self.book,
            &self.policy,
            &target_ratio,
            &mut self.streams.stream(StreamLabel::Absorption, t),
        );
        flows.new_customer_loans = realised.iter().sum();
        self.verify("lending", false)?;

        let repayment = repay_interbank_loans(
            &mut self.banks,
            &mut self.loans,
            cfg.omega,
            base,
            &mut self.streams.stream(StreamLabel::InterbankDecision, t),
        );
        flows.interbank_triggered = repayment.triggered;
        flows.interbank_repaid = repayment.repaid;
        flows.interbank_unpaid = repayment.unpaid;
        self.verify("interbank repayment", false)?;

        let state = compute_pooling_state(
            &self.banks,
            base,
            &target_ratio,
            cfg.phi,
            self.matching,
            &mut self.streams.stream(StreamLabel::Matching, t),
        )?;
        let pooled = allocate_pooled_credit(&mut self.banks, &mut self.loans, &state, base, t, cfg.transfer_on_issue)?;
        flows.pooled_interbank = pooled.volume();
        self.verify("pooling", false)?;

        let rates = draw_period_rates(
            &cfg.rate_laws(),
            cfg.banks,
            &mut self.streams.stream(StreamLabel::Rates, t),
        );
        flows.interbank_rate = rates.interbank;
        let granted = grant_guarantees(&mut self.banks, &pooled.unmet, rates.l5());
        flows.guarantees = granted.len();
        flows.guarantee_volume = granted.iter().map(|g| g.amount).sum();
        self.verify("guarantees", false)?;

        let profit = accrue_equity(&mut self.banks, &rates);
        self.verify("equity", true)?;

        self.period = t;
        Ok(PeriodRecord {
            period: t,
            banks: self.banks.clone(),
            profit,
            target_ratio,
            flows,
            max_residual: self.residual,
            loans_outstanding: self.loans.len(),
        })
    }

    /// Runs the remaining periods up to `T`.
    pub fn run(mut self) -> Result<SimulationTrace> {
        let initial = self.banks.clone();
        let mut periods = Vec::with_capacity(self.config.periods);
        while self.period < self.config.periods {
            periods.push(self.run_period()?);
        }
        Ok(SimulationTrace {
            config_hash: config_hash(&self.config),
            config: self.config,
            initial,
            periods,
        })
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<SimulationTrace> {
    Simulation::new(config.clone())?.run()
}

pub fn run_scenario_checked(config: &ScenarioConfig, check: CheckMode) -> Result<SimulationTrace> {
    Simulation::new(config.clone())?.with_check_mode(check).run()
}

/// Scalar outcomes of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub phi: f64,
    /// Sum over periods of realised new customer loans.
    pub cumulative_customer_lending: Money,
    /// Sum over periods of new interbank loans, by lenders.
    pub cumulative_interbank_lending: Money,
    /// Sum over periods of new interbank loans, by borrowers.
    pub cumulative_interbank_borrowing: Money,
    /// Sum over periods and banks of L5.
    pub cumulative_guarantees: Money,
    /// Share of periods with positive aggregate L5.
    pub guarantee_share: f64,
    /// First period with positive aggregate L5.
    pub first_guarantee_period: Option<usize>,
    pub terminal_equity: Money,
    pub terminal_money: Money,
    /// Mean profit per bank and period.
    pub mean_profit: Money,
}

impl RunMetrics {
    /// Column names of [`RunMetrics::values`].
    pub const COLUMNS: [&'static str; 11] = [
        "seed",
        "phi",
        "cumulative_customer_lending",
        "cumulative_interbank_lending",
        "cumulative_interbank_borrowing",
        "cumulative_guarantees",
        "guarantee_share",
        "first_guarantee_period",
        "terminal_equity",
        "terminal_money",
        "mean_profit",
    ];

    pub fn from_trace(trace: &SimulationTrace) -> Self {
        let mut m = RunMetrics {
            seed: trace.config.seed,
            phi: trace.config.phi,
            cumulative_customer_lending: 0.0,
            cumulative_interbank_lending: 0.0,
            cumulative_interbank_borrowing: 0.0,
            cumulative_guarantees: 0.0,
            guarantee_share: 0.0,
            first_guarantee_period: None,
            terminal_equity: trace.initial.iter().map(|b| b.l4).sum(),
            terminal_money: trace.initial.iter().map(|b| b.deposits()).sum(),
            mean_profit: 0.0,
        };
        let mut positive = 0usize;
        let mut profit = 0.0;
        let mut cells = 0usize;
        for p in &trace.periods {
            let f = &p.flows;
            m.cumulative_customer_lending += f.new_customer_loans;
            let lent: Money = f.wire_interbank + f.pooled_interbank;
            m.cumulative_interbank_lending += lent;
            m.cumulative_interbank_borrowing += lent;
            let l5: Money = p.banks.iter().map(|b| b.l5).sum();
            m.cumulative_guarantees += l5;
            if l5 > 0.0 {
                positive += 1;
                m.first_guarantee_period.get_or_insert(p.period);
            }
            profit += p.profit.iter().sum::<f64>();
            cells += p.profit.len();
        }
        if let Some(last) = trace.periods.last() {
            m.terminal_equity = last.banks.iter().map(|b| b.l4).sum();
            m.terminal_money = last.money();
        }
        if !trace.periods.is_empty() {
            m.guarantee_share = positive as f64 / trace.periods.len() as f64;
            m.mean_profit = profit / cells as f64;
        }
        m
    }

    /// Values in [`RunMetrics::COLUMNS`] order; a missing first guarantee is NaN.
    pub fn values(&self) -> [f64; 11] {
        [
            self.seed as f64,
            self.phi,
            self.cumulative_customer_lending,
            self.cumulative_interbank_lending,
            self.cumulative_interbank_borrowing,
            self.cumulative_guarantees,
            self.guarantee_share,
            self.first_guarantee_period.map_or(f64::NAN, |p| p as f64),
            self.terminal_equity,
            self.terminal_money,
            self.mean_profit,
        ]
    }
}

/// Seeds `master, master + 1, ...`, wrapping inside the signed 64-bit range.
pub fn ensemble_seeds(master: u64, n: usize) -> Vec<u64> {
    let modulus = i64::MAX as u64 + 1;
    (0..n as u64).map(|k| (master % modulus + k) % modulus).collect()
}

/// Per-period statistics across runs for every aggregate series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub config: ScenarioConfig,
    pub seeds: Vec<u64>,
    pub mean: Vec<[f64; 19]>,
    pub q05: Vec<[f64; 19]>,
    pub q50: Vec<[f64; 19]>,
    pub q95: Vec<[f64; 19]>,
    pub metrics: Vec<RunMetrics>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    }
}

fn run_seeds(config: &ScenarioConfig, seeds: &[u64]) -> Result<Vec<SimulationTrace>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = config.clone();
            cfg.seed = seed;
            run_scenario(&cfg)
        })
        .collect()
}

/// Runs `n_seeds` copies of `config` with seeds from [`ensemble_seeds`].
pub fn run_ensemble(config: &ScenarioConfig, n_seeds: usize) -> Result<EnsembleSummary> {
    if n_seeds == 0 {
        return Err(Error::InvalidConfig {
            key: "seeds".into(),
            reason: "at least one seed is required".into(),
        });
    }
    let seeds = ensemble_seeds(config.seed, n_seeds);
    let traces = run_seeds(config, &seeds)?;
    let periods = config.periods;
    let mut summary = EnsembleSummary {
        config: config.clone(),
        seeds,
        mean: vec![[0.0; 19]; periods],
        q05: vec![[0.0; 19]; periods],
        q50: vec![[0.0; 19]; periods],
        q95: vec![[0.0; 19]; periods],
        metrics: traces.iter().map(SimulationTrace::metrics).collect(),
    };
    let rows: Vec<Vec<[f64; 19]>> = traces
        .iter()
        .map(|tr| tr.periods.iter().map(PeriodRecord::aggregates).collect())
        .collect();
    for t in 0..periods {
        for k in 0..19 {
            let mut xs: Vec<f64> = rows.iter().map(|r| r[t][k]).collect();
            summary.mean[t][k] = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.sort_by(f64::total_cmp);
            summary.q05[t][k] = quantile(&xs, 0.05);
            summary.q50[t][k] = quantile(&xs, 0.5);
            summary.q95[t][k] = quantile(&xs, 0.95);
        }
    }
    Ok(summary)
}

/// Runs of one configuration under several φ values with shared seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub phis: Vec<f64>,
    pub seeds: Vec<u64>,
    /// `metrics[i][k]`: φ number `i`, seed number `k`.
    pub metrics: Vec<Vec<RunMetrics>>,
}

impl Comparison {
    pub fn means(&self, f: impl Fn(&RunMetrics) -> f64) -> Vec<f64> {
        self.metrics
            .iter()
            .map(|runs| runs.iter().map(&f).sum::<f64>() / runs.len() as f64)
            .collect()
    }

    /// Seeds on which φ number `i` scores strictly above φ number `j`.
    pub fn wins(&self, f: impl Fn(&RunMetrics) -> f64, i: usize, j: usize) -> usize {
        self.metrics[i]
            .iter()
            .zip(&self.metrics[j])
            .filter(|(a, b)| f(a) > f(b))
            .count()
    }

    /// Means strictly decreasing along the φ list and every adjacent pair
    /// ordered on at least `min_wins` seeds.
    pub fn is_decreasing(&self, f: impl Fn(&RunMetrics) -> f64 + Copy, min_wins: usize) -> bool {
        let means = self.means(f);
        (1..self.phis.len()).all(|i| means[i - 1] > means[i] && self.wins(f, i - 1, i) >= min_wins)
    }
}

/// Runs `config` for every φ in `phis` over the same `n_seeds` seeds, so
/// all scenarios see the same payment and lending shocks.
pub fn compare_phis(config: &ScenarioConfig, phis: &[f64], n_seeds: usize) -> Result<Comparison> {
    if n_seeds == 0 || phis.is_empty() {
        return Err(Error::InvalidConfig {
            key: if n_seeds == 0 { "seeds" } else { "phis" }.into(),
            reason: "must not be empty".into(),
        });
    }
    let seeds = ensemble_seeds(config.seed, n_seeds);
    let mut configs = Vec::with_capacity(phis.len());
    for &phi in phis {
        let mut cfg = config.clone();
        cfg.phi = phi;
        cfg.validate()?;
        configs.push(cfg);
    }
    let jobs: Vec<(usize, u64)> = (0..phis.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let results: Vec<RunMetrics> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let mut cfg = configs[i].clone();
            cfg.seed = seed;
            run_scenario(&cfg).map(|tr| tr.metrics())
        })
        .collect::<Result<_>>()?;
    let metrics = results.chunks(n_seeds).map(<[RunMetrics]>::to_vec).collect();
    Ok(Comparison {
        phis: phis.to_vec(),
        seeds,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    fn small(seed: u64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::baseline(seed);
        cfg.periods = 8;
        cfg.customers = 60;
        cfg.banks = 4;
        cfg
    }

    #[test]
    fn zero_periods_keep_only_initial_state() {
        let mut cfg = small(1);
        cfg.periods = 0;
        let trace = run_scenario(&cfg).unwrap();
        assert!(trace.is_empty());
        assert_eq!(trace.initial.len(), 4);
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run_scenario(&small(3)).unwrap();
        let b = run_scenario(&small(3)).unwrap();
        assert_eq!(a, b);
        let c = run_scenario(&small(4)).unwrap();
        assert_ne!(a.periods, c.periods);
    }

    #[test]
    fn per_phase_checks_pass_on_every_preset() {
        for preset in Preset::ALL {
            let mut cfg = preset.config(11);
            cfg.periods = 10;
            cfg.customers = 100;
            let trace = run_scenario_checked(&cfg, CheckMode::PerPhase).unwrap();
            assert!(trace.max_residual() < TOLERANCE, "{preset}");
        }
    }

    #[test]
    fn guarantees_last_one_period() {
        let mut cfg = small(5);
        cfg.phi = 0.9;
        let mut sim = Simulation::new(cfg).unwrap();
        for _ in 0..8 {
            let rec = sim.run_period().unwrap();
            assert!((rec.flows.guarantee_volume - rec.banks.iter().map(|b| b.l5).sum::<f64>()).abs() < 1e-6);
        }
    }

    #[test]
    fn ensemble_of_one_matches_the_run() {
        let cfg = small(9);
        let trace = run_scenario(&cfg).unwrap();
        let summary = run_ensemble(&cfg, 1).unwrap();
        for (t, p) in trace.periods.iter().enumerate() {
            assert_eq!(summary.mean[t], p.aggregates());
            assert_eq!(summary.q05[t], p.aggregates());
            assert_eq!(summary.q95[t], p.aggregates());
        }
        assert_eq!(summary.metrics, vec![trace.metrics()]);
        assert!(run_ensemble(&cfg, 0).is_err());
    }

    #[test]
    fn ensemble_seed_derivation() {
        assert_eq!(ensemble_seeds(5, 3), vec![5, 6, 7]);
        assert_eq!(ensemble_seeds(i64::MAX as u64, 2), vec![i64::MAX as u64, 0]);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.5), 2.0);
        assert!((quantile(&xs, 0.05) - 0.2).abs() < 1e-12);
        assert_eq!(quantile(&[7.0], 0.95), 7.0);
    }

    #[test]
    fn comparison_shares_seeds() {
        let cmp = compare_phis(&small(2), &[0.0, 1.0], 3).unwrap();
        assert_eq!(cmp.metrics.len(), 2);
        for (a, b) in cmp.metrics[0].iter().zip(&cmp.metrics[1]) {
            assert_eq!(a.seed, b.seed);
        }
        // No pooling at phi = 1.
        assert!(cmp.metrics[1].iter().all(|m| m.cumulative_interbank_lending >= 0.0));
    }
}
