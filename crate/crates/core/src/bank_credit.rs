//! Customer loan repayment, target lending and credit realisation.

use crate::config::{LendingBehaviour, ScenarioConfig};
use crate::ledger::{BankBalanceSheet, CustomerBook, ReserveBase};
use crate::stochastics::{RngStream, TriangularParams};
use crate::Money;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LendingPolicy {
    pub behaviour: LendingBehaviour,
    pub reserve_base: ReserveBase,
    pub gamma_rr: f64,
    /// Nonnegative noise added to `gamma_rr` per bank and period.
    pub gamma_tr_noise: TriangularParams,
    pub repayment: TriangularParams,
    pub absorption: TriangularParams,
    /// Target against `L1 + L2` instead of `L1 + L2 + L3`.
    pub relax_target_base: bool,
}

impl LendingPolicy {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            behaviour: config.lending,
            reserve_base: config.reserve_base,
            gamma_rr: config.gamma_rr,
            gamma_tr_noise: config.gamma_tr_noise,
            repayment: config.repayment,
            absorption: config.absorption,
            relax_target_base: config.relax_target_base,
        }
    }

    /// Per-bank target reserve ratios for one period.
    pub fn draw_target_ratios(&self, banks: usize, rng: &mut RngStream) -> Vec<f64> {
        if self.gamma_tr_noise.is_point_mass() {
            return vec![self.gamma_rr + self.gamma_tr_noise.lower(); banks];
        }
        (0..banks)
            .map(|_| self.gamma_rr + self.gamma_tr_noise.sample(rng))
            .collect()
    }

    fn targeted_deposits(&self, bank: &BankBalanceSheet) -> Money {
        if self.relax_target_base {
            bank.l1 + bank.l2
        } else {
            bank.deposits()
        }
    }
}

/// Each bank draws a repayment ratio and both A2 and L2 shrink by that
/// share. The repaid amount is capped at `min(A2, L2)` since wire transfers
/// can leave a bank with more loan deposits than loans. Returns the total repaid.
pub fn repay_customer_loans(
    banks: &mut [BankBalanceSheet],
    book: &mut CustomerBook,
    law: &TriangularParams,
    rng: &mut RngStream,
) -> Money {
    let mut total = 0.0;
    for (i, bank) in banks.iter_mut().enumerate() {
        let ratio = law.sample(rng);
        let amount = ratio * bank.a2.min(bank.l2).max(0.0);
        if amount > 0.0 {
            bank.a2 -= amount;
            bank.l2 -= amount;
            book.adjust_l2_pro_rata(i, -amount);
            total += amount;
        }
    }
    total
}

/// Potential new lending for a bank with target ratio `gamma_tr`.
pub fn target_lending(bank: &BankBalanceSheet, policy: &LendingPolicy, gamma_tr: f64) -> Money {
    debug_assert!(gamma_tr > 0.0);
    let reserve = policy.reserve_base.sum_reserve(bank);
    let deposits = policy.targeted_deposits(bank);
    let target = match policy.behaviour {
        LendingBehaviour::MoneyMultiplication => reserve / gamma_tr - deposits,
        LendingBehaviour::FractionalReserve => reserve - gamma_tr * deposits,
    };
    target.max(0.0)
}

/// Computes every bank's potential lending from one snapshot, then draws an
/// absorption ratio per bank and books the realised loans. New loan
/// deposits are split equally over the bank's customers. Returns per-bank
/// realised lending.
pub fn realise_lending(
    banks: &mut [BankBalanceSheet],
    book: &mut CustomerBook,
    policy: &LendingPolicy,
    target_ratios: &[f64],
    rng: &mut RngStream,
) -> Vec<Money> {
    let potential: Vec<Money> = banks
        .iter()
        .zip(target_ratios)
        .map(|(bank, &gamma)| target_lending(bank, policy, gamma))
        .collect();
    let mut realised = Vec::with_capacity(banks.len());
    for (i, bank) in banks.iter_mut().enumerate() {
        let theta = policy.absorption.sample(rng);
        let amount = theta * potential[i];
        if amount > 0.0 {
            bank.a2 += amount;
            bank.l2 += amount;
            book.credit_l2_equally(i, amount);
        }
        realised.push(amount);
    }
    realised
}
