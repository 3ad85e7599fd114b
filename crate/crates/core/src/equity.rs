//! Per-period profit and loss, retained in equity.

use crate::ledger::BankBalanceSheet;
use crate::stochastics::RateSet;
use crate::Money;

/// Interest and fee income less expense on end-of-period stocks of bank `i`.
pub fn profit(bank: &BankBalanceSheet, rates: &RateSet, i: usize) -> Money {
    let income = rates.a1[i] * bank.a1 + rates.a2[i] * bank.a2 + rates.a3() * bank.a3;
    let expense = rates.l1[i] * bank.l1 + rates.l2[i] * bank.l2 + rates.l3() * bank.l3 + rates.l5() * bank.l5;
    income - expense
}

/// Adds each bank's profit to A4 and L4. Returns the profits.
pub fn accrue_equity(banks: &mut [BankBalanceSheet], rates: &RateSet) -> Vec<Money> {
    banks
        .iter_mut()
        .enumerate()
        .map(|(i, bank)| {
            let pi = profit(bank, rates, i);
            bank.a4 += pi;
            bank.l4 += pi;
            pi
        })
        .collect()
}
