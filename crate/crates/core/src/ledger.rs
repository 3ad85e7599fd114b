//! Bank balance sheets, the customer book and the accounting-identity checker.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::stochastics::{RngStreams, StreamLabel};
use crate::Money;

/// The ten balance-sheet items of one bank.
///
/// Assets: `a1` currency reserves, `a2` retail loans, `a3` interbank lending,
/// `a4` equity reserve, `a5` central-bank assistance. Liabilities: `l1`
/// currency deposits, `l2` loan deposits, `l3` interbank borrowing, `l4`
/// equity provision plus cumulated P/L, `l5` central-bank guarantee.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BankBalanceSheet {
    pub a1: Money,
    pub a2: Money,
    pub a3: Money,
    pub a4: Money,
    pub a5: Money,
    pub l1: Money,
    pub l2: Money,
    pub l3: Money,
    pub l4: Money,
    pub l5: Money,
}

impl BankBalanceSheet {
    /// `L1 + L2 + L3`, the base of reserve targets.
    pub fn deposits(&self) -> Money {
        self.l1 + self.l2 + self.l3
    }

    /// `L1 + L2 + L3 + L5`.
    pub fn total_liabilities(&self) -> Money {
        self.l1 + self.l2 + self.l3 + self.l5
    }

    pub fn items(&self) -> [Money; 10] {
        [
            self.a1, self.a2, self.a3, self.a4, self.a5, self.l1, self.l2, self.l3, self.l4, self.l5,
        ]
    }

    /// Largest absolute item, used to scale identity residuals.
    pub fn scale(&self) -> f64 {
        self.items().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// `(A1 + A2 + A3) - (L1 + L2 + L3)`.
    pub fn core_residual(&self) -> f64 {
        (self.a1 + self.a2 + self.a3) - (self.l1 + self.l2 + self.l3)
    }

    pub fn equity_residual(&self) -> f64 {
        self.a4 - self.l4
    }

    pub fn guarantee_residual(&self) -> f64 {
        self.a5 - self.l5
    }

    /// Component `k` of the reserve-eligible assets: 0 = A1, 1 = A2, 2 = A3.
    pub fn component(&self, k: usize) -> Money {
        match k {
            0 => self.a1,
            1 => self.a2,
            2 => self.a3,
            _ => panic!("reserve component index {k} out of range"),
        }
    }

    pub fn component_mut(&mut self, k: usize) -> &mut Money {
        match k {
            0 => &mut self.a1,
            1 => &mut self.a2,
            2 => &mut self.a3,
            _ => panic!("reserve component index {k} out of range"),
        }
    }
}

/// Which assets count as reserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReserveBase {
    /// A1 only.
    Narrow,
    /// A1 + A3.
    Broad,
    /// A1 + A2 + A3.
    Securitised,
}

impl ReserveBase {
    /// Inclusion mask over (A1, A2, A3).
    pub fn mask(self) -> [bool; 3] {
        match self {
            ReserveBase::Narrow => [true, false, false],
            ReserveBase::Broad => [true, false, true],
            ReserveBase::Securitised => [true, true, true],
        }
    }

    pub fn includes(self, component: usize) -> bool {
        self.mask()[component]
    }

    /// Total reserve holding of `bank`. A5 never counts.
    pub fn sum_reserve(self, bank: &BankBalanceSheet) -> Money {
        match self {
            ReserveBase::Narrow => bank.a1,
            ReserveBase::Broad => bank.a1 + bank.a3,
            ReserveBase::Securitised => bank.a1 + bank.a2 + bank.a3,
        }
    }

    /// Share of each included component in the total reserve. Excluded
    /// components weigh zero; an empty or non-positive reserve puts all
    /// weight on A1.
    pub fn weights(self, bank: &BankBalanceSheet) -> [f64; 3] {
        let mask = self.mask();
        let parts: [f64; 3] = std::array::from_fn(|k| if mask[k] { bank.component(k).max(0.0) } else { 0.0 });
        let total: f64 = parts.iter().sum();
        if total > 0.0 {
            parts.map(|p| p / total)
        } else {
            [1.0, 0.0, 0.0]
        }
    }
}

pub fn sum_reserve(bank: &BankBalanceSheet, base: ReserveBase) -> Money {
    base.sum_reserve(bank)
}

/// Per-customer deposits and the fixed customer-to-bank assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerBook {
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
    pub l1: Vec<Money>,
    pub l2: Vec<Money>,
}

impl CustomerBook {
    /// Builds a book from an explicit assignment with zero balances.
    pub fn new(assignment: Vec<usize>, banks: usize) -> Self {
        let mut members = vec![Vec::new(); banks];
        for (customer, &bank) in assignment.iter().enumerate() {
            members[bank].push(customer);
        }
        let n = assignment.len();
        Self {
            assignment,
            members,
            l1: vec![0.0; n],
            l2: vec![0.0; n],
        }
    }

    pub fn customers(&self) -> usize {
        self.assignment.len()
    }

    pub fn banks(&self) -> usize {
        self.members.len()
    }

    pub fn bank_of(&self, customer: usize) -> usize {
        self.assignment[customer]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn members(&self, bank: usize) -> &[usize] {
        &self.members[bank]
    }

    pub fn l1_of_bank(&self, bank: usize) -> Money {
        self.members[bank].iter().map(|&j| self.l1[j]).sum()
    }

    pub fn l2_of_bank(&self, bank: usize) -> Money {
        self.members[bank].iter().map(|&j| self.l2[j]).sum()
    }

    /// Moves the bank's customer loan deposits by `delta` in total: debits
    /// pro rata to balances, credits pro rata to balances (equally when all
    /// balances are zero).
    pub fn adjust_l2_pro_rata(&mut self, bank: usize, delta: Money) {
        if delta == 0.0 || self.members[bank].is_empty() {
            return;
        }
        let total = self.l2_of_bank(bank);
        if delta < 0.0 {
            if total <= 0.0 {
                return;
            }
            let factor = ((total + delta) / total).max(0.0);
            for &j in &self.members[bank] {
                self.l2[j] *= factor;
            }
        } else if total > 0.0 {
            for &j in &self.members[bank] {
                self.l2[j] += delta * self.l2[j] / total;
            }
        } else {
            self.credit_l2_equally(bank, delta);
        }
    }

    /// Splits `amount` equally over the bank's customers.
    pub fn credit_l2_equally(&mut self, bank: usize, amount: Money) {
        let n = self.members[bank].len();
        if n == 0 {
            return;
        }
        let share = amount / n as f64;
        for &j in &self.members[bank] {
            self.l2[j] += share;
        }
    }
}

/// Initial balance sheets and customer book.
///
/// Each customer receives `A1_0 / C` in currency, each bank `A4_0 / B` of
/// equity. Customers are shuffled; the first `B` go one to each bank and
/// the rest pick a bank uniformly, so no bank is left without customers.
pub fn initialise(config: &ScenarioConfig) -> Result<(Vec<BankBalanceSheet>, CustomerBook)> {
    let b = config.banks;
    let c = config.customers;
    if b < 2 {
        return Err(Error::InvalidConfig {
            key: "B".into(),
            reason: "at least two banks are required".into(),
        });
    }
    if c < b {
        return Err(Error::InvalidConfig {
            key: "C".into(),
            reason: "need at least one customer per bank".into(),
        });
    }
    if config.base_money.is_nan() || config.base_money <= 0.0 {
        return Err(Error::InvalidConfig {
            key: "A1_0".into(),
            reason: "must be positive".into(),
        });
    }
    if config.total_equity.is_nan() || config.total_equity <= 0.0 {
        return Err(Error::InvalidConfig {
            key: "A4_0".into(),
            reason: "must be positive".into(),
        });
    }

    let mut rng = RngStreams::new(config.seed).stream(StreamLabel::Assignment, 0);
    let mut order: Vec<usize> = (0..c).collect();
    order.shuffle(&mut rng);
    let mut assignment = vec![0; c];
    for (rank, &customer) in order.iter().enumerate() {
        assignment[customer] = if rank < b { rank } else { rng.random_range(0..b) };
    }
    Ok(initialise_with_assignment(config, assignment))
}

/// Initial state for a given assignment (every entry `< B`).
pub fn initialise_with_assignment(
    config: &ScenarioConfig,
    assignment: Vec<usize>,
) -> (Vec<BankBalanceSheet>, CustomerBook) {
    let b = config.banks;
    let mut book = CustomerBook::new(assignment, b);
    let cash = config.base_money / book.customers() as f64;
    book.l1.iter_mut().for_each(|x| *x = cash);
    let equity = config.total_equity / b as f64;
    let banks = (0..b)
        .map(|i| {
            let l1 = book.l1_of_bank(i);
            BankBalanceSheet {
                a1: l1,
                l1,
                a4: equity,
                l4: equity,
                ..Default::default()
            }
        })
        .collect();
    (banks, book)
}

/// Residuals of one bank.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BankResiduals {
    pub core: f64,
    pub equity: f64,
    pub guarantee: f64,
    pub book_l1: f64,
    pub book_l2: f64,
    pub scale: f64,
}

impl BankResiduals {
    pub fn max_abs(&self) -> f64 {
        [self.core, self.equity, self.guarantee, self.book_l1, self.book_l2]
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Largest residual divided by `max(1, scale)`.
    pub fn max_relative(&self) -> f64 {
        self.max_abs() / self.scale.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub banks: Vec<BankResiduals>,
    pub tolerance: f64,
}

impl IdentityReport {
    pub fn max_relative(&self) -> f64 {
        self.banks.iter().fold(0.0_f64, |m, r| m.max(r.max_relative()))
    }

    /// Banks whose relative residual exceeds the tolerance.
    pub fn violations(&self) -> Vec<usize> {
        self.banks
            .iter()
            .enumerate()
            .filter(|(_, r)| r.max_relative() > self.tolerance)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_ok(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn describe(&self) -> String {
        self.violations()
            .iter()
            .map(|&i| {
                let r = &self.banks[i];
                format!(
                    "bank {i}: core {:e}, equity {:e}, guarantee {:e}, book l1 {:e}, book l2 {:e} (scale {:e})",
                    r.core, r.equity, r.guarantee, r.book_l1, r.book_l2, r.scale
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Residuals of the three balance-sheet identities and the two customer-book
/// sums for every bank.
pub fn check_identities(banks: &[BankBalanceSheet], book: &CustomerBook, tol: f64) -> IdentityReport {
    let residuals = banks
        .iter()
        .enumerate()
        .map(|(i, bank)| BankResiduals {
            core: bank.core_residual(),
            equity: bank.equity_residual(),
            guarantee: bank.guarantee_residual(),
            book_l1: book.l1_of_bank(i) - bank.l1,
            book_l2: book.l2_of_bank(i) - bank.l2,
            scale: bank.scale(),
        })
        .collect();
    IdentityReport {
        banks: residuals,
        tolerance: tol,
    }
}
