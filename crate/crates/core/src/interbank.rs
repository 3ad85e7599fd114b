//! Interbank credit: the outstanding-loan ledger, stochastic repayment and
//! the pooling system that matches surplus banks with shortage banks.
//!
//! Settlement moves reserve components between banks in proportion to a set
//! of weights over (A1, A2, A3). Moving the A3 component means assigning a
//! share of the payer's interbank claims to the payee; a claim that lands on
//! its own debtor is extinguished.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{BankBalanceSheet, ReserveBase};
use crate::stochastics::{uniform_matrix, RngStream};
use crate::Money;

/// Identity of an outstanding interbank loan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LoanKey {
    pub lender: usize,
    pub borrower: usize,
    pub issue_period: usize,
}

impl LoanKey {
    /// Stable 60-bit slot for this loan's repayment draw.
    pub fn slot(&self) -> u64 {
        let f = |x: usize| x as u64 & 0xf_ffff;
        f(self.lender) << 40 | f(self.borrower) << 20 | f(self.issue_period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoanPosition {
    pub amount: Money,
    /// Borrower's reserve-component weights when the loan was issued.
    pub weights: [f64; 3],
}

/// Outstanding interbank loans keyed by (lender, borrower, issue period).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterbankLoanLedger {
    entries: BTreeMap<LoanKey, LoanPosition>,
}

impl InterbankLoanLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &LoanKey) -> Option<&LoanPosition> {
        self.entries.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LoanKey, &LoanPosition)> {
        self.entries.iter()
    }

    /// Adds `amount` to the position, merging weights by amount.
    pub fn record(&mut self, lender: usize, borrower: usize, issue_period: usize, amount: Money, weights: [f64; 3]) {
        assert_ne!(lender, borrower, "a bank cannot lend to itself");
        if amount <= 0.0 {
            return;
        }
        let key = LoanKey {
            lender,
            borrower,
            issue_period,
        };
        self.entries
            .entry(key)
            .and_modify(|pos| {
                let total = pos.amount + amount;
                for (w, new) in pos.weights.iter_mut().zip(weights) {
                    *w = (*w * pos.amount + new * amount) / total;
                }
                pos.amount = total;
            })
            .or_insert(LoanPosition { amount, weights });
    }

    /// Reduces a position, removing it once nothing is left.
    pub fn reduce(&mut self, key: &LoanKey, amount: Money) {
        if let Some(pos) = self.entries.get_mut(key) {
            pos.amount -= amount;
            if pos.amount <= 0.0 {
                self.entries.remove(key);
            }
        }
    }

    /// Outstanding claims of `lender`, ordered by borrower then issue period.
    pub fn claims_of(&self, lender: usize) -> impl Iterator<Item = (&LoanKey, &LoanPosition)> {
        let lo = LoanKey {
            lender,
            borrower: 0,
            issue_period: 0,
        };
        let hi = LoanKey {
            lender: lender + 1,
            borrower: 0,
            issue_period: 0,
        };
        self.entries.range(lo..hi)
    }

    /// Claims of `lender` on `borrower`, oldest first.
    pub fn claims_between(&self, lender: usize, borrower: usize) -> impl Iterator<Item = (&LoanKey, &LoanPosition)> {
        let lo = LoanKey {
            lender,
            borrower,
            issue_period: 0,
        };
        let hi = LoanKey {
            lender,
            borrower: borrower + 1,
            issue_period: 0,
        };
        self.entries.range(lo..hi)
    }

    pub fn lent_by(&self, bank: usize) -> Money {
        self.claims_of(bank).map(|(_, p)| p.amount).sum()
    }

    pub fn borrowed_by(&self, bank: usize) -> Money {
        self.entries
            .iter()
            .filter(|(k, _)| k.borrower == bank)
            .map(|(_, p)| p.amount)
            .sum()
    }

    pub fn total(&self) -> Money {
        self.entries.values().map(|p| p.amount).sum()
    }

    /// Sum by lender must equal A3 and sum by borrower must equal L3.
    pub fn check_consistency(&self, banks: &[BankBalanceSheet], tol: f64) -> Result<()> {
        let mut lent = vec![0.0; banks.len()];
        let mut borrowed = vec![0.0; banks.len()];
        for (k, p) in &self.entries {
            if p.amount.is_nan() || p.amount <= 0.0 {
                return Err(Error::LedgerDesync(format!("non-positive entry {k:?}: {}", p.amount)));
            }
            lent[k.lender] += p.amount;
            borrowed[k.borrower] += p.amount;
        }
        for (i, bank) in banks.iter().enumerate() {
            let scale = bank.scale().max(1.0);
            let da3 = (lent[i] - bank.a3).abs() / scale;
            let dl3 = (borrowed[i] - bank.l3).abs() / scale;
            if da3 > tol || dl3 > tol {
                return Err(Error::LedgerDesync(format!(
                    "bank {i}: ledger lent {} vs A3 {}, ledger borrowed {} vs L3 {}",
                    lent[i], bank.a3, borrowed[i], bank.l3
                )));
            }
        }
        Ok(())
    }
}

/// Assigns `amount` worth of `from`'s interbank claims to `to`. Claims on
/// `to` itself go first and are cancelled against `to`'s interbank
/// borrowing; the rest follow in key order, the last one split. Returns
/// the amount assigned.
fn assign_claims(
    banks: &mut [BankBalanceSheet],
    loans: &mut InterbankLoanLedger,
    from: usize,
    to: usize,
    amount: Money,
) -> Money {
    let mut pieces: Vec<(LoanKey, LoanPosition, Money)> = Vec::new();
    let mut left = amount;
    let own = loans.claims_between(from, to);
    let rest = loans.claims_of(from).filter(|(k, _)| k.borrower != to);
    for (key, pos) in own.chain(rest) {
        if left <= 0.0 {
            break;
        }
        let piece = pos.amount.min(left);
        pieces.push((*key, *pos, piece));
        left -= piece;
    }
    let mut moved = 0.0;
    for (key, pos, piece) in pieces {
        loans.reduce(&key, piece);
        banks[from].a3 -= piece;
        if key.borrower == to {
            banks[to].l3 -= piece;
        } else {
            loans.record(to, key.borrower, key.issue_period, piece, pos.weights);
            banks[to].a3 += piece;
        }
        moved += piece;
    }
    moved
}

/// Moves up to `amount` of reserve components from `payer` to `payee`.
///
/// Legs follow `weights` over the components included in `base`. A leg is
/// capped at what the payer holds; the shortfall moves to the other
/// included components (A3, then A2, then A1). Returns the amount moved,
/// which is below `amount` only when the payer's reserves run out.
pub fn transfer_reserves(
    banks: &mut [BankBalanceSheet],
    loans: &mut InterbankLoanLedger,
    payer: usize,
    payee: usize,
    amount: Money,
    weights: [f64; 3],
    base: ReserveBase,
) -> Money {
    if amount <= 0.0 {
        return 0.0;
    }
    let mask = base.mask();
    let available: [f64; 3] = std::array::from_fn(|k| {
        if !mask[k] {
            0.0
        } else if k == 2 {
            loans.lent_by(payer).max(0.0)
        } else {
            banks[payer].component(k).max(0.0)
        }
    });
    let included_weight: f64 = (0..3).filter(|&k| mask[k]).map(|k| weights[k].max(0.0)).sum();
    let mut legs = [0.0; 3];
    for k in 0..3 {
        if mask[k] && included_weight > 0.0 {
            legs[k] = (amount * weights[k].max(0.0) / included_weight).min(available[k]);
        }
    }
    if included_weight <= 0.0 {
        legs[0] = amount.min(available[0]);
    }
    let mut shortfall = amount - legs.iter().sum::<f64>();
    for k in [2, 1, 0] {
        if shortfall <= 0.0 {
            break;
        }
        let extra = shortfall.min(available[k] - legs[k]).max(0.0);
        legs[k] += extra;
        shortfall -= extra;
    }
    for k in [0, 1] {
        if legs[k] > 0.0 {
            *banks[payer].component_mut(k) -= legs[k];
            *banks[payee].component_mut(k) += legs[k];
        }
    }
    if legs[2] > 0.0 {
        legs[2] = assign_claims(banks, loans, payer, payee, legs[2]);
    }
    legs.iter().sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RepaymentSummary {
    /// Loans selected for repayment.
    pub triggered: usize,
    /// Volume actually repaid.
    pub repaid: Money,
    /// Selected volume left outstanding because the borrower ran out of reserves.
    pub unpaid: Money,
}

/// Selects each outstanding loan for full repayment when its U(0, 1) draw
/// exceeds `omega`; the borrower pays the lender in reserve components split
/// by the loan's issuance weights.
pub fn repay_interbank_loans(
    banks: &mut [BankBalanceSheet],
    loans: &mut InterbankLoanLedger,
    omega: f64,
    base: ReserveBase,
    rng: &mut RngStream,
) -> RepaymentSummary {
    let due: Vec<LoanKey> = loans
        .iter()
        .map(|(k, _)| *k)
        .filter(|k| rng.open01_at(k.slot()) > omega)
        .collect();
    let mut summary = RepaymentSummary {
        triggered: due.len(),
        ..Default::default()
    };
    for key in due {
        let Some(pos) = loans.get(&key).copied() else {
            continue;
        };
        let moved = transfer_reserves(banks, loans, key.borrower, key.lender, pos.amount, pos.weights, base);
        loans.reduce(&key, moved);
        banks[key.lender].a3 -= moved;
        banks[key.borrower].l3 -= moved;
        summary.repaid += moved;
        summary.unpaid += pos.amount - moved;
    }
    summary
}

/// How match probabilities between potential lenders and borrowers are made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Matching {
    /// i.i.d. U(0, 1) per pair.
    ExogenousRandom,
    /// Preferential attachment on the lender's equity ratio and the
    /// borrower's interbank exposure, passed through `lambda * exp(-lambda * r)`.
    EndogenousPartnerSearch { alpha: f64, lambda: f64 },
}

/// Reserve situation of every bank and the lender-borrower matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingState {
    pub target_ratio: Vec<f64>,
    /// `reserve / (L1 + L2 + L3)`; infinite when the bank has no deposits.
    pub current_ratio: Vec<f64>,
    pub target_reserve: Vec<Money>,
    pub excess: Vec<Money>,
    pub need: Vec<Money>,
    pub weights: Vec<[f64; 3]>,
    /// 1 where the row bank has a surplus and the column bank a shortage.
    pub potential: Array2<u8>,
    /// Match probabilities on potential pairs, zero elsewhere.
    pub selection: Array2<f64>,
    pub phi: f64,
}

impl PoolingState {
    pub fn banks(&self) -> usize {
        self.excess.len()
    }

    pub fn is_lender(&self, i: usize) -> bool {
        self.excess[i] > 0.0
    }

    pub fn is_borrower(&self, i: usize) -> bool {
        self.need[i] > 0.0
    }

    /// Potential pair whose probability clears the threshold.
    pub fn is_actual(&self, lender: usize, borrower: usize) -> bool {
        self.potential[[lender, borrower]] == 1 && self.selection[[lender, borrower]] > self.phi
    }

    pub fn actual_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.banks();
        (0..n)
            .flat_map(|l| (0..n).map(move |b| (l, b)))
            .filter(|&(l, b)| self.is_actual(l, b))
            .collect()
    }
}

/// `r = alpha * L^-alpha + alpha * l^alpha`, infinite for a lender with no
/// equity (such a lender is never selected).
pub fn attachment_score(lender: &BankBalanceSheet, borrower: &BankBalanceSheet, alpha: f64) -> f64 {
    let ldenom = lender.total_liabilities();
    let equity_ratio = if ldenom > 0.0 {
        (lender.l4 / ldenom).max(0.0)
    } else if lender.l4 > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let bdenom = borrower.total_liabilities();
    let exposure = if bdenom > 0.0 { borrower.l3 / bdenom } else { 0.0 };
    alpha * equity_ratio.powf(-alpha) + alpha * exposure.powf(alpha)
}

pub fn compute_pooling_state(
    banks: &[BankBalanceSheet],
    base: ReserveBase,
    target_ratio: &[f64],
    phi: f64,
    matching: Matching,
    rng: &mut RngStream,
) -> Result<PoolingState> {
    if let Matching::EndogenousPartnerSearch { alpha, lambda } = matching {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::InvalidConfig {
                key: "alpha".into(),
                reason: format!("must be positive, got {alpha}"),
            });
        }
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(Error::InvalidConfig {
                key: "lambda".into(),
                reason: format!("must be positive, got {lambda}"),
            });
        }
    }
    let n = banks.len();
    let mut current_ratio = Vec::with_capacity(n);
    let mut target_reserve = Vec::with_capacity(n);
    let mut excess = Vec::with_capacity(n);
    let mut need = Vec::with_capacity(n);
    for (bank, &gamma) in banks.iter().zip(target_ratio) {
        let reserve = base.sum_reserve(bank);
        let deposits = bank.deposits();
        let tr = gamma * deposits;
        current_ratio.push(if deposits > 0.0 {
            reserve / deposits
        } else {
            f64::INFINITY
        });
        target_reserve.push(tr);
        excess.push((reserve - tr).max(0.0));
        need.push((tr - reserve).max(0.0));
    }
    let weights = banks.iter().map(|b| base.weights(b)).collect();

    let mut potential = Array2::zeros((n, n));
    for l in 0..n {
        for b in 0..n {
            if excess[l] > 0.0 && need[b] > 0.0 {
                potential[[l, b]] = 1u8;
            }
        }
    }
    let mut selection = match matching {
        Matching::ExogenousRandom => uniform_matrix(n, n, rng),
        Matching::EndogenousPartnerSearch { alpha, lambda } => Array2::from_shape_fn((n, n), |(l, b)| {
            let r = attachment_score(&banks[l], &banks[b], alpha);
            lambda * (-lambda * r).exp()
        }),
    };
    selection.zip_mut_with(&potential, |s, &p| {
        if p == 0 {
            *s = 0.0
        }
    });

    Ok(PoolingState {
        target_ratio: target_ratio.to_vec(),
        current_ratio,
        target_reserve,
        excess,
        need,
        weights,
        potential,
        selection,
        phi,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolingOutcome {
    /// Realised loans `(lender, borrower, amount)`.
    pub loans: Vec<(usize, usize, Money)>,
    pub received: Vec<Money>,
    /// Reserve need left after pooling.
    pub unmet: Vec<Money>,
}

impl PoolingOutcome {
    pub fn volume(&self) -> Money {
        self.loans.iter().map(|l| l.2).sum()
    }
}

/// Requested amounts before settlement: each borrower splits its need over
/// its actual lenders in proportion to their excess, and an oversubscribed
/// lender scales its borrowers down pro rata.
pub fn pooled_claims(state: &PoolingState) -> Array2<f64> {
    let n = state.banks();
    let mut claims = Array2::zeros((n, n));
    for b in 0..n {
        if !state.is_borrower(b) {
            continue;
        }
        let lenders: Vec<usize> = (0..n).filter(|&l| state.is_actual(l, b)).collect();
        let pool: f64 = lenders.iter().map(|&l| state.excess[l]).sum();
        if pool <= 0.0 {
            continue;
        }
        for l in lenders {
            claims[[l, b]] = state.need[b] * state.excess[l] / pool;
        }
    }
    for l in 0..n {
        let asked: f64 = claims.row(l).sum();
        if asked > state.excess[l] {
            let scale = state.excess[l] / asked;
            claims.row_mut(l).mapv_inplace(|c| c * scale);
        }
    }
    claims
}

/// Settles the pooled claims.
///
/// With `transfer_on_issue` the lender hands over reserve components split by
/// its snapshot weights and books a claim on the borrower; otherwise the two
/// banks exchange mutual interbank credit (each books a claim on the other).
pub fn allocate_pooled_credit(
    banks: &mut [BankBalanceSheet],
    loans: &mut InterbankLoanLedger,
    state: &PoolingState,
    base: ReserveBase,
    period: usize,
    transfer_on_issue: bool,
) -> Result<PoolingOutcome> {
    let n = banks.len();
    let claims = pooled_claims(state);
    let mut settled = Vec::new();
    for l in 0..n {
        for b in 0..n {
            let amount = claims[[l, b]];
            if amount < 0.0 || amount.is_nan() {
                return Err(Error::NegativeAllocation {
                    lender: l,
                    borrower: b,
                    amount,
                });
            }
            if amount == 0.0 {
                continue;
            }
            let moved = if transfer_on_issue {
                transfer_reserves(banks, loans, l, b, amount, state.weights[l], base)
            } else {
                amount
            };
            if moved > 0.0 {
                settled.push((l, b, moved));
            }
        }
    }
    let mut received = vec![0.0; n];
    for &(l, b, amount) in &settled {
        let weights = base.weights(&banks[b]);
        loans.record(l, b, period, amount, weights);
        banks[l].a3 += amount;
        banks[b].l3 += amount;
        if !transfer_on_issue {
            let weights = base.weights(&banks[l]);
            loans.record(b, l, period, amount, weights);
            banks[b].a3 += amount;
            banks[l].l3 += amount;
        }
        received[b] += amount;
    }
    // Pro-rata splits leave rounding dust; that is not a need worth a guarantee.
    let unmet = (0..n)
        .map(|b| {
            let gap = state.need[b] - received[b];
            if gap > state.need[b] * crate::engine::TOLERANCE {
                gap
            } else {
                0.0
            }
        })
        .collect();
    Ok(PoolingOutcome {
        loans: settled,
        received,
        unmet,
    })
}
