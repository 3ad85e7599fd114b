//! Customer cash payments and bank-credit wire transfers.
//!
//! Cash moves currency deposits (and the matching A1 reserves) between
//! customers. Wires move loan deposits between banks without moving any
//! reserve: flows net out per bank, and net payers owe the difference to
//! net receivers as interbank credit.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::interbank::InterbankLoanLedger;
use crate::ledger::{BankBalanceSheet, CustomerBook, ReserveBase};
use crate::stochastics::{random_row_stochastic, RngStream};
use crate::Money;

/// One period's payment pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentFlows {
    /// `C x C` row-stochastic customer-to-customer shares.
    pub cash_matrix: Array2<f64>,
    /// `B x B` row-stochastic bank-to-bank shares.
    pub wire_matrix: Array2<f64>,
    pub xi1: f64,
    pub xi2: f64,
}

impl PaymentFlows {
    /// Draws both matrices. A matrix whose scale is zero is left empty and
    /// its stream is not touched.
    pub fn draw(
        customers: usize,
        banks: usize,
        xi1: f64,
        xi2: f64,
        cash: &mut RngStream,
        wire: &mut RngStream,
    ) -> Self {
        let cash_matrix = if xi1 > 0.0 {
            random_row_stochastic(customers, cash)
        } else {
            Array2::zeros((0, 0))
        };
        let wire_matrix = if xi2 > 0.0 {
            random_row_stochastic(banks, wire)
        } else {
            Array2::zeros((0, 0))
        };
        Self {
            cash_matrix,
            wire_matrix,
            xi1,
            xi2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CashOutcome {
    /// Currency crossing bank boundaries.
    pub interbank_volume: Money,
}

/// Each customer pays `xi1` of its currency deposit, split by its row of
/// the cash matrix. Banks' A1 and L1 move by the net flow across their
/// boundary; payments between customers of one bank net out.
pub fn settle_cash_payments(
    banks: &mut [BankBalanceSheet],
    book: &mut CustomerBook,
    flows: &PaymentFlows,
    tol: f64,
) -> Result<CashOutcome> {
    if flows.xi1 == 0.0 {
        return Ok(CashOutcome::default());
    }
    let n = book.customers();
    let nb = banks.len();
    assert_eq!(flows.cash_matrix.dim(), (n, n), "cash matrix shape");
    let mut delta = vec![0.0; n];
    let mut cross = vec![0.0; nb * nb];
    for (x, row) in flows.cash_matrix.rows().into_iter().enumerate() {
        let out = flows.xi1 * book.l1[x];
        if out <= 0.0 {
            continue;
        }
        let bx = book.bank_of(x);
        for (y, &share) in row.iter().enumerate() {
            if y == x {
                continue;
            }
            let amount = out * share;
            delta[x] -= amount;
            delta[y] += amount;
            let by = book.bank_of(y);
            if by != bx {
                cross[bx * nb + by] += amount;
            }
        }
    }
    for (l1, d) in book.l1.iter_mut().zip(&delta) {
        *l1 += d;
    }
    let mut outcome = CashOutcome::default();
    for i in 0..nb {
        for j in 0..nb {
            if i == j {
                continue;
            }
            let amount = cross[i * nb + j];
            banks[i].a1 -= amount;
            banks[i].l1 -= amount;
            banks[j].a1 += amount;
            banks[j].l1 += amount;
            outcome.interbank_volume += amount;
        }
    }
    for (i, bank) in banks.iter().enumerate() {
        let gap = (book.l1_of_bank(i) - bank.l1).abs();
        if gap > tol * bank.scale().max(1.0) {
            return Err(Error::ConsistencyViolation {
                bank: i,
                detail: format!("customer currency {} vs bank L1 {}", book.l1_of_bank(i), bank.l1),
            });
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WireOutcome {
    /// Gross loan deposits sent across banks.
    pub gross: Money,
    /// Net positions turned into interbank loans `(lender, borrower, amount)`.
    pub loans: Vec<(usize, usize, Money)>,
}

impl WireOutcome {
    pub fn volume(&self) -> Money {
        self.loans.iter().map(|l| l.2).sum()
    }
}

/// Bank `u` sends `xi2 * L2_u * m[u, v]` to every other bank `v`, all from
/// the start-of-phase snapshot. Flows net per pair and then per bank: a net
/// receiver's L2 and A3 rise by its net inflow, a net payer's L2 falls and
/// its L3 rises by its net outflow. The new claims are spread over
/// (receiver, payer) pairs in proportion to both net positions and booked
/// at `period` with the payer's reserve weights.
pub fn settle_wire_transfers(
    banks: &mut [BankBalanceSheet],
    book: &mut CustomerBook,
    loans: &mut InterbankLoanLedger,
    flows: &PaymentFlows,
    base: ReserveBase,
    period: usize,
    tol: f64,
) -> Result<WireOutcome> {
    let nb = banks.len();
    let mut outcome = WireOutcome::default();
    if flows.xi2 == 0.0 {
        return Ok(outcome);
    }
    assert_eq!(flows.wire_matrix.dim(), (nb, nb), "wire matrix shape");
    let start: Vec<BankBalanceSheet> = banks.to_vec();
    let gross = |u: usize, v: usize| flows.xi2 * start[u].l2.max(0.0) * flows.wire_matrix[[u, v]];
    let mut net = vec![0.0; nb];
    for u in 0..nb {
        for v in (u + 1)..nb {
            let (uv, vu) = (gross(u, v), gross(v, u));
            outcome.gross += uv + vu;
            net[u] += vu - uv;
            net[v] += uv - vu;
        }
    }
    let outflow: Money = net.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    if outflow > 0.0 {
        for c in (0..nb).filter(|&c| net[c] > 0.0) {
            for d in (0..nb).filter(|&d| net[d] < 0.0) {
                let amount = net[c] * -net[d] / outflow;
                if amount > 0.0 {
                    banks[c].a3 += amount;
                    banks[d].l3 += amount;
                    loans.record(c, d, period, amount, base.weights(&start[d]));
                    outcome.loans.push((c, d, amount));
                }
            }
        }
    }
    for (i, bank) in banks.iter_mut().enumerate() {
        bank.l2 += net[i];
        if bank.l2 < -tol * start[i].scale().max(1.0) {
            return Err(Error::NegativeLoanDeposits {
                bank: i,
                value: bank.l2,
            });
        }
        if bank.l2 < 0.0 {
            bank.l2 = 0.0;
        }
        book.adjust_l2_pro_rata(i, net[i]);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sheet(l1: f64, l2: f64) -> BankBalanceSheet {
        BankBalanceSheet {
            a1: l1,
            l1,
            a2: l2,
            l2,
            ..Default::default()
        }
    }

    fn two_customer_book() -> CustomerBook {
        let mut book = CustomerBook::new(vec![0, 1], 2);
        book.l1 = vec![100.0, 100.0];
        book
    }

    #[test]
    fn zero_cash_scale_is_identity() {
        let mut banks = vec![sheet(100.0, 0.0), sheet(100.0, 0.0)];
        let mut book = two_customer_book();
        let flows = PaymentFlows {
            cash_matrix: array![[0.0, 1.0], [0.0, 1.0]],
            wire_matrix: Array2::zeros((2, 2)),
            xi1: 0.0,
            xi2: 0.0,
        };
        settle_cash_payments(&mut banks, &mut book, &flows, 1e-9).unwrap();
        assert_eq!(banks, vec![sheet(100.0, 0.0), sheet(100.0, 0.0)]);
        assert_eq!(book.l1, vec![100.0, 100.0]);
    }

    #[test]
    fn two_customer_cash_payment() {
        let mut banks = vec![sheet(100.0, 0.0), sheet(100.0, 0.0)];
        let mut book = two_customer_book();
        let flows = PaymentFlows {
            cash_matrix: array![[0.0, 1.0], [0.0, 1.0]],
            wire_matrix: Array2::zeros((2, 2)),
            xi1: 0.1,
            xi2: 0.0,
        };
        settle_cash_payments(&mut banks, &mut book, &flows, 1e-9).unwrap();
        assert_eq!(book.l1, vec![90.0, 110.0]);
        assert_eq!((banks[0].a1, banks[0].l1), (90.0, 90.0));
        assert_eq!((banks[1].a1, banks[1].l1), (110.0, 110.0));
        assert_eq!(banks[0].a1 + banks[1].a1, 200.0);
    }

    #[test]
    fn single_bank_cash_nets_out() {
        let mut banks = vec![sheet(300.0, 0.0), sheet(0.0, 0.0)];
        let mut book = CustomerBook::new(vec![0, 0, 0], 2);
        book.l1 = vec![100.0, 100.0, 100.0];
        let mut rng = RngStream::new(3, crate::stochastics::StreamLabel::CashMatrix, 0);
        let flows = PaymentFlows {
            cash_matrix: random_row_stochastic(3, &mut rng),
            wire_matrix: Array2::zeros((0, 0)),
            xi1: 0.5,
            xi2: 0.0,
        };
        settle_cash_payments(&mut banks, &mut book, &flows, 1e-9).unwrap();
        assert_eq!(banks[0].a1, 300.0);
        assert_eq!(banks[0].l1, 300.0);
        assert!((book.l1.iter().sum::<f64>() - 300.0).abs() < 1e-9);
        assert!(book.l1.iter().all(|&x| x >= 0.0));
    }

    fn wire_fixture() -> (Vec<BankBalanceSheet>, CustomerBook) {
        let banks = vec![sheet(0.0, 1000.0), sheet(0.0, 0.0)];
        let mut book = CustomerBook::new(vec![0, 0, 1], 2);
        book.l2 = vec![600.0, 400.0, 0.0];
        (banks, book)
    }

    #[test]
    fn one_way_wire_becomes_interbank_loan() {
        let (mut banks, mut book) = wire_fixture();
        let mut loans = InterbankLoanLedger::new();
        let flows = PaymentFlows {
            cash_matrix: Array2::zeros((0, 0)),
            wire_matrix: array![[0.0, 1.0], [1.0, 0.0]],
            xi1: 0.0,
            xi2: 0.1,
        };
        let out =
            settle_wire_transfers(&mut banks, &mut book, &mut loans, &flows, ReserveBase::Narrow, 4, 1e-9).unwrap();
        assert_eq!(out.loans, vec![(1, 0, 100.0)]);
        assert_eq!((banks[0].l2, banks[0].l3), (900.0, 100.0));
        assert_eq!((banks[1].l2, banks[1].a3), (100.0, 100.0));
        for b in &banks {
            assert_eq!(b.core_residual(), 0.0);
        }
        assert_eq!(book.l2, vec![540.0, 360.0, 100.0]);
        loans.check_consistency(&banks, 1e-12).unwrap();
        let key = crate::interbank::LoanKey {
            lender: 1,
            borrower: 0,
            issue_period: 4,
        };
        assert_eq!(loans.get(&key).unwrap().amount, 100.0);
    }

    #[test]
    fn symmetric_wires_net_to_nothing() {
        let mut banks = vec![sheet(0.0, 500.0), sheet(0.0, 500.0)];
        let mut book = CustomerBook::new(vec![0, 1], 2);
        book.l2 = vec![500.0, 500.0];
        let mut loans = InterbankLoanLedger::new();
        let flows = PaymentFlows {
            cash_matrix: Array2::zeros((0, 0)),
            wire_matrix: array![[0.5, 0.5], [0.5, 0.5]],
            xi1: 0.0,
            xi2: 0.2,
        };
        let out =
            settle_wire_transfers(&mut banks, &mut book, &mut loans, &flows, ReserveBase::Broad, 0, 1e-9).unwrap();
        assert!(out.loans.is_empty());
        assert!(loans.is_empty());
        assert_eq!(banks[0].l2, 500.0);
    }

    #[test]
    fn netting_is_multilateral() {
        // 0 pays 1, 1 pays 2 the same amount: only 0 -> 2 remains.
        let mut banks = vec![sheet(0.0, 1000.0), sheet(0.0, 1000.0), sheet(0.0, 0.0)];
        let mut book = CustomerBook::new(vec![0, 1, 2], 3);
        book.l2 = vec![1000.0, 1000.0, 0.0];
        let mut loans = InterbankLoanLedger::new();
        let flows = PaymentFlows {
            cash_matrix: Array2::zeros((0, 0)),
            wire_matrix: array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
            xi1: 0.0,
            xi2: 0.1,
        };
        let out =
            settle_wire_transfers(&mut banks, &mut book, &mut loans, &flows, ReserveBase::Broad, 1, 1e-9).unwrap();
        assert_eq!(out.loans, vec![(2, 0, 100.0)]);
        assert_eq!(banks[1].l2, 1000.0);
        assert_eq!((banks[1].a3, banks[1].l3), (0.0, 0.0));
        assert_eq!(banks.iter().map(|b| b.l2).sum::<f64>(), 2000.0);
        loans.check_consistency(&banks, 1e-12).unwrap();
    }

    #[test]
    fn zero_wire_scale_or_empty_deposits_is_identity() {
        let (mut banks, mut book) = wire_fixture();
        let before = banks.clone();
        let mut loans = InterbankLoanLedger::new();
        let mut flows = PaymentFlows {
            cash_matrix: Array2::zeros((0, 0)),
            wire_matrix: array![[0.0, 1.0], [1.0, 0.0]],
            xi1: 0.0,
            xi2: 0.0,
        };
        settle_wire_transfers(&mut banks, &mut book, &mut loans, &flows, ReserveBase::Narrow, 0, 1e-9).unwrap();
        assert_eq!(banks, before);
        flows.xi2 = 0.3;
        let mut empty = vec![sheet(10.0, 0.0), sheet(10.0, 0.0)];
        settle_wire_transfers(&mut empty, &mut book, &mut loans, &flows, ReserveBase::Narrow, 0, 1e-9).unwrap();
        assert!(loans.is_empty());
    }
}
