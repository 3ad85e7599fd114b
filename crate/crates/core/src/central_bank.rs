//! The central bank as non-cash guarantor of last resort.
//!
//! A guarantee sits in A5 and L5 of the assisted bank for one period. It
//! is never part of the reserve base and is removed at the start of the
//! next period.

use serde::{Deserialize, Serialize};

use crate::ledger::BankBalanceSheet;
use crate::Money;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeRecord {
    pub bank: usize,
    pub amount: Money,
    pub fee_rate: f64,
}

/// Books `A5 = L5 = unmet` for every bank left short after pooling.
pub fn grant_guarantees(banks: &mut [BankBalanceSheet], unmet: &[Money], fee_rate: f64) -> Vec<GuaranteeRecord> {
    assert_eq!(banks.len(), unmet.len());
    let mut records = Vec::new();
    for (bank, (sheet, &need)) in banks.iter_mut().zip(unmet).enumerate() {
        if need > 0.0 {
            sheet.a5 += need;
            sheet.l5 += need;
            records.push(GuaranteeRecord {
                bank,
                amount: need,
                fee_rate,
            });
        }
    }
    records
}

/// Clears last period's guarantees. Returns the volume removed.
pub fn remove_guarantees(banks: &mut [BankBalanceSheet]) -> Money {
    let mut removed = 0.0;
    for sheet in banks.iter_mut() {
        removed += sheet.l5;
        sheet.a5 = 0.0;
        sheet.l5 = 0.0;
    }
    removed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::ReserveBase;

    #[test]
    fn no_need_no_guarantee() {
        let mut banks = vec![BankBalanceSheet::default(); 3];
        let records = grant_guarantees(&mut banks, &[0.0; 3], 0.045);
        assert!(records.is_empty());
        assert!(banks.iter().all(|b| b.l5 == 0.0));
    }

    #[test]
    fn guarantee_tops_up_to_target() {
        // Target reserve 100 against 1000 deposits, 70 held after pooling.
        let mut banks = vec![BankBalanceSheet {
            a1: 70.0,
            a2: 930.0,
            l1: 1000.0,
            ..Default::default()
        }];
        let target = 0.1 * banks[0].deposits();
        let unmet = target - ReserveBase::Narrow.sum_reserve(&banks[0]);
        let records = grant_guarantees(&mut banks, &[unmet], 0.045);
        assert_eq!(
            records,
            vec![GuaranteeRecord {
                bank: 0,
                amount: 30.0,
                fee_rate: 0.045
            }]
        );
        assert_eq!((banks[0].a5, banks[0].l5), (30.0, 30.0));
        assert_eq!(banks[0].core_residual(), 0.0);
        for base in [ReserveBase::Narrow, ReserveBase::Broad, ReserveBase::Securitised] {
            assert_eq!(
                base.sum_reserve(&banks[0]),
                base.sum_reserve(&BankBalanceSheet {
                    a5: 0.0,
                    l5: 0.0,
                    ..banks[0]
                })
            );
        }
    }

    #[test]
    fn removal_clears_both_sides() {
        let mut banks = vec![BankBalanceSheet {
            a5: 30.0,
            l5: 30.0,
            ..Default::default()
        }];
        assert_eq!(remove_guarantees(&mut banks), 30.0);
        assert_eq!((banks[0].a5, banks[0].l5), (0.0, 0.0));
        assert_eq!(remove_guarantees(&mut banks), 0.0);
    }
}
