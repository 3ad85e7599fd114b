//! Agent-based simulator of a miniature banking system.
//!
//! Customers hold currency deposits and loan deposits at one of `B` banks.
//! Each period runs the same pipeline: guarantee removal, customer cash
//! payments, wire transfers with bilateral netting into interbank credit,
//! customer loan repayment and new lending, interbank repayment, interbank
//! pooling, central-bank guarantees and equity accrual.
//!
//! Every source of randomness is derived from one master seed, so a
//! [`ScenarioConfig`] fully determines its [`SimulationTrace`].

pub mod bank_credit;
pub mod central_bank;
pub mod config;
pub mod engine;
pub mod equity;
pub mod error;
pub mod interbank;
pub mod io;
pub mod ledger;
pub mod payments;
pub mod stochastics;

pub use config::{LendingBehaviour, MatchingMode, Preset, ScenarioConfig};
pub use engine::{
    compare_phis, run_ensemble, run_scenario, CheckMode, Comparison, EnsembleSummary, RunMetrics, Simulation,
    SimulationTrace,
};
pub use error::{Error, Result};
pub use interbank::InterbankLoanLedger;
pub use ledger::{BankBalanceSheet, CustomerBook, ReserveBase};
pub use stochastics::{RngStream, StreamLabel, TriangularParams};

/// Currency units. Balances are plain `f64`; identities are checked with a
/// relative tolerance.
pub type Money = f64;
