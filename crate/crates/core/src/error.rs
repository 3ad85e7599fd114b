use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("missing mandatory config key `seed` (runs are never seeded from the clock)")]
    MissingSeed,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("triangular parameters must satisfy lower <= peak <= upper, got ({lower}, {peak}, {upper})")]
    InvalidTriangular { lower: f64, peak: f64, upper: f64 },

    #[error("accounting identity violated in period {period} after {phase}: {detail}")]
    IdentityViolation {
        period: usize,
        phase: &'static str,
        detail: String,
    },

    #[error("customer book out of sync with bank {bank}: {detail}")]
    ConsistencyViolation { bank: usize, detail: String },

    #[error("interbank ledger out of sync: {0}")]
    LedgerDesync(String),

    #[error("bank {bank} would end wire settlement with negative loan deposits ({value})")]
    NegativeLoanDeposits { bank: usize, value: f64 },

    #[error("negative pooled allocation {amount} from bank {lender} to bank {borrower}")]
    NegativeAllocation {
        lender: usize,
        borrower: usize,
        amount: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
