use thiserror::Error;

/// Everything that can go wrong between parsing a curve and emitting records.
///
/// Variants fall in two groups: bad input (exit code 2) and broken internal
/// invariants (exit code 3). The second group should never fire on valid input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial is not monic (leading coefficient {0})")]
    NotMonic(String),
    #[error("polynomial has degree {0}; an odd degree 2g+1 >= 3 is required")]
    EvenDegree(usize),
    #[error("polynomial is not squarefree (resultant with its derivative is zero)")]
    NotSquarefree,
    #[error("polynomials are not coprime")]
    NotCoprime,
    #[error("vertical reduction needs a nonzero constant term")]
    ZeroConstantTerm,
    #[error("illegal reduction step {step} from W[{s},{t}]")]
    IllegalStep { step: &'static str, s: i64, t: i64 },
    #[error("matrix dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("remainder tree needs at least two matrices, got {0}")]
    SequenceTooShort(usize),
    #[error("prime {p} is outside the tree range 3 <= p < {limit}")]
    PrimeOutOfRange { p: u64, limit: u64 },
    #[error("denominator not invertible modulo {0}")]
    NonInvertibleDenominator(u64),
    #[error("small integer {k} not invertible modulo powers of {p}")]
    NonInvertibleSmallInteger { k: u64, p: u64 },
    #[error("p = {p}: valuation {e} of the denominator product for pair ({a},{b}) exceeds bound {rho}")]
    ValuationOverflow { p: u64, a: u32, b: u32, e: u32, rho: u32 },
    #[error("p = {p}: reduction of pair ({a},{b}) is only known to precision {precision}, need {needed}")]
    PrecisionLoss { p: u64, a: u32, b: u32, precision: u32, needed: u32 },
    #[error("p = {p}: Frobenius column {column} is not integral")]
    IntegralityFailure { p: u64, column: usize },
    #[error("p = {p}: missing reduction for pair ({a},{b})")]
    MissingEntry { p: u64, a: u32, b: u32 },
    #[error("p = {p}: coefficient a_{i} violates the Weil bound")]
    WeilBoundViolation { p: u64, i: usize },
    #[error("p = {p}: coefficient a_{i} contradicts the functional equation")]
    FunctionalEquationMismatch { p: u64, i: usize },
    #[error("p^{n} with p = {p} exceeds the point-counting budget of 2^{bits}")]
    BudgetExceeded { p: u64, n: u32, bits: u32 },
    #[error("exact reduction at p = {p} exceeds the limit p <= {limit}")]
    ExactReductionTooLarge { p: u64, limit: u64 },
    #[error("point counts for p = {0} give a non-integral symmetric function")]
    NonIntegralNewton(u64),
    #[error("p = {p}: pipeline record {computed} disagrees with brute force {expected}")]
    VerificationMismatch { p: u64, computed: String, expected: String },
    #[error("p = {p}, stage {stage}: {source}")]
    AtPrime {
        p: u64,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid input: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at(self, p: u64, stage: &'static str) -> Error {
        match self {
            e @ Error::AtPrime { .. } => e,
            e => Error::AtPrime { p, stage, source: Box::new(e) },
        }
    }

    /// True for errors caused by the caller's input rather than by a bug.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::NotMonic(_)
            | Error::EvenDegree(_)
            | Error::NotSquarefree
            | Error::Parse(_)
            | Error::Io(_)
            | Error::BudgetExceeded { .. }
            | Error::ExactReductionTooLarge { .. } => true,
            Error::AtPrime { source, .. } => source.is_input_error(),
            _ => false,
        }
    }

    /// Process exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        if self.is_input_error() {
            2
        } else {
            3
        }
    }
}
