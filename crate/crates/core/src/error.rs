use thiserror::Error;

/// Which observation limit ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetLimit {
    Terms,
    Steps,
}

impl BudgetLimit {
    /// The command-line flag that raises this limit.
    pub fn flag(self) -> &'static str {
        match self {
            BudgetLimit::Terms => "--max-terms",
            BudgetLimit::Steps => "--max-steps",
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The observation ran out of budget. This never asserts anything about
    /// the value being observed.
    #[error("budget exhausted ({limit:?} limit {max}); raise {flag} or LOGFIELD_BUDGET", flag = .limit.flag())]
    BudgetExhausted { limit: BudgetLimit, max: u64 },
    #[error("series is zero")]
    ZeroSeries,
    #[error("division by zero")]
    DivisionByZero,
    #[error("series is not small (leading monomial {0} is not below 1)")]
    NotSmall(String),
    #[error("series is not infinitely increasing: {0}")]
    NotInfIncreasing(String),
    #[error("leading coefficient {0} is not positive")]
    NonPositiveLeading(String),
    #[error("scalar leaves the exact coefficient domain: {0}")]
    IrrationalScalar(String),
    #[error("large part is not a linear combination of iterated logarithms: {0}")]
    LargePartNotLogLinear(String),
    #[error("series has an exponential part: {0}")]
    HasExpPart(String),
    #[error("summability violation: {0}")]
    SummabilityViolation(String),
    #[error("shape not supported: {0}")]
    ShapeNotSupported(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("x = {x} is not above the validity threshold {threshold}")]
    BelowThreshold { x: f64, threshold: f64 },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unbound name `{0}`")]
    UnboundName(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("{op}: {source}")]
    InOperation {
        op: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short machine-readable kind, used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BudgetExhausted { .. } => "BudgetExhausted",
            Error::ZeroSeries => "ZeroSeries",
            Error::DivisionByZero => "DivisionByZero",
            Error::NotSmall(_) => "NotSmall",
            Error::NotInfIncreasing(_) => "NotInfIncreasing",
            Error::NonPositiveLeading(_) => "NonPositiveLeading",
            Error::IrrationalScalar(_) => "IrrationalScalar",
            Error::LargePartNotLogLinear(_) => "LargePartNotLogLinear",
            Error::HasExpPart(_) => "HasExpPart",
            Error::SummabilityViolation(_) => "SummabilityViolation",
            Error::ShapeNotSupported(_) => "ShapeNotSupported",
            Error::MalformedInput(_) => "MalformedInput",
            Error::BelowThreshold { .. } => "BelowThreshold",
            Error::Syntax { .. } => "SyntaxError",
            Error::UnboundName(_) => "UnboundName",
            Error::Type(_) => "TypeError",
            Error::InOperation { source, .. } => source.kind(),
        }
    }

    pub fn is_budget(&self) -> bool {
        match self {
            Error::BudgetExhausted { .. } => true,
            Error::InOperation { source, .. } => source.is_budget(),
            _ => false,
        }
    }

    /// Strips operation context.
    pub fn root(&self) -> &Error {
        match self {
            Error::InOperation { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn in_op(self, op: impl Into<String>) -> Error {
        match self {
            e @ Error::InOperation { .. } => e,
            e => Error::InOperation {
                op: op.into(),
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
