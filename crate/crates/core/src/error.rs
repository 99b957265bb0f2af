use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("generator count mismatch: {left} vs {right}")]
    GeneratorMismatch { left: usize, right: usize },

    #[error("generator index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("expected a form of pure degree {expected}, found {found}")]
    NotPureDegree { expected: usize, found: String },

    #[error("division by a scalar that depends on parameters or pi")]
    PolynomialDivision,

    #[error("division by zero")]
    DivisionByZero,

    #[error("operation requires parameter-free coefficients")]
    ParametricInput,

    #[error("invalid generalized complex structure: {0}")]
    InvalidStructure(String),

    #[error("i-eigenspace has dimension {found}, expected {expected}")]
    EigenspaceDimension { expected: usize, found: usize },

    #[error("annihilator line has dimension {0}, expected 1")]
    SpinorLine(usize),

    #[error("Clifford lift spectrum is not {{-n..n}}*(-i): {0}")]
    LiftSpectrum(String),

    #[error("{what} not closed; residual {residual}")]
    NotClosed { what: String, residual: String },

    #[error("d^2 != 0 on generator {generator}; residual {residual}")]
    DifferentialNotNilpotent { generator: String, residual: String },

    #[error("structure is not integrable on this model; residual {residual}")]
    NotIntegrable { residual: String },

    #[error("precondition failed: {what}; residual {residual}")]
    Precondition { what: String, residual: String },

    #[error("action is not invariant: L_xi{j} of {target} = {residual}")]
    NotInvariant { j: usize, target: String, residual: String },

    #[error("form is not basic: {0}")]
    NotBasic(String),

    #[error("no connection: {0}")]
    NoConnection(String),

    #[error("alpha^{j} is not horizontal: iota of it gives {residual}")]
    NotHorizontal { j: usize, residual: String },

    #[error("ddbar-lemma violation; witness {witness}")]
    DdbarViolation { witness: String },

    #[error("density degree {degree} exceeds bound {bound}")]
    DegreeBound { degree: u32, bound: u32 },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("pairing vanishes at sample {sample}")]
    VanishingPairing { sample: String },

    #[error("Hamiltonian condition fails: {0}")]
    Hamiltonian(String),

    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("{line}: {msg}")]
    Validation { line: usize, msg: String },

    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GeneratorMismatch { .. } => "generator_mismatch",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotPureDegree { .. } => "not_pure_degree",
            Error::PolynomialDivision => "polynomial_division",
            Error::DivisionByZero => "division_by_zero",
            Error::ParametricInput => "parametric_input",
            Error::InvalidStructure(_) => "invalid_structure",
            Error::EigenspaceDimension { .. } => "eigenspace_dimension",
            Error::SpinorLine(_) => "spinor_line",
            Error::LiftSpectrum(_) => "lift_spectrum",
            Error::NotClosed { .. } => "not_closed",
            Error::DifferentialNotNilpotent { .. } => "d_squared_nonzero",
            Error::NotIntegrable { .. } => "not_integrable",
            Error::Precondition { .. } => "precondition",
            Error::NotInvariant { .. } => "not_invariant",
            Error::NotBasic(_) => "not_basic",
            Error::NoConnection(_) => "no_connection",
            Error::NotHorizontal { .. } => "not_horizontal",
            Error::DdbarViolation { .. } => "ddbar_violation",
            Error::DegreeBound { .. } => "degree_bound",
            Error::Degenerate(_) => "degenerate",
            Error::VanishingPairing { .. } => "vanishing_pairing",
            Error::Hamiltonian(_) => "hamiltonian",
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::Usage(_) => "usage",
        }
    }

    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. })
    }
}
