use thiserror::Error;

pub type Result<T, E = MkitError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MkitError {
    #[error("variable count mismatch: {left} vs {right}")]
    VariableCountMismatch { left: usize, right: usize },

    #[error("backend mismatch: cannot combine exact and float polynomials")]
    BackendMismatch,

    #[error("arity mismatch: polynomial has {expected} variables but {got} substitutions were given")]
    ArityMismatch { expected: usize, got: usize },

    #[error("substitution {index} has a nonzero constant term")]
    ConstantTermSubstitution { index: usize },

    #[error("implicit function theorem fails: dg/dy(0) = 0")]
    ImplicitFunctionFails,

    #[error("implicit equation does not vanish at the origin")]
    NonzeroConstant,

    #[error("degenerate point: Hessian is singular")]
    DegeneratePoint,

    #[error("pivot {0} is not a perfect rational square; use the float backend")]
    NonSquarePivot(String),

    #[error("null direction: h(v, v) = 0")]
    NullDirection,

    #[error("zero vector")]
    ZeroVector,

    #[error("germ is not in normal form: {0}")]
    NotNormalForm(String),

    #[error("curve has a2 = 0; osculating conic is undefined")]
    Inflection,

    #[error("quadric has no x_{{n+1}} term and cannot be normalized")]
    UnscalableQuadric,

    #[error("the x1-axis is not a Darboux direction: {0}")]
    NotDarbouxDirection(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("internal consistency failure: {0}")]
    InternalMismatch(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("every grid point is degenerate")]
    AllPointsDegenerate,

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
