use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("degenerate tetrahedron {tet}: |volume| = {volume:e} is below 1e-14 h_K^3")]
    Degenerate { tet: usize, volume: f64 },

    #[error("no material given for region tag {0}")]
    MissingMaterial(i32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported quadrature order {0}")]
    UnsupportedOrder(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factorization failed: {0}")]
    Singular(String),

    #[error("relative residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("quadratic form is negative ({0:e}); the operator matrix is not semidefinite")]
    NegativeForm(f64),

    #[error("point ({:.4}, {:.4}, {:.4}) is not strictly inside the domain", .0[0], .0[1], .0[2])]
    NotInside([f64; 3]),

    #[error("point ({:.4}, {:.4}, {:.4}) is not strictly outside the domain", .0[0], .0[1], .0[2])]
    NotOutside([f64; 3]),
}
