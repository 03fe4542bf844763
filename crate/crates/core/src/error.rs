use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jet shape mismatch: ({lhs_vars} vars, order {lhs_order}) vs ({rhs_vars} vars, order {rhs_order})")]
    Shape {
        lhs_vars: usize,
        lhs_order: usize,
        rhs_vars: usize,
        rhs_order: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("vectors live at different base points")]
    Base,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("immersion is not regular at ({u}, {v}): smallest metric eigenvalue {min_eig:e}")]
    Rank { u: f64, v: f64, min_eig: f64 },

    #[error("unsupported curve: {0}")]
    UnsupportedCurve(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("integration failed: drift {drift:e} at node ({i}, {j})")]
    Integration { drift: f64, i: usize, j: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
