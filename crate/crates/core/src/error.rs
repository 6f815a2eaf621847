use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sum of inverse {k}-th powers diverges for tail exponent {p}")]
    DivergentSum { k: u32, p: f64 },

    #[error("spectrum is not in B_{k} (tail exponent {p})")]
    NotInClass { k: u32, p: f64 },

    #[error("no closed-form singular part for {regulator} with tail exponent {p}")]
    UnsupportedRegulatorTail { regulator: &'static str, p: f64 },

    #[error("no convergence: last change or error {last_diff:e} exceeds tol {tol:e}")]
    NoConvergence { last_diff: f64, tol: f64 },

    #[error("quadrature missed tolerance: error estimate {error:e} after {nodes} nodes")]
    QuadratureFailure { error: f64, nodes: usize },

    #[error("oscillatory integrand needs about {required} nodes, budget is {budget}")]
    OscillationBudgetExceeded { required: usize, budget: usize },

    #[error("imaginary residue {residue:e} of a real integral exceeds {tol:e}")]
    NotReal { residue: f64, tol: f64 },

    #[error("series coefficient of order {order} involves an infinite loop value b_{loop_index}")]
    InfiniteCoefficient { order: usize, loop_index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
