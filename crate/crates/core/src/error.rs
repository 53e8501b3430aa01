use thiserror::Error;

use crate::spectral::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `lambda_c` on the boundary of `(0, 1)` makes the branch formulas divide by zero.
    #[error("degenerate multiplier pair: lambda_c = {lambda_c}, lambda_s = {lambda_s}")]
    DegenerateMultiplier { lambda_s: f64, lambda_c: f64 },

    #[error("infeasible channel: no frequency bin has positive gain")]
    InfeasibleChannel,

    /// The dual search stopped without meeting the constraint tolerances. The
    /// report holds the best multiplier pair found.
    #[error(
        "solver did not converge: power residual {:.3e}, rate residual {:.3e}{}",
        .report.residual_power,
        .report.residual_rate,
        if .report.possible_duality_gap { " (possible duality gap)" } else { "" }
    )]
    NonConvergence { report: Box<SolveReport> },

    #[error("no branch reproduces (s = {s}, c = {c}) within tolerance")]
    IndeterminateLabel { s: f64, c: f64 },

    #[error("could not bracket the {which} multiplier")]
    NonBracketable { which: &'static str },

    #[error("oracle size guard: {size} exceeds the limit of {limit}")]
    OracleTooLarge { size: usize, limit: usize },

    #[error("quadrature order {0} is below the minimum of 8")]
    QuadratureOrder(usize),
}
