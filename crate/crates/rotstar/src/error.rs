use thiserror::Error;

/// Errors shared across the solver modules.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("input out of domain: {0}")]
    Domain(String),

    #[error("no surface crossing found before r_max = {r_max} (last w = {last_w})")]
    SurfaceNotFound { r_max: f64, last_w: f64 },

    #[error("step size underflow at r = {r} (h = {h})")]
    StiffnessFailure { r: f64, h: f64 },

    #[error("stored profile too coarse: {0}")]
    ResolutionError(String),

    #[error("dual-method consistency check failed: {0}")]
    ConsistencyError(String),

    #[error("numerical failure: {0}")]
    NumericsError(String),

    #[error("target mass {target} not reachable by adjusting alpha in [{alpha_min}, 0)")]
    MassUnreachable { target: f64, alpha_min: f64 },

    #[error("SCF did not converge in {iters} sweeps (last residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("O_N guard violated: margin -(alpha + kappa^2 sup j) = {value} fell to the floor 1/N")]
    GuardViolation { value: f64 },

    #[error("density support reached the domain boundary (r_eq = {r_eq}, R_dom = {r_dom})")]
    DomainOverflow { r_eq: f64, r_dom: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
