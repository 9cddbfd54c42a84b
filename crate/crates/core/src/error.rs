use crate::simulate::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported derivative order {order} in {context} (supported range is (-3, 3))")]
    UnsupportedOrder { order: f64, context: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("simulation needs {requested} steps, limit is {limit}")]
    ResourceLimit { requested: usize, limit: usize },

    /// The state left the finite range; `partial` holds every sample up to
    /// and including the offending index.
    #[error("simulation diverged at step {index} (t = {time})")]
    Diverged {
        index: usize,
        time: f64,
        partial: Box<Trajectory>,
    },

    #[error("singular step: leading GL weight sum {pivot:e} is zero")]
    SingularStep { pivot: f64 },

    #[error("no solution: {reason} (best residual {residual:e})")]
    NoSolution { reason: String, residual: f64 },
}
