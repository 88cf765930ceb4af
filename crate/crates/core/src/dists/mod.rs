//! Univariate distribution toolkit: the log-Laplace nugget, Lévy scales,
//! GPD margins, the standard-Pareto link, and the hierarchy's priors.
//!
//! Distribution objects are immutable after construction; sampling takes an
//! explicit caller-owned [`crate::rng::Stream`].

mod gpd;
mod levy;
mod loglaplace;
mod pareto;
mod priors;

pub use gpd::Gpd;
pub use levy::Levy;
pub use loglaplace::LogLaplace;
pub use pareto::{ln_pareto_link, pareto_link, pareto_link_capped, Pareto1, PARETO_LINK_LN_CAP};
pub use priors::{prior_logpdf, t_ln_norm, Prior};
