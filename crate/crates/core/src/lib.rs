//! Bounds on credit portfolio losses in stochastically increasing Bernoulli
//! mixture models (siBMMs).
//!
//! Each borrower's dependence on the common factor is summarized by a default
//! integral function `G(s) = ∫₀ˢ P(D = 1 | factor quantile t) dt`. Pointwise
//! larger `G` means weaker dependence and a smaller portfolio loss in convex
//! order, so pointwise envelopes of a family of `G`s bound every member's
//! risk under any law-invariant convex risk measure such as AVaR.

pub mod copulas;
pub mod error;
pub mod normal;
pub mod portfolio;
pub mod profile;
pub mod quadrature;
pub mod risk;
pub mod simulate;
pub mod tolerance;

pub use copulas::{clayton_theta_matching_gaussian, Copula};
pub use error::{Error, Result};
pub use portfolio::{
    beta_params, homogeneous_portfolio, irb_correlation, load_portfolio_csv, Borrower, IrbParams,
    LgdSpec, ModelFamily, Portfolio, Scenario,
};
pub use profile::{envelope, ConditionalPd, DefaultProfile, ProfileEnvelope};
pub use risk::{avar, check_cx_dominance, risk_report, stop_loss_curve, var, CxVerdict, RiskReport};
pub use simulate::{
    exact_loss_distribution, simulate_comonotone, simulate_independent, simulate_losses, LossSample,
    SimConfig,
};
pub use tolerance::Tolerances;
