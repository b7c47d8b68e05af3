//! HTTP session service that administers analogy problems to human
//! participants, persists their responses, and exports records in the
//! same shape as model evaluations.

pub mod api;
pub mod design;
pub mod session;
pub mod store;

pub use api::{router, serve, ApiError, AppState};
pub use design::{build_trials, DesignError, Experiment, Materials, Trial};
pub use session::{HumanResponse, Session, Stage};
