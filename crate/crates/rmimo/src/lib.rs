//! Link-level simulator for pattern-reconfigurable massive MIMO downlink.
//!
//! The library models a base station whose antenna elements can switch their
//! radiation pattern at run time, and compares it against fixed-pattern
//! arrays under fully-digital and sub-connected hybrid architectures:
//!
//! - [`patterns`]: parametric radiation patterns (the Type 0-3 reconfigurable
//!   set and rotatable Hertz dipoles) and gain evaluation.
//! - [`channel`]: free-space line-of-sight channels and a clustered geometric
//!   stochastic channel with per-antenna pattern dependence.
//! - [`precoding`]: zero-forcing digital precoding, sub-connected phase-only
//!   analog precoding, and spectral-efficiency evaluation.
//! - [`emr_search`]: greedy per-antenna pattern selection with exhaustive and
//!   random baselines.
//! - [`power_ee`]: component-level power consumption and energy efficiency.
//! - [`harness`]: scenario configuration, Monte Carlo experiments, CSV
//!   outputs, and the command-line interface.

pub mod channel;
pub mod emr_search;
pub mod error;
pub mod harness;
pub mod patterns;
pub mod power_ee;
pub mod precoding;
pub mod seeds;

pub use error::{Error, Result};

/// Library version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
