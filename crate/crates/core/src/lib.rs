//! Bidding portfolios for deadline-bound jobs on cloud spot markets.
//!
//! A job of `t_e` seconds must finish within `t_s`. A share `q` of it runs on
//! on-demand machines at the fixed price `π̄`; the rest bids `p` on a spot
//! market whose per-slot price is i.i.d. with CDF `F`. The crate computes the
//! cost-optimal `(q, p)` for three request types:
//!
//! * [`otr_eg`]: one-time request, finishing on time in expectation;
//! * [`otr_p`]: one-time request with penalties for unfinished or late work;
//! * [`pr`]: persistent request, paused and resumed across lost slots.
//!
//! Around the solvers sit price models ([`price_model`]), a slot-level Monte
//! Carlo simulator ([`sim`]), history ingestion and fitting ([`ingest`]) and
//! the `spotfolio` command line ([`cli`]).
//!
//! Prices are in $/hour and times in seconds. Library costs are therefore in
//! `$/hour × s`; divide by 3600 for dollars.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod ingest;
pub mod job;
pub mod numeric;
pub mod otr_eg;
pub mod otr_p;
pub mod pr;
pub mod price_model;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use job::{JobSpec, Strategy};
pub use otr_eg::{solve_otr_eg, EgSolution};
pub use otr_p::{sca_solve, PenaltyParams, ScaConfig, ScaResult};
pub use pr::{solve_pr, PrSolution};
pub use price_model::{
    BoundedParetoModel, EmpiricalModel, PriceBounds, PriceModel, TruncatedExponentialModel,
};

/// Seconds per hour, for turning `$/hour × s` into dollars.
pub const SECONDS_PER_HOUR: f64 = 3600.0;
