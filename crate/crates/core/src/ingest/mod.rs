//! Spot-price history ingestion: parsing, histogram densities and fits of
//! the parametric price families.

mod density;
mod fit;
mod parse;

pub use density::{
    empirical_density, freedman_diaconis_bins, histogram, DensityOptions, Weighting,
};
pub use fit::{fit_bounded_pareto, fit_exponential, FitReport};
pub use parse::{
    parse_history, parse_history_path, parse_timestamp, resample_to_slots, HistoryFormat,
    PricePoint,
};
