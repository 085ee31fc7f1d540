//! Exact and Monte Carlo estimates of return and hitting probabilities.

pub mod bands;
pub mod dp;
pub mod moments;
pub mod monte_carlo;

pub use bands::{bound_band_scan, lclt_exponent_fit, ratio_grid, BandCell, BoundBandReport, LcltFit};
pub use dp::{
    exact_hitting_dp, exact_return_prob, exact_return_prob_2d, return_prob_series, truncation_radius, DpTable,
    DpTable2, HittingDp,
};
pub use moments::{
    renewal_identity_sides, rwvd_expected_returns, rwvd_interval_hit_prob, second_moment_ratio, ExpectedReturns,
    SecondMomentReport,
};
pub use monte_carlo::{mc_hitting, mc_hitting_grid, HittingEstimate};
