//! Lebesgue measure estimates on grids, image and level-set measures, and
//! the greedy interval covering.

mod cover;
mod grid;
mod image;
mod level;
mod region;

pub use cover::{greedy_cover_select, Interval, IntervalCollection};
pub use grid::{
    measure_set, measure_set_monte_carlo, BallMask, GridSpec, MeasureEstimate, MeasureMethod, SampledGrid,
    MIN_RESOLUTION,
};
pub use image::{
    check_distortion, distortion_constant, distortion_factors, lp_operator_bound, measure_image, weak_type_constant,
    DistortionReport,
};
pub use level::{level_set_measure, level_set_measures, sample_maximal};
pub use region::{Ball, IndicatorRegion, Region};
