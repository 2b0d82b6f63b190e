//! Quasiconcavity, rank timelines and positivity diagnostics.

pub mod levelset;
pub mod quasiconcave;
pub mod timeline;

pub use levelset::{bicubic, extract_spatial_levelset, resample_loop, LevelSetSample};
pub use quasiconcave::{
    check_monotone_in_time, convex_hull, hitting_times, hull_depth, level_ladder, quasiconcavity_check_spacetime,
    quasiconcavity_check_spatial, superlevel_violation, LevelCheck, SpaceTimeCheck, SpaceTimeLevel, SpaceTimeReport,
    SpatialReport, DEFAULT_QC_TOL,
};
pub use timeline::{
    min_principal_curvature, positivity_diagnostics, probe_lattice, rank_timeline, shape_samples, CurvatureMinimum,
    PositivityEntry, PositivityReport, RankEntry, RankTimeline, ShapeSample,
};
