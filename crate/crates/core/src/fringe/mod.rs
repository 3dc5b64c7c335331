//! Visibility extraction from G3 scans and the auxiliary fits on visibility ratios
//! (transverse offset profile, power linearity, constancy).

mod constancy;
mod power;
mod profile;
mod ratio;
mod scan;

pub use constancy::{constancy_check, ConstancyResult};
pub use power::{fit_power_linearity, PowerLinearityFit};
pub use profile::{fit_offset_profile, OffsetProfileFit, WaistMode};
pub use ratio::{visibility_ratio, RatioPoint};
pub use scan::{extract_visibility, FringeScan, PeriodMode, VisibilityResult, MIN_SCAN_POINTS};
