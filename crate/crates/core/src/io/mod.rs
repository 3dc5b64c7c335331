//! Configuration files, CSV tables, run manifests and atomic output.

mod config;
mod manifest;
mod tables;

pub use config::{load_config, reference_config, parse_config, save_config, REFERENCE_CONFIG, REFERENCE_CONFIG_NAME};
pub use manifest::{config_digest, sidecar_path, write_atomic, RunManifest};
pub use tables::{
    format_float, parse_ratio_table, parse_scan, prediction_to_csv, ratio_table_to_csv, read_ratio_table,
    read_scan, scan_to_csv, RatioTable, SCAN_HEADER,
};
