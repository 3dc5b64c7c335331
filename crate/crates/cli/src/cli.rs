use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Absolute absorption cross sections from photon-recoil visibility reduction.
#[derive(Debug, Parser)]
#[command(name = "recoil-sigma", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Experiment configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutputArg {
    /// Write here (atomically) instead of standard output.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the velocity-averaged reduction over a distance range (CSV).
    Predict {
        #[command(flatten)]
        config: ConfigArg,
        /// Cross section, m^2.
        #[arg(long)]
        sigma: f64,
        /// First distance, m.
        #[arg(long)]
        dmin: f64,
        /// Last distance, m.
        #[arg(long)]
        dmax: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Add the monochromatic (v = v0) column.
        #[arg(long)]
        monochromatic: bool,
        /// Add a band between two cross sections, m^2.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        band: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Fit the cross section to a distance scan of visibility ratios (JSON).
    FitSigma {
        #[command(flatten)]
        config: ConfigArg,
        /// curve.csv with distance_m,ratio,ratio_err.
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        /// Upper end of the search range, m^2.
        #[arg(long, default_value_t = 1e-19)]
        sigma_max: f64,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Single-point cross-section estimate (biased low, see the warning field).
    QuickSigma {
        #[command(flatten)]
        config: ConfigArg,
        /// Visibility ratio V'/V.
        #[arg(long)]
        ratio: f64,
        /// Recoil laser distance, m.
        #[arg(long)]
        distance: f64,
        /// Molecular velocity, m/s (default: configured v0).
        #[arg(long)]
        velocity: Option<f64>,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Fit visibility, phase and mean rate to a G3 scan (JSON).
    ExtractVisibility {
        #[command(flatten)]
        config: ConfigArg,
        /// scan.csv with position_m,counts,dwell_s.
        #[arg(long, value_name = "FILE")]
        scan: PathBuf,
        /// Fit the fringe period instead of fixing it to the grating period.
        #[arg(long)]
        free_period: bool,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Fit the transverse laser-offset profile (JSON).
    OffsetScan {
        #[command(flatten)]
        config: ConfigArg,
        /// offsets.csv with offset_m,ratio,ratio_err.
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        /// Fit the waist instead of fixing it to the configured waist_y.
        #[arg(long)]
        free_waist: bool,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Linear fit of -ln(V'/V) against recoil power (JSON).
    PowerScan {
        #[command(flatten)]
        config: ConfigArg,
        /// powers.csv with power_w,ratio,ratio_err.
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Chi-square test that a set of ratios share one value (JSON).
    Constancy {
        /// ratios.csv with grating_power_w,ratio,ratio_err.
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Generate synthetic data with the particle-ensemble simulator.
    Simulate {
        #[command(subcommand)]
        what: SimulateCommand,
    },
    /// First-minimum distance and revival period (JSON).
    Dmin {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        output: OutputArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanNoise {
    /// Expected counts, no sampling noise.
    Exact,
    /// Poisson counts.
    Counting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveNoise {
    /// Expected ratios with a nominal error.
    Exact,
    /// Ensemble ratio plus normal noise of width --ratio-err.
    Gaussian,
    /// Poisson-counted scan pairs averaged over repeats.
    Counting,
}

#[derive(Debug, Args)]
pub struct SimCommon {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Generating cross section, m^2.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub seed: u64,
    /// Molecules per ensemble.
    #[arg(long, default_value_t = 100_000)]
    pub molecules: usize,
    /// Points per G3 scan.
    #[arg(long, default_value_t = 40)]
    pub scan_points: usize,
    /// Counting time per scan point, s.
    #[arg(long, default_value_t = 1.0)]
    pub dwell: f64,
    /// Full height of the molecular beam, m.
    #[arg(long, default_value_t = 0.0)]
    pub beam_height: f64,
    /// Output CSV; a manifest is written next to it.
    #[arg(long, short, value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// One G3 scan (scan.csv schema) at the configured distance.
    Scan {
        #[command(flatten)]
        common: SimCommon,
        /// Recoil laser on.
        #[arg(long)]
        perturbed: bool,
        #[arg(long, value_enum, default_value_t = ScanNoise::Counting)]
        noise: ScanNoise,
    },
    /// A distance scan of ratios (curve.csv schema).
    Curve {
        #[command(flatten)]
        common: SimCommon,
        /// First distance, m.
        #[arg(long, default_value_t = 0.035)]
        dmin: f64,
        /// Last distance, m.
        #[arg(long, default_value_t = 0.055)]
        dmax: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, value_enum, default_value_t = CurveNoise::Counting)]
        noise: CurveNoise,
        /// Ratio error for the exact and gaussian noise modes.
        #[arg(long, default_value_t = 0.03)]
        ratio_err: f64,
        /// Scan pairs per distance in counting mode.
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
}
