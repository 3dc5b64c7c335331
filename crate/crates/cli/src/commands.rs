use std::path::{Path, PathBuf};

use recoil_core::estimation::{
    fit_sigma_with, predict_curve, quick_sigma, systematic_error, FitOptions, PredictOptions, ReductionCurve,
    QUICK_SIGMA_BIAS_NOTE,
};
use recoil_core::fringe::{
    constancy_check, extract_visibility, fit_offset_profile, fit_power_linearity, PeriodMode, RatioPoint,
    WaistMode,
};
use recoil_core::io::{
    load_config, prediction_to_csv, ratio_table_to_csv, read_ratio_table, read_scan, scan_to_csv, RatioTable,
    RunManifest,
};
use recoil_core::montecarlo::{
    default_offset_grid, simulate_fringe_scan, simulate_reduction_curve, NoiseModel, SimulationConfig,
};
use recoil_core::physics::{first_minimum_distance, mean_photon_number, revival_period};
use recoil_core::ExperimentConfig;
use serde::Serialize;

use crate::cli::{Cli, Command, CurveNoise, ScanNoise, SimCommon, SimulateCommand};
use crate::output::{emit_csv, emit_json, Failure};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn manifest(command: &str, config: Option<&ExperimentConfig>, inputs: &[&Path], seed: Option<u64>) -> RunManifest {
    let inputs: Vec<PathBuf> = inputs.iter().map(|p| p.to_path_buf()).collect();
    RunManifest::new(VERSION, command, config, &inputs, seed)
}

fn linspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>, Failure> {
    if n == 0 {
        return Err(Failure::usage("--points must be at least 1"));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    if !(b >= a) {
        return Err(Failure::usage("--dmax must not be smaller than --dmin"));
    }
    Ok((0..n)
        .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect())
}

#[derive(Serialize)]
struct DminResult {
    first_minimum_distance_m: f64,
    revival_period_m: f64,
    mean_velocity_m_s: f64,
}

#[derive(Serialize)]
struct QuickResult {
    sigma_abs_m2: f64,
    systematic_err_m2: f64,
    ratio: f64,
    distance_m: f64,
    velocity_m_s: f64,
    first_minimum_distance_m: f64,
    n0_at_max_power: f64,
    bias_warning: &'static str,
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Dmin { config, output } => {
            let cfg = load_config(&config.config)?;
            let v0 = cfg.velocity.mean_velocity();
            let lambda = cfg.recoil_laser.wavelength;
            let result = DminResult {
                first_minimum_distance_m: first_minimum_distance(&cfg.interferometer, &cfg.molecule, lambda, v0)?,
                revival_period_m: revival_period(&cfg.interferometer, &cfg.molecule, lambda, v0)?,
                mean_velocity_m_s: v0,
            };
            let m = manifest("dmin", Some(&cfg), &[&config.config], None);
            emit_json("dmin", &m, &result, output.output.as_deref())
        }
        Command::Predict {
            config,
            sigma,
            dmin,
            dmax,
            points,
            monochromatic,
            band,
            output,
        } => {
            let cfg = load_config(&config.config)?;
            let grid = linspace(dmin, dmax, points)?;
            let options = PredictOptions {
                monochromatic,
                band: band.map(|b| (b[0], b[1])),
            };
            let rows = predict_curve(&cfg, sigma, &grid, options)?;
            let m = manifest("predict", Some(&cfg), &[&config.config], None);
            emit_csv("predict", &m, &prediction_to_csv(&rows), output.output.as_deref())
        }
        Command::FitSigma {
            config,
            data,
            sigma_max,
            output,
        } => {
            let cfg = load_config(&config.config)?;
            let points = read_ratio_table(&data, RatioTable::Curve)?;
            let curve = ReductionCurve::new(points, cfg.clone())?;
            let opts = FitOptions {
                sigma_max,
                ..FitOptions::default()
            };
            let fit = fit_sigma_with(&curve, &opts)?;
            let m = manifest("fit-sigma", Some(&cfg), &[&config.config, &data], None);
            emit_json("fit-sigma", &m, &fit, output.output.as_deref())
        }
        Command::QuickSigma {
            config,
            ratio,
            distance,
            velocity,
            output,
        } => {
            let cfg = load_config(&config.config)?;
            let cfg = cfg.at_distance(distance);
            cfg.validate()?;
            let point = RatioPoint {
                abscissa: distance,
                ratio,
                ratio_err: 1.0,
            };
            let sigma = quick_sigma(&point, &cfg, velocity)?;
            let v = velocity.unwrap_or(cfg.velocity.mean_velocity());
            let result = QuickResult {
                sigma_abs_m2: sigma,
                systematic_err_m2: systematic_error(sigma, &cfg)?,
                ratio,
                distance_m: distance,
                velocity_m_s: v,
                first_minimum_distance_m: first_minimum_distance(
                    &cfg.interferometer,
                    &cfg.molecule,
                    cfg.recoil_laser.wavelength,
                    v,
                )?,
                n0_at_max_power: mean_photon_number(&cfg.recoil_laser, sigma, v)?,
                bias_warning: QUICK_SIGMA_BIAS_NOTE,
            };
            let m = manifest("quick-sigma", Some(&cfg), &[&config.config], None);
            emit_json("quick-sigma", &m, &result, output.output.as_deref())
        }
        Command::ExtractVisibility {
            config,
            scan,
            free_period,
            output,
        } => {
            let cfg = load_config(&config.config)?;
            let data = read_scan(&scan)?;
            let mode = if free_period { PeriodMode::Free } else { PeriodMode::Fixed };
            let result = extract_visibility(&data, cfg.interferometer.grating_period, mode)?;
            let m = manifest("extract-visibility", Some(&cfg), &[&config.config, &scan], None);
            emit_json("extract-visibility", &m, &result, output.output.as_deref())
        }
        Command::OffsetScan {
            config,
            data,
            free_waist,
            output,
        } => {
            let cfg = load_config(&config.config)?;
            let points = read_ratio_table(&data, RatioTable::Offsets)?;
            let mode = if free_waist { WaistMode::Free } else { WaistMode::Fixed };
            let result = fit_offset_profile(&points, cfg.recoil_laser.waist_y, mode)?;
            let m = manifest("offset-scan", Some(&cfg), &[&config.config, &data], None);
            emit_json("offset-scan", &m, &result, output.output.as_deref())
        }
        Command::PowerScan { config, data, output } => {
            let cfg = load_config(&config.config)?;
            let points = read_ratio_table(&data, RatioTable::Powers)?;
            let result = fit_power_linearity(&points)?;
            let m = manifest("power-scan", Some(&cfg), &[&config.config, &data], None);
            emit_json("power-scan", &m, &result, output.output.as_deref())
        }
        Command::Constancy { data, output } => {
            let points = read_ratio_table(&data, RatioTable::Constancy)?;
            let result = constancy_check(&points)?;
            let m = manifest("constancy", None, &[&data], None);
            emit_json("constancy", &m, &result, output.output.as_deref())
        }
        Command::Simulate { what } => simulate(what),
    }
}

fn sim_config(common: &SimCommon, noise: NoiseModel, repeats: usize) -> Result<(ExperimentConfig, SimulationConfig), Failure> {
    let cfg = load_config(&common.config.config)?;
    let sim = SimulationConfig {
        experiment: cfg.clone(),
        true_sigma: common.sigma,
        n_molecules: common.molecules,
        rng_seed: common.seed,
        points_per_scan: common.scan_points,
        dwell_time: common.dwell,
        repeats,
        noise,
        beam_height: common.beam_height,
    };
    sim.validate()?;
    Ok((cfg, sim))
}

fn simulate(what: SimulateCommand) -> Result<(), Failure> {
    match what {
        SimulateCommand::Scan {
            common,
            perturbed,
            noise,
        } => {
            let noise = match noise {
                // the nominal error is unused for scans
                ScanNoise::Exact => NoiseModel::Exact { ratio_err: 1.0 },
                ScanNoise::Counting => NoiseModel::Counting,
            };
            let (cfg, sim) = sim_config(&common, noise, 2)?;
            let grid = default_offset_grid(cfg.interferometer.grating_period, common.scan_points);
            let scan = simulate_fringe_scan(&sim, &grid, perturbed)?;
            let m = manifest("simulate scan", Some(&cfg), &[&common.config.config], Some(common.seed));
            emit_csv("simulate-scan", &m, &scan_to_csv(&scan), Some(&common.output))
        }
        SimulateCommand::Curve {
            common,
            dmin,
            dmax,
            points,
            noise,
            ratio_err,
            repeats,
        } => {
            let noise = match noise {
                CurveNoise::Exact => NoiseModel::Exact { ratio_err },
                CurveNoise::Gaussian => NoiseModel::GaussianRatio { ratio_err },
                CurveNoise::Counting => NoiseModel::Counting,
            };
            let (cfg, sim) = sim_config(&common, noise, repeats)?;
            let grid = linspace(dmin, dmax, points)?;
            let curve = simulate_reduction_curve(&sim, &grid)?.curve()?;
            let m = manifest("simulate curve", Some(&cfg), &[&common.config.config], Some(common.seed));
            let csv = ratio_table_to_csv(curve.points(), RatioTable::Curve);
            emit_csv("simulate-curve", &m, &csv, Some(&common.output))
        }
    }
}
