//! Regenerates the synthetic data tables in `fixtures/`.
//!
//! cargo run --release -p recoil-core --example make_fixtures

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use recoil_core::fringe::RatioPoint;
use recoil_core::io::{load_config, ratio_table_to_csv, write_atomic, RatioTable};
use recoil_core::montecarlo::{simulate_reduction_curve, NoiseModel, SimulationConfig};
use recoil_core::physics::reduction_velocity_averaged;

const SIGMA: f64 = 1.97e-21;

fn noisy(rng: &mut ChaCha8Rng, exact: f64, err: f64) -> f64 {
    exact + Normal::new(0.0, err).unwrap().sample(rng)
}

fn with_note(note: &str, csv: Vec<u8>) -> Vec<u8> {
    let mut out = format!("# {note}\n").into_bytes();
    out.extend(csv);
    out
}

fn main() -> recoil_core::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut rng = ChaCha8Rng::seed_from_u64(1970);

    let reference = load_config(dir.join("c70_reference.cfg"))?;
    let mut sim = SimulationConfig::new(reference.clone(), SIGMA, 1970);
    sim.noise = NoiseModel::GaussianRatio { ratio_err: 0.03 };
    let grid: Vec<f64> = (0..10).map(|i| 0.035 + 0.02 * i as f64 / 9.0).collect();
    let curve = simulate_reduction_curve(&sim, &grid)?.curve()?;
    write_atomic(
        dir.join("c70_distance_scan.csv"),
        &with_note(
            "synthetic, sigma = 1.97e-21 m^2, ensemble ratios + N(0, 0.03), seed 1970",
            ratio_table_to_csv(curve.points(), RatioTable::Curve),
        ),
    )?;

    let offsets = load_config(dir.join("c70_offset_scan.cfg"))?;
    let mut pts = Vec::new();
    for i in -10..=10 {
        let y = i as f64 * 0.25e-3;
        let mut cfg = offsets.clone();
        cfg.recoil_laser.offset_y = y;
        let r = reduction_velocity_averaged(&cfg, SIGMA)?;
        pts.push(RatioPoint::new(y, noisy(&mut rng, r, 0.02), 0.02)?);
    }
    write_atomic(
        dir.join("c70_offsets.csv"),
        &with_note("synthetic offset scan at D = 3.5 cm, model + N(0, 0.02)", ratio_table_to_csv(&pts, RatioTable::Offsets)),
    )?;

    let powers = load_config(dir.join("c70_power_scan.cfg"))?;
    let mut pts = Vec::new();
    for i in 0..7 {
        let p = 17.4 * i as f64 / 6.0;
        let mut cfg = powers.clone();
        cfg.recoil_laser.power = p;
        let r = reduction_velocity_averaged(&cfg, SIGMA)?;
        pts.push(RatioPoint::new(p, noisy(&mut rng, r, 0.02), 0.02)?);
    }
    write_atomic(
        dir.join("c70_powers.csv"),
        &with_note("synthetic power scan at D = 3.5 cm, model + N(0, 0.02)", ratio_table_to_csv(&pts, RatioTable::Powers)),
    )?;

    let constancy = load_config(dir.join("c70_constancy.cfg"))?;
    let r = reduction_velocity_averaged(&constancy, SIGMA)?;
    let pts = [1.0, 2.0, 3.0, 4.0, 5.0, 6.5]
        .iter()
        .map(|&g| RatioPoint::new(g, noisy(&mut rng, r, 0.08), 0.08))
        .collect::<recoil_core::Result<Vec<_>>>()?;
    write_atomic(
        dir.join("c70_constancy.csv"),
        &with_note(
            "synthetic grating-power series at D = 4.85 cm, model + N(0, 0.08)",
            ratio_table_to_csv(&pts, RatioTable::Constancy),
        ),
    )?;
    Ok(())
}
