//! Sectioned `key = value unit` experiment files.
//!
//! ```text
//! [recoil_laser]
//! wavelength = 532.2 nm
//! power = 17.4 W
//! [velocity]
//! model = gaussian v0=210.3 m/s sigma=38.4 m/s
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::constants::ATOMIC_MASS_UNIT;
use crate::error::{Error, ErrorClass, Result};
use crate::physics::{InterferometerSpec, MoleculeSpec, RecoilLaserSpec};
use crate::{ExperimentConfig, VelocityModel};

/// The bundled reference configuration file.
pub const REFERENCE_CONFIG: &str = include_str!("../../fixtures/c70_reference.cfg");
pub const REFERENCE_CONFIG_NAME: &str = "c70_reference.cfg";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    None,
    Length,
    Mass,
    Power,
    Velocity,
    Rate,
}

impl Dim {
    fn name(self) -> &'static str {
        match self {
            Dim::None => "dimensionless",
            Dim::Length => "length",
            Dim::Mass => "mass",
            Dim::Power => "power",
            Dim::Velocity => "velocity",
            Dim::Rate => "rate",
        }
    }
}

enum Scale {
    Mul(f64),
    /// Power-of-ten prefix, applied to the decimal text so `532.2 nm` parses
    /// exactly like `532.2e-9`.
    Exp10(i32),
}

fn parse_scaled(number: &str, exp10: i32) -> Option<f64> {
    if exp10 == 0 {
        return number.parse().ok();
    }
    let (mantissa, exp) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().ok()?),
        None => (number, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", exp.checked_add(exp10)?).parse().ok()
}

fn unit(symbol: &str) -> Option<(Dim, Scale)> {
    use Scale::*;
    Some(match symbol {
        "m" => (Dim::Length, Exp10(0)),
        "cm" => (Dim::Length, Exp10(-2)),
        "mm" => (Dim::Length, Exp10(-3)),
        "um" | "µm" => (Dim::Length, Exp10(-6)),
        "nm" => (Dim::Length, Exp10(-9)),
        "kg" => (Dim::Mass, Exp10(0)),
        "amu" | "u" | "Da" => (Dim::Mass, Mul(ATOMIC_MASS_UNIT)),
        "W" => (Dim::Power, Exp10(0)),
        "mW" => (Dim::Power, Exp10(-3)),
        "m/s" => (Dim::Velocity, Exp10(0)),
        "/s" | "Hz" | "1/s" => (Dim::Rate, Exp10(0)),
        _ => return None,
    })
}

#[derive(Clone, Copy)]
enum Range {
    Positive,
    NonNegative,
    Finite,
    /// (0, 1]
    Fraction,
}

struct KeySpec {
    section: &'static str,
    key: &'static str,
    dim: Dim,
    range: Range,
    required: bool,
}

const fn k(section: &'static str, key: &'static str, dim: Dim, range: Range, required: bool) -> KeySpec {
    KeySpec {
        section,
        key,
        dim,
        range,
        required,
    }
}

const NUMERIC_KEYS: &[KeySpec] = &[
    k("molecule", "mass", Dim::Mass, Range::Positive, true),
    k("recoil_laser", "wavelength", Dim::Length, Range::Positive, true),
    k("recoil_laser", "power", Dim::Power, Range::NonNegative, true),
    k("recoil_laser", "power_err", Dim::Power, Range::NonNegative, false),
    k("recoil_laser", "waist_y", Dim::Length, Range::Positive, true),
    k("recoil_laser", "waist_x", Dim::Length, Range::Positive, false),
    k("recoil_laser", "waist_err", Dim::Length, Range::NonNegative, false),
    k("recoil_laser", "distance", Dim::Length, Range::NonNegative, true),
    k("recoil_laser", "offset_y", Dim::Length, Range::Finite, false),
    k("interferometer", "grating_period_d", Dim::Length, Range::Positive, true),
    k("interferometer", "grating_separation_l", Dim::Length, Range::Positive, true),
    k("interferometer", "grating_laser_wavelength", Dim::Length, Range::NonNegative, false),
    k("interferometer", "grating_laser_power", Dim::Power, Range::NonNegative, false),
    k("baseline", "visibility", Dim::None, Range::Fraction, true),
    k("baseline", "mean_rate", Dim::Rate, Range::Positive, true),
];

const TEXT_KEYS: &[(&str, &str, bool)] = &[("molecule", "name", true), ("velocity", "model", true)];

struct Entry {
    value: String,
    line: usize,
}

struct Parser<'a> {
    path: &'a Path,
    entries: BTreeMap<(String, String), Entry>,
}

impl Parser<'_> {
    fn err(&self, line: usize, class: ErrorClass, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.path.to_path_buf(),
            line,
            message: message.into(),
            class,
        }
    }

    fn quantity(&self, text: &str, line: usize, key: &str, dim: Dim) -> Result<f64> {
        let mut parts = text.split_whitespace();
        let number = parts.next().unwrap_or("");
        let symbol = parts.next();
        if parts.next().is_some() {
            return Err(self.err(line, ErrorClass::Parse, format!("{key}: trailing text in '{text}'")));
        }
        let x: f64 = number
            .parse()
            .map_err(|_| self.err(line, ErrorClass::Parse, format!("{key}: '{number}' is not a number")))?;
        if !x.is_finite() {
            return Err(self.err(line, ErrorClass::Data, format!("{key}: value must be finite")));
        }
        match (symbol, dim) {
            (None, Dim::None) => Ok(x),
            (None, _) => Err(self.err(
                line,
                ErrorClass::Parse,
                format!("{key}: missing unit, expected a {}", dim.name()),
            )),
            (Some(s), _) => match unit(s) {
                Some((d, scale)) if d == dim => {
                    let y = match scale {
                        Scale::Mul(f) => Some(x * f),
                        Scale::Exp10(e) => parse_scaled(number, e),
                    };
                    y.filter(|y| y.is_finite())
                        .ok_or_else(|| self.err(line, ErrorClass::Data, format!("{key}: value out of range")))
                }
                Some((d, _)) => Err(self.err(
                    line,
                    ErrorClass::Parse,
                    format!("{key}: unit '{s}' is a {}, expected a {}", d.name(), dim.name()),
                )),
                None => Err(self.err(line, ErrorClass::Parse, format!("{key}: unknown unit '{s}'"))),
            },
        }
    }

    fn check_range(&self, x: f64, range: Range, line: usize, key: &str) -> Result<()> {
        let (ok, what) = match range {
            Range::Positive => (x > 0.0, "must be positive"),
            Range::NonNegative => (x >= 0.0, "must be >= 0"),
            Range::Finite => (true, ""),
            Range::Fraction => (x > 0.0 && x <= 1.0, "must lie in (0, 1]"),
        };
        if ok {
            Ok(())
        } else {
            Err(self.err(line, ErrorClass::Data, format!("{key} {what} (got {x})")))
        }
    }

    fn velocity(&self, text: &str, line: usize) -> Result<VelocityModel> {
        let mut tokens = text.split_whitespace();
        let model = tokens.next().unwrap_or("");
        let mut params = BTreeMap::new();
        let rest: Vec<&str> = tokens.collect();
        let mut i = 0;
        while i < rest.len() {
            let Some((name, number)) = rest[i].split_once('=') else {
                return Err(self.err(line, ErrorClass::Parse, format!("velocity: expected name=value, got '{}'", rest[i])));
            };
            let symbol = rest.get(i + 1).filter(|t| !t.contains('='));
            let quantity = match symbol {
                Some(s) => format!("{number} {s}"),
                None => number.to_string(),
            };
            let v = self.quantity(&quantity, line, &format!("velocity.{name}"), Dim::Velocity)?;
            if params.insert(name.to_string(), v).is_some() {
                return Err(self.err(line, ErrorClass::Parse, format!("velocity: '{name}' given twice")));
            }
            i += if symbol.is_some() { 2 } else { 1 };
        }
        let take = |params: &mut BTreeMap<String, f64>, name: &str| {
            params.remove(name).ok_or_else(|| {
                self.err(line, ErrorClass::Data, format!("velocity: {model} model needs '{name}'"))
            })
        };
        let v = match model {
            "gaussian" => {
                let v0 = take(&mut params, "v0")?;
                let sigma_v = take(&mut params, "sigma")?;
                self.check_range(v0, Range::Positive, line, "velocity.v0")?;
                self.check_range(sigma_v, Range::Positive, line, "velocity.sigma")?;
                VelocityModel::Gaussian { v0, sigma_v }
            }
            "monochromatic" => {
                let v0 = take(&mut params, "v0")?;
                self.check_range(v0, Range::Positive, line, "velocity.v0")?;
                VelocityModel::Monochromatic { v0 }
            }
            other => {
                return Err(self.err(
                    line,
                    ErrorClass::Parse,
                    format!("velocity: unknown model '{other}' (gaussian, monochromatic)"),
                ))
            }
        };
        if let Some(name) = params.keys().next() {
            return Err(self.err(line, ErrorClass::Parse, format!("velocity: unknown parameter '{name}'")));
        }
        Ok(v)
    }
}

/// Parses configuration text. `path` is only used in error messages.
pub fn parse_config(text: &str, path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let mut p = Parser {
        path,
        entries: BTreeMap::new(),
    };
    let known_sections: Vec<&str> = NUMERIC_KEYS
        .iter()
        .map(|k| k.section)
        .chain(TEXT_KEYS.iter().map(|t| t.0))
        .collect();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| p.err(line, ErrorClass::Parse, format!("malformed section header '{body}'")))?
                .trim();
            if !known_sections.contains(&name) {
                return Err(p.err(line, ErrorClass::Parse, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| p.err(line, ErrorClass::Parse, format!("expected 'key = value', got '{body}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section.clone() else {
            return Err(p.err(line, ErrorClass::Parse, format!("key '{key}' outside any section")));
        };
        let known = NUMERIC_KEYS.iter().any(|k| k.section == sec && k.key == key)
            || TEXT_KEYS.iter().any(|t| t.0 == sec && t.1 == key);
        if !known {
            return Err(p.err(line, ErrorClass::Parse, format!("unknown key '{key}' in [{sec}]")));
        }
        if value.is_empty() {
            return Err(p.err(line, ErrorClass::Parse, format!("{sec}.{key}: empty value")));
        }
        let entry = Entry {
            value: value.to_string(),
            line,
        };
        if let Some(prev) = p.entries.insert((sec.clone(), key.to_string()), entry) {
            return Err(p.err(
                line,
                ErrorClass::Parse,
                format!("{sec}.{key} already set on line {}", prev.line),
            ));
        }
    }
    let last_line = text.lines().count().max(1);

    let mut num = BTreeMap::new();
    for spec in NUMERIC_KEYS {
        let id = (spec.section.to_string(), spec.key.to_string());
        match p.entries.get(&id) {
            Some(e) => {
                let name = format!("{}.{}", spec.section, spec.key);
                let x = p.quantity(&e.value, e.line, &name, spec.dim)?;
                p.check_range(x, spec.range, e.line, &name)?;
                num.insert(spec.key, (x, e.line));
            }
            None if spec.required => {
                return Err(p.err(
                    last_line,
                    ErrorClass::Data,
                    format!("missing key '{}' in [{}]", spec.key, spec.section),
                ))
            }
            None => {}
        }
    }
    for &(sec, key, required) in TEXT_KEYS {
        if required && !p.entries.contains_key(&(sec.to_string(), key.to_string())) {
            return Err(p.err(last_line, ErrorClass::Data, format!("missing key '{key}' in [{sec}]")));
        }
    }
    let text_entry = |sec: &str, key: &str| &p.entries[&(sec.to_string(), key.to_string())];
    let velocity_entry = text_entry("velocity", "model");
    let velocity = p.velocity(&velocity_entry.value, velocity_entry.line)?;

    let get = |key: &str| num.get(key).map(|v| v.0);
    let waist_y = get("waist_y").expect("required");
    let config = ExperimentConfig {
        molecule: MoleculeSpec {
            name: text_entry("molecule", "name").value.clone(),
            mass: get("mass").expect("required"),
        },
        recoil_laser: RecoilLaserSpec {
            wavelength: get("wavelength").expect("required"),
            power: get("power").expect("required"),
            waist_y,
            waist_x: get("waist_x").unwrap_or(waist_y),
            distance: get("distance").expect("required"),
            offset_y: get("offset_y").unwrap_or(0.0),
            power_err: get("power_err").unwrap_or(0.0),
            waist_err: get("waist_err").unwrap_or(0.0),
        },
        interferometer: InterferometerSpec {
            grating_period: get("grating_period_d").expect("required"),
            grating_separation: get("grating_separation_l").expect("required"),
            grating_laser_wavelength: get("grating_laser_wavelength").unwrap_or(0.0),
            grating_laser_power: get("grating_laser_power").unwrap_or(0.0),
        },
        velocity,
        baseline_visibility: get("visibility").expect("required"),
        baseline_mean_rate: get("mean_rate").expect("required"),
    };
    config.validate().map_err(|e| {
        let line = num.get("distance").map(|v| v.1).unwrap_or(last_line);
        p.err(line, ErrorClass::Data, e.to_string())
    })?;
    Ok(config)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

/// The bundled reference configuration.
pub fn reference_config() -> ExperimentConfig {
    parse_config(REFERENCE_CONFIG, PathBuf::from(REFERENCE_CONFIG_NAME)).expect("bundled config is valid")
}

/// Serializes `config` in SI units. `parse_config(&save_config(c))` returns `c` exactly.
pub fn save_config(config: &ExperimentConfig) -> String {
    let mut s = String::new();
    let m = &config.molecule;
    let l = &config.recoil_laser;
    let g = &config.interferometer;
    let _ = writeln!(s, "[molecule]\nname = {}\nmass = {:e} kg\n", m.name, m.mass);
    let _ = writeln!(
        s,
        "[recoil_laser]\nwavelength = {:e} m\npower = {:e} W\npower_err = {:e} W\nwaist_y = {:e} m\n\
         waist_x = {:e} m\nwaist_err = {:e} m\ndistance = {:e} m\noffset_y = {:e} m\n",
        l.wavelength, l.power, l.power_err, l.waist_y, l.waist_x, l.waist_err, l.distance, l.offset_y
    );
    let _ = writeln!(
        s,
        "[interferometer]\ngrating_period_d = {:e} m\ngrating_separation_l = {:e} m\n\
         grating_laser_wavelength = {:e} m\ngrating_laser_power = {:e} W\n",
        g.grating_period, g.grating_separation, g.grating_laser_wavelength, g.grating_laser_power
    );
    let velocity = match config.velocity {
        VelocityModel::Gaussian { v0, sigma_v } => format!("gaussian v0={v0:e} m/s sigma={sigma_v:e} m/s"),
        VelocityModel::Monochromatic { v0 } => format!("monochromatic v0={v0:e} m/s"),
    };
    let _ = writeln!(s, "[velocity]\nmodel = {velocity}\n");
    let _ = writeln!(
        s,
        "[baseline]\nvisibility = {:e}\nmean_rate = {:e} /s",
        config.baseline_visibility, config.baseline_mean_rate
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config(text, "test.cfg")
    }

    fn class_and_line(e: Error) -> (ErrorClass, usize) {
        match e {
            Error::Config { class, line, .. } => (class, line),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bundled_config_matches_reference() {
        let c = reference_config();
        assert_eq!(c.interferometer.grating_period, 2.66e-7);
        assert_eq!(c, ExperimentConfig::c70_reference());
    }

    #[test]
    fn save_load_identity() {
        let c = reference_config();
        assert_eq!(parse(&save_config(&c)).unwrap(), c);
        let mono = c.with_velocity(VelocityModel::Monochromatic { v0: 199.7 });
        assert_eq!(parse(&save_config(&mono)).unwrap(), mono);
    }

    #[test]
    fn velocity_line() {
        let text = REFERENCE_CONFIG.replace(
            "model = gaussian v0=210.3 m/s sigma=38.4 m/s",
            "model = gaussian sigma=38.4 m/s v0=210.3 m/s",
        );
        assert_eq!(parse(&text).unwrap().velocity, ExperimentConfig::c70_reference().velocity);
    }

    #[test]
    fn zero_waist_rejected_with_line() {
        let text = REFERENCE_CONFIG.replace("waist_y = 1.23 mm", "waist_y = 0 mm");
        let line = text.lines().position(|l| l.starts_with("waist_y")).unwrap() + 1;
        assert_eq!(class_and_line(parse(&text).unwrap_err()), (ErrorClass::Data, line));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = REFERENCE_CONFIG.replace("waist_y =", "wiast_y =");
        let (class, _) = class_and_line(parse(&text).unwrap_err());
        assert_eq!(class, ErrorClass::Parse);
    }

    #[test]
    fn unit_mismatch_rejected() {
        let text = REFERENCE_CONFIG.replace("power = 17.4 W", "power = 17.4 mm");
        assert_eq!(class_and_line(parse(&text).unwrap_err()).0, ErrorClass::Parse);
        let text = REFERENCE_CONFIG.replace("power = 17.4 W", "power = 17.4");
        assert_eq!(class_and_line(parse(&text).unwrap_err()).0, ErrorClass::Parse);
    }

    #[test]
    fn missing_key_rejected() {
        let text: String = REFERENCE_CONFIG
            .lines()
            .filter(|l| !l.starts_with("mean_rate"))
            .map(|l| format!("{l}\n"))
            .collect();
        let e = parse(&text).unwrap_err();
        assert!(e.to_string().contains("mean_rate"));
        assert_eq!(class_and_line(e).0, ErrorClass::Data);
    }

    #[test]
    fn distance_beyond_separation_rejected() {
        let text = REFERENCE_CONFIG.replace("distance = 3.5 cm", "distance = 20 cm");
        assert_eq!(class_and_line(parse(&text).unwrap_err()).0, ErrorClass::Data);
    }

    #[test]
    fn duplicate_and_orphan_keys() {
        assert!(parse("mass = 1 kg").is_err());
        let dup = REFERENCE_CONFIG.replace("power = 17.4 W", "power = 17.4 W\npower = 17.0 W");
        assert!(parse(&dup).is_err());
    }

    #[test]
    fn unit_scaling() {
        let text = REFERENCE_CONFIG.replace("distance = 3.5 cm", "distance = 35 mm");
        assert_eq!(parse(&text).unwrap().recoil_laser.distance, 0.035);
        let text = REFERENCE_CONFIG.replace("power = 17.4 W", "power = 17400 mW");
        assert_eq!(parse(&text).unwrap().recoil_laser.power, 17.4);
    }
}
