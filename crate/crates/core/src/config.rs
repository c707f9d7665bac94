//! Run configuration: line-oriented `section.key = value [unit]` text.
//!
//! Blank lines and `#` comments are ignored. Dimensioned values must carry a
//! unit; unknown keys, duplicate keys and unknown units are errors.
//!
//! ```text
//! lattice.chain_spacing = 3.44 Å
//! lattice.pattern = explicit
//! lattice.chains = 0 0, 9.42 0 Å
//! device.gradient = 2e6 G/cm
//! device.bandwidth = 45 kHz
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::constants::{ANGSTROM, GAUSS_PER_CM};
use crate::error::{Error, Result};
use crate::lattice::{ChainPattern, LatticeSpec};
use crate::planner::DeviceConfig;
use crate::sequences::{AhtOptions, LockAxis, PulseMode, RecouplingOptions};
use crate::spinsim::DipolarForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Frequency,
    Gradient,
    Time,
}

fn unit_factor(dim: Dim, unit: &str) -> Option<f64> {
    Some(match (dim, unit) {
        (Dim::Length, "Å" | "A" | "angstrom") => ANGSTROM,
        (Dim::Length, "nm") => 1e-9,
        (Dim::Length, "µm" | "μm" | "um") => 1e-6,
        (Dim::Length, "mm") => 1e-3,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Length, "m") => 1.0,
        (Dim::Frequency, "Hz") => 1.0,
        (Dim::Frequency, "kHz") => 1e3,
        (Dim::Frequency, "MHz") => 1e6,
        (Dim::Gradient, "G/cm") => GAUSS_PER_CM,
        (Dim::Gradient, "T/m") => 1.0,
        (Dim::Time, "s") => 1.0,
        (Dim::Time, "ms") => 1e-3,
        (Dim::Time, "µs" | "μs" | "us") => 1e-6,
        (Dim::Time, "ns") => 1e-9,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            _ => Err(Error::UnknownTag {
                kind: "output format",
                tag: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Coupling cutoff for the simulated cluster (Hz).
    pub cutoff_hz: f64,
    pub carrier_plane: usize,
    pub dipolar_form: DipolarForm,
    pub plane_a: usize,
    pub plane_b: usize,
    pub lg_amplitude_hz: f64,
    pub lg_cycles: usize,
    /// Amplitude / largest coupling ratios for the LG fidelity sweep.
    pub lg_sweep: Vec<f64>,
    pub mrev_tau: f64,
    pub mrev_cycles: usize,
    /// Single-spin offset used to measure MREV-8 scaling (Hz).
    pub mrev_offset_hz: f64,
    pub recouple_amplitude_hz: f64,
    pub recouple: RecouplingOptions,
    pub aht: AhtOptions,
    pub pulse_mode: PulseMode,
    pub trotter_steps: usize,
    pub trotter_symmetrized: bool,
    /// Sequence file for `simulate`, relative to the config file.
    pub sequence: Option<PathBuf>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            cutoff_hz: 0.0,
            carrier_plane: 0,
            dipolar_form: DipolarForm::FullSecular,
            plane_a: 0,
            plane_b: 1,
            lg_amplitude_hz: 50e3,
            lg_cycles: 10,
            lg_sweep: vec![10.0, 20.0, 50.0, 100.0],
            mrev_tau: 5e-6,
            mrev_cycles: 1,
            mrev_offset_hz: 1e3,
            recouple_amplitude_hz: 20e3,
            recouple: RecouplingOptions::default(),
            aht: AhtOptions::default(),
            pulse_mode: PulseMode::Ideal,
            trotter_steps: 64,
            trotter_symmetrized: true,
            sequence: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    pub device: DeviceConfig,
    pub simulation: SimulationConfig,
    pub output: OutputConfig,
    /// Keys present in the file.
    pub keys: BTreeSet<String>,
    /// Directory of the config file, for resolving relative paths.
    pub base_dir: PathBuf,
}

struct Line<'a> {
    no: usize,
    key: &'a str,
    value: &'a str,
}

impl Line<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.no,
            message: format!("{}: {}", self.key, message.into()),
        }
    }

    fn parse<T: FromStr>(&self, what: &str) -> Result<T> {
        self.value
            .parse()
            .map_err(|_| self.err(format!("expected {what}, got '{}'", self.value)))
    }

    fn number(&self, s: &str) -> Result<f64> {
        let x: f64 = s
            .parse()
            .map_err(|_| self.err(format!("bad number '{s}'")))?;
        if !x.is_finite() {
            return Err(self.err("value must be finite"));
        }
        Ok(x)
    }

    fn split_unit(&self, dim: Dim) -> Result<(&str, f64)> {
        let (num, unit) = match self.value.rsplit_once(char::is_whitespace) {
            Some((n, u)) if unit_factor(dim, u.trim()).is_some() => (n.trim(), u.trim()),
            Some((_, u)) if u.trim().parse::<f64>().is_err() => {
                return Err(self.err(format!("unknown unit '{}'", u.trim())))
            }
            _ => return Err(self.err(format!("missing unit in '{}'", self.value))),
        };
        Ok((num, unit_factor(dim, unit).expect("checked")))
    }

    fn quantity(&self, dim: Dim) -> Result<f64> {
        let (num, factor) = self.split_unit(dim)?;
        Ok(self.number(num)? * factor)
    }

    fn positive(&self, dim: Option<Dim>) -> Result<f64> {
        let x = match dim {
            Some(d) => self.quantity(d)?,
            None => self.number(self.value)?,
        };
        if x > 0.0 {
            Ok(x)
        } else {
            Err(self.err("must be positive"))
        }
    }

    fn nonnegative(&self, dim: Dim) -> Result<f64> {
        let x = self.quantity(dim)?;
        if x >= 0.0 {
            Ok(x)
        } else {
            Err(self.err("must be nonnegative"))
        }
    }

    fn flag(&self) -> Result<bool> {
        match self.value {
            "true" | "yes" | "on" => Ok(true),
            "false" | "no" | "off" => Ok(false),
            _ => Err(self.err(format!("expected true/false, got '{}'", self.value))),
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(PathBuf::from).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lattice = LatticeSpec::default();
        let mut device = DeviceConfig::default();
        let mut sim = SimulationConfig::default();
        let mut output = OutputConfig::default();
        let mut keys = BTreeSet::new();
        let mut pattern_tag: Option<String> = None;
        let mut chains: Option<Vec<[f64; 2]>> = None;
        let mut dims: [Option<f64>; 3] = [None; 3];
        let mut field_axis: Option<Vector3<f64>> = None;
        let mut finite = false;
        let mut pulse_amplitude = 20e3;

        for (k, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Parse {
                    line: k + 1,
                    message: format!("expected 'section.key = value', got '{body}'"),
                });
            };
            let l = Line {
                no: k + 1,
                key: key.trim(),
                value: value.trim(),
            };
            if !keys.insert(l.key.to_string()) {
                return Err(l.err("duplicate key"));
            }
            match l.key {
                "lattice.chain_spacing" => lattice.chain_spacing = l.positive(Some(Dim::Length))?,
                "lattice.chain_separation" => {
                    lattice.chain_separation = l.positive(Some(Dim::Length))?
                }
                "lattice.n_planes" => lattice.n_planes = l.parse("a positive integer")?,
                "lattice.pattern" => pattern_tag = Some(l.value.to_string()),
                "lattice.chains" => {
                    let (list, factor) = l.split_unit(Dim::Length)?;
                    let mut out = Vec::new();
                    for pair in list.split(',') {
                        let xy: Vec<&str> = pair.split_whitespace().collect();
                        let [x, y] = xy[..] else {
                            return Err(
                                l.err(format!("chain offset '{}' needs two numbers", pair.trim()))
                            );
                        };
                        out.push([l.number(x)? * factor, l.number(y)? * factor]);
                    }
                    chains = Some(out);
                }
                "lattice.field_axis" => {
                    let v: Vec<f64> = l
                        .value
                        .split_whitespace()
                        .map(|s| l.number(s))
                        .collect::<Result<_>>()?;
                    let [x, y, z] = v[..] else {
                        return Err(l.err("field axis needs three numbers"));
                    };
                    field_axis = Some(Vector3::new(x, y, z));
                }
                "device.gradient" => device.gradient_t_per_m = Some(l.nonnegative(Dim::Gradient)?),
                "device.bandwidth" => device.bandwidth_hz = Some(l.positive(Some(Dim::Frequency))?),
                "device.sample_axial" => dims[0] = Some(l.positive(Some(Dim::Length))?),
                "device.sample_lateral_x" => dims[1] = Some(l.positive(Some(Dim::Length))?),
                "device.sample_lateral_y" => dims[2] = Some(l.positive(Some(Dim::Length))?),
                "device.strategy" => device.strategy = Some(l.parse("nn or nnn")?),
                "device.broadening" => device.broadening_hz = Some(l.nonnegative(Dim::Frequency)?),
                "simulation.cutoff" => sim.cutoff_hz = l.nonnegative(Dim::Frequency)?,
                "simulation.carrier_plane" => sim.carrier_plane = l.parse("a plane index")?,
                "simulation.dipolar_form" => sim.dipolar_form = l.parse("a dipolar form")?,
                "simulation.plane_a" => sim.plane_a = l.parse("a plane index")?,
                "simulation.plane_b" => sim.plane_b = l.parse("a plane index")?,
                "simulation.lg_amplitude" => {
                    sim.lg_amplitude_hz = l.positive(Some(Dim::Frequency))?
                }
                "simulation.lg_cycles" => sim.lg_cycles = l.parse("an integer")?,
                "simulation.lg_sweep" => {
                    sim.lg_sweep = l
                        .value
                        .split_whitespace()
                        .map(|s| l.number(s))
                        .collect::<Result<_>>()?;
                    if sim.lg_sweep.iter().any(|r| *r <= 0.0) {
                        return Err(l.err("sweep ratios must be positive"));
                    }
                }
                "simulation.mrev_tau" => sim.mrev_tau = l.positive(Some(Dim::Time))?,
                "simulation.mrev_cycles" => sim.mrev_cycles = l.parse("an integer")?,
                "simulation.mrev_offset" => {
                    sim.mrev_offset_hz = l.positive(Some(Dim::Frequency))?
                }
                "simulation.recouple_amplitude" => {
                    sim.recouple_amplitude_hz = l.positive(Some(Dim::Frequency))?
                }
                "simulation.amplitude_ratio_b" => {
                    sim.recouple.amplitude_ratio_b = l.positive(None)?
                }
                "simulation.lg_frequency_ratio" => {
                    sim.recouple.lg_frequency_ratio = l.positive(None)?
                }
                "simulation.decouple_others" => sim.recouple.decouple_others = l.flag()?,
                "simulation.lock" => {
                    sim.recouple.lock = l.parse::<LockAxis>("transverse, magic or supplementary")?
                }
                "simulation.phase_tol" => sim.recouple.phase_tol = l.positive(None)?,
                "simulation.max_cycles" => sim.recouple.max_cycles = l.parse("an integer")?,
                "simulation.aht_tol" => sim.aht.rel_tol = l.positive(None)?,
                "simulation.aht_max_panels" => sim.aht.max_panels = l.parse("an integer")?,
                "simulation.pulse_mode" => {
                    finite = match l.value {
                        "ideal" => false,
                        "finite" => true,
                        _ => return Err(l.err("expected ideal or finite")),
                    }
                }
                "simulation.pulse_amplitude" => {
                    pulse_amplitude = l.positive(Some(Dim::Frequency))?
                }
                "simulation.trotter_steps" => sim.trotter_steps = l.parse("an integer")?,
                "simulation.trotter_symmetrized" => sim.trotter_symmetrized = l.flag()?,
                "simulation.sequence" => sim.sequence = Some(PathBuf::from(l.value)),
                "output.dir" => output.dir = Some(PathBuf::from(l.value)),
                "output.format" => output.format = l.parse("csv, json or both")?,
                other => {
                    return Err(Error::Parse {
                        line: l.no,
                        message: format!("unknown key '{other}'"),
                    })
                }
            }
        }

        lattice.pattern = match pattern_tag.as_deref() {
            None | Some("single") if chains.is_none() => ChainPattern::Single,
            None | Some("explicit") if chains.is_some() => {
                ChainPattern::Explicit(chains.take().unwrap_or_default())
            }
            Some("hex") if chains.is_none() => ChainPattern::CentralPlusSixHex,
            Some("explicit") => {
                return Err(Error::Config(
                    "lattice.pattern = explicit needs lattice.chains".into(),
                ))
            }
            Some(tag @ ("single" | "hex")) => {
                return Err(Error::Config(format!(
                    "lattice.chains given with lattice.pattern = {tag}"
                )))
            }
            Some(tag) => {
                return Err(Error::UnknownTag {
                    kind: "chain pattern",
                    tag: tag.to_string(),
                })
            }
            None => unreachable!("covered by the guarded arms"),
        };
        if finite {
            sim.pulse_mode = PulseMode::Finite {
                amplitude_hz: pulse_amplitude,
            };
        }
        if let Some(axis) = field_axis {
            lattice.field_axis = axis;
        }
        if lattice.n_planes == 0 {
            return Err(Error::Config(
                "lattice has no sites (lattice.n_planes = 0)".into(),
            ));
        }
        lattice.validate()?;
        device.chain_spacing = lattice.chain_spacing;
        device.chain_separation = lattice.chain_separation;
        device.sample_dims = match dims {
            [Some(a), Some(x), Some(y)] => Some([a, x, y]),
            [None, None, None] => None,
            _ => {
                return Err(Error::Config(
                    "device.sample_axial, device.sample_lateral_x and device.sample_lateral_y go together".into(),
                ))
            }
        };
        let cfg = RunConfig {
            lattice,
            device,
            simulation: sim,
            output,
            keys,
            base_dir: PathBuf::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-key checks: referenced planes exist, counts are usable.
    /// Plane keys left at their defaults are not references and are not
    /// checked; the commands that use them check against the model.
    pub fn validate(&self) -> Result<()> {
        let n = self.lattice.n_planes;
        let s = &self.simulation;
        for (key, p) in [
            ("simulation.carrier_plane", s.carrier_plane),
            ("simulation.plane_a", s.plane_a),
            ("simulation.plane_b", s.plane_b),
        ] {
            if self.has(key) && p >= n {
                return Err(Error::Config(format!(
                    "{key} = {p} is outside the {n}-plane lattice"
                )));
            }
        }
        if s.trotter_steps == 0 {
            return Err(Error::Config(
                "simulation.trotter_steps must be at least 1".into(),
            ));
        }
        if s.recouple.max_cycles == 0 {
            return Err(Error::Config(
                "simulation.max_cycles must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Whether the file set `key` explicitly.
    pub fn has(&self, key: &str) -> bool {
        self.keys.contains(key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOMINAL: &str = include_str!("../configs/nominal.conf");

    #[test]
    fn nominal_parses() {
        let c = RunConfig::parse(NOMINAL).unwrap();
        assert_eq!(c.lattice.n_planes, 3);
        assert!((c.device.gradient_t_per_m.unwrap() - 2e4).abs() < 1e-9);
        assert_eq!(c.device.bandwidth_hz, Some(45e3));
        let [a, x, y] = c.device.sample_dims.unwrap();
        assert!(
            (a - 0.035).abs() < 1e-15 && (x - 0.095).abs() < 1e-15 && (y - 0.095).abs() < 1e-15
        );
        assert!(matches!(c.lattice.pattern, ChainPattern::Explicit(ref v) if v.len() == 2));
    }

    #[test]
    fn units_convert() {
        let c = RunConfig::parse(
            "lattice.chain_spacing = 0.344 nm\nsimulation.mrev_tau = 5 us\ndevice.gradient = 1 T/m",
        )
        .unwrap();
        assert!((c.lattice.chain_spacing - 3.44e-10).abs() < 1e-22);
        assert!((c.simulation.mrev_tau - 5e-6).abs() < 1e-18);
        assert_eq!(c.device.gradient_t_per_m, Some(1.0));
    }

    #[test]
    fn fails_closed() {
        for (text, line) in [
            ("lattice.n_planes = 3\nlattice.colour = red", 2),
            ("device.bandwidth = 45", 1),
            ("device.bandwidth = 45 furlongs", 1),
            ("lattice.chain_spacing = 3.44 Hz", 1),
            ("lattice.n_planes = 2\nlattice.n_planes = 3", 2),
            ("just words", 1),
            ("simulation.lock = sideways", 1),
        ] {
            match RunConfig::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn plane_references_checked() {
        assert!(matches!(
            RunConfig::parse("lattice.n_planes = 2\nsimulation.plane_b = 2"),
            Err(Error::Config(_))
        ));
        assert!(RunConfig::parse("lattice.pattern = explicit").is_err());
        assert!(RunConfig::parse("lattice.pattern = hex\nlattice.chains = 0 0 Å").is_err());
    }

    #[test]
    fn finite_pulses_pick_up_amplitude() {
        let c =
            RunConfig::parse("simulation.pulse_amplitude = 50 kHz\nsimulation.pulse_mode = finite")
                .unwrap();
        assert_eq!(
            c.simulation.pulse_mode,
            PulseMode::Finite { amplitude_hz: 5e4 }
        );
    }
}
