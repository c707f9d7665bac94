//! Resource arithmetic for a macroscopic sample: plane splitting, the number
//! of addressable and physical planes, spins per plane and resonance
//! overlap.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::constants::{GAMMA_H, GAUSS_PER_CM};
use crate::error::{Error, Result};
use crate::format::sig;

fn require_positive(field: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be positive, got {x}"),
        ))
    }
}

/// `Δf = (γ/2π)·G·a`.
pub fn plane_splitting_hz(gradient: f64, chain_spacing: f64) -> Result<f64> {
    if !(gradient >= 0.0) || !gradient.is_finite() {
        return Err(Error::validation(
            "gradient",
            format!("must be nonnegative, got {gradient}"),
        ));
    }
    require_positive("chain_spacing", chain_spacing)?;
    Ok(GAMMA_H / (2.0 * PI) * gradient * chain_spacing)
}

/// `⌊bandwidth / splitting⌋`.
pub fn addressable_planes(bandwidth_hz: f64, splitting_hz: f64) -> Result<u64> {
    require_positive("bandwidth_hz", bandwidth_hz)?;
    require_positive("splitting_hz", splitting_hz)?;
    Ok((bandwidth_hz / splitting_hz).floor() as u64)
}

/// `⌊thickness / spacing⌋`.
pub fn physical_plane_limit(thickness: f64, chain_spacing: f64) -> Result<u64> {
    require_positive("sample_thickness", thickness)?;
    require_positive("chain_spacing", chain_spacing)?;
    Ok((thickness / chain_spacing).floor() as u64)
}

/// Chains crossing a `lx × ly` plane at hexagonal packing, one proton each.
pub fn spins_per_plane(lx: f64, ly: f64, chain_separation: f64) -> Result<f64> {
    require_positive("lateral_x", lx)?;
    require_positive("lateral_y", ly)?;
    require_positive("chain_separation", chain_separation)?;
    Ok(lx * ly / (3f64.sqrt() / 2.0 * chain_separation * chain_separation))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapStrategy {
    /// Gates between adjacent planes; broadening must stay below one splitting.
    Nn,
    /// Gates between next-nearest planes with the middle plane decoupled;
    /// broadening must stay below twice the splitting.
    Nnn,
}

impl FromStr for OverlapStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn" => Ok(OverlapStrategy::Nn),
            "nnn" => Ok(OverlapStrategy::Nnn),
            _ => Err(Error::UnknownTag {
                kind: "overlap strategy",
                tag: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for OverlapStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverlapStrategy::Nn => "nn",
            OverlapStrategy::Nnn => "nnn",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapReport {
    pub strategy: OverlapStrategy,
    pub broadening_hz: f64,
    pub splitting_hz: f64,
    pub threshold_hz: f64,
    pub pass: bool,
    pub margin_hz: f64,
}

pub fn overlap_check(
    strategy: OverlapStrategy,
    broadening_hz: f64,
    splitting_hz: f64,
) -> Result<OverlapReport> {
    for (field, x) in [
        ("broadening_hz", broadening_hz),
        ("splitting_hz", splitting_hz),
    ] {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::validation(
                field,
                format!("must be nonnegative, got {x}"),
            ));
        }
    }
    let threshold_hz = match strategy {
        OverlapStrategy::Nn => splitting_hz,
        OverlapStrategy::Nnn => 2.0 * splitting_hz,
    };
    Ok(OverlapReport {
        strategy,
        broadening_hz,
        splitting_hz,
        threshold_hz,
        pass: broadening_hz < threshold_hz,
        margin_hz: threshold_hz - broadening_hz,
    })
}

/// Planner inputs; `None` marks a value the caller did not supply.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeviceConfig {
    pub gradient_t_per_m: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    /// Axial thickness and the two lateral sides (m).
    pub sample_dims: Option<[f64; 3]>,
    pub strategy: Option<OverlapStrategy>,
    pub broadening_hz: Option<f64>,
    pub chain_spacing: f64,
    pub chain_separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DevicePlan {
    pub gradient_t_per_m: f64,
    pub gradient_gauss_per_cm: f64,
    pub chain_spacing_m: f64,
    pub chain_separation_m: f64,
    pub splitting_hz: f64,
    pub decoupling_bandwidth_hz: f64,
    pub addressable_planes: u64,
    pub sample_dims_m: [f64; 3],
    pub physical_plane_limit: u64,
    pub spins_per_plane: f64,
    pub active_thickness_m: f64,
    /// Where the broadening value came from: `recoupling` or `config`.
    pub broadening_source: String,
    pub overlap: OverlapReport,
    pub feasible: bool,
}

impl DevicePlan {
    /// `key = value` lines with six significant digits.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("gradient_t_per_m", sig(self.gradient_t_per_m, 6));
        kv("gradient_gauss_per_cm", sig(self.gradient_gauss_per_cm, 6));
        kv("chain_spacing_m", sig(self.chain_spacing_m, 6));
        kv("chain_separation_m", sig(self.chain_separation_m, 6));
        kv("splitting_hz", sig(self.splitting_hz, 6));
        kv(
            "decoupling_bandwidth_hz",
            sig(self.decoupling_bandwidth_hz, 6),
        );
        kv("addressable_planes", self.addressable_planes.to_string());
        for (k, v) in ["axial_m", "lateral_x_m", "lateral_y_m"]
            .iter()
            .zip(self.sample_dims_m)
        {
            kv(&format!("sample_{k}"), sig(v, 6));
        }
        kv(
            "physical_plane_limit",
            self.physical_plane_limit.to_string(),
        );
        kv("spins_per_plane", sig(self.spins_per_plane, 6));
        kv("active_thickness_m", sig(self.active_thickness_m, 6));
        kv("broadening_source", self.broadening_source.clone());
        kv("overlap.strategy", self.overlap.strategy.to_string());
        kv("overlap.broadening_hz", sig(self.overlap.broadening_hz, 6));
        kv("overlap.threshold_hz", sig(self.overlap.threshold_hz, 6));
        kv("overlap.margin_hz", sig(self.overlap.margin_hz, 6));
        kv("overlap.pass", self.overlap.pass.to_string());
        kv("feasible", self.feasible.to_string());
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// Fills a plan from `cfg`. The broadening is the recoupled `|D_AB|` when
/// given, else `cfg.broadening_hz`. Every missing key is named in one error.
pub fn device_plan(cfg: &DeviceConfig, recoupled_hz: Option<f64>) -> Result<DevicePlan> {
    let broadening = recoupled_hz.map(f64::abs).or(cfg.broadening_hz);
    let mut missing = Vec::new();
    if cfg.gradient_t_per_m.is_none() {
        missing.push("device.gradient");
    }
    if cfg.bandwidth_hz.is_none() {
        missing.push("device.bandwidth");
    }
    if cfg.sample_dims.is_none() {
        missing.push("device.sample_dims");
    }
    if cfg.strategy.is_none() {
        missing.push("device.strategy");
    }
    if broadening.is_none() {
        missing.push("device.broadening");
    }
    let (Some(g), Some(bw), Some(dims), Some(strategy), Some(broadening)) = (
        cfg.gradient_t_per_m,
        cfg.bandwidth_hz,
        cfg.sample_dims,
        cfg.strategy,
        broadening,
    ) else {
        return Err(Error::Config(format!(
            "missing keys: {}",
            missing.join(", ")
        )));
    };
    let splitting = plane_splitting_hz(g, cfg.chain_spacing)?;
    require_positive("bandwidth_hz", bw)?;
    let planes = if splitting > 0.0 {
        addressable_planes(bw, splitting)?
    } else {
        0
    };
    let overlap = overlap_check(strategy, broadening, splitting)?;
    Ok(DevicePlan {
        gradient_t_per_m: g,
        gradient_gauss_per_cm: g / GAUSS_PER_CM,
        chain_spacing_m: cfg.chain_spacing,
        chain_separation_m: cfg.chain_separation,
        splitting_hz: splitting,
        decoupling_bandwidth_hz: bw,
        addressable_planes: planes,
        sample_dims_m: dims,
        physical_plane_limit: physical_plane_limit(dims[0], cfg.chain_spacing)?,
        spins_per_plane: spins_per_plane(dims[1], dims[2], cfg.chain_separation)?,
        active_thickness_m: planes as f64 * cfg.chain_spacing,
        broadening_source: if recoupled_hz.is_some() {
            "recoupling"
        } else {
            "config"
        }
        .into(),
        overlap,
        feasible: planes >= 1 && overlap.pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ANGSTROM;
    use proptest::prelude::*;

    const A: f64 = 3.44 * ANGSTROM;
    const S: f64 = 9.42 * ANGSTROM;

    #[test]
    fn splitting() {
        assert!((plane_splitting_hz(2e4, A).unwrap() - 292.933052202688).abs() < 1e-9);
        assert_eq!(plane_splitting_hz(0.0, A).unwrap(), 0.0);
        assert_eq!(
            plane_splitting_hz(4e4, A).unwrap(),
            2.0 * plane_splitting_hz(2e4, A).unwrap()
        );
        assert!(plane_splitting_hz(-1.0, A).is_err());
    }

    #[test]
    fn plane_counts() {
        let s = plane_splitting_hz(2e4, A).unwrap();
        assert_eq!(addressable_planes(45e3, s).unwrap(), 153);
        assert_eq!(addressable_planes(300.0, 300.0).unwrap(), 1);
        assert_eq!(addressable_planes(45e3, 300.0).unwrap(), 150);
        assert!(addressable_planes(0.0, 300.0).is_err());
        assert_eq!(physical_plane_limit(3.5e-2, A).unwrap(), 101_744_186);
        assert_eq!(physical_plane_limit(A, A).unwrap(), 1);
        assert_eq!(physical_plane_limit(1e-6, A).unwrap(), 2906);
    }

    #[test]
    fn packing() {
        let n = spins_per_plane(9.5e-2, 9.5e-2, S).unwrap();
        assert!((n / 1.1743965676850475e16 - 1.0).abs() < 1e-12);
        let cell = spins_per_plane(S, S, S).unwrap();
        assert!((cell - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((spins_per_plane(4.75e-2, 4.75e-2, S).unwrap() * 4.0 / n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_rules() {
        let nn = overlap_check(OverlapStrategy::Nn, 400.0, 292.9).unwrap();
        assert!(!nn.pass && (nn.margin_hz + 107.1).abs() < 1e-9);
        let nnn = overlap_check(OverlapStrategy::Nnn, 400.0, 292.9).unwrap();
        assert!(nnn.pass && (nnn.margin_hz - 185.8).abs() < 1e-9);
        assert!(overlap_check(OverlapStrategy::Nn, 0.0, 1.0).unwrap().pass);
        assert!("nnnn".parse::<OverlapStrategy>().is_err());
    }

    fn nominal() -> DeviceConfig {
        DeviceConfig {
            gradient_t_per_m: Some(2e4),
            bandwidth_hz: Some(45e3),
            sample_dims: Some([3.5e-2, 9.5e-2, 9.5e-2]),
            strategy: Some(OverlapStrategy::Nnn),
            broadening_hz: Some(375.0),
            chain_spacing: A,
            chain_separation: S,
        }
    }

    #[test]
    fn nominal_plan() {
        let p = device_plan(&nominal(), None).unwrap();
        assert_eq!(p.addressable_planes, 153);
        assert_eq!(p.physical_plane_limit, 101_744_186);
        assert!(p.feasible && p.overlap.pass);
        assert!((p.gradient_gauss_per_cm - 2e6).abs() < 1e-6);
        assert!((p.active_thickness_m - 153.0 * A).abs() < 1e-20);
        assert!(p.to_key_value().contains("addressable_planes = 153\n"));
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(v["overlap"]["strategy"], "nnn");
    }

    #[test]
    fn unboosted_and_narrow_plans_fail() {
        let weak = device_plan(
            &DeviceConfig {
                gradient_t_per_m: Some(2e2),
                ..nominal()
            },
            None,
        )
        .unwrap();
        assert!((weak.splitting_hz - 2.92933052202688).abs() < 1e-9);
        assert!(!weak.overlap.pass && !weak.feasible);
        let narrow = device_plan(
            &DeviceConfig {
                bandwidth_hz: Some(100.0),
                ..nominal()
            },
            None,
        )
        .unwrap();
        assert_eq!(narrow.addressable_planes, 0);
        assert!(!narrow.feasible);
        let p = device_plan(&nominal(), Some(-368.85)).unwrap();
        assert_eq!(p.broadening_source, "recoupling");
        assert!((p.overlap.broadening_hz - 368.85).abs() < 1e-12);
    }

    #[test]
    fn missing_keys_listed_together() {
        let cfg = DeviceConfig {
            gradient_t_per_m: None,
            bandwidth_hz: None,
            ..nominal()
        };
        let Err(Error::Config(msg)) = device_plan(&cfg, None) else {
            panic!()
        };
        assert!(msg.contains("device.gradient") && msg.contains("device.bandwidth"));
    }

    proptest! {
        #[test]
        fn addressable_monotone(bw in 1.0f64..1e6, s in 1.0f64..1e4, k in 1.0f64..10.0) {
            let n = addressable_planes(bw, s).unwrap();
            prop_assert!(addressable_planes(bw * k, s).unwrap() >= n);
            prop_assert!(addressable_planes(bw, s * k).unwrap() <= n);
            prop_assert!(n as f64 * s <= bw);
        }

        #[test]
        fn plane_limit_scale_invariant(m in 1u64..300_000_000, f in 0.01f64..0.99, k in 1e-3f64..1e3) {
            // thickness m + f planes, well clear of a floor boundary
            let t = (m as f64 + f) * A;
            prop_assert_eq!(physical_plane_limit(t, A).unwrap(), m);
            prop_assert_eq!(physical_plane_limit(k * t, k * A).unwrap(), m);
        }
    }
}
