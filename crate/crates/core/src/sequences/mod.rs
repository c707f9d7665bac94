//! Piecewise-constant multi-channel rf programs and their average
//! Hamiltonians.
//!
//! A channel adds the rotating-frame field `(ν₁cosφ, ν₁sinφ, offset)` (Hz)
//! to every spin of its target planes; `offset_hz` is the spin resonance
//! minus the channel frequency, so positive offsets tilt the effective field
//! toward +z. Selectivity is ideal: non-targeted planes see nothing.

mod aht;
mod builders;
mod rf;
mod text;

use std::collections::BTreeSet;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::spinsim::SpinSystemModel;

pub use aht::{
    average_hamiltonian, effective_propagator, AhtOptions, EffectiveHamiltonianReport, PairTensor,
    SpinFrame,
};
pub use builders::{
    double_irradiation, lee_goldburg, lee_goldburg_on, lg_effective_hz, lg_offset_hz, mrev8,
    selective_leakage, selective_pulse, LeakageReport, LockAxis, PulseMode, Recoupling,
    RecouplingOptions, MREV8_PHASES, MREV8_WINDOWS,
};
pub use rf::{ideal_rotation_unitary, rf_hamiltonian, segment_fields_hz, stroboscopic_propagator};
pub use text::{parse_sequence, write_sequence};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlaneTarget {
    All,
    Planes(BTreeSet<usize>),
}

impl PlaneTarget {
    pub fn plane(p: usize) -> Self {
        PlaneTarget::Planes([p].into_iter().collect())
    }

    pub fn contains(&self, plane: usize) -> bool {
        match self {
            PlaneTarget::All => true,
            PlaneTarget::Planes(set) => set.contains(&plane),
        }
    }

    pub(crate) fn check(&self, model: &SpinSystemModel) -> Result<()> {
        if let PlaneTarget::Planes(set) = self {
            for &p in set {
                model.require_plane(p)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseChannel {
    pub target: PlaneTarget,
    pub offset_hz: f64,
    pub amplitude_hz: f64,
    pub phase: f64,
}

impl PulseChannel {
    /// Rotating-frame field vector in Hz.
    pub fn field_hz(&self) -> Vector3<f64> {
        Vector3::new(
            self.amplitude_hz * self.phase.cos(),
            self.amplitude_hz * self.phase.sin(),
            self.offset_hz,
        )
    }

    /// Channel frequency relative to the carrier (Hz). Channels aimed at all
    /// planes are referenced to the carrier plane; multi-plane channels to
    /// their lowest plane.
    pub fn carrier_frequency_hz(&self, model: &SpinSystemModel) -> f64 {
        let reference = match &self.target {
            PlaneTarget::All => model.carrier_plane,
            PlaneTarget::Planes(set) => set.iter().next().copied().unwrap_or(model.carrier_plane),
        };
        model.plane_offset_hz(reference) - self.offset_hz
    }
}

/// Instantaneous rotation `exp(−i·angle·axis·I)` on the target planes.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealRotation {
    pub target: PlaneTarget,
    pub axis: Vector3<f64>,
    pub angle: f64,
}

impl IdealRotation {
    pub fn new(target: PlaneTarget, axis: Vector3<f64>, angle: f64) -> Result<Self> {
        let norm = axis.norm();
        if !(norm > 0.0) || !norm.is_finite() || !angle.is_finite() {
            return Err(Error::validation(
                "ideal_rotation",
                "axis must be a finite nonzero vector",
            ));
        }
        Ok(IdealRotation {
            target,
            axis: axis / norm,
            angle,
        })
    }

    pub fn inverse(&self) -> Self {
        IdealRotation {
            angle: -self.angle,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSegment {
    pub duration: f64,
    pub channels: Vec<PulseChannel>,
    pub ideal_rotation: Option<IdealRotation>,
}

impl PulseSegment {
    pub fn free(duration: f64) -> Self {
        PulseSegment {
            duration,
            channels: Vec::new(),
            ideal_rotation: None,
        }
    }

    pub fn rf(duration: f64, channels: Vec<PulseChannel>) -> Self {
        PulseSegment {
            duration,
            channels,
            ideal_rotation: None,
        }
    }

    pub fn ideal(rotation: IdealRotation) -> Self {
        PulseSegment {
            duration: 0.0,
            channels: Vec::new(),
            ideal_rotation: Some(rotation),
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.ideal_rotation.is_some()
    }

    fn validate(&self, index: usize) -> Result<()> {
        let field = || format!("segments[{index}]");
        if !self.duration.is_finite() || self.duration < 0.0 {
            return Err(Error::validation(
                field(),
                "duration must be finite and nonnegative",
            ));
        }
        match &self.ideal_rotation {
            Some(_) if self.duration != 0.0 || !self.channels.is_empty() => Err(Error::validation(
                field(),
                "ideal rotations take zero time and carry no channels",
            )),
            None if self.duration == 0.0 => Err(Error::validation(
                field(),
                "zero duration without an ideal rotation",
            )),
            _ => {
                for c in &self.channels {
                    if !(c.amplitude_hz >= 0.0) || !c.amplitude_hz.is_finite() {
                        return Err(Error::validation(
                            field(),
                            "channel amplitude must be nonnegative",
                        ));
                    }
                    if !c.offset_hz.is_finite() || !c.phase.is_finite() {
                        return Err(Error::validation(
                            field(),
                            "channel offset and phase must be finite",
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub segments: Vec<PulseSegment>,
    pub n_repeats: usize,
}

impl PulseSequence {
    pub fn new(segments: Vec<PulseSegment>, n_repeats: usize) -> Result<Self> {
        let seq = PulseSequence {
            segments,
            n_repeats,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn cycle_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn total_time(&self) -> f64 {
        self.cycle_time() * self.n_repeats as f64
    }

    /// Structural checks that do not need a model. A zero cycle time is only
    /// allowed when every segment is an ideal rotation.
    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::validation("segments", "sequence has no segments"));
        }
        for (k, s) in self.segments.iter().enumerate() {
            s.validate(k)?;
        }
        if self.cycle_time() <= 0.0 && !self.segments.iter().all(PulseSegment::is_ideal) {
            return Err(Error::validation("cycle_time", "must be positive"));
        }
        Ok(())
    }

    /// Structural checks plus: every addressed plane exists in `model`.
    pub fn validate_for(&self, model: &SpinSystemModel) -> Result<()> {
        self.validate()?;
        for s in &self.segments {
            for c in &s.channels {
                c.target.check(model)?;
            }
            if let Some(r) = &s.ideal_rotation {
                r.target.check(model)?;
            }
        }
        Ok(())
    }
}
