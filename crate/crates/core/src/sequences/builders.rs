//! Constructors for the standard programs: Lee–Goldburg, MREV-8, selective
//! pulses and two-plane double irradiation.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;

use super::{IdealRotation, PlaneTarget, PulseChannel, PulseSegment, PulseSequence};
use crate::error::{Error, Result};
use crate::spinsim::{expectation, propagator, spin_operator, SpinAxis, SpinSystemModel, State};

/// Offset that tilts an amplitude-`ν₁` field to the magic angle.
pub fn lg_offset_hz(amplitude_hz: f64) -> f64 {
    amplitude_hz / 2f64.sqrt()
}

/// `ν_eff = ν₁·√(3/2)`.
pub fn lg_effective_hz(amplitude_hz: f64) -> f64 {
    amplitude_hz * 1.5f64.sqrt()
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

/// Continuous all-plane LG irradiation, one effective-field period per cycle.
pub fn lee_goldburg(amplitude_hz: f64, n_cycles: usize) -> Result<PulseSequence> {
    lee_goldburg_on(amplitude_hz, n_cycles, PlaneTarget::All, false)
}

/// LG on selected planes. `supplementary` flips the offset sign so the
/// effective field sits at 180° − θ_m from +z.
pub fn lee_goldburg_on(
    amplitude_hz: f64,
    n_cycles: usize,
    target: PlaneTarget,
    supplementary: bool,
) -> Result<PulseSequence> {
    positive("amplitude_hz", amplitude_hz)?;
    let sign = if supplementary { -1.0 } else { 1.0 };
    let channel = PulseChannel {
        target,
        offset_hz: sign * lg_offset_hz(amplitude_hz),
        amplitude_hz,
        phase: 0.0,
    };
    PulseSequence::new(
        vec![PulseSegment::rf(
            1.0 / lg_effective_hz(amplitude_hz),
            vec![channel],
        )],
        n_cycles,
    )
}

/// Pulse phases of the eight 90° pulses: −X, Y, −Y, X, X, Y, −Y, −X.
pub const MREV8_PHASES: [f64; 8] = [
    PI,
    FRAC_PI_2,
    3.0 * FRAC_PI_2,
    0.0,
    0.0,
    FRAC_PI_2,
    3.0 * FRAC_PI_2,
    PI,
];

/// Free-precession windows around the pulses, in units of τ.
pub const MREV8_WINDOWS: [f64; 9] = [1.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseMode {
    /// Instantaneous rotations.
    Ideal,
    /// Rectangular pulses of the given amplitude, centred where the ideal
    /// pulse would be.
    Finite { amplitude_hz: f64 },
}

fn in_plane_axis(phase: f64) -> Vector3<f64> {
    Vector3::new(phase.cos(), phase.sin(), 0.0)
}

/// MREV-8 with cycle time 12τ.
pub fn mrev8(
    tau: f64,
    n_cycles: usize,
    mode: PulseMode,
    target: PlaneTarget,
) -> Result<PulseSequence> {
    positive("tau", tau)?;
    let width = match mode {
        PulseMode::Ideal => 0.0,
        PulseMode::Finite { amplitude_hz } => {
            positive("amplitude_hz", amplitude_hz)?;
            let w = 1.0 / (4.0 * amplitude_hz);
            if w > tau {
                return Err(Error::validation(
                    "tau",
                    format!("90° pulse of {w:e} s does not fit in τ = {tau:e} s"),
                ));
            }
            w
        }
    };
    let mut segments = Vec::new();
    for (k, window) in MREV8_WINDOWS.iter().enumerate() {
        let mut free = window * tau;
        if k > 0 {
            free -= width / 2.0;
        }
        if k < MREV8_PHASES.len() {
            free -= width / 2.0;
        }
        if free > 0.0 {
            segments.push(PulseSegment::free(free));
        }
        let Some(&phase) = MREV8_PHASES.get(k) else {
            break;
        };
        segments.push(match mode {
            PulseMode::Ideal => PulseSegment::ideal(IdealRotation::new(
                target.clone(),
                in_plane_axis(phase),
                FRAC_PI_2,
            )?),
            PulseMode::Finite { amplitude_hz } => PulseSegment::rf(
                width,
                vec![PulseChannel {
                    target: target.clone(),
                    offset_hz: 0.0,
                    amplitude_hz,
                    phase,
                }],
            ),
        });
    }
    PulseSequence::new(segments, n_cycles)
}

/// Rotation by `angle` about `(cos φ, sin φ, 0)` on one plane, on resonance.
pub fn selective_pulse(
    model: &SpinSystemModel,
    plane: usize,
    angle: f64,
    phase: f64,
    mode: PulseMode,
) -> Result<PulseSequence> {
    model.require_plane(plane)?;
    let target = PlaneTarget::plane(plane);
    let segment = match mode {
        PulseMode::Finite { amplitude_hz } if angle != 0.0 => {
            positive("amplitude_hz", amplitude_hz)?;
            let phase = if angle < 0.0 { phase + PI } else { phase };
            PulseSegment::rf(
                angle.abs() / (2.0 * PI * amplitude_hz),
                vec![PulseChannel {
                    target,
                    offset_hz: 0.0,
                    amplitude_hz,
                    phase,
                }],
            )
        }
        _ => PulseSegment::ideal(IdealRotation::new(target, in_plane_axis(phase), angle)?),
    };
    PulseSequence::new(vec![segment], 1)
}

/// Off-resonance excitation of a spin `offset_hz` away from a pulse aimed at
/// another plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageReport {
    pub offset_hz: f64,
    pub amplitude_hz: f64,
    pub duration: f64,
    /// Flip probability from |↑⟩ by exact single-spin evolution.
    pub simulated: f64,
    /// `ν₁²/(ν₁² + Δ²)`, the envelope of the off-resonance flip probability.
    pub envelope: f64,
    /// `envelope·sin²(π·ν_eff·t)`.
    pub rabi: f64,
}

/// Flip probability for a spin detuned by `offset_hz` under a pulse of
/// nominal rotation `angle` at amplitude `amplitude_hz`.
pub fn selective_leakage(amplitude_hz: f64, angle: f64, offset_hz: f64) -> Result<LeakageReport> {
    positive("amplitude_hz", amplitude_hz)?;
    if !offset_hz.is_finite() || !angle.is_finite() {
        return Err(Error::validation("offset_hz", "must be finite"));
    }
    let duration = angle.abs() / (2.0 * PI * amplitude_hz);
    let h = spin_operator(SpinAxis::X, 0, 1)?
        .scaled(2.0 * PI * amplitude_hz)
        .try_add(&spin_operator(SpinAxis::Z, 0, 1)?.scaled(2.0 * PI * offset_hz))?;
    let psi = State::all_up(1)?.evolve(&propagator(&h, duration)?)?;
    let simulated = 0.5 - expectation(&psi, &spin_operator(SpinAxis::Z, 0, 1)?)?;
    let envelope = amplitude_hz.powi(2) / (amplitude_hz.powi(2) + offset_hz.powi(2));
    let nu_eff = amplitude_hz.hypot(offset_hz);
    Ok(LeakageReport {
        offset_hz,
        amplitude_hz,
        duration,
        simulated,
        envelope,
        rabi: envelope * (PI * nu_eff * duration).sin().powi(2),
    })
}

/// Orientation of the spin-lock fields on the two recoupled planes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LockAxis {
    /// On resonance along +y.
    #[default]
    Transverse,
    /// In the y–z plane at θ_m from +z.
    MagicAngle,
    /// In the y–z plane at 180° − θ_m from +z.
    SupplementaryMagicAngle,
}

impl std::str::FromStr for LockAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transverse" => Ok(LockAxis::Transverse),
            "magic" => Ok(LockAxis::MagicAngle),
            "supplementary" => Ok(LockAxis::SupplementaryMagicAngle),
            _ => Err(Error::UnknownTag {
                kind: "lock axis",
                tag: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecouplingOptions {
    pub lock: LockAxis,
    /// Plane B amplitude as a fraction of plane A's. Distinct effective
    /// frequencies keep only the lock-axis product of the A–B coupling.
    pub amplitude_ratio_b: f64,
    /// LG on every other plane in the model.
    pub decouple_others: bool,
    /// Effective LG frequency on the other planes relative to plane A's.
    pub lg_frequency_ratio: f64,
    /// Allowed phase error of each effective precession over the window.
    pub phase_tol: f64,
    /// Largest window, in plane-A precession periods.
    pub max_cycles: usize,
}

impl Default for RecouplingOptions {
    fn default() -> Self {
        RecouplingOptions {
            lock: LockAxis::Transverse,
            amplitude_ratio_b: 0.75,
            decouple_others: true,
            lg_frequency_ratio: 1.25,
            phase_tol: 1e-3,
            max_cycles: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recoupling {
    /// One commensurate window per cycle.
    pub sequence: PulseSequence,
    pub plane_a: usize,
    pub plane_b: usize,
    /// Averaging window (s).
    pub window: f64,
    /// Window length in plane-A precession periods.
    pub window_cycles: usize,
    /// Worst distance of any accumulated precession phase from 2πℤ (rad).
    pub residual_rad: f64,
    /// `(plane label, ν_eff in Hz)` for each channel.
    pub effective_hz: Vec<(String, f64)>,
}

fn lock_channel(plane: usize, amplitude_hz: f64, lock: LockAxis) -> PulseChannel {
    let offset_hz = match lock {
        LockAxis::Transverse => 0.0,
        LockAxis::MagicAngle => lg_offset_hz(amplitude_hz),
        LockAxis::SupplementaryMagicAngle => -lg_offset_hz(amplitude_hz),
    };
    PulseChannel {
        target: PlaneTarget::plane(plane),
        offset_hz,
        amplitude_hz,
        phase: FRAC_PI_2,
    }
}

fn phase_error(nu: f64, t: f64) -> f64 {
    let turns = nu * t;
    (turns - turns.round()).abs() * 2.0 * PI
}

/// Simultaneous selective irradiation of planes `a` and `b`, each at its own
/// resonance, with optional LG on the remaining planes. The cycle is the
/// shortest window over which every effective field returns within
/// `phase_tol`; `duration` is rounded to a whole number of windows (at least
/// one).
pub fn double_irradiation(
    model: &SpinSystemModel,
    a: usize,
    b: usize,
    amplitude_hz: f64,
    duration: f64,
    opts: &RecouplingOptions,
) -> Result<Recoupling> {
    if a == b {
        return Err(Error::validation("plane_b", "must differ from plane_a"));
    }
    model.require_plane(a)?;
    model.require_plane(b)?;
    positive("amplitude_hz", amplitude_hz)?;
    positive("amplitude_ratio_b", opts.amplitude_ratio_b)?;
    positive("phase_tol", opts.phase_tol)?;
    if !duration.is_finite() || duration < 0.0 {
        return Err(Error::validation(
            "duration",
            "must be finite and nonnegative",
        ));
    }
    if opts.max_cycles == 0 {
        return Err(Error::validation("max_cycles", "must be at least 1"));
    }

    let ch_a = lock_channel(a, amplitude_hz, opts.lock);
    let ch_b = lock_channel(b, amplitude_hz * opts.amplitude_ratio_b, opts.lock);
    let nu_a = ch_a.field_hz().norm();
    let mut effective_hz = vec![
        (format!("plane {a}"), nu_a),
        (format!("plane {b}"), ch_b.field_hz().norm()),
    ];
    let mut channels = vec![ch_a, ch_b];

    let others: BTreeSet<usize> = model
        .planes()
        .into_iter()
        .filter(|&p| p != a && p != b)
        .collect();
    if opts.decouple_others && !others.is_empty() {
        positive("lg_frequency_ratio", opts.lg_frequency_ratio)?;
        let nu_eff = opts.lg_frequency_ratio * nu_a;
        let amp = nu_eff / 1.5f64.sqrt();
        channels.push(PulseChannel {
            target: PlaneTarget::Planes(others.clone()),
            offset_hz: lg_offset_hz(amp),
            amplitude_hz: amp,
            phase: 0.0,
        });
        let label = others
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(";");
        effective_hz.push((format!("planes {label}"), nu_eff));
    }

    let mut best = (f64::INFINITY, 1usize);
    for k in 1..=opts.max_cycles {
        let t = k as f64 / nu_a;
        let err = effective_hz
            .iter()
            .map(|(_, nu)| phase_error(*nu, t))
            .fold(0.0, f64::max);
        if err < best.0 {
            best = (err, k);
        }
        if err <= opts.phase_tol {
            break;
        }
    }
    let (residual_rad, window_cycles) = best;
    if residual_rad > opts.phase_tol {
        log::warn!(
            "no commensurate window within {} cycles; best residual {residual_rad:e} rad",
            opts.max_cycles
        );
    }
    let window = window_cycles as f64 / nu_a;
    let repeats = ((duration / window).round() as usize).max(1);
    Ok(Recoupling {
        sequence: PulseSequence::new(vec![PulseSegment::rf(window, channels)], repeats)?,
        plane_a: a,
        plane_b: b,
        window,
        window_cycles,
        residual_rad,
        effective_hz,
    })
}
