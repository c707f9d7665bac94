//! CNOT synthesis from a recoupled plane pair, swap routing and local
//! invariants.
//!
//! Logical |1⟩ of a plane qubit is spin-down (bit set). Schedules are
//! executed against an effective Hamiltonian: the retained product alone for
//! the ideal model, or a full average-Hamiltonian report to include the
//! neglected couplings.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::sequences::{
    ideal_rotation_unitary, write_sequence, EffectiveHamiltonianReport, IdealRotation, PlaneTarget,
    PulseChannel, PulseMode, PulseSegment, PulseSequence, Recoupling,
};
use crate::spinsim::{
    add_product, fidelity, propagator, CMatrix, Operator, SpinAxis, SpinSystemModel, C64,
};

/// `exp(−i·2π·D·I_a I_b·t)` with `t = 1/(2|D|)`, i.e. `exp(∓i(π/4)σσ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entangler {
    pub coupling_hz: f64,
    pub time: f64,
    /// Sign of the coupling, fixing the sense of the π/4 phase.
    pub sign: f64,
}

impl Entangler {
    /// Two-qubit unitary for the `I_x I_x` form.
    pub fn unitary_xx(&self) -> Operator {
        let mut h = CMatrix::zeros(4, 4);
        add_product(
            &mut h,
            C64::new(2.0 * PI * self.coupling_hz, 0.0),
            &[(0, SpinAxis::X), (1, SpinAxis::X)],
            2,
        );
        let h = Operator::from_matrix(h, "H_xx").expect("square");
        propagator(&h, self.time)
            .expect("finite hermitian")
            .with_label("entangler")
    }
}

pub fn synthesize_entangler(coupling_hz: f64) -> Result<Entangler> {
    if coupling_hz == 0.0 || !coupling_hz.is_finite() {
        return Err(Error::validation(
            "coupling_hz",
            "entangler needs a finite nonzero coupling",
        ));
    }
    Ok(Entangler {
        coupling_hz,
        time: 1.0 / (2.0 * coupling_hz.abs()),
        sign: coupling_hz.signum(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateStep {
    Rotate(IdealRotation),
    /// Evolution under the recoupling channels for `duration`.
    Evolve {
        duration: f64,
        channels: Vec<PulseChannel>,
    },
}

#[derive(Debug, Clone)]
pub struct GateSchedule {
    pub name: String,
    pub steps: Vec<GateStep>,
    pub ideal_target: Operator,
    pub planes: BTreeSet<usize>,
    pub control: usize,
    pub target: usize,
    pub entangler: Entangler,
    /// Retained product axes on the control and target planes.
    pub axis_a: Vector3<f64>,
    pub axis_b: Vector3<f64>,
}

impl GateSchedule {
    /// Entangling time plus, for finite pulses, the rotation durations.
    pub fn duration(&self, mode: PulseMode) -> f64 {
        self.steps
            .iter()
            .map(|s| match (s, mode) {
                (GateStep::Evolve { duration, .. }, _) => *duration,
                (GateStep::Rotate(r), PulseMode::Finite { amplitude_hz }) => {
                    r.angle.abs() / (2.0 * PI * amplitude_hz)
                }
                (GateStep::Rotate(_), PulseMode::Ideal) => 0.0,
            })
            .sum()
    }

    /// Steps as a pulse sequence (rotations become ideal segments).
    pub fn to_sequence(&self) -> Result<PulseSequence> {
        let segments = self
            .steps
            .iter()
            .map(|s| match s {
                GateStep::Rotate(r) => PulseSegment::ideal(r.clone()),
                GateStep::Evolve { duration, channels } => {
                    PulseSegment::rf(*duration, channels.clone())
                }
            })
            .collect();
        PulseSequence::new(segments, 1)
    }

    /// Sequence text preceded by a header naming the target and planes.
    pub fn to_text(&self) -> Result<String> {
        let planes = self
            .planes
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let mut out = String::new();
        let _ = writeln!(out, "# ideal_target = {}", self.name);
        let _ = writeln!(out, "# planes = {planes}");
        let _ = writeln!(out, "# coupling_hz = {:e}", self.entangler.coupling_hz);
        let _ = writeln!(out, "# entangle_time_s = {:e}", self.entangler.time);
        out.push_str(&write_sequence(&self.to_sequence()?));
        Ok(out)
    }
}

fn rotation(plane: usize, axis: Vector3<f64>, angle: f64) -> Result<GateStep> {
    Ok(GateStep::Rotate(IdealRotation::new(
        PlaneTarget::plane(plane),
        axis,
        angle,
    )?))
}

/// Rotation carrying +z onto `a`, or `None` when `a` is already +z.
fn z_to(plane: usize, a: &Vector3<f64>) -> Result<Option<IdealRotation>> {
    let cross = Vector3::z().cross(a);
    if cross.norm() < 1e-12 {
        return if a.z > 0.0 {
            Ok(None)
        } else {
            IdealRotation::new(PlaneTarget::plane(plane), Vector3::x(), PI).map(Some)
        };
    }
    IdealRotation::new(
        PlaneTarget::plane(plane),
        cross,
        a.z.clamp(-1.0, 1.0).acos(),
    )
    .map(Some)
}

/// Retained A–B product: the largest frame-axis coefficient over spin pairs
/// straddling the two planes, with its lab axes on A and on B.
pub fn retained_term(
    report: &EffectiveHamiltonianReport,
    model: &SpinSystemModel,
    a: usize,
    b: usize,
) -> Result<(f64, Vector3<f64>, Vector3<f64>)> {
    if report.n() != model.n() {
        return Err(Error::DimensionMismatch(report.n(), model.n()));
    }
    let mut best = (0.0f64, Vector3::z(), Vector3::z());
    for i in model.spins_in_plane(a) {
        for j in model.spins_in_plane(b) {
            let Some(p) = report.pair(i, j) else { continue };
            for r in 0..3 {
                for c in 0..3 {
                    let v = p.frame_hz[(r, c)];
                    if v.abs() > best.0.abs() * (1.0 + 1e-9) {
                        let (ea, eb) = (report.frames[p.i].axes[r], report.frames[p.j].axes[c]);
                        best = if p.i == i { (v, ea, eb) } else { (v, eb, ea) };
                    }
                }
            }
        }
    }
    if best.0 == 0.0 {
        return Err(Error::validation(
            "report",
            "no retained coupling between the two planes",
        ));
    }
    Ok(best)
}

/// `⊗_chains CNOT(A_c → B_c)`, identity on every other spin.
pub fn cnot_target(model: &SpinSystemModel, a: usize, b: usize) -> Result<Operator> {
    model.require_plane(a)?;
    model.require_plane(b)?;
    let n = model.n();
    let mut pairs = Vec::new();
    for i in model.spins_in_plane(a) {
        let chain = model.sites()[i].chain_id;
        if let Some(j) = model
            .spins_in_plane(b)
            .into_iter()
            .find(|&j| model.sites()[j].chain_id == chain)
        {
            pairs.push((1usize << (n - 1 - i), 1usize << (n - 1 - j)));
        }
    }
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let mut row = col;
        for &(ctrl, tgt) in &pairs {
            if col & ctrl != 0 {
                row ^= tgt;
            }
        }
        m[(row, col)] = C64::new(1.0, 0.0);
    }
    Ok(Operator {
        matrix: m,
        label: format!("CNOT({a}->{b})"),
    })
}

/// CNOT(A→B) built from the recoupled interaction:
/// `H_B · Rz_A Rz_B · V⁻¹ · E · V · H_B` (time order right to left), where `V`
/// maps z onto the retained axes and `E` is the entangling evolution.
pub fn cnot_schedule(
    model: &SpinSystemModel,
    recoupling: &Recoupling,
    report: &EffectiveHamiltonianReport,
) -> Result<GateSchedule> {
    let (a, b) = (recoupling.plane_a, recoupling.plane_b);
    let (d, axis_a, axis_b) = retained_term(report, model, a, b)?;
    let entangler = synthesize_entangler(d)?;
    let hadamard = Vector3::new(1.0, 0.0, 1.0);
    let mut steps = vec![rotation(b, hadamard, PI)?];
    let frames: Vec<IdealRotation> = [(a, axis_a), (b, axis_b)]
        .iter()
        .filter_map(|(p, ax)| z_to(*p, ax).transpose())
        .collect::<Result<_>>()?;
    steps.extend(frames.iter().cloned().map(GateStep::Rotate));
    steps.push(GateStep::Evolve {
        duration: entangler.time,
        channels: recoupling.sequence.segments[0].channels.clone(),
    });
    steps.extend(frames.iter().rev().map(|r| GateStep::Rotate(r.inverse())));
    steps.push(rotation(a, Vector3::z(), -entangler.sign * FRAC_PI_2)?);
    steps.push(rotation(b, Vector3::z(), -entangler.sign * FRAC_PI_2)?);
    steps.push(rotation(b, hadamard, PI)?);
    Ok(GateSchedule {
        name: format!("CNOT({a}->{b})"),
        steps,
        ideal_target: cnot_target(model, a, b)?,
        planes: [a, b].into_iter().collect(),
        control: a,
        target: b,
        entangler,
        axis_a,
        axis_b,
    })
}

/// `2π·D·Σ_chains (a·I_{A_c})(b·I_{B_c})` on `model`: the retained product
/// with nothing else.
pub fn retained_hamiltonian(model: &SpinSystemModel, schedule: &GateSchedule) -> Result<Operator> {
    let (pa, pb) = (schedule.control, schedule.target);
    model.require_plane(pa)?;
    model.require_plane(pb)?;
    let n = model.n();
    let mut h = CMatrix::zeros(1 << n, 1 << n);
    for i in model.spins_in_plane(pa) {
        let chain = model.sites()[i].chain_id;
        let Some(j) = model
            .spins_in_plane(pb)
            .into_iter()
            .find(|&j| model.sites()[j].chain_id == chain)
        else {
            continue;
        };
        for (x, ax) in SpinAxis::CARTESIAN.iter().enumerate() {
            for (y, bx) in SpinAxis::CARTESIAN.iter().enumerate() {
                let w = schedule.axis_a[x] * schedule.axis_b[y];
                if w != 0.0 {
                    add_product(
                        &mut h,
                        C64::new(2.0 * PI * schedule.entangler.coupling_hz * w, 0.0),
                        &[(i, *ax), (j, *bx)],
                        n,
                    );
                }
            }
        }
    }
    Operator::from_matrix(h, "H_retained")
}

#[derive(Debug, Clone)]
pub struct GateSimulation {
    pub unitary: Operator,
    pub fidelity: f64,
    pub duration: f64,
}

/// Runs the schedule with `h_eff` acting during entangling steps and, for
/// finite pulses, during rotations too. Finite rotations add
/// `2π·ν₁·(axis·I)` on the target plane for `angle/(2πν₁)`.
pub fn simulate_schedule(
    schedule: &GateSchedule,
    model: &SpinSystemModel,
    h_eff: &Operator,
    mode: PulseMode,
) -> Result<GateSimulation> {
    let d = 1usize << model.n();
    if h_eff.dim() != d || schedule.ideal_target.dim() != d {
        return Err(Error::DimensionMismatch(h_eff.dim(), d));
    }
    let mut u = CMatrix::identity(d, d);
    for step in &schedule.steps {
        let s = match (step, mode) {
            (GateStep::Evolve { duration, .. }, _) => propagator(h_eff, *duration)?,
            (GateStep::Rotate(r), PulseMode::Ideal) => ideal_rotation_unitary(r, model)?,
            (GateStep::Rotate(r), PulseMode::Finite { amplitude_hz }) => {
                if !(amplitude_hz > 0.0) {
                    return Err(Error::validation("amplitude_hz", "must be positive"));
                }
                let t = r.angle.abs() / (2.0 * PI * amplitude_hz);
                let unit = IdealRotation {
                    angle: 2.0 * PI * amplitude_hz * r.angle.signum(),
                    ..r.clone()
                };
                // generator of a unit-time rotation at the nutation rate
                let gen = ideal_generator(&unit, model)?;
                propagator(&h_eff.try_add(&gen)?, t)?
            }
        };
        u = s.matrix * u;
    }
    let unitary = Operator {
        matrix: u,
        label: schedule.name.clone(),
    };
    Ok(GateSimulation {
        fidelity: fidelity(&schedule.ideal_target, &unitary)?,
        unitary,
        duration: schedule.duration(mode),
    })
}

fn ideal_generator(r: &IdealRotation, model: &SpinSystemModel) -> Result<Operator> {
    r.target.check(model)?;
    let n = model.n();
    let mut h = CMatrix::zeros(1 << n, 1 << n);
    for k in 0..n {
        if r.target.contains(model.plane_of(k)) {
            for (x, ax) in SpinAxis::CARTESIAN.iter().enumerate() {
                if r.axis[x] != 0.0 {
                    add_product(&mut h, C64::new(r.angle * r.axis[x], 0.0), &[(k, *ax)], n);
                }
            }
        }
    }
    Operator::from_matrix(h, "H_pulse")
}

/// Makhlin local invariants `(G1, G2)` of a two-qubit unitary. CNOT gives
/// `(0, 1)`.
pub fn makhlin_invariants(u: &Operator) -> Result<(C64, f64)> {
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch(u.dim(), 4));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, s));
    #[rustfmt::skip]
    let q = CMatrix::from_row_slice(4, 4, &[
        o, z, z, i,
        z, i, o, z,
        z, i, -o, z,
        o, z, z, -i,
    ]);
    let ub = q.adjoint() * &u.matrix * &q;
    let m = ub.transpose() * &ub;
    let det = u.matrix.determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (det * 16.0);
    let g2 = (tr * tr - tr2) / (det * 4.0);
    Ok((g1, g2.re))
}

/// One CNOT in a swap route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteGate {
    pub control: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapRoute {
    pub gates: Vec<RouteGate>,
    pub swaps: usize,
}

/// `2·⌈(Δ − reach)/reach⌉·3 + 1` for `Δ > reach`, else 1.
pub fn swap_route_cnot_count(delta: usize, reach: usize) -> usize {
    2 * delta.saturating_sub(reach).div_ceil(reach) * 3 + 1
}

/// Carries the control's qubit toward `b` in hops of `reach` planes, applies
/// CNOT, and swaps back. Planes are checked against `0..n_planes`.
pub fn swap_route(a: usize, b: usize, reach: usize, n_planes: usize) -> Result<SwapRoute> {
    if reach == 0 {
        return Err(Error::validation("reach", "must be at least 1"));
    }
    if a == b {
        return Err(Error::validation("plane_b", "must differ from plane_a"));
    }
    for p in [a, b] {
        if p >= n_planes {
            return Err(Error::UnknownPlane(p));
        }
    }
    let delta = a.abs_diff(b);
    let swaps = delta.saturating_sub(reach).div_ceil(reach);
    let step = |p: usize| if b > a { p + reach } else { p - reach };
    let mut hops = Vec::new();
    let mut pos = a;
    for _ in 0..swaps {
        let next = step(pos);
        hops.push((pos, next));
        pos = next;
    }
    let swap = |p: usize, q: usize| {
        [
            RouteGate {
                control: p,
                target: q,
            },
            RouteGate {
                control: q,
                target: p,
            },
            RouteGate {
                control: p,
                target: q,
            },
        ]
    };
    let mut gates: Vec<RouteGate> = hops.iter().flat_map(|&(p, q)| swap(p, q)).collect();
    gates.push(RouteGate {
        control: pos,
        target: b,
    });
    gates.extend(hops.iter().rev().flat_map(|&(p, q)| swap(p, q)));
    Ok(SwapRoute { gates, swaps })
}

/// Applies a CNOT list to a classical bit assignment over planes.
pub fn apply_route(gates: &[RouteGate], bits: &mut [bool]) {
    for g in gates {
        if bits[g.control] {
            bits[g.target] ^= true;
        }
    }
}
