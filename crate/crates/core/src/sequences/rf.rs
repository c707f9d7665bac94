//! Rotating-frame rf generators and exact piecewise propagation.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::{IdealRotation, PulseSequence};
use crate::error::{Error, Result};
use crate::spinsim::{
    add_product, matrix_power, propagator, CMatrix, Operator, SpinAxis, SpinSystemModel, C64,
};

fn segment_at(seq: &PulseSequence, index: usize) -> Result<&super::PulseSegment> {
    seq.segments.get(index).ok_or(Error::IndexOutOfRange {
        index,
        n: seq.segments.len(),
    })
}

/// Per-spin rf field (Hz) during segment `index`: the sum of every channel
/// aimed at the spin's plane. Ideal-rotation segments carry no field.
pub fn segment_fields_hz(
    seq: &PulseSequence,
    index: usize,
    model: &SpinSystemModel,
) -> Result<Vec<Vector3<f64>>> {
    let seg = segment_at(seq, index)?;
    let mut fields = vec![Vector3::zeros(); model.n()];
    for c in &seg.channels {
        c.target.check(model)?;
        let f = c.field_hz();
        for (k, field) in fields.iter_mut().enumerate() {
            if c.target.contains(model.plane_of(k)) {
                *field += f;
            }
        }
    }
    Ok(fields)
}

pub(crate) fn field_operator(fields_hz: &[Vector3<f64>]) -> Operator {
    let n = fields_hz.len();
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for (k, f) in fields_hz.iter().enumerate() {
        for (axis, value) in SpinAxis::CARTESIAN.iter().zip(f.iter()) {
            if *value != 0.0 {
                add_product(&mut m, C64::new(2.0 * PI * value, 0.0), &[(k, *axis)], n);
            }
        }
    }
    Operator {
        matrix: m,
        label: "H_rf".into(),
    }
}

/// `Σ_k 2π·(ν₁cosφ I_x + ν₁sinφ I_y + offset I_z)` over targeted spins, in
/// rad/s. Zero for ideal-rotation segments.
pub fn rf_hamiltonian(
    seq: &PulseSequence,
    index: usize,
    model: &SpinSystemModel,
) -> Result<Operator> {
    let fields = segment_fields_hz(seq, index, model)?;
    Ok(field_operator(&fields).with_label(format!("H_rf[{index}]")))
}

/// `Π_k exp(−i·angle·axis·I_k)` over the spins of the targeted planes.
pub fn ideal_rotation_unitary(
    rotation: &IdealRotation,
    model: &SpinSystemModel,
) -> Result<Operator> {
    rotation.target.check(model)?;
    let generator: Vec<Vector3<f64>> = (0..model.n())
        .map(|k| {
            if rotation.target.contains(model.plane_of(k)) {
                rotation.axis * rotation.angle / (2.0 * PI)
            } else {
                Vector3::zeros()
            }
        })
        .collect();
    Ok(propagator(&field_operator(&generator), 1.0)?.with_label("R"))
}

/// Propagator of one segment under `h_int + H_rf`.
pub(crate) fn segment_propagator(
    seq: &PulseSequence,
    index: usize,
    model: &SpinSystemModel,
    h_int: &Operator,
) -> Result<Operator> {
    let seg = segment_at(seq, index)?;
    match &seg.ideal_rotation {
        Some(rot) => ideal_rotation_unitary(rot, model),
        None => {
            let h = h_int.try_add(&rf_hamiltonian(seq, index, model)?)?;
            propagator(&h, seg.duration)
        }
    }
}

pub(crate) fn check_interaction(model: &SpinSystemModel, h_int: &Operator) -> Result<()> {
    let d = 1usize << model.n();
    if h_int.dim() != d {
        return Err(Error::DimensionMismatch(h_int.dim(), d));
    }
    h_int.require_hermitian()
}

/// Exact time-ordered cycle propagator raised to `n_repeats`.
pub fn stroboscopic_propagator(
    seq: &PulseSequence,
    model: &SpinSystemModel,
    h_int: &Operator,
) -> Result<Operator> {
    seq.validate_for(model)?;
    check_interaction(model, h_int)?;
    let d = h_int.dim();
    let mut cycle = CMatrix::identity(d, d);
    for k in 0..seq.segments.len() {
        cycle = segment_propagator(seq, k, model, h_int)?.matrix * cycle;
    }
    Ok(Operator {
        matrix: matrix_power(&cycle, seq.n_repeats as u64),
        label: "U_strobe".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::sequences::{lee_goldburg, PlaneTarget, PulseChannel, PulseSegment};
    use crate::spinsim::{fidelity, spin_operator};

    fn chain(n: usize) -> SpinSystemModel {
        SpinSystemModel::from_lattice(
            &LatticeSpec {
                n_planes: n,
                ..LatticeSpec::default()
            },
            0.0,
            0.0,
            0,
        )
        .unwrap()
    }

    #[test]
    fn free_segment_has_zero_rf() {
        let seq = PulseSequence::new(vec![PulseSegment::free(1e-6)], 1).unwrap();
        assert_eq!(rf_hamiltonian(&seq, 0, &chain(2)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn on_resonance_x_pulse() {
        let ch = PulseChannel {
            target: PlaneTarget::All,
            offset_hz: 0.0,
            amplitude_hz: 1e4,
            phase: 0.0,
        };
        let seq = PulseSequence::new(vec![PulseSegment::rf(1e-6, vec![ch])], 1).unwrap();
        let h = rf_hamiltonian(&seq, 0, &chain(1)).unwrap();
        let want = spin_operator(SpinAxis::X, 0, 1)
            .unwrap()
            .scaled(2.0 * PI * 1e4);
        assert!((h.matrix - want.matrix).norm() < 1e-9);
    }

    #[test]
    fn lg_field_norm() {
        let seq = lee_goldburg(5e4, 1).unwrap();
        let f = segment_fields_hz(&seq, 0, &chain(1)).unwrap();
        assert!((f[0].norm() - 5e4 * 1.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn lg_cycle_closes() {
        let model = chain(2);
        let seq = lee_goldburg(5e4, 1).unwrap();
        let u = stroboscopic_propagator(&seq, &model, &Operator::zeros(2)).unwrap();
        assert!((fidelity(&u, &Operator::identity(2)).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_repeats_is_identity() {
        let model = chain(2);
        let seq = lee_goldburg(5e4, 0).unwrap();
        let h =
            crate::spinsim::dipolar_hamiltonian(&model, crate::spinsim::DipolarForm::FullSecular);
        let u = stroboscopic_propagator(&seq, &model, &h).unwrap();
        assert_eq!(u.matrix, CMatrix::identity(4, 4));
    }

    #[test]
    fn selective_rotation_leaves_other_planes() {
        let model = chain(2);
        let rot = IdealRotation::new(PlaneTarget::plane(1), Vector3::x(), PI).unwrap();
        let u = ideal_rotation_unitary(&rot, &model).unwrap();
        // −i·(2 I_x) on spin 1 only
        let want = spin_operator(SpinAxis::X, 1, 2).unwrap().matrix * C64::new(0.0, -2.0);
        assert!((u.matrix - want).norm() < 1e-12);
        let missing = IdealRotation::new(PlaneTarget::plane(5), Vector3::x(), PI).unwrap();
        assert!(matches!(
            ideal_rotation_unitary(&missing, &model),
            Err(Error::UnknownPlane(5))
        ));
    }
}
