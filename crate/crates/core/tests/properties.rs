use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;

use hapqc::couplings::{coupling_table, dipolar_coupling_hz};
use hapqc::lattice::{build_lattice, ChainPattern, LatticeSpec};
use hapqc::sequences::{average_hamiltonian, lee_goldburg, stroboscopic_propagator, AhtOptions};
use hapqc::spinsim::{
    collective, dipolar_hamiltonian, pair_hamiltonian, propagator, trotter_propagator,
    unitarity_error, DipolarForm, SpinAxis, SpinSystemModel,
};

fn spec(n_planes: usize, explicit: Vec<[f64; 2]>) -> LatticeSpec {
    LatticeSpec {
        n_planes,
        pattern: ChainPattern::Explicit(explicit),
        ..LatticeSpec::default()
    }
}

proptest! {
    #[test]
    fn couplings_ignore_rigid_translation(dx in -1e-8f64..1e-8, dy in -1e-8f64..1e-8, planes in 1usize..4) {
        let base = vec![[0.0, 0.0], [9.42e-10, 0.0], [4.71e-10, 8.16e-10]];
        let moved: Vec<[f64; 2]> = base.iter().map(|[x, y]| [x + dx, y + dy]).collect();
        let f = Vector3::z();
        let a = coupling_table(&build_lattice(&spec(planes, base)).unwrap(), &f, 0.0).unwrap();
        let b = coupling_table(&build_lattice(&spec(planes, moved)).unwrap(), &f, 0.0).unwrap();
        prop_assert_eq!(a.len(), b.len());
        // equal couplings may swap places in the sorted table
        for x in &a.entries {
            let y = b.get(x.i, x.j).expect("pair present after translation");
            prop_assert!((x.d_hz - y.d_hz).abs() <= 1e-9 * x.d_hz.abs().max(1e-3));
        }
    }

    #[test]
    fn coupling_scales_as_inverse_cube(r in 1e-10f64..1e-8, theta in 0.0f64..PI, k in 0.2f64..5.0) {
        let d1 = dipolar_coupling_hz(r, theta).unwrap();
        let d2 = dipolar_coupling_hz(k * r, theta).unwrap();
        prop_assert!((d2 * k.powi(3) - d1).abs() <= 1e-10 * d1.abs() + 1e-12);
    }

    #[test]
    fn pair_propagators_are_unitary(d in -5e3f64..5e3, t in 0.0f64..1e-2) {
        let h = pair_hamiltonian(2, 0, 1, d, DipolarForm::FullSecular).unwrap();
        let u = propagator(&h, t).unwrap();
        prop_assert!(unitarity_error(&u) <= 1e-10);
    }

    #[test]
    fn lg_stroboscopic_propagator_is_unitary(amp in 2e4f64..2e5, cycles in 1usize..20) {
        let model = SpinSystemModel::from_lattice(
            &LatticeSpec { n_planes: 3, ..LatticeSpec::default() }, 0.0, 0.0, 0,
        ).unwrap();
        let h = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
        let seq = lee_goldburg(amp, cycles).unwrap();
        let u = stroboscopic_propagator(&seq, &model, &h).unwrap();
        prop_assert!(unitarity_error(&u) <= 1e-10);
        let r = average_hamiltonian(&seq, &h, &model, &AhtOptions::default()).unwrap();
        prop_assert!(r.max_pair_coefficient_hz() <= 1e-6 * model.couplings().max_abs_hz());
    }
}

/// Error exponent of the split-operator propagator for `ν_x` drive plus a
/// dipolar chain.
fn order(nu_x: f64, symmetrized: bool) -> f64 {
    let model = SpinSystemModel::from_lattice(
        &LatticeSpec {
            n_planes: 3,
            ..LatticeSpec::default()
        },
        0.0,
        0.0,
        0,
    )
    .unwrap();
    let hd = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
    let hx = collective(SpinAxis::X, &[0, 1, 2], 3)
        .unwrap()
        .scaled(2.0 * PI * nu_x);
    let t = 1e-4;
    let exact = propagator(&hd.try_add(&hx).unwrap(), t).unwrap();
    let err = |n: usize| {
        let u = trotter_propagator(&[hd.clone(), hx.clone()], t, n, symmetrized).unwrap();
        (&u.matrix - &exact.matrix).norm()
    };
    (err(32) / err(64)).log2()
}

#[test]
fn trotter_orders_match_theory() {
    for nu in [2e3, 5e3, 1e4] {
        let p1 = order(nu, false);
        let p2 = order(nu, true);
        assert!((p1 - 1.0).abs() <= 0.2, "Lie-Trotter {p1} at {nu}");
        assert!((p2 - 2.0).abs() <= 0.2, "Strang {p2} at {nu}");
    }
}
