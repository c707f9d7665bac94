use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use nalgebra::Vector3;

use super::operator::{add_product, check_size, CMatrix, Operator, SpinAxis, C64, MAX_SPINS};
use crate::constants::GAMMA_H;
use crate::couplings::{coupling_table, CouplingTable};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, LatticeSpec, SpinSite};

use std::f64::consts::PI;

/// A small cluster of lattice protons in the frame rotating at the carrier
/// plane's Larmor frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystemModel {
    sites: Vec<SpinSite>,
    couplings: CouplingTable,
    /// Field gradient along the field axis (T/m).
    pub gradient: f64,
    pub carrier_plane: usize,
    chain_spacing: f64,
    field_axis: Vector3<f64>,
    index_of_id: BTreeMap<usize, usize>,
}

impl SpinSystemModel {
    pub fn new(
        sites: Vec<SpinSite>,
        couplings: CouplingTable,
        field_axis: Vector3<f64>,
        chain_spacing: f64,
        gradient: f64,
        carrier_plane: usize,
    ) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::validation("sites", "no sites"));
        }
        if sites.len() > MAX_SPINS {
            return Err(Error::TooManySpins {
                n: sites.len(),
                cap: MAX_SPINS,
            });
        }
        if !gradient.is_finite() {
            return Err(Error::validation("gradient", "must be finite"));
        }
        if !(chain_spacing > 0.0) {
            return Err(Error::validation("chain_spacing", "must be positive"));
        }
        let mut index_of_id = BTreeMap::new();
        for (k, s) in sites.iter().enumerate() {
            if index_of_id.insert(s.id, k).is_some() {
                return Err(Error::validation("sites", format!("duplicate id {}", s.id)));
            }
        }
        for e in &couplings.entries {
            for id in [e.i, e.j] {
                if !index_of_id.contains_key(&id) {
                    return Err(Error::validation(
                        "couplings",
                        format!("unknown site id {id}"),
                    ));
                }
            }
        }
        Ok(SpinSystemModel {
            sites,
            couplings,
            gradient,
            carrier_plane,
            chain_spacing,
            field_axis,
            index_of_id,
        })
    }

    /// Builds the lattice, its coupling table and the model in one go.
    pub fn from_lattice(
        spec: &LatticeSpec,
        cutoff_hz: f64,
        gradient: f64,
        carrier_plane: usize,
    ) -> Result<Self> {
        let sites = build_lattice(spec)?;
        let couplings = coupling_table(&sites, &spec.field_axis, cutoff_hz)?;
        Self::new(
            sites,
            couplings,
            spec.field_axis,
            spec.chain_spacing,
            gradient,
            carrier_plane,
        )
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[SpinSite] {
        &self.sites
    }

    pub fn couplings(&self) -> &CouplingTable {
        &self.couplings
    }

    pub fn chain_spacing(&self) -> f64 {
        self.chain_spacing
    }

    pub fn field_axis(&self) -> &Vector3<f64> {
        &self.field_axis
    }

    pub fn planes(&self) -> BTreeSet<usize> {
        self.sites.iter().map(|s| s.plane_index).collect()
    }

    pub fn plane_of(&self, spin: usize) -> usize {
        self.sites[spin].plane_index
    }

    /// Spin indices (not site ids) belonging to `plane`.
    pub fn spins_in_plane(&self, plane: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&k| self.sites[k].plane_index == plane)
            .collect()
    }

    pub fn require_plane(&self, plane: usize) -> Result<()> {
        if self.sites.iter().any(|s| s.plane_index == plane) {
            Ok(())
        } else {
            Err(Error::UnknownPlane(plane))
        }
    }

    pub fn index_of_id(&self, id: usize) -> Option<usize> {
        self.index_of_id.get(&id).copied()
    }

    /// Resonance offset of a plane from the carrier (Hz).
    pub fn plane_offset_hz(&self, plane: usize) -> f64 {
        let dz = (plane as f64 - self.carrier_plane as f64) * self.chain_spacing;
        GAMMA_H / (2.0 * PI) * self.gradient * dz
    }

    /// Resonance offset of one spin from the carrier (Hz), from its axial
    /// position.
    pub fn offset_hz(&self, spin: usize) -> f64 {
        let z = self.sites[spin].position.dot(&self.field_axis);
        let z_carrier = self.carrier_plane as f64 * self.chain_spacing;
        GAMMA_H / (2.0 * PI) * self.gradient * (z - z_carrier)
    }

    /// `(spin_i, spin_j, d_hz)` in spin-index space.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize, f64)> {
        self.couplings
            .entries
            .iter()
            .map(|e| {
                let a = self.index_of_id[&e.i];
                let b = self.index_of_id[&e.j];
                (a.min(b), a.max(b), e.d_hz)
            })
            .collect()
    }

    /// Restricts the model to the listed spins, keeping couplings among them.
    pub fn subsystem(&self, spins: &[usize]) -> Result<SpinSystemModel> {
        for &s in spins {
            if s >= self.n() {
                return Err(Error::IndexOutOfRange {
                    index: s,
                    n: self.n(),
                });
            }
        }
        let sites: Vec<SpinSite> = spins.iter().map(|&s| self.sites[s].clone()).collect();
        let ids: BTreeSet<usize> = sites.iter().map(|s| s.id).collect();
        let couplings = CouplingTable {
            entries: self
                .couplings
                .entries
                .iter()
                .filter(|e| ids.contains(&e.i) && ids.contains(&e.j))
                .cloned()
                .collect(),
            cutoff_hz: self.couplings.cutoff_hz,
            warning: None,
        };
        SpinSystemModel::new(
            sites,
            couplings,
            self.field_axis,
            self.chain_spacing,
            self.gradient,
            self.carrier_plane,
        )
    }
}

/// `H_Z = Σ 2π·Δf_i·I_zi` (rad/s).
pub fn zeeman_hamiltonian(model: &SpinSystemModel) -> Operator {
    let n = model.n();
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for k in 0..n {
        let w = 2.0 * PI * model.offset_hz(k);
        if w != 0.0 {
            add_product(&mut m, C64::new(w, 0.0), &[(k, SpinAxis::Z)], n);
        }
    }
    Operator {
        matrix: m,
        label: "H_Z".into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipolarForm {
    /// `2π d (3 I_z I_z − I·I)` for every pair.
    FullSecular,
    /// `2π d · 2 I_z I_z` for every pair.
    ZzTruncated,
    /// Full secular within a plane, zz-truncated between planes.
    PlaneSecular,
}

impl FromStr for DipolarForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full_secular" => Ok(DipolarForm::FullSecular),
            "zz_truncated" => Ok(DipolarForm::ZzTruncated),
            "plane_secular" => Ok(DipolarForm::PlaneSecular),
            _ => Err(Error::UnknownTag {
                kind: "dipolar form",
                tag: s.to_string(),
            }),
        }
    }
}

pub(crate) fn add_pair(m: &mut CMatrix, n: usize, i: usize, j: usize, d_hz: f64, full: bool) {
    let w = 2.0 * PI * d_hz;
    if full {
        add_product(
            m,
            C64::new(2.0 * w, 0.0),
            &[(i, SpinAxis::Z), (j, SpinAxis::Z)],
            n,
        );
        add_product(
            m,
            C64::new(-w, 0.0),
            &[(i, SpinAxis::X), (j, SpinAxis::X)],
            n,
        );
        add_product(
            m,
            C64::new(-w, 0.0),
            &[(i, SpinAxis::Y), (j, SpinAxis::Y)],
            n,
        );
    } else {
        add_product(
            m,
            C64::new(2.0 * w, 0.0),
            &[(i, SpinAxis::Z), (j, SpinAxis::Z)],
            n,
        );
    }
}

pub fn dipolar_hamiltonian(model: &SpinSystemModel, form: DipolarForm) -> Operator {
    let n = model.n();
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for (i, j, d_hz) in model.coupled_pairs() {
        let full = match form {
            DipolarForm::FullSecular => true,
            DipolarForm::ZzTruncated => false,
            DipolarForm::PlaneSecular => model.plane_of(i) == model.plane_of(j),
        };
        add_pair(&mut m, n, i, j, d_hz, full);
    }
    Operator {
        matrix: m,
        label: "H_D".into(),
    }
}

/// Secular pair Hamiltonian for an isolated pair on `n` spins.
pub fn pair_hamiltonian(
    n: usize,
    i: usize,
    j: usize,
    d_hz: f64,
    form: DipolarForm,
) -> Result<Operator> {
    let dim = check_size(n)?;
    for s in [i, j] {
        if s >= n {
            return Err(Error::IndexOutOfRange { index: s, n });
        }
    }
    let mut m = CMatrix::zeros(dim, dim);
    add_pair(&mut m, n, i, j, d_hz, form == DipolarForm::FullSecular);
    Ok(Operator {
        matrix: m,
        label: format!("D{i}{j}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ChainPattern;
    use crate::spinsim::operator::{collective, spin_operator};

    fn chain(n_planes: usize, gradient: f64) -> SpinSystemModel {
        let spec = LatticeSpec {
            n_planes,
            ..LatticeSpec::default()
        };
        SpinSystemModel::from_lattice(&spec, 0.0, gradient, 0).unwrap()
    }

    #[test]
    fn zero_gradient_zeeman_vanishes() {
        assert_eq!(zeeman_hamiltonian(&chain(2, 0.0)).max_abs(), 0.0);
    }

    #[test]
    fn gradient_offset_per_plane() {
        let m = chain(2, 2e4);
        assert_eq!(m.offset_hz(0), 0.0);
        // (γ/2π)·G·a
        assert!((m.offset_hz(1) - 292.933052202688).abs() < 1e-9);
        let h = zeeman_hamiltonian(&m);
        // |↑↑⟩ has zero carrier contribution; |↑↓⟩ − |↑↑⟩ = −(2π·292.9)/2
        let diff = h.matrix[(0, 0)].re - h.matrix[(1, 1)].re;
        assert!((diff - 2.0 * PI * 292.933052202688).abs() < 1e-6);
    }

    #[test]
    fn pair_eigenvalues() {
        let d = 2951.0;
        let h = pair_hamiltonian(2, 0, 1, d, DipolarForm::FullSecular).unwrap();
        let mut ev: Vec<f64> = h
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        let w = 2.0 * PI * d;
        let want = [-w, 0.0, 0.5 * w, 0.5 * w];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-9 * w, "{ev:?}");
        }
    }

    #[test]
    fn empty_table_gives_zero() {
        let m = chain(1, 0.0);
        assert_eq!(
            dipolar_hamiltonian(&m, DipolarForm::FullSecular).max_abs(),
            0.0
        );
    }

    #[test]
    fn zz_pair_commutes_with_local_iz() {
        let h = pair_hamiltonian(2, 0, 1, 100.0, DipolarForm::ZzTruncated).unwrap();
        for s in 0..2 {
            let z = spin_operator(SpinAxis::Z, s, 2).unwrap();
            assert!(h.commutator(&z).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn secular_forms_conserve_total_iz() {
        let spec = LatticeSpec {
            n_planes: 2,
            pattern: ChainPattern::Explicit(vec![[0.0, 0.0], [9.42e-10, 0.0]]),
            ..LatticeSpec::default()
        };
        let m = SpinSystemModel::from_lattice(&spec, 0.0, 0.0, 0).unwrap();
        let fz = collective(SpinAxis::Z, &[0, 1, 2, 3], 4).unwrap();
        for form in [
            DipolarForm::FullSecular,
            DipolarForm::ZzTruncated,
            DipolarForm::PlaneSecular,
        ] {
            let h = dipolar_hamiltonian(&m, form);
            assert!(h.is_hermitian());
            assert!(h.commutator(&fz).unwrap().max_abs() <= 1e-12 * h.max_abs());
        }
    }

    #[test]
    fn unknown_form_tag() {
        assert!(matches!(
            "dense".parse::<DipolarForm>(),
            Err(Error::UnknownTag { .. })
        ));
        assert_eq!(
            "zz_truncated".parse::<DipolarForm>().unwrap(),
            DipolarForm::ZzTruncated
        );
    }

    #[test]
    fn subsystem_keeps_internal_couplings() {
        let m = chain(3, 0.0);
        let sub = m.subsystem(&[0, 2]).unwrap();
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.couplings().len(), 1);
        assert!((sub.couplings().entries[0].d_hz - 368.850682555).abs() < 1e-6);
    }
}
