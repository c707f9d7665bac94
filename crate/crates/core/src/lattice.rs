//! Hydrogen site positions for clusters of field-aligned hydroxyl chains.
//!
//! Chains run along the field axis. Each chain contributes one proton per
//! plane, so a site is identified by `(plane_index, chain_id)` and ids are
//! assigned plane-major. Positions are stored in metres.

use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::constants::ANGSTROM;
use crate::error::{Error, Result};

/// Arrangement of chains in the plane perpendicular to the field.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainPattern {
    Single,
    /// A central chain surrounded by six chains on a regular hexagon.
    CentralPlusSixHex,
    /// In-plane chain offsets in metres, relative to the first chain.
    Explicit(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    /// Intra-chain proton spacing (m).
    pub chain_spacing: f64,
    /// Nearest-neighbour chain distance (m).
    pub chain_separation: f64,
    pub n_planes: usize,
    pub pattern: ChainPattern,
    pub field_axis: Vector3<f64>,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec {
            chain_spacing: 3.44 * ANGSTROM,
            chain_separation: 9.42 * ANGSTROM,
            n_planes: 1,
            pattern: ChainPattern::Single,
            field_axis: Vector3::z(),
        }
    }
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.chain_spacing > 0.0) || !self.chain_spacing.is_finite() {
            return Err(Error::validation("chain_spacing", "must be positive"));
        }
        if !(self.chain_separation > 0.0) || !self.chain_separation.is_finite() {
            return Err(Error::validation("chain_separation", "must be positive"));
        }
        if self.n_planes == 0 {
            return Err(Error::validation("n_planes", "must be at least 1"));
        }
        if (self.field_axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::validation("field_axis", "must have unit norm"));
        }
        if let ChainPattern::Explicit(offsets) = &self.pattern {
            if offsets.is_empty() {
                return Err(Error::validation("chain_pattern", "explicit list is empty"));
            }
            if offsets.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::validation("chain_pattern", "non-finite offset"));
            }
        }
        Ok(())
    }

    /// In-plane offsets of every chain, in metres.
    pub fn chain_offsets(&self) -> Vec<[f64; 2]> {
        match &self.pattern {
            ChainPattern::Single => vec![[0.0, 0.0]],
            ChainPattern::CentralPlusSixHex => {
                let s = self.chain_separation;
                let mut out = vec![[0.0, 0.0]];
                for k in 0..6 {
                    let phi = k as f64 * std::f64::consts::FRAC_PI_3;
                    out.push([s * phi.cos(), s * phi.sin()]);
                }
                out
            }
            ChainPattern::Explicit(offsets) => offsets.clone(),
        }
    }

    pub fn n_chains(&self) -> usize {
        self.chain_offsets().len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSite {
    pub id: usize,
    pub chain_id: usize,
    pub plane_index: usize,
    /// Position in metres.
    pub position: Vector3<f64>,
}

/// Orthonormal pair spanning the plane perpendicular to `axis`.
/// For the +z axis this is exactly (x̂, ŷ).
fn transverse_basis(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    if (axis - Vector3::z()).norm() < 1e-15 {
        return (Vector3::x(), Vector3::y());
    }
    let helper = if axis.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let e1 = (helper - axis * axis.dot(&helper)).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

pub fn build_lattice(spec: &LatticeSpec) -> Result<Vec<SpinSite>> {
    spec.validate()?;
    let offsets = spec.chain_offsets();
    let (e1, e2) = transverse_basis(&spec.field_axis);
    let mut sites = Vec::with_capacity(spec.n_planes * offsets.len());
    for plane in 0..spec.n_planes {
        let axial = spec.field_axis * (plane as f64 * spec.chain_spacing);
        for (chain_id, off) in offsets.iter().enumerate() {
            sites.push(SpinSite {
                id: sites.len(),
                chain_id,
                plane_index: plane,
                position: axial + e1 * off[0] + e2 * off[1],
            });
        }
    }
    Ok(sites)
}

/// Internuclear distance and polar angle relative to the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub r: f64,
    pub theta: f64,
}

pub fn pair_geometry(
    a: &SpinSite,
    b: &SpinSite,
    field_axis: &Vector3<f64>,
) -> Result<PairGeometry> {
    let v = b.position - a.position;
    let r = v.norm();
    if r == 0.0 {
        return Err(Error::DegeneratePair(a.id, b.id));
    }
    let c = (v.dot(field_axis) / (r * field_axis.norm())).clamp(-1.0, 1.0);
    Ok(PairGeometry { r, theta: c.acos() })
}

pub fn sites_csv(sites: &[SpinSite]) -> String {
    let mut out = String::from("id,chain_id,plane_index,x_m,y_m,z_m\n");
    for s in sites {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{:e},{:e}",
            s.id, s.chain_id, s.plane_index, s.position.x, s.position.y, s.position.z
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n_planes: usize) -> LatticeSpec {
        LatticeSpec {
            n_planes,
            ..LatticeSpec::default()
        }
    }

    #[test]
    fn single_site_at_origin() {
        let sites = build_lattice(&chain(1)).unwrap();
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].position, Vector3::zeros());
    }

    #[test]
    fn two_plane_chain_uses_chain_spacing() {
        let sites = build_lattice(&chain(2)).unwrap();
        assert_eq!(sites[1].position.z, 3.44e-10);
        assert_eq!(sites[1].plane_index, 1);
    }

    #[test]
    fn hex_cluster_distances() {
        let spec = LatticeSpec {
            pattern: ChainPattern::CentralPlusSixHex,
            ..LatticeSpec::default()
        };
        let sites = build_lattice(&spec).unwrap();
        assert_eq!(sites.len(), 7);
        for s in &sites[1..] {
            assert!(((s.position - sites[0].position).norm() - 9.42e-10).abs() < 1e-22);
        }
        let mut nearest = f64::INFINITY;
        for i in 1..7 {
            for j in (i + 1)..7 {
                nearest = nearest.min((sites[i].position - sites[j].position).norm());
            }
        }
        assert!((nearest - 9.42e-10).abs() < 1e-22);
    }

    #[test]
    fn ids_are_plane_major() {
        let spec = LatticeSpec {
            n_planes: 3,
            pattern: ChainPattern::Explicit(vec![[0.0, 0.0], [9.42e-10, 0.0]]),
            ..LatticeSpec::default()
        };
        let sites = build_lattice(&spec).unwrap();
        let order: Vec<_> = sites.iter().map(|s| (s.plane_index, s.chain_id)).collect();
        assert_eq!(order, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]);
        for s in &sites {
            let axial = s.position.dot(&spec.field_axis);
            assert!((axial - s.plane_index as f64 * spec.chain_spacing).abs() < 1e-15);
        }
    }

    #[test]
    fn validation_names_field() {
        let bad = LatticeSpec {
            chain_spacing: -1.0,
            ..LatticeSpec::default()
        };
        match build_lattice(&bad) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "chain_spacing"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = chain(0);
        match build_lattice(&bad) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "n_planes"),
            other => panic!("unexpected {other:?}"),
        }
        let bad = LatticeSpec {
            field_axis: Vector3::new(0.0, 0.0, 2.0),
            ..LatticeSpec::default()
        };
        assert!(build_lattice(&bad).is_err());
    }

    #[test]
    fn pair_geometry_cases() {
        let spec = LatticeSpec {
            n_planes: 3,
            pattern: ChainPattern::Explicit(vec![[0.0, 0.0], [9.42e-10, 0.0]]),
            ..LatticeSpec::default()
        };
        let s = build_lattice(&spec).unwrap();
        let z = Vector3::z();

        let g = pair_geometry(&s[0], &s[2], &z).unwrap();
        assert!((g.r - 3.44e-10).abs() < 1e-24);
        assert!(g.theta.abs() < 1e-12);
        let g = pair_geometry(&s[2], &s[0], &z).unwrap();
        assert!((g.theta - std::f64::consts::PI).abs() < 1e-12);

        let g = pair_geometry(&s[0], &s[1], &z).unwrap();
        assert!((g.r - 9.42e-10).abs() < 1e-24);
        assert!((g.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        // adjacent chain, two planes apart
        let g = pair_geometry(&s[0], &s[5], &z).unwrap();
        let r = (9.42f64.powi(2) + 6.88f64.powi(2)).sqrt();
        assert!((g.r * 1e10 - r).abs() < 1e-12);
        assert!((g.r * 1e10 - 11.665).abs() < 1e-3);
        assert!((g.theta.cos() - 6.88 / r).abs() < 1e-12);
    }

    #[test]
    fn coincident_sites_are_rejected() {
        let a = SpinSite {
            id: 0,
            chain_id: 0,
            plane_index: 0,
            position: Vector3::zeros(),
        };
        let b = SpinSite { id: 1, ..a.clone() };
        assert_eq!(
            pair_geometry(&a, &b, &Vector3::z()),
            Err(Error::DegeneratePair(0, 1))
        );
    }

    #[test]
    fn csv_header() {
        let csv = sites_csv(&build_lattice(&chain(2)).unwrap());
        assert!(csv.starts_with("id,chain_id,plane_index,x_m,y_m,z_m\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
