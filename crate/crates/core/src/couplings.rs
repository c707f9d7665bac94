//! Secular homonuclear dipolar couplings from lattice geometry.
//!
//! The reported coupling `d` (Hz) is the coefficient for which the secular
//! pair Hamiltonian reads `2π·d·(3 I_z I_z − I·I)` in rad/s.

use std::fmt::Write as _;

use nalgebra::Vector3;

use crate::constants::{GAMMA_H, HBAR, MU0_OVER_4PI};
use crate::error::{Error, Result};
use crate::lattice::{pair_geometry, SpinSite};

/// Signed secular dipolar coupling in Hz for a proton pair at distance `r`
/// (m) and polar angle `theta` relative to the field.
pub fn dipolar_coupling_hz(r: f64, theta: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "internuclear distance must be positive, got {r}"
        )));
    }
    let c = theta.cos();
    let angular = 3.0 * c * c - 1.0;
    Ok(MU0_OVER_4PI * GAMMA_H * GAMMA_H * HBAR * angular
        / (2.0 * 2.0 * std::f64::consts::PI * r.powi(3)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingEntry {
    /// Site ids, `i < j`.
    pub i: usize,
    pub j: usize,
    pub d_hz: f64,
    pub r: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CouplingTable {
    pub entries: Vec<CouplingEntry>,
    pub cutoff_hz: f64,
    /// Set when the table was built from fewer than two sites.
    pub warning: Option<String>,
}

impl CouplingTable {
    pub fn empty() -> Self {
        CouplingTable::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_abs_hz(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.d_hz.abs())
            .fold(0.0, f64::max)
    }

    /// Coupling between two site ids, in either order.
    pub fn get(&self, a: usize, b: usize) -> Option<&CouplingEntry> {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.entries.iter().find(|e| e.i == i && e.j == j)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,d_hz,r_m,theta_rad\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{:e},{:e},{:e}", e.i, e.j, e.d_hz, e.r, e.theta);
        }
        out
    }
}

/// All pairs with `|d| ≥ cutoff_hz`, sorted by descending `|d|` and then by
/// `(i, j)`.
pub fn coupling_table(
    sites: &[SpinSite],
    field_axis: &Vector3<f64>,
    cutoff_hz: f64,
) -> Result<CouplingTable> {
    if cutoff_hz.is_nan() || cutoff_hz < 0.0 {
        return Err(Error::validation("cutoff_hz", "must be nonnegative"));
    }
    if sites.len() < 2 {
        return Ok(CouplingTable {
            entries: Vec::new(),
            cutoff_hz,
            warning: Some(format!("{} site(s): no pairs to couple", sites.len())),
        });
    }
    let mut entries = Vec::new();
    for (ia, a) in sites.iter().enumerate() {
        for b in &sites[ia + 1..] {
            let (lo, hi) = if a.id < b.id { (a, b) } else { (b, a) };
            let g = pair_geometry(lo, hi, field_axis)?;
            let d = dipolar_coupling_hz(g.r, g.theta)?;
            if d.abs() >= cutoff_hz {
                entries.push(CouplingEntry {
                    i: lo.id,
                    j: hi.id,
                    d_hz: d,
                    r: g.r,
                    theta: g.theta,
                });
            }
        }
    }
    entries.sort_by(|x, y| {
        y.d_hz
            .abs()
            .total_cmp(&x.d_hz.abs())
            .then((x.i, x.j).cmp(&(y.i, y.j)))
    });
    Ok(CouplingTable {
        entries,
        cutoff_hz,
        warning: None,
    })
}
