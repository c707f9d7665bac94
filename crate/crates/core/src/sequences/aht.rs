//! Zeroth-order average Hamiltonian in the rf toggling frame.
//!
//! Within a segment the rf generator is diagonalised once, `H_rf = WΛW†`, so
//! the toggling-frame interaction is `e^{iΛs}·G·e^{−iΛs}` elementwise with
//! `G = W†·H_int·W`. The time integral is taken by composite Gauss–Legendre
//! quadrature, doubling panels until the result stops moving.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DVector, Matrix3, Vector3};

use super::rf::{check_interaction, field_operator, ideal_rotation_unitary, segment_fields_hz};
use super::PulseSequence;
use crate::error::{Error, Result};
use crate::format::sig;
use crate::spinsim::{
    add_product, matrix_power, propagator, trace_product, CMatrix, HermitianEigen, Operator,
    SpinAxis, SpinSystemModel, C64,
};

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AhtOptions {
    /// Quadrature tolerance relative to `max|H_int|`.
    pub rel_tol: f64,
    /// Panel cap per segment before giving up.
    pub max_panels: usize,
}

impl Default for AhtOptions {
    fn default() -> Self {
        AhtOptions {
            rel_tol: 1e-6,
            max_panels: 1 << 16,
        }
    }
}

/// Orthonormal axes used to label one spin's operators. Irradiated spins
/// use `n` along the cycle-averaged field, `u` the part of `z` normal to it
/// and `v = n × u`; unirradiated spins keep the lab axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinFrame {
    pub axes: [Vector3<f64>; 3],
    pub names: [&'static str; 3],
}

impl SpinFrame {
    pub fn lab() -> Self {
        SpinFrame {
            axes: [Vector3::x(), Vector3::y(), Vector3::z()],
            names: ["x", "y", "z"],
        }
    }

    pub fn along(field: &Vector3<f64>) -> Self {
        let norm = field.norm();
        if norm == 0.0 {
            return Self::lab();
        }
        let n = field / norm;
        let zp = Vector3::z() - n * n.z;
        let u = if zp.norm() < 1e-12 {
            Vector3::x()
        } else {
            zp.normalize()
        };
        SpinFrame {
            axes: [n, u, n.cross(&u)],
            names: ["n", "u", "v"],
        }
    }

    /// Rows are the frame axes in lab coordinates.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[
            self.axes[0].transpose(),
            self.axes[1].transpose(),
            self.axes[2].transpose(),
        ])
    }
}

/// Bilinear coefficients `Σ C_ab I_ia I_jb` for one spin pair (Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct PairTensor {
    pub i: usize,
    pub j: usize,
    pub lab_hz: Matrix3<f64>,
    /// Same tensor with rows in spin i's frame and columns in spin j's.
    pub frame_hz: Matrix3<f64>,
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonianReport {
    /// Zeroth-order average of `H_int` in the toggling frame (rad/s).
    pub h_bar: Operator,
    /// rf-only propagator over one cycle.
    pub rf_cycle: Operator,
    pub cycle_time: f64,
    pub n_repeats: usize,
    /// Cycle-averaged rf field on each spin (Hz).
    pub effective_fields_hz: Vec<Vector3<f64>>,
    pub frames: Vec<SpinFrame>,
    pub identity_hz: f64,
    /// Single-spin coefficients in each spin's frame (Hz).
    pub single_spin_hz: Vec<Vector3<f64>>,
    pub pairs: Vec<PairTensor>,
    /// `(label, Hz)` in frame axes, with negligible terms dropped.
    pub decomposition: Vec<(String, f64)>,
    /// Largest entry of `H̄ − Σ decomposition` (Hz).
    pub residual_norm_hz: f64,
    /// `"I{i}-I{j}"` → Frobenius norms of the pair tensor before and after
    /// averaging, for every pair coupled in `H_int`.
    pub suppression: BTreeMap<String, (f64, f64)>,
    /// Largest last-doubling change over all segments, relative to the
    /// tolerance's reference scale.
    pub quadrature_change: f64,
}

impl EffectiveHamiltonianReport {
    pub fn n(&self) -> usize {
        self.frames.len()
    }

    pub fn pair(&self, a: usize, b: usize) -> Option<&PairTensor> {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.pairs.iter().find(|p| p.i == i && p.j == j)
    }

    pub fn coefficient(&self, label: &str) -> f64 {
        self.decomposition
            .iter()
            .find(|(l, _)| l == label)
            .map_or(0.0, |(_, c)| *c)
    }

    /// Largest two-spin coefficient magnitude (Hz).
    pub fn max_pair_coefficient_hz(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| p.lab_hz.amax())
            .fold(0.0, f64::max)
    }

    /// Effective-field magnitudes of irradiated spins as `field:I{k}n` rows.
    pub fn field_terms(&self) -> Vec<(String, f64)> {
        self.effective_fields_hz
            .iter()
            .enumerate()
            .filter(|(_, f)| f.norm() > 0.0)
            .map(|(k, f)| (format!("field:I{k}n"), f.norm()))
            .collect()
    }

    pub fn label(&self, i: usize, a: usize) -> String {
        format!("I{i}{}", self.frames[i].names[a])
    }

    /// `term_label,coefficient_hz` rows: field terms, then the decomposition.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term_label,coefficient_hz\n");
        for (label, c) in self.field_terms().iter().chain(&self.decomposition) {
            let _ = writeln!(out, "{label},{}", sig(*c, 6));
        }
        out
    }
}

/// Lab-frame coefficients of a Hamiltonian restricted to ≤ 2-body terms.
struct LabTerms {
    identity: f64,
    single: Vec<Vector3<f64>>,
    pairs: Vec<(usize, usize, Matrix3<f64>)>,
}

fn lab_terms(h: &CMatrix, n: usize) -> LabTerms {
    let d = (1usize << n) as f64;
    let to_hz = 1.0 / (2.0 * PI);
    let identity = h.trace().re / d * to_hz;
    let single = (0..n)
        .map(|i| {
            Vector3::from_fn(|a, _| {
                trace_product(h, &[(i, SpinAxis::CARTESIAN[a])], n).re / (d / 4.0) * to_hz
            })
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let c = Matrix3::from_fn(|a, b| {
                trace_product(
                    h,
                    &[(i, SpinAxis::CARTESIAN[a]), (j, SpinAxis::CARTESIAN[b])],
                    n,
                )
                .re / (d / 16.0)
                    * to_hz
            });
            pairs.push((i, j, c));
        }
    }
    LabTerms {
        identity,
        single,
        pairs,
    }
}

/// `∫₀^τ e^{iΛs}·G·e^{−iΛs} ds` on `m` equal panels.
fn gauss_legendre(g: &CMatrix, lambda: &DVector<f64>, tau: f64, m: usize) -> CMatrix {
    let d = lambda.len();
    let h = tau / m as f64;
    let mut kernel = CMatrix::zeros(d, d);
    let mut p = vec![C64::new(0.0, 0.0); d];
    for panel in 0..m {
        let mid = (panel as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let s = mid + 0.5 * h * x;
            for (pk, lk) in p.iter_mut().zip(lambda.iter()) {
                *pk = C64::from_polar(1.0, lk * s);
            }
            let wh = 0.5 * h * w;
            for c in 0..d {
                let pc = p[c].conj() * wh;
                for r in 0..d {
                    kernel[(r, c)] += p[r] * pc;
                }
            }
        }
    }
    kernel.component_mul(g)
}

fn integrate_segment(
    g: &CMatrix,
    lambda: &DVector<f64>,
    tau: f64,
    tol: f64,
    max_panels: usize,
) -> Result<(CMatrix, f64)> {
    let spread = lambda.max() - lambda.min();
    let mut m = ((spread * tau / (2.0 * PI)).ceil() as usize + 1)
        .min(max_panels)
        .max(1);
    let mut prev = gauss_legendre(g, lambda, tau, m);
    loop {
        if 2 * m > max_panels {
            let last = gauss_legendre(g, lambda, tau, max_panels / 2);
            let achieved = (&last - &prev).iter().map(|z| z.norm()).fold(0.0, f64::max);
            return Err(Error::NonConvergence {
                achieved,
                requested: tol,
            });
        }
        m *= 2;
        let next = gauss_legendre(g, lambda, tau, m);
        let change = (&next - &prev).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if change <= tol {
            return Ok((next, change));
        }
        prev = next;
    }
}

/// `H̄⁽⁰⁾ = (1/t_c)∫₀^{t_c} U_rf†(t)·H_int·U_rf(t) dt` with its product-operator
/// decomposition in each spin's effective-field frame.
pub fn average_hamiltonian(
    seq: &PulseSequence,
    h_int: &Operator,
    model: &SpinSystemModel,
    opts: &AhtOptions,
) -> Result<EffectiveHamiltonianReport> {
    seq.validate_for(model)?;
    check_interaction(model, h_int)?;
    if !(opts.rel_tol > 0.0) || opts.max_panels < 2 {
        return Err(Error::validation(
            "aht_options",
            "rel_tol must be positive and max_panels ≥ 2",
        ));
    }
    let cycle_time = seq.cycle_time();
    if !(cycle_time > 0.0) {
        return Err(Error::validation(
            "cycle_time",
            "average Hamiltonian needs a positive cycle time",
        ));
    }
    let n = model.n();
    let d = h_int.dim();
    let scale = h_int.max_abs();

    let mut u0 = CMatrix::identity(d, d);
    let mut sum = CMatrix::zeros(d, d);
    let mut mean_field = vec![Vector3::zeros(); n];
    let mut worst_change: f64 = 0.0;
    for (k, seg) in seq.segments.iter().enumerate() {
        if let Some(rot) = &seg.ideal_rotation {
            u0 = ideal_rotation_unitary(rot, model)?.matrix * u0;
            continue;
        }
        let fields = segment_fields_hz(seq, k, model)?;
        for (acc, f) in mean_field.iter_mut().zip(&fields) {
            *acc += f * (seg.duration / cycle_time);
        }
        let eig = HermitianEigen::new(&field_operator(&fields))?;
        let w = &eig.vectors;
        let g = w.adjoint() * &h_int.matrix * w;
        let tol = opts.rel_tol * scale * seg.duration;
        let (j, change) = integrate_segment(&g, &eig.values, seg.duration, tol, opts.max_panels)?;
        if tol > 0.0 {
            worst_change = worst_change.max(change / (scale * seg.duration));
        }
        sum += u0.adjoint() * (w * j * w.adjoint()) * &u0;
        u0 = eig.exp_minus_i(seg.duration) * u0;
    }
    let mut h_bar = sum / C64::new(cycle_time, 0.0);
    // restore exact Hermiticity lost to round-off
    h_bar = (&h_bar + h_bar.adjoint()) * C64::new(0.5, 0.0);

    let frames: Vec<SpinFrame> = mean_field.iter().map(SpinFrame::along).collect();
    let rot: Vec<Matrix3<f64>> = frames.iter().map(SpinFrame::rotation).collect();
    let after = lab_terms(&h_bar, n);
    let before = lab_terms(&h_int.matrix, n);

    let single_spin_hz: Vec<Vector3<f64>> =
        after.single.iter().zip(&rot).map(|(c, r)| r * c).collect();
    let pairs: Vec<PairTensor> = after
        .pairs
        .iter()
        .map(|&(i, j, c)| PairTensor {
            i,
            j,
            lab_hz: c,
            frame_hz: rot[i] * c * rot[j].transpose(),
        })
        .collect();

    let suppression = before
        .pairs
        .iter()
        .zip(&after.pairs)
        .filter(|((_, _, b), _)| b.norm() > 0.0)
        .map(|((i, j, b), (_, _, a))| (format!("I{i}-I{j}"), (b.norm(), a.norm())))
        .collect();

    // drop terms below round-off relative to the input scale
    let floor = 1e-12 * scale / (2.0 * PI);
    let mut decomposition = Vec::new();
    let mut recon = CMatrix::zeros(d, d);
    if after.identity.abs() > floor {
        decomposition.push(("1".to_string(), after.identity));
        recon += CMatrix::identity(d, d) * C64::new(2.0 * PI * after.identity, 0.0);
    }
    for (i, c) in single_spin_hz.iter().enumerate() {
        for a in 0..3 {
            if c[a].abs() > floor {
                decomposition.push((format!("I{i}{}", frames[i].names[a]), c[a]));
                let axis = frames[i].axes[a];
                for (b, ax) in SpinAxis::CARTESIAN.iter().enumerate() {
                    add_product(
                        &mut recon,
                        C64::new(2.0 * PI * c[a] * axis[b], 0.0),
                        &[(i, *ax)],
                        n,
                    );
                }
            }
        }
    }
    for p in &pairs {
        for a in 0..3 {
            for b in 0..3 {
                let c = p.frame_hz[(a, b)];
                if c.abs() <= floor {
                    continue;
                }
                decomposition.push((
                    format!(
                        "I{}{}*I{}{}",
                        p.i, frames[p.i].names[a], p.j, frames[p.j].names[b]
                    ),
                    c,
                ));
                let (ea, eb) = (frames[p.i].axes[a], frames[p.j].axes[b]);
                for (x, ax) in SpinAxis::CARTESIAN.iter().enumerate() {
                    for (y, bx) in SpinAxis::CARTESIAN.iter().enumerate() {
                        let w = c * ea[x] * eb[y];
                        if w != 0.0 {
                            add_product(
                                &mut recon,
                                C64::new(2.0 * PI * w, 0.0),
                                &[(p.i, *ax), (p.j, *bx)],
                                n,
                            );
                        }
                    }
                }
            }
        }
    }
    let residual_norm_hz = (&h_bar - recon)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        / (2.0 * PI);

    Ok(EffectiveHamiltonianReport {
        h_bar: Operator {
            matrix: h_bar,
            label: "H_bar".into(),
        },
        rf_cycle: Operator {
            matrix: u0,
            label: "U_rf".into(),
        },
        cycle_time,
        n_repeats: seq.n_repeats,
        effective_fields_hz: mean_field,
        frames,
        identity_hz: after.identity,
        single_spin_hz,
        pairs,
        decomposition,
        residual_norm_hz,
        suppression,
        quadrature_change: worst_change,
    })
}

/// `(U_rf(t_c)·exp(−i·H̄·t_c))^n_repeats`, the propagator implied by the
/// zeroth-order average.
pub fn effective_propagator(report: &EffectiveHamiltonianReport) -> Result<Operator> {
    let step = &report.rf_cycle.matrix * propagator(&report.h_bar, report.cycle_time)?.matrix;
    Ok(Operator {
        matrix: matrix_power(&step, report.n_repeats as u64),
        label: "U_eff".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::sequences::{lee_goldburg, PulseSegment};
    use crate::spinsim::{dipolar_hamiltonian, DipolarForm};

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

    // closed form of (1/τ)∫₀^τ e^{iΔs} ds
    fn phi(x: f64) -> C64 {
        if x.abs() < 1e-12 {
            C64::new(1.0, 0.0)
        } else {
            (C64::new(0.0, x).exp() - 1.0) / C64::new(0.0, x)
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let lambda = DVector::from_vec(vec![0.0, 3.1e5, -7.7e5, 1.2e6]);
        let mut g = CMatrix::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                g[(r, c)] = C64::new((r + 2 * c) as f64, r as f64 - c as f64);
            }
        }
        let tau = 2.3e-5;
        let (j, _) = integrate_segment(&g, &lambda, tau, 1e-12 * tau, 1 << 16).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = g[(r, c)] * phi((lambda[r] - lambda[c]) * tau) * tau;
                assert!((j[(r, c)] - want).norm() < 1e-12 * tau * 20.0);
            }
        }
    }

    #[test]
    fn free_evolution_returns_input() {
        let model = chain(3);
        let h = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
        let seq = PulseSequence::new(vec![PulseSegment::free(1e-4)], 1).unwrap();
        let r = average_hamiltonian(&seq, &h, &model, &AhtOptions::default()).unwrap();
        assert!((&r.h_bar.matrix - &h.matrix)
            .iter()
            .all(|z| z.norm() <= 1e-6 * h.max_abs()));
        assert!((r.pair(0, 1).unwrap().lab_hz[(2, 2)] - 2.0 * 2950.805460443156).abs() < 1e-6);
        assert!(r.residual_norm_hz < 1e-9 * 2951.0);
    }

    #[test]
    fn lg_pair_is_decoupled() {
        let model = chain(2);
        let h = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
        let r = average_hamiltonian(
            &lee_goldburg(5e4, 1).unwrap(),
            &h,
            &model,
            &AhtOptions::default(),
        )
        .unwrap();
        assert!(r.max_pair_coefficient_hz() <= 1e-6 * 2951.0);
        for (_, f) in r.field_terms() {
            assert!((f / (5e4 * 1.5f64.sqrt()) - 1.0).abs() < 1e-9);
        }
        let (before, after) = r.suppression["I0-I1"];
        assert!(before > 1e3 && after < 1e-6 * before);
    }

    #[test]
    fn frames_are_orthonormal() {
        for f in [
            Vector3::new(1.0, 0.0, 0.5f64.sqrt()),
            Vector3::z(),
            Vector3::new(0.0, -2.0, 0.0),
        ] {
            let r = SpinFrame::along(&f).rotation();
            assert!((r * r.transpose() - Matrix3::identity()).amax() < 1e-14);
            assert!((r.determinant() - 1.0).abs() < 1e-14);
        }
    }
}
