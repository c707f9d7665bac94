//! Exact and product-formula propagation, unitary fidelity and observables.

use nalgebra::{DMatrix, DVector};

use super::operator::{check_size, same_dim, CMatrix, Operator, C64, ONE};
use crate::error::{Error, Result};

/// Eigendecomposition `H = V·diag(λ)·V†` of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &Operator) -> Result<Self> {
        h.require_hermitian()?;
        let sym = (&h.matrix + h.matrix.adjoint()) * C64::new(0.5, 0.0);
        let e = sym.symmetric_eigen();
        Ok(HermitianEigen {
            values: e.eigenvalues,
            vectors: e.eigenvectors,
        })
    }

    /// `exp(−i·H·t)`.
    pub fn exp_minus_i(&self, t: f64) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..d {
            let phase = C64::from_polar(1.0, -self.values[k] * t);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= phase);
        }
        scaled * self.vectors.adjoint()
    }
}

/// `U = exp(−i·H·t)` through the Hermitian eigendecomposition.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    if !t.is_finite() {
        return Err(Error::Domain(format!(
            "evolution time must be finite, got {t}"
        )));
    }
    let eig = HermitianEigen::new(h)?;
    Ok(Operator {
        matrix: eig.exp_minus_i(t),
        label: format!("exp(-i·{}·t)", h.label),
    })
}

/// `u^k` by repeated squaring.
pub fn matrix_power(u: &CMatrix, mut k: u64) -> CMatrix {
    let d = u.nrows();
    let mut result = CMatrix::identity(d, d);
    let mut base = u.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Lie–Trotter (or Strang, when `symmetrized`) approximation of
/// `exp(−i·ΣH_k·t)`.
///
/// An empty term list yields the one-dimensional identity and a logged
/// warning.
pub fn trotter_propagator(
    terms: &[Operator],
    t: f64,
    n_steps: usize,
    symmetrized: bool,
) -> Result<Operator> {
    if n_steps == 0 {
        return Err(Error::validation("n_steps", "must be at least 1"));
    }
    let Some(first) = terms.first() else {
        log::warn!("trotter_propagator called with no terms; returning identity");
        return Ok(Operator::identity(0));
    };
    for h in terms {
        same_dim(first, h)?;
    }
    let dt = t / n_steps as f64;
    let eigs = terms
        .iter()
        .map(HermitianEigen::new)
        .collect::<Result<Vec<_>>>()?;
    let d = first.dim();
    let mut step = CMatrix::identity(d, d);
    if symmetrized && eigs.len() > 1 {
        let last = eigs.len() - 1;
        let halves: Vec<CMatrix> = eigs[..last]
            .iter()
            .map(|e| e.exp_minus_i(dt / 2.0))
            .collect();
        for h in &halves {
            step = h * step;
        }
        step = eigs[last].exp_minus_i(dt) * step;
        for h in halves.iter().rev() {
            step = h * step;
        }
    } else {
        for e in &eigs {
            step = e.exp_minus_i(dt) * step;
        }
    }
    Ok(Operator {
        matrix: matrix_power(&step, n_steps as u64),
        label: "trotter".into(),
    })
}

/// `|Tr(U†V)| / 2^n`, insensitive to global phase.
pub fn fidelity(u: &Operator, v: &Operator) -> Result<f64> {
    same_dim(u, v)?;
    let d = u.dim();
    let mut tr = C64::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            tr += u.matrix[(r, c)].conj() * v.matrix[(r, c)];
        }
    }
    Ok((tr.norm() / d as f64).min(1.0))
}

/// `max |U†U − 1|`.
pub fn unitarity_error(u: &Operator) -> f64 {
    let d = u.dim();
    let p = u.matrix.adjoint() * &u.matrix - CMatrix::identity(d, d);
    p.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Pure state vector or density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

impl State {
    /// `|↑↑…↑⟩`.
    pub fn all_up(n: usize) -> Result<Self> {
        let d = check_size(n)?;
        let mut v = DVector::zeros(d);
        v[0] = ONE;
        Ok(State::Pure(v))
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let d = check_size(n)?;
        Ok(State::Mixed(
            CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0),
        ))
    }

    pub fn dim(&self) -> usize {
        match self {
            State::Pure(v) => v.len(),
            State::Mixed(m) => m.nrows(),
        }
    }

    /// Vector norm or density-matrix trace.
    pub fn norm_or_trace(&self) -> f64 {
        match self {
            State::Pure(v) => v.norm(),
            State::Mixed(m) => m.trace().re,
        }
    }

    pub fn evolve(&self, u: &Operator) -> Result<State> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch(u.dim(), self.dim()));
        }
        Ok(match self {
            State::Pure(v) => State::Pure(&u.matrix * v),
            State::Mixed(m) => State::Mixed(&u.matrix * m * u.matrix.adjoint()),
        })
    }
}

/// `⟨A⟩` for a Hermitian observable; the imaginary part is discarded.
pub fn expectation(state: &State, a: &Operator) -> Result<f64> {
    if a.dim() != state.dim() {
        return Err(Error::DimensionMismatch(a.dim(), state.dim()));
    }
    let z = match state {
        State::Pure(v) => (v.adjoint() * &a.matrix * v)[(0, 0)],
        State::Mixed(m) => (m * &a.matrix).trace(),
    };
    Ok(z.re)
}
