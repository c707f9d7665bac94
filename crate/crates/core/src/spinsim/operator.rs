//! Dense spin-1/2 operators on the 2^n product space.
//!
//! Basis ordering: spin 0 is the most significant bit, bit value 0 is |↑⟩
//! (I_z = +1/2). Products of single-spin operators are applied directly on
//! basis states instead of through Kronecker chains.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Hard cap on cluster size for dense simulation (dimension 16384).
pub const MAX_SPINS: usize = 14;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpinAxis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl SpinAxis {
    pub const CARTESIAN: [SpinAxis; 3] = [SpinAxis::X, SpinAxis::Y, SpinAxis::Z];

    /// Action on a single basis state: returns the amplitude and whether the
    /// spin is flipped.
    #[inline]
    fn act(self, up: bool) -> (C64, bool) {
        match (self, up) {
            (SpinAxis::X, _) => (C64::new(0.5, 0.0), true),
            (SpinAxis::Y, true) => (C64::new(0.0, 0.5), true),
            (SpinAxis::Y, false) => (C64::new(0.0, -0.5), true),
            (SpinAxis::Z, true) => (C64::new(0.5, 0.0), false),
            (SpinAxis::Z, false) => (C64::new(-0.5, 0.0), false),
            (SpinAxis::Plus, true) | (SpinAxis::Minus, false) => (ZERO, false),
            (SpinAxis::Plus, false) | (SpinAxis::Minus, true) => (ONE, true),
        }
    }
}

impl FromStr for SpinAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(SpinAxis::X),
            "y" => Ok(SpinAxis::Y),
            "z" => Ok(SpinAxis::Z),
            "+" | "plus" => Ok(SpinAxis::Plus),
            "-" | "minus" => Ok(SpinAxis::Minus),
            _ => Err(Error::UnknownTag {
                kind: "spin axis",
                tag: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for SpinAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpinAxis::X => "x",
            SpinAxis::Y => "y",
            SpinAxis::Z => "z",
            SpinAxis::Plus => "+",
            SpinAxis::Minus => "-",
        })
    }
}

pub(crate) fn check_size(n: usize) -> Result<usize> {
    if n > MAX_SPINS {
        return Err(Error::TooManySpins { n, cap: MAX_SPINS });
    }
    Ok(1usize << n)
}

/// Maps basis state `col` through the product `factors` (rightmost applied
/// first). Returns `(amplitude, row)`.
#[inline]
fn product_action(col: usize, factors: &[(usize, SpinAxis)], n: usize) -> (C64, usize) {
    let mut b = col;
    let mut amp = ONE;
    for &(site, axis) in factors.iter().rev() {
        let bit = 1usize << (n - 1 - site);
        let (a, flip) = axis.act(b & bit == 0);
        amp *= a;
        if flip {
            b ^= bit;
        }
    }
    (amp, b)
}

/// `m += coeff · Π factors`.
pub(crate) fn add_product(m: &mut CMatrix, coeff: C64, factors: &[(usize, SpinAxis)], n: usize) {
    for col in 0..m.ncols() {
        let (amp, row) = product_action(col, factors, n);
        if amp != ZERO {
            m[(row, col)] += coeff * amp;
        }
    }
}

/// `Tr(Π factors · h)` in O(2^n).
pub(crate) fn trace_product(h: &CMatrix, factors: &[(usize, SpinAxis)], n: usize) -> C64 {
    let mut acc = ZERO;
    for col in 0..h.ncols() {
        let (amp, row) = product_action(col, factors, n);
        if amp != ZERO {
            acc += amp * h[(col, row)];
        }
    }
    acc
}

/// A dense operator on `n` spins with a descriptive label.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub matrix: CMatrix,
    pub label: String,
}

impl Operator {
    pub fn from_matrix(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        if !d.is_power_of_two() {
            return Err(Error::Domain(format!(
                "dimension {d} is not a power of two"
            )));
        }
        check_size(d.trailing_zeros() as usize)?;
        Ok(Operator {
            matrix,
            label: label.into(),
        })
    }

    pub fn zeros(n: usize) -> Self {
        let d = 1usize << n;
        Operator {
            matrix: CMatrix::zeros(d, d),
            label: "0".into(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let d = 1usize << n;
        Operator {
            matrix: CMatrix::identity(d, d),
            label: "1".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_spins(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Largest element modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |H − H†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian within `1e-12` of the largest element.
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= 1e-12 * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian(self.hermiticity_error()))
        }
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            matrix: self.matrix.adjoint(),
            label: format!("({})†", self.label),
        }
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        same_dim(self, other)?;
        Ok(Operator {
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
            label: format!("[{}, {}]", self.label, other.label),
        })
    }

    pub fn scaled(&self, factor: f64) -> Operator {
        Operator {
            matrix: &self.matrix * C64::new(factor, 0.0),
            label: self.label.clone(),
        }
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        same_dim(self, other)?;
        Ok(Operator {
            matrix: &self.matrix + &other.matrix,
            label: format!("{} + {}", self.label, other.label),
        })
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        same_dim(self, other)?;
        Ok(Operator {
            matrix: &self.matrix * &other.matrix,
            label: format!("{}·{}", self.label, other.label),
        })
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// CSV rows `row,col,re,im` for every nonzero element.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("row,col,re,im\n");
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let z = self.matrix[(r, c)];
                if z != ZERO {
                    let _ = writeln!(out, "{r},{c},{:e},{:e}", z.re, z.im);
                }
            }
        }
        out
    }
}

pub(crate) fn same_dim(a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Single-spin angular momentum component embedded in an `n`-spin space.
pub fn spin_operator(axis: SpinAxis, site: usize, n: usize) -> Result<Operator> {
    let d = check_size(n)?;
    if site >= n {
        return Err(Error::IndexOutOfRange { index: site, n });
    }
    let mut m = CMatrix::zeros(d, d);
    add_product(&mut m, ONE, &[(site, axis)], n);
    Ok(Operator {
        matrix: m,
        label: format!("I{site}{axis}"),
    })
}

/// Product operator `Π I_{site,axis}` on `n` spins.
pub fn product_operator(factors: &[(usize, SpinAxis)], n: usize) -> Result<Operator> {
    let d = check_size(n)?;
    if let Some(&(site, _)) = factors.iter().find(|(s, _)| *s >= n) {
        return Err(Error::IndexOutOfRange { index: site, n });
    }
    let mut m = CMatrix::zeros(d, d);
    add_product(&mut m, ONE, factors, n);
    let label = factors
        .iter()
        .map(|(s, a)| format!("I{s}{a}"))
        .collect::<Vec<_>>()
        .join("·");
    Ok(Operator { matrix: m, label })
}

/// `Σ_i I_{i,axis}` over the listed spins.
pub fn collective(axis: SpinAxis, spins: &[usize], n: usize) -> Result<Operator> {
    let d = check_size(n)?;
    let mut m = CMatrix::zeros(d, d);
    for &s in spins {
        if s >= n {
            return Err(Error::IndexOutOfRange { index: s, n });
        }
        add_product(&mut m, ONE, &[(s, axis)], n);
    }
    Ok(Operator {
        matrix: m,
        label: format!("ΣI{axis}"),
    })
}
