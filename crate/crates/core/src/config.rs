//! Walk configuration: coin, shift vectors and the integer lattice embedding.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, WalkError};
use crate::rational::{Rational, RationalVec};

/// Tolerance on `‖C*C − I‖_max` for a coin to count as unitary.
pub const UNITARY_TOL: f64 = 1e-12;

/// A coined walk `U = T (I ⊗ C)` on `ℝ^d` with rational shifts.
///
/// Positions live on the integer lattice obtained by multiplying physical
/// coordinates by `scale`, the least common denominator of all shift
/// coordinates. `offsets[j]` is the integer displacement of coin slot `j`.
#[derive(Clone, Debug)]
pub struct WalkConfig {
    dim: usize,
    shifts: Vec<RationalVec>,
    coin: DMatrix<Complex64>,
    scale: i64,
    offsets: Vec<Vec<i64>>,
}

impl WalkConfig {
    /// Builds and validates a configuration.
    pub fn new(dim: usize, shifts: Vec<RationalVec>, coin: DMatrix<Complex64>) -> Result<Self> {
        let cfg = Self::new_unchecked(dim, shifts, coin);
        let violations = validate_config(&cfg);
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(WalkError::InvalidConfig(violations))
        }
    }

    /// Builds a configuration without checking it; see [`validate_config`].
    pub fn new_unchecked(dim: usize, shifts: Vec<RationalVec>, coin: DMatrix<Complex64>) -> Self {
        let scale = shifts
            .iter()
            .fold(1, |acc, v| crate::rational::lcm(acc, v.common_denominator()));
        let offsets = shifts.iter().map(|v| v.scaled(scale)).collect();
        WalkConfig {
            dim,
            shifts,
            coin,
            scale,
            offsets,
        }
    }

    /// Hadamard walk on ℤ: shifts `(+1, −1)`.
    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let coin = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
        Self::new_unchecked(
            1,
            vec![RationalVec::from_ints(&[1]), RationalVec::from_ints(&[-1])],
            coin,
        )
    }

    /// Shifts `±e_1, …, ±e_d` (in that order) with the Grover coin `2/s·J − I`.
    pub fn grover(dim: usize) -> Self {
        let s = 2 * dim;
        let mut shifts = Vec::with_capacity(s);
        for axis in 0..dim {
            for sign in [1, -1] {
                let mut e = vec![0; dim];
                e[axis] = sign;
                shifts.push(RationalVec::from_ints(&e));
            }
        }
        let coin = DMatrix::from_fn(s, s, |i, j| {
            let diag = if i == j { 1.0 } else { 0.0 };
            Complex64::new(2.0 / s as f64 - diag, 0.0)
        });
        Self::new_unchecked(dim, shifts, coin)
    }

    /// Identity coin: every coin slot moves ballistically along its shift.
    pub fn ballistic(shifts: Vec<RationalVec>) -> Self {
        let dim = shifts.first().map_or(1, RationalVec::dim);
        let s = shifts.len();
        Self::new_unchecked(dim, shifts, DMatrix::identity(s, s))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coin_size(&self) -> usize {
        self.coin.nrows()
    }

    pub fn shifts(&self) -> &[RationalVec] {
        &self.shifts
    }

    pub fn coin(&self) -> &DMatrix<Complex64> {
        &self.coin
    }

    /// Least common denominator `L` of all shift coordinates.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// Integer lattice displacement `L·v_j` of each coin slot.
    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    /// Physical shift vectors as floats.
    pub fn shifts_f64(&self) -> Vec<Vec<f64>> {
        self.shifts.iter().map(RationalVec::to_f64).collect()
    }

    /// Largest Euclidean length of an integer offset.
    pub fn max_offset_norm(&self) -> f64 {
        self.offsets
            .iter()
            .map(|o| o.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Per-axis `[min_j v_{j,i}, max_j v_{j,i}]` of the physical shifts.
    pub fn shift_bounds(&self) -> Vec<(f64, f64)> {
        let shifts = self.shifts_f64();
        (0..self.dim)
            .map(|i| {
                shifts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v[i]), hi.max(v[i]))
                })
            })
            .collect()
    }
}

/// Lists everything wrong with `cfg`; an empty list means it is usable.
pub fn validate_config(cfg: &WalkConfig) -> Vec<String> {
    let mut violations = Vec::new();
    let s = cfg.coin.nrows();
    if cfg.dim == 0 {
        violations.push("dimension must be positive".to_string());
    }
    if s == 0 {
        violations.push("coin size must be positive".to_string());
    }
    if cfg.coin.ncols() != s {
        violations.push("coin not square".to_string());
    }
    if cfg.shifts.len() != s {
        violations.push("shift count mismatch".to_string());
    }
    if cfg.shifts.iter().any(|v| v.dim() != cfg.dim) {
        violations.push("shift dimension mismatch".to_string());
    }
    if cfg.coin.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        violations.push("coin has non-finite entries".to_string());
    } else if cfg.coin.ncols() == s && unitarity_defect(&cfg.coin) > UNITARY_TOL {
        violations.push("coin not unitary".to_string());
    }
    violations
}

/// `‖M*M − I‖_max`.
pub fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

/// Convenience for building shift lists from `(num, den)` pairs.
pub fn rational_shift(coords: &[(i64, i64)]) -> Result<RationalVec> {
    coords
        .iter()
        .map(|&(n, d)| Rational::new(n, d))
        .collect::<Result<Vec<_>>>()
        .map(RationalVec::new)
}
