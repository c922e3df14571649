//! Momentum-space picture: `Û_k`, its eigensystem, group velocities and the
//! commutant limit `W_k(ω)`.
//!
//! Momenta `k` are taken on the internal lattice, so `Û_k` is `2π`-periodic
//! in every coordinate; velocities and `D(ω)` use physical shifts.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::config::WalkConfig;
use crate::distribution::{state_distribution, PositionDistribution};
use crate::error::{Result, WalkError};
use crate::walk::PureState;

/// Eigensystems whose smallest eigenvalue separation falls below this are
/// treated as degenerate.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

const RESIDUAL_TOL: f64 = 1e-8;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `Û_k = diag(e^{−i k·(L v_j)}) C` at one internal-lattice momentum.
#[derive(Clone, Debug)]
pub struct MomentumMatrix {
    pub k: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

pub fn build_uk(cfg: &WalkConfig, k: &[f64]) -> Result<MomentumMatrix> {
    if k.len() != cfg.dim() {
        return Err(WalkError::DimensionMismatch { expected: cfg.dim(), found: k.len() });
    }
    let mut matrix = cfg.coin().clone();
    for (j, off) in cfg.offsets().iter().enumerate() {
        let phase: f64 = k.iter().zip(off).map(|(ki, &o)| ki * o as f64).sum();
        let z = Complex64::from_polar(1.0, -phase);
        for c in 0..matrix.ncols() {
            matrix[(j, c)] *= z;
        }
    }
    Ok(MomentumMatrix { k: k.to_vec(), matrix })
}

/// `D(ω) = diag(ω·v_j)` with physical shift vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalPhase(pub Vec<f64>);

impl DiagonalPhase {
    pub fn new(cfg: &WalkConfig, omega: &[f64]) -> Self {
        DiagonalPhase(
            cfg.shifts_f64()
                .iter()
                .map(|v| v.iter().zip(omega).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.0.len(),
            self.0.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn operator_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }
}

/// Eigen-decomposition of a unitary `Û_k`.
///
/// Bands are labelled by eigenvalue phase in `[0, 2π)`, ascending.
/// Eigenvectors are the columns of `vectors`, each scaled so its largest
/// component is real and positive.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub k: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    pub min_gap: f64,
    pub gap_tol: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.min_gap < self.gap_tol
    }

    pub fn eigenvector(&self, j: usize) -> DVector<Complex64> {
        self.vectors.column(j).into_owned()
    }

    /// `P_kj = ψ_j ψ_j*`.
    pub fn projection(&self, j: usize) -> DMatrix<Complex64> {
        let v = self.eigenvector(j);
        &v * v.adjoint()
    }

    /// `Σ_j λ_j P_kj`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let s = self.len();
        let mut m = DMatrix::zeros(s, s);
        for j in 0..s {
            m += self.projection(j) * self.eigenvalues[j];
        }
        m
    }

    fn require_distinct(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(WalkError::Degenerate { min_gap: self.min_gap })
        } else {
            Ok(())
        }
    }
}

fn phase_0_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Full eigendecomposition regardless of eigenvalue spacing.
///
/// The unitary is rotated so that `−1` is as far as possible from its
/// spectrum, then mapped through the Cayley transform
/// `H = i(I − V)(I + V)⁻¹`, which is Hermitian and sends the eigenvalue
/// `e^{iφ}` to `tan(φ/2)`. The map is injective, so `H` has exactly the
/// eigenvectors of `Û_k` and a Hermitian solver suffices.
pub fn decompose(um: &MomentumMatrix) -> Result<EigenSystem> {
    let u = &um.matrix;
    let s = u.nrows();
    let id = DMatrix::<Complex64>::identity(s, s);

    let candidates = 2 * s + 2;
    let mut best = (0.0, f64::NEG_INFINITY);
    for c in 0..candidates {
        let theta = 2.0 * PI * c as f64 / candidates as f64;
        let shifted = u + &id * Complex64::from_polar(1.0, -theta);
        let det = shifted.determinant().norm();
        if det > best.1 {
            best = (theta, det);
        }
    }
    let v = u * Complex64::from_polar(1.0, best.0);
    let inv = (&id + &v).try_inverse().ok_or(WalkError::NoConvergence)?;
    let h = (&id - &v) * inv * Complex64::new(0.0, 1.0);
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);

    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000).ok_or(WalkError::NoConvergence)?;

    let mut bands: Vec<(f64, Complex64, DVector<Complex64>)> = Vec::with_capacity(s);
    for j in 0..s {
        let mut vec = eig.eigenvectors.column(j).into_owned();
        let norm = vec.norm();
        vec /= Complex64::new(norm, 0.0);
        let pivot = vec
            .iter()
            .copied()
            .fold(zero(), |acc, z| if z.norm() > acc.norm() + 1e-12 { z } else { acc });
        if pivot.norm() > 0.0 {
            vec *= pivot.conj() / pivot.norm();
        }
        let rayleigh = (vec.adjoint() * u * &vec)[(0, 0)];
        let lambda = rayleigh / rayleigh.norm();
        let residual = (u * &vec - &vec * lambda).norm();
        if !residual.is_finite() || residual > RESIDUAL_TOL {
            return Err(WalkError::NoConvergence);
        }
        bands.push((phase_0_2pi(lambda), lambda, vec));
    }
    bands.sort_by(|a, b| a.0.total_cmp(&b.0));

    let eigenvalues: Vec<Complex64> = bands.iter().map(|b| b.1).collect();
    let mut vectors = DMatrix::zeros(s, s);
    for (j, b) in bands.iter().enumerate() {
        vectors.set_column(j, &b.2);
    }
    let mut min_gap = f64::INFINITY;
    for i in 0..s {
        for j in i + 1..s {
            min_gap = min_gap.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }
    Ok(EigenSystem { k: um.k.clone(), eigenvalues, vectors, min_gap, gap_tol: 0.0 })
}

/// Eigensystem with distinct eigenvalues, or [`WalkError::Degenerate`] when
/// the smallest separation is below `gap_tol`.
pub fn eigensystem(um: &MomentumMatrix, gap_tol: f64) -> Result<EigenSystem> {
    let mut es = decompose(um)?;
    es.gap_tol = gap_tol;
    es.require_distinct()?;
    Ok(es)
}

/// Group velocity `π(k, j) = i·conj(λ_j)∇λ_j` in physical units, evaluated
/// through the eigenvector weights `Σ_l |ψ_j(k)_l|² v_l`.
pub fn group_velocity(cfg: &WalkConfig, es: &EigenSystem, j: usize) -> Result<Vec<f64>> {
    es.require_distinct()?;
    Ok(velocity_from_weights(cfg, es, j))
}

fn velocity_from_weights(cfg: &WalkConfig, es: &EigenSystem, j: usize) -> Vec<f64> {
    let mut pi = vec![0.0; cfg.dim()];
    for (l, v) in cfg.shifts_f64().iter().enumerate() {
        let w = es.vectors[(l, j)].norm_sqr();
        for (p, x) in pi.iter_mut().zip(v) {
            *p += w * x;
        }
    }
    pi
}

/// All band velocities at one momentum.
pub fn band_velocities(cfg: &WalkConfig, es: &EigenSystem) -> Result<Vec<Vec<f64>>> {
    es.require_distinct()?;
    Ok((0..es.len()).map(|j| velocity_from_weights(cfg, es, j)).collect())
}

/// `ψ_j* Û_k* D(ω) Û_k ψ_j`; its real part is `ω·π(k, j)` and its imaginary
/// part should vanish.
pub fn velocity_quadratic_form(
    cfg: &WalkConfig,
    um: &MomentumMatrix,
    es: &EigenSystem,
    j: usize,
    omega: &[f64],
) -> Complex64 {
    let d = DiagonalPhase::new(cfg, omega).to_matrix();
    let psi = es.eigenvector(j);
    let u_psi = &um.matrix * &psi;
    (u_psi.adjoint() * d * u_psi)[(0, 0)]
}

/// `W_k(ω) = Σ_j (ω·π(k, j)) P_kj`.
pub fn w_matrix_spectral(cfg: &WalkConfig, es: &EigenSystem, omega: &[f64]) -> Result<DMatrix<Complex64>> {
    let velocities = band_velocities(cfg, es)?;
    let s = es.len();
    let mut w = DMatrix::zeros(s, s);
    for (j, pi) in velocities.iter().enumerate() {
        let a: f64 = pi.iter().zip(omega).map(|(p, o)| p * o).sum();
        w += es.projection(j) * Complex64::new(a, 0.0);
    }
    Ok(w)
}

/// Cesàro average `(1/n) Σ_{j<n} Û_k^{*j} (C* D(ω) C) Û_k^j`.
pub fn w_matrix_ergodic(cfg: &WalkConfig, k: &[f64], omega: &[f64], n_avg: usize) -> Result<DMatrix<Complex64>> {
    if n_avg == 0 {
        return Err(WalkError::Invalid("ergodic average needs at least one term".into()));
    }
    let u = build_uk(cfg, k)?.matrix;
    let u_adj = u.adjoint();
    let c = cfg.coin();
    let mut term = c.adjoint() * DiagonalPhase::new(cfg, omega).to_matrix() * c;
    let mut sum = term.clone();
    for _ in 1..n_avg {
        term = &u_adj * term * &u;
        sum += &term;
    }
    Ok(sum / Complex64::new(n_avg as f64, 0.0))
}

/// Discrete Fourier transform `(2π)^{−d/2} Σ_m ψ(m) e^{−i k·m}` over internal keys.
pub fn fourier_state(state: &PureState, k: &[f64]) -> Vec<Complex64> {
    let norm = (2.0 * PI).powf(-(state.dim() as f64) / 2.0);
    let mut out = vec![zero(); state.coin_size()];
    for (pos, amp) in state.iter() {
        let phase: f64 = pos.iter().zip(k).map(|(&m, ki)| m as f64 * ki).sum();
        let z = Complex64::from_polar(norm, -phase);
        for (o, a) in out.iter_mut().zip(amp) {
            *o += a * z;
        }
    }
    out
}

/// In-place multidimensional FFT over a row-major `n^d` array.
fn fft_nd(data: &mut [Complex64], n: usize, d: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let mut line = vec![zero(); n];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + offset + i * stride];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[base + offset + i * stride] = *v;
                }
            }
        }
    }
}

/// Evolves `state` by `n` steps on a momentum grid of `grid_size` points per
/// axis (pointwise `Û_k^n`) and returns its position distribution.
///
/// Requires `grid_size > 2·n·max_j ‖L v_j‖ + diam(support)` so that the
/// periodic grid never wraps the evolved support onto itself.
pub fn evolve_momentum(
    state: &PureState,
    cfg: &WalkConfig,
    n: usize,
    grid_size: usize,
) -> Result<PositionDistribution> {
    let d = cfg.dim();
    let s = cfg.coin_size();
    if state.dim() != d || state.coin_size() != s {
        return Err(WalkError::DimensionMismatch { expected: s, found: state.coin_size() });
    }
    if state.is_empty() {
        return Err(WalkError::Invalid("empty state".into()));
    }
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    for (pos, _) in state.iter() {
        for i in 0..d {
            lo[i] = lo[i].min(pos[i]);
            hi[i] = hi[i].max(pos[i]);
        }
    }
    let diameter = (0..d).map(|i| hi[i] - lo[i]).max().unwrap_or(0) as f64;
    let required = 2.0 * n as f64 * cfg.max_offset_norm() + diameter;
    if (grid_size as f64) <= required {
        return Err(WalkError::GridTooSmall { grid: grid_size, required });
    }

    // Lowest reachable key on each axis after n steps.
    let window: Vec<i64> = (0..d)
        .map(|i| lo[i] + n as i64 * cfg.offsets().iter().map(|o| o[i]).min().unwrap_or(0))
        .collect();
    let g = grid_size as i64;
    let total = grid_size.pow(d as u32);
    let flat_index = |pos: &[i64]| -> usize {
        pos.iter().fold(0usize, |acc, &m| acc * grid_size + m.rem_euclid(g) as usize)
    };

    let mut fields = vec![vec![zero(); total]; s];
    for (pos, amp) in state.iter() {
        let idx = flat_index(pos);
        for (field, a) in fields.iter_mut().zip(amp) {
            field[idx] += a;
        }
    }
    for field in &mut fields {
        fft_nd(field, grid_size, d, false);
    }

    let mut k = vec![0.0; d];
    let mut psi = DVector::from_element(s, zero());
    for idx in 0..total {
        let mut rest = idx;
        for i in (0..d).rev() {
            k[i] = 2.0 * PI * (rest % grid_size) as f64 / grid_size as f64;
            rest /= grid_size;
        }
        let u = build_uk(cfg, &k)?.matrix;
        let un = matrix_power(&u, n);
        for j in 0..s {
            psi[j] = fields[j][idx];
        }
        let out = un * &psi;
        for j in 0..s {
            fields[j][idx] = out[j];
        }
    }
    let inv_total = 1.0 / total as f64;
    for field in &mut fields {
        fft_nd(field, grid_size, d, true);
        for z in field.iter_mut() {
            *z *= inv_total;
        }
    }

    let mut entries = Vec::with_capacity(total);
    for idx in 0..total {
        let mut pos = vec![0i64; d];
        let mut rest = idx;
        for i in (0..d).rev() {
            let q = (rest % grid_size) as i64;
            rest /= grid_size;
            pos[i] = window[i] + (q - window[i]).rem_euclid(g);
        }
        entries.push((pos, fields.iter().map(|f| f[idx]).collect()));
    }
    let evolved = PureState::from_entries(d, s, entries)?;
    Ok(state_distribution(&evolved, cfg))
}

fn matrix_power(m: &DMatrix<Complex64>, mut n: usize) -> DMatrix<Complex64> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        n >>= 1;
    }
    result
}

/// `count` momenta evenly spaced from `from` to `to`, both ends included.
pub fn k_path(from: &[f64], to: &[f64], count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            from.iter().zip(to).map(|(a, b)| a + (b - a) * t).collect()
        })
        .collect()
}

/// Writes the band structure along `path`: one row per (k, band).
/// Degenerate momenta keep their eigenvalues and `min_gap` but leave the
/// velocity columns empty.
pub fn write_spectrum_csv<W: Write>(
    cfg: &WalkConfig,
    path: &[Vec<f64>],
    gap_tol: f64,
    out: &mut W,
    comment: Option<&str>,
) -> std::result::Result<(), SpectrumExportError> {
    let d = cfg.dim();
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    let mut header: Vec<String> = (1..=d).map(|i| format!("k_{i}")).collect();
    header.extend(["j".into(), "re_lambda".into(), "im_lambda".into()]);
    header.extend((1..=d).map(|i| format!("pi_{i}")));
    header.push("min_gap".into());
    writeln!(out, "{}", header.join(","))?;
    for k in path {
        let mut es = decompose(&build_uk(cfg, k)?)?;
        es.gap_tol = gap_tol;
        let velocities = band_velocities(cfg, &es).ok();
        for j in 0..es.len() {
            let mut row: Vec<String> = k.iter().map(|x| format!("{x}")).collect();
            row.push(format!("{}", j + 1));
            row.push(format!("{}", es.eigenvalues[j].re));
            row.push(format!("{}", es.eigenvalues[j].im));
            match &velocities {
                Some(v) => row.extend(v[j].iter().map(|x| format!("{x}"))),
                None => row.extend(std::iter::repeat_n(String::new(), d)),
            }
            row.push(format!("{}", es.min_gap));
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum SpectrumExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Walk(#[from] WalkError),
}
