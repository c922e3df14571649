//! The weak limit of the rescaled position distribution.
//!
//! The limit is the push-forward of `tr[ρ̂(k,k) P_kj] dk` on
//! `torus × bands` under the group-velocity map `(k, j) ↦ π(k, j)`. It is
//! represented by midpoint quadrature: one atom per grid cell and band.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::config::WalkConfig;
use crate::distribution::PositionDistribution;
use crate::error::{Result, WalkError};
use crate::spectral::{band_velocities, build_uk, eigensystem, fourier_state, DEFAULT_GAP_TOL};
use crate::walk::Ensemble;

/// Default tolerance on the quadrature mass `|raw_total − 1|`.
pub const MASS_TOL: f64 = 1e-3;

/// Re-offset attempts when a grid point lands on a degeneracy.
pub const REOFFSET_ATTEMPTS: usize = 3;

/// Redraws allowed per sample before giving up on a degenerate momentum.
pub const SAMPLE_RETRIES: usize = 100;

/// Grid points per axis used when none is given: 4096 in 1d, 256 above.
pub fn default_grid_points(dim: usize) -> usize {
    if dim == 1 {
        4096
    } else {
        256
    }
}

/// Offset uniform grid on `[−π, π)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct KGrid {
    dim: usize,
    points_per_axis: usize,
    offset: Vec<f64>,
}

impl KGrid {
    /// Grid whose points sit `0.5 + 1/(2N)` cells into each cell, which keeps
    /// them off `k = 0` and `k = ±π`.
    pub fn new(dim: usize, points_per_axis: usize) -> Self {
        let base = 0.5 + 0.5 / points_per_axis as f64;
        KGrid { dim, points_per_axis, offset: vec![base; dim] }
    }

    pub fn with_offset(dim: usize, points_per_axis: usize, offset: Vec<f64>) -> Self {
        KGrid { dim, points_per_axis, offset }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        (2.0 * PI / self.points_per_axis as f64).powi(self.dim as i32)
    }

    /// The grid point with flat index `idx` (first axis most significant).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let h = 2.0 * PI / self.points_per_axis as f64;
        let mut k = vec![0.0; self.dim];
        let mut rest = idx;
        for i in (0..self.dim).rev() {
            let q = rest % self.points_per_axis;
            rest /= self.points_per_axis;
            k[i] = -PI + (q as f64 + self.offset[i]) * h;
        }
        k
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Same resolution, offset moved by an irrational fraction of a cell.
    fn reoffset(&self, attempt: usize) -> Self {
        let golden = 0.381_966_011_250_105_1;
        let offset = self.offset.iter().map(|o| (o + attempt as f64 * golden).fract()).collect();
        KGrid { offset, ..self.clone() }
    }
}

/// Weighted point cloud approximating the limit law, in physical units.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitMeasure {
    dim: usize,
    velocities: Vec<f64>,
    masses: Vec<f64>,
    raw_total: f64,
    excluded: usize,
    grid: Option<KGrid>,
}

impl LimitMeasure {
    /// Builds a measure from explicit atoms; `raw_total` is their mass sum.
    pub fn from_atoms(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Self {
        let mut velocities = Vec::with_capacity(atoms.len() * dim);
        let mut masses = Vec::with_capacity(atoms.len());
        for (v, m) in atoms {
            velocities.extend(v);
            masses.push(m);
        }
        let raw_total = masses.iter().sum();
        LimitMeasure { dim, velocities, masses, raw_total, excluded: 0, grid: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Quadrature mass before normalization.
    pub fn raw_total(&self) -> f64 {
        self.raw_total
    }

    /// Grid points dropped because `Û_k` was degenerate there.
    pub fn excluded_points(&self) -> usize {
        self.excluded
    }

    /// The grid actually used, after any re-offsetting.
    pub fn grid(&self) -> Option<&KGrid> {
        self.grid.as_ref()
    }

    pub fn velocity(&self, idx: usize) -> &[f64] {
        &self.velocities[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.len()).map(move |i| (self.velocity(i), self.masses[i]))
    }

    pub fn atoms_1d(&self) -> Result<Vec<(f64, f64)>> {
        if self.dim != 1 {
            return Err(WalkError::DimensionMismatch { expected: 1, found: self.dim });
        }
        Ok(self.atoms().map(|(v, m)| (v[0], m)).collect())
    }

    /// Masses divided by their sum; `raw_total` is left untouched.
    pub fn normalized(&self) -> Self {
        let total = self.total_mass();
        let mut out = self.clone();
        if total > 0.0 {
            for m in &mut out.masses {
                *m /= total;
            }
        }
        out
    }

    /// Atoms with bitwise-identical velocities combined, zero-mass atoms
    /// dropped, sorted by velocity and normalized. Merging uses exact
    /// equality only.
    pub fn merged_exact(&self) -> Self {
        let mut atoms: Vec<(Vec<f64>, f64)> = self
            .atoms()
            .filter(|(_, m)| *m != 0.0)
            .map(|(v, m)| (v.to_vec(), m))
            .collect();
        atoms.sort_by(|a, b| {
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut merged: Vec<(Vec<f64>, f64)> = Vec::with_capacity(atoms.len());
        for (v, m) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += m,
                _ => merged.push((v, m)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        for a in &mut merged {
            a.1 /= total;
        }
        let mut out = LimitMeasure::from_atoms(self.dim, merged);
        out.raw_total = self.raw_total;
        out.excluded = self.excluded;
        out.grid = self.grid.clone();
        out
    }

    pub fn write_csv<W: Write>(&self, out: &mut W, comment: Option<&str>) -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("v_{i}")).collect();
        header.push("mass".into());
        writeln!(out, "{}", header.join(","))?;
        for (v, m) in self.atoms() {
            let mut row: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            row.push(format!("{m}"));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Quadrature limit measure with the default mass tolerance.
pub fn limit_measure(cfg: &WalkConfig, ens: &Ensemble, grid: &KGrid) -> Result<LimitMeasure> {
    limit_measure_with_tol(cfg, ens, grid, MASS_TOL)
}

/// Quadrature limit measure: atom `(π(k, j), Σ_i w_i |⟨ψ_j(k), ψ̂_i(k)⟩|² ΔV)`
/// for every grid point `k` and band `j`.
///
/// If any grid point is degenerate the grid is re-offset, up to
/// [`REOFFSET_ATTEMPTS`] times; remaining degenerate points are dropped and
/// show up as a deficit in `raw_total`. Fails when that deficit exceeds
/// `10·tol`.
pub fn limit_measure_with_tol(
    cfg: &WalkConfig,
    ens: &Ensemble,
    grid: &KGrid,
    tol: f64,
) -> Result<LimitMeasure> {
    if grid.dim() != cfg.dim() || ens.dim() != cfg.dim() {
        return Err(WalkError::DimensionMismatch { expected: cfg.dim(), found: grid.dim() });
    }
    if ens.coin_size() != cfg.coin_size() {
        return Err(WalkError::DimensionMismatch {
            expected: cfg.coin_size(),
            found: ens.coin_size(),
        });
    }
    let mut attempt = 0;
    let measure = loop {
        let candidate = quadrature(cfg, ens, &grid.reoffset(attempt))?;
        if candidate.excluded == 0 || attempt == REOFFSET_ATTEMPTS {
            break candidate;
        }
        attempt += 1;
    };
    if (measure.raw_total - 1.0).abs() > 10.0 * tol {
        return Err(WalkError::MassDeficit { raw_total: measure.raw_total, limit: 10.0 * tol });
    }
    Ok(measure)
}

fn quadrature(cfg: &WalkConfig, ens: &Ensemble, grid: &KGrid) -> Result<LimitMeasure> {
    let d = cfg.dim();
    let s = cfg.coin_size();
    let cell = grid.cell_volume();
    let mut velocities = Vec::with_capacity(grid.len() * s * d);
    let mut masses = Vec::with_capacity(grid.len() * s);
    let mut excluded = 0;
    let mut transforms: Vec<Vec<Complex64>> = Vec::with_capacity(ens.members().len());
    for k in grid.points() {
        let es = match eigensystem(&build_uk(cfg, &k)?, DEFAULT_GAP_TOL) {
            Ok(es) => es,
            Err(WalkError::Degenerate { .. }) => {
                excluded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let bands = band_velocities(cfg, &es)?;
        transforms.clear();
        transforms.extend(ens.members().iter().map(|(_, st)| fourier_state(st, &k)));
        for (j, pi) in bands.into_iter().enumerate() {
            let mut mass = 0.0;
            for ((w, _), phi) in ens.members().iter().zip(&transforms) {
                let mut overlap = Complex64::new(0.0, 0.0);
                for (l, z) in phi.iter().enumerate() {
                    overlap += es.vectors[(l, j)].conj() * z;
                }
                mass += w * overlap.norm_sqr();
            }
            velocities.extend(pi);
            masses.push(mass * cell);
        }
    }
    let raw_total = masses.iter().sum();
    Ok(LimitMeasure { dim: d, velocities, masses, raw_total, excluded, grid: Some(grid.clone()) })
}

/// `Σ_atoms mass · e^{i ω·v}`.
pub fn limit_cf(lm: &LimitMeasure, omega: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (v, m) in lm.atoms() {
        let phase: f64 = v.iter().zip(omega).map(|(a, b)| a * b).sum();
        acc += Complex64::from_polar(m, phase);
    }
    acc
}

/// `Σ_m mass(m) · e^{i ω·m/(L n)}` of a rescaled distribution.
pub fn empirical_cf(dist: &PositionDistribution, omega: &[f64]) -> Result<Complex64> {
    if !dist.is_rescaled() {
        return Err(WalkError::NotRescaled);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, m) in dist.atoms() {
        let phase: f64 = x.iter().zip(omega).map(|(a, b)| a * b).sum();
        acc += Complex64::from_polar(m, phase);
    }
    Ok(acc)
}

/// Draws from the limit law of a walk started at the origin with the
/// maximally mixed coin: `π(Y, Z)` with `Y` uniform on the torus and `Z`
/// uniform on the bands.
///
/// The generator is ChaCha20 seeded from `seed`; each draw consumes the `d`
/// momentum coordinates first, then the band index.
pub fn sample_limit(cfg: &WalkConfig, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(WalkError::Invalid("sample count must be positive".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = cfg.dim();
    let s = cfg.coin_size();
    let mut samples = Vec::with_capacity(count);
    let mut k = vec![0.0; d];
    for _ in 0..count {
        let mut drawn = None;
        for _ in 0..=SAMPLE_RETRIES {
            for ki in k.iter_mut() {
                *ki = -PI + 2.0 * PI * rng.random::<f64>();
            }
            let j = rng.random_range(0..s);
            match eigensystem(&build_uk(cfg, &k)?, DEFAULT_GAP_TOL) {
                Ok(es) => {
                    drawn = Some(crate::spectral::group_velocity(cfg, &es, j)?);
                    break;
                }
                Err(WalkError::Degenerate { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        samples.push(drawn.ok_or(WalkError::SamplingRetries(SAMPLE_RETRIES))?);
    }
    Ok(samples)
}

/// Inverse-CDF sampling from the (normalized) quadrature atoms.
pub fn sample_measure(lm: &LimitMeasure, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(WalkError::Invalid("sample count must be positive".into()));
    }
    let total = lm.total_mass();
    if lm.is_empty() || !(total > 0.0) {
        return Err(WalkError::Invalid("limit measure carries no mass".into()));
    }
    let mut cumulative = Vec::with_capacity(lm.len());
    let mut acc = 0.0;
    for m in lm.masses() {
        acc += m / total;
        cumulative.push(acc);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let idx = cumulative.partition_point(|&c| c <= u).min(lm.len() - 1);
            lm.velocity(idx).to_vec()
        })
        .collect())
}

/// Writes one velocity vector per row under a `v_1..v_d` header.
pub fn write_samples_csv<W: Write>(
    samples: &[Vec<f64>],
    dim: usize,
    out: &mut W,
    comment: Option<&str>,
) -> io::Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    let header: Vec<String> = (1..=dim).map(|i| format!("v_{i}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for v in samples {
        let row: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
