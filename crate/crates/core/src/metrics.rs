//! Distances between rescaled walk distributions and the limit measure.

use std::io::{self, Write};

use crate::config::WalkConfig;
use crate::distribution::{position_distribution, rescale, PositionDistribution};
use crate::error::{Result, WalkError};
use crate::limit::{empirical_cf, limit_cf, limit_measure, KGrid, LimitMeasure};
use crate::walk::Ensemble;

/// Allowed deviation of an input measure's total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Kolmogorov distance `sup_x |F_a(x) − F_b(x)|` between two atomic
/// probability measures on ℝ given as `(location, mass)` pairs.
///
/// Both CDFs are right-continuous step functions that only jump at atoms,
/// so the supremum is attained at one of the merged atom locations.
pub fn ks_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    for atoms in [a, b] {
        let total: f64 = atoms.iter().map(|x| x.1).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL || atoms.iter().any(|x| x.1 < 0.0) {
            return Err(WalkError::Unnormalized(total));
        }
    }
    let mut merged: Vec<(f64, f64, bool)> = a
        .iter()
        .map(|&(x, m)| (x, m, true))
        .chain(b.iter().map(|&(x, m)| (x, m, false)))
        .collect();
    merged.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut fa, mut fb) = (0.0, 0.0);
    let mut sup: f64 = 0.0;
    let mut i = 0;
    while i < merged.len() {
        let x = merged[i].0;
        while i < merged.len() && merged[i].0 == x {
            if merged[i].2 {
                fa += merged[i].1;
            } else {
                fb += merged[i].1;
            }
            i += 1;
        }
        sup = sup.max((fa - fb).abs());
    }
    Ok(sup)
}

/// Per-axis `(min, max, step)` used when no frequency grid is given.
pub fn default_omega_range(dim: usize) -> (f64, f64, f64) {
    if dim == 1 {
        (-5.0, 5.0, 0.25)
    } else {
        (-3.0, 3.0, 0.5)
    }
}

/// Cartesian grid of frequencies from per-axis `(min, max, step)` ranges.
pub fn omega_grid(ranges: &[(f64, f64, f64)]) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = ranges
        .iter()
        .map(|&(lo, hi, step)| {
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| lo + i as f64 * step).collect()
        })
        .collect();
    let mut grid = vec![Vec::new()];
    for axis in &axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                axis.iter().map(move |&w| {
                    let mut p = prefix.clone();
                    p.push(w);
                    p
                })
            })
            .collect();
    }
    grid
}

/// `max_ω |φ_emp(ω) − φ_lim(ω)|` over a finite frequency grid.
///
/// The limit measure is normalized before comparison.
pub fn cf_sup_distance(dist: &PositionDistribution, lm: &LimitMeasure, omegas: &[Vec<f64>]) -> Result<f64> {
    let lm = lm.normalized();
    let mut sup: f64 = 0.0;
    for w in omegas {
        let gap = (empirical_cf(dist, w)? - limit_cf(&lm, w)).norm();
        sup = sup.max(gap);
    }
    Ok(sup)
}

/// First-moment difference (empirical minus limit) and the Frobenius norm
/// of the second raw moment difference.
pub fn moment_errors(dist: &PositionDistribution, lm: &LimitMeasure) -> Result<(Vec<f64>, f64)> {
    let d = dist.dim();
    if lm.dim() != d {
        return Err(WalkError::DimensionMismatch { expected: d, found: lm.dim() });
    }
    let lm = lm.normalized();
    let mut mean = vec![0.0; d];
    let mut second = vec![0.0; d * d];
    for (x, m) in dist.atoms() {
        accumulate_moments(&mut mean, &mut second, &x, m);
    }
    for (v, m) in lm.atoms() {
        accumulate_moments(&mut mean, &mut second, v, -m);
    }
    let m2 = second.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok((mean, m2))
}

fn accumulate_moments(mean: &mut [f64], second: &mut [f64], x: &[f64], m: f64) {
    let d = mean.len();
    for i in 0..d {
        mean[i] += m * x[i];
        for j in 0..d {
            second[i * d + j] += m * x[i] * x[j];
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    /// Only computed in one dimension.
    pub ks: Option<f64>,
    pub cf_sup: f64,
    pub mean_error: Vec<f64>,
    pub second_moment_error: f64,
}

impl ConvergenceRow {
    pub fn mean_error_norm(&self) -> f64 {
        self.mean_error.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Quadrature mass of the limit measure before normalization.
    pub raw_total: f64,
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, out: &mut W, comment: Option<&str>) -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "n,ks,cf_sup,mean_err,m2_err")?;
        for r in &self.rows {
            let ks = r.ks.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                ks,
                r.cf_sup,
                r.mean_error_norm(),
                r.second_moment_error
            )?;
        }
        Ok(())
    }
}

/// Compares the rescaled distribution after each `n` in `n_list` with the
/// quadrature limit measure on `grid`.
pub fn convergence_series(
    cfg: &WalkConfig,
    ens: &Ensemble,
    n_list: &[u64],
    grid: &KGrid,
    omegas: &[Vec<f64>],
) -> Result<ConvergenceReport> {
    let lm = limit_measure(cfg, ens, grid)?;
    convergence_against(cfg, ens, n_list, &lm, omegas)
}

/// [`convergence_series`] against an already computed limit measure.
pub fn convergence_against(
    cfg: &WalkConfig,
    ens: &Ensemble,
    n_list: &[u64],
    lm: &LimitMeasure,
    omegas: &[Vec<f64>],
) -> Result<ConvergenceReport> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(WalkError::Invalid("n list must be positive and strictly increasing".into()));
    }
    let normalized = lm.normalized();
    let limit_atoms = if cfg.dim() == 1 { Some(normalized.atoms_1d()?) } else { None };
    let mut state = ens.clone();
    let mut done = 0u64;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        state = state.evolve(cfg, (n - done) as usize)?;
        done = n;
        let dist = rescale(&position_distribution(&state, cfg), n)?;
        let ks = match &limit_atoms {
            Some(atoms) => Some(ks_distance(&dist.atoms_1d()?, atoms)?),
            None => None,
        };
        let cf_sup = cf_sup_distance(&dist, &normalized, omegas)?;
        let (mean_error, second_moment_error) = moment_errors(&dist, &normalized)?;
        rows.push(ConvergenceRow { n, ks, cf_sup, mean_error, second_moment_error });
    }
    Ok(ConvergenceReport { rows, raw_total: lm.raw_total() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::RationalVec;
    use crate::walk::PureState;
    use proptest::prelude::*;

    #[test]
    fn ks_examples() {
        let a = [(-1.0, 0.5), (1.0, 0.5)];
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_distance(&[(0.0, 1.0)], &[(1.0, 1.0)]).unwrap(), 1.0);
        let b = [(-0.9, 0.5), (0.9, 0.5)];
        assert!((ks_distance(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert!(ks_distance(&[(0.0, 0.5)], &a).is_err());
    }

    #[test]
    fn ks_handles_duplicate_locations() {
        let a = [(0.0, 0.25), (0.0, 0.25), (1.0, 0.5)];
        let b = [(0.0, 0.5), (1.0, 0.5)];
        assert_eq!(ks_distance(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn omega_grid_contains_zero() {
        let g = omega_grid(&[(-5.0, 5.0, 0.25)]);
        assert_eq!(g.len(), 41);
        assert!(g.contains(&vec![0.0]));
        let g2 = omega_grid(&[(-3.0, 3.0, 0.5), (-3.0, 3.0, 0.5)]);
        assert_eq!(g2.len(), 169);
        assert!(g2.contains(&vec![0.0, 0.0]));
    }

    #[test]
    fn ballistic_series_is_exact() {
        let cfg = WalkConfig::ballistic(vec![RationalVec::from_ints(&[1]), RationalVec::from_ints(&[-1])]);
        let ens = Ensemble::pure(PureState::basis(1, 2, 0)).unwrap();
        let report =
            convergence_series(&cfg, &ens, &[1, 10, 100], &KGrid::new(1, 512), &omega_grid(&[(-5.0, 5.0, 0.25)]))
                .unwrap();
        for r in &report.rows {
            assert!(r.ks.unwrap() <= 1e-12);
            assert!(r.cf_sup <= 1e-12);
            assert!(r.mean_error_norm() <= 1e-12 && r.second_moment_error <= 1e-12);
        }
        let mut buf = Vec::new();
        report.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("n,ks,cf_sup,mean_err,m2_err\n1,"));
    }

    #[test]
    fn rejects_unsorted_n_list() {
        let cfg = WalkConfig::hadamard();
        let ens = Ensemble::pure(PureState::basis(1, 2, 0)).unwrap();
        let lm = LimitMeasure::from_atoms(1, vec![(vec![0.0], 1.0)]);
        assert!(convergence_against(&cfg, &ens, &[5, 5], &lm, &[vec![0.0]]).is_err());
        assert!(convergence_against(&cfg, &ens, &[0, 5], &lm, &[vec![0.0]]).is_err());
    }

    fn measure() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-4i32..=4, 1u32..10), 1..6).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1 as f64).sum();
            atoms.into_iter().map(|(x, w)| (x as f64 * 0.5, w as f64 / total)).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn ks_metric_axioms(a in measure(), b in measure(), c in measure()) {
            let ab = ks_distance(&a, &b).unwrap();
            let ba = ks_distance(&b, &a).unwrap();
            let ac = ks_distance(&a, &c).unwrap();
            let cb = ks_distance(&c, &b).unwrap();
            prop_assert!((ab - ba).abs() < 1e-15);
            prop_assert!(ab <= ac + cb + 1e-12);
            prop_assert!(ks_distance(&a, &a).unwrap() == 0.0);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        }
    }
}
