//! Position distributions obtained by tracing out the coin.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::config::WalkConfig;
use crate::error::{Result, WalkError};
use crate::walk::{Ensemble, PureState};

/// Atomic probability measure on the internal lattice.
///
/// `n == 0` means unrescaled: key `m` sits at physical coordinate `m / L`.
/// After [`rescale`] with `n ≥ 1` it sits at `m / (L·n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    dim: usize,
    scale: i64,
    n: u64,
    masses: BTreeMap<Vec<i64>, f64>,
}

impl PositionDistribution {
    pub fn from_masses(dim: usize, scale: i64, masses: BTreeMap<Vec<i64>, f64>) -> Self {
        PositionDistribution { dim, scale, n: 0, masses }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    /// Rescaling step count; zero when unrescaled.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_rescaled(&self) -> bool {
        self.n > 0
    }

    pub fn masses(&self) -> &BTreeMap<Vec<i64>, f64> {
        &self.masses
    }

    pub fn mass(&self, key: &[i64]) -> f64 {
        self.masses.get(key).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Physical coordinate of a lattice key under the current scaling.
    pub fn coords(&self, key: &[i64]) -> Vec<f64> {
        let denom = (self.scale * self.n.max(1) as i64) as f64;
        key.iter().map(|&m| m as f64 / denom).collect()
    }

    /// `(physical coordinate, mass)` pairs in lexicographic key order.
    pub fn atoms(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        self.masses.iter().map(|(k, &m)| (self.coords(k), m))
    }

    /// One-dimensional atoms, for CDF comparisons.
    pub fn atoms_1d(&self) -> Result<Vec<(f64, f64)>> {
        if self.dim != 1 {
            return Err(WalkError::DimensionMismatch { expected: 1, found: self.dim });
        }
        Ok(self.atoms().map(|(x, m)| (x[0], m)).collect())
    }

    /// `½ Σ_m |p(m) − q(m)|`, comparing lattice keys directly.
    pub fn total_variation(&self, other: &PositionDistribution) -> f64 {
        let mut diff = 0.0;
        for (k, &m) in &self.masses {
            diff += (m - other.mass(k)).abs();
        }
        for (k, &m) in &other.masses {
            if !self.masses.contains_key(k) {
                diff += m.abs();
            }
        }
        0.5 * diff
    }

    /// Writes `coord_1..coord_d,mass` rows (after an optional `#` comment).
    pub fn write_csv<W: Write>(&self, out: &mut W, comment: Option<&str>) -> io::Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("coord_{i}")).collect();
        header.push("mass".into());
        writeln!(out, "{}", header.join(","))?;
        for (x, m) in self.atoms() {
            let mut row: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
            row.push(format!("{m}"));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Coin-traced position probabilities of an ensemble: `Σ_i w_i Σ_j |ψ_i(m)_j|²`.
pub fn position_distribution(ens: &Ensemble, cfg: &WalkConfig) -> PositionDistribution {
    let mut masses: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (w, st) in ens.members() {
        accumulate(&mut masses, st, *w);
    }
    PositionDistribution::from_masses(cfg.dim(), cfg.scale(), masses)
}

/// Position probabilities of a single pure state.
pub fn state_distribution(state: &PureState, cfg: &WalkConfig) -> PositionDistribution {
    let mut masses = BTreeMap::new();
    accumulate(&mut masses, state, 1.0);
    PositionDistribution::from_masses(cfg.dim(), cfg.scale(), masses)
}

fn accumulate(masses: &mut BTreeMap<Vec<i64>, f64>, st: &PureState, weight: f64) {
    for (pos, amp) in st.iter() {
        let p: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
        *masses.entry(pos.to_vec()).or_insert(0.0) += weight * p;
    }
}

/// Divides atom locations by `n` (on top of the lattice scale `L`).
pub fn rescale(dist: &PositionDistribution, n: u64) -> Result<PositionDistribution> {
    if n == 0 {
        return Err(WalkError::ZeroStep);
    }
    Ok(PositionDistribution { n, ..dist.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::evolve;

    fn hadamard_dist(n: usize) -> PositionDistribution {
        let cfg = WalkConfig::hadamard();
        let ens = Ensemble::pure(PureState::basis(1, 2, 0)).unwrap();
        position_distribution(&ens.evolve(&cfg, n).unwrap(), &cfg)
    }

    #[test]
    fn hadamard_one_step() {
        let d = hadamard_dist(1);
        assert_eq!(d.masses().len(), 2);
        assert!((d.mass(&[1]) - 0.5).abs() < 1e-15);
        assert!((d.mass(&[-1]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hadamard_three_steps() {
        let d = hadamard_dist(3);
        let expected = [(3, 0.125), (1, 0.625), (-1, 0.125), (-3, 0.125)];
        assert_eq!(d.masses().len(), 4);
        for (k, m) in expected {
            assert!((d.mass(&[k]) - m).abs() < 1e-15, "key {k}");
        }
        let r = rescale(&d, 3).unwrap();
        let atoms: Vec<_> = r.atoms_1d().unwrap();
        let xs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        assert_eq!(xs, vec![-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0]);
        assert!((r.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_site_unit_mass() {
        let cfg = WalkConfig::hadamard();
        let ens = Ensemble::pure(PureState::basis(1, 2, 1)).unwrap();
        let d = position_distribution(&ens, &cfg);
        assert_eq!(d.mass(&[0]), 1.0);
    }

    #[test]
    fn rescale_rejects_zero() {
        assert!(matches!(rescale(&hadamard_dist(1), 0), Err(WalkError::ZeroStep)));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        let masses = BTreeMap::from([(vec![1], 0.75), (vec![-3], 0.25)]);
        let dist = PositionDistribution::from_masses(1, 2, masses);
        rescale(&dist, 2).unwrap().write_csv(&mut buf, Some("test")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# test\ncoord_1,mass\n-0.75,0.25\n0.25,0.75\n");
    }

    #[test]
    fn rational_rescale_is_exact() {
        let shifts = vec![
            crate::config::rational_shift(&[(3, 2)]).unwrap(),
            crate::config::rational_shift(&[(-1, 1)]).unwrap(),
        ];
        let cfg = WalkConfig::ballistic(shifts);
        for n in [1, 7, 100] {
            let st = evolve(&PureState::basis(1, 2, 0), &cfg, n).unwrap();
            let d = rescale(&state_distribution(&st, &cfg), n as u64).unwrap();
            assert_eq!(d.atoms_1d().unwrap(), vec![(1.5, 1.0)]);
        }
    }
}
