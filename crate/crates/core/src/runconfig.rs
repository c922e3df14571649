//! JSON run configuration consumed by the command line tool.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{validate_config, WalkConfig};
use crate::limit::default_grid_points;
use crate::metrics::default_omega_range;
use crate::rational::{Rational, RationalVec};
use crate::walk::{Ensemble, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalSpec {
    pub num: i64,
    pub den: i64,
}

/// `[re, im]`.
pub type ComplexSpec = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSpec {
    pub position: Vec<i64>,
    pub coin: Vec<ComplexSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureSpec {
    pub amplitudes: Vec<AmplitudeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberSpec {
    pub weight: f64,
    pub state: PureSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialSpec {
    Pure(PureSpec),
    Ensemble { members: Vec<MemberSpec> },
    /// Origin with the maximally mixed coin.
    OriginMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

/// One range for every axis, or one per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaGridSpec {
    Uniform(RangeSpec),
    PerAxis(Vec<RangeSpec>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub coin_size: usize,
    pub shifts: Vec<Vec<RationalSpec>>,
    pub coin: Vec<Vec<ComplexSpec>>,
    pub initial: InitialSpec,
    #[serde(default)]
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_grid: Option<OmegaGridSpec>,
}

impl RunConfig {
    /// Parses JSON and reduces every rational to lowest terms.
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text)?;
        cfg.normalize_rationals();
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes")
    }

    fn normalize_rationals(&mut self) {
        for r in self.shifts.iter_mut().flatten() {
            if let Ok(q) = Rational::new(r.num, r.den) {
                *r = RationalSpec { num: q.num(), den: q.den() };
            }
        }
    }

    /// First 16 hex digits of the SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("run config serializes");
        let digest = Sha256::digest(compact.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Momentum grid points per axis: explicit, else 4096 in 1d and 256 above.
    pub fn k_grid_or_default(&self) -> usize {
        self.k_grid.unwrap_or_else(|| default_grid_points(self.dimension))
    }

    /// Frequencies for characteristic-function comparisons. Defaults to
    /// `[−5, 5]` step `0.25` in 1d and `[−3, 3]` step `0.5` per axis above.
    pub fn omega_ranges(&self) -> Vec<(f64, f64, f64)> {
        let (min, max, step) = default_omega_range(self.dimension);
        let default = RangeSpec { min, max, step };
        let per_axis = match &self.omega_grid {
            None => vec![default; self.dimension],
            Some(OmegaGridSpec::Uniform(r)) => vec![*r; self.dimension],
            Some(OmegaGridSpec::PerAxis(v)) => v.clone(),
        };
        per_axis.into_iter().map(|r| (r.min, r.max, r.step)).collect()
    }

    /// Every problem that prevents building a walk and initial ensemble.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.dimension == 0 {
            v.push("dimension must be positive".into());
        }
        if self.coin_size == 0 {
            v.push("coin_size must be positive".into());
        }
        if self.shifts.len() != self.coin_size {
            v.push("shift count mismatch".into());
        }
        for (j, shift) in self.shifts.iter().enumerate() {
            if shift.len() != self.dimension {
                v.push(format!("shift {} has {} coordinates, expected {}", j + 1, shift.len(), self.dimension));
            }
            if shift.iter().any(|r| r.den == 0) {
                v.push(format!("shift {} has a zero denominator", j + 1));
            }
        }
        if self.coin.len() != self.coin_size || self.coin.iter().any(|row| row.len() != self.coin_size) {
            v.push("coin must be coin_size x coin_size".into());
        }
        if let Some(ranges) = match &self.omega_grid {
            Some(OmegaGridSpec::PerAxis(r)) => Some(r.clone()),
            Some(OmegaGridSpec::Uniform(r)) => Some(vec![*r]),
            None => None,
        } {
            if matches!(self.omega_grid, Some(OmegaGridSpec::PerAxis(_))) && ranges.len() != self.dimension {
                v.push("omega_grid needs one range per axis".into());
            }
            if ranges.iter().any(|r| !(r.step > 0.0) || !(r.max >= r.min)) {
                v.push("omega_grid ranges need step > 0 and max >= min".into());
            }
        }
        if self.k_grid == Some(0) {
            v.push("k_grid must be positive".into());
        }
        if !v.is_empty() {
            return v;
        }
        let walk = self.build_walk();
        v.extend(validate_config(&walk));
        if let Err(e) = self.build_ensemble() {
            v.push(format!("initial state: {e}"));
        }
        v
    }

    fn build_walk(&self) -> WalkConfig {
        let shifts = self
            .shifts
            .iter()
            .map(|row| {
                RationalVec::new(
                    row.iter()
                        .map(|r| Rational::new(r.num, r.den).expect("denominators checked"))
                        .collect(),
                )
            })
            .collect();
        let entries: Vec<Complex64> = self
            .coin
            .iter()
            .flat_map(|row| row.iter().map(|z| Complex64::new(z[0], z[1])))
            .collect();
        let coin = DMatrix::from_row_slice(self.coin_size, self.coin_size, &entries);
        WalkConfig::new_unchecked(self.dimension, shifts, coin)
    }

    fn build_state(&self, spec: &PureSpec) -> crate::Result<PureState> {
        let entries = spec.amplitudes.iter().map(|a| {
            (a.position.clone(), a.coin.iter().map(|z| Complex64::new(z[0], z[1])).collect())
        });
        PureState::from_entries(self.dimension, self.coin_size, entries)
    }

    fn build_ensemble(&self) -> crate::Result<Ensemble> {
        match &self.initial {
            InitialSpec::Pure(spec) => Ensemble::pure(self.build_state(spec)?),
            InitialSpec::Ensemble { members } => Ensemble::new(
                members
                    .iter()
                    .map(|m| Ok((m.weight, self.build_state(&m.state)?)))
                    .collect::<crate::Result<Vec<_>>>()?,
            ),
            InitialSpec::OriginMixed => Ok(Ensemble::origin_mixed(self.dimension, self.coin_size)),
        }
    }

    /// Validated walk and initial ensemble.
    pub fn build(&self) -> std::result::Result<(WalkConfig, Ensemble), Vec<String>> {
        let v = self.validate();
        if !v.is_empty() {
            return Err(v);
        }
        let ens = self.build_ensemble().map_err(|e| vec![e.to_string()])?;
        Ok((self.build_walk(), ens))
    }

    pub fn is_origin_mixed(&self) -> bool {
        matches!(self.initial, InitialSpec::OriginMixed)
    }

    /// Serializable form of a walk and a pure initial state.
    pub fn from_parts(cfg: &WalkConfig, initial: InitialSpec, n: u64) -> Self {
        RunConfig {
            dimension: cfg.dim(),
            coin_size: cfg.coin_size(),
            shifts: cfg
                .shifts()
                .iter()
                .map(|v| v.coords().iter().map(|r| RationalSpec { num: r.num(), den: r.den() }).collect())
                .collect(),
            coin: (0..cfg.coin_size())
                .map(|i| (0..cfg.coin_size()).map(|j| [cfg.coin()[(i, j)].re, cfg.coin()[(i, j)].im]).collect())
                .collect(),
            initial,
            n,
            k_grid: None,
            seed: 0,
            omega_grid: None,
        }
    }
}

/// Serializable form of a pure state.
pub fn pure_spec(state: &PureState) -> PureSpec {
    PureSpec {
        amplitudes: state
            .iter()
            .map(|(p, a)| AmplitudeSpec { position: p.to_vec(), coin: a.iter().map(|z| [z.re, z.im]).collect() })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HADAMARD: &str = r#"{
        "dimension": 1,
        "coin_size": 2,
        "shifts": [[{"num": 2, "den": 2}], [{"num": -1, "den": 1}]],
        "coin": [[[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]],
                 [[0.7071067811865476, 0.0], [-0.7071067811865476, 0.0]]],
        "initial": {"type": "pure", "amplitudes": [{"position": [0], "coin": [[1.0, 0.0], [0.0, 0.0]]}]},
        "n": 3,
        "seed": 11
    }"#;

    #[test]
    fn parses_and_reduces() {
        let cfg = RunConfig::from_json(HADAMARD).unwrap();
        assert_eq!(cfg.shifts[0][0], RationalSpec { num: 1, den: 1 });
        assert!(cfg.validate().is_empty());
        let (walk, ens) = cfg.build().unwrap();
        assert_eq!(walk.scale(), 1);
        assert_eq!(ens.members().len(), 1);
        assert_eq!(cfg.k_grid_or_default(), 4096);
        assert_eq!(cfg.omega_ranges(), vec![(-5.0, 5.0, 0.25)]);
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::from_json(HADAMARD).unwrap();
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn reports_problems() {
        let bad = HADAMARD.replace(r#""num": -1, "den": 1"#, r#""num": -1, "den": 0"#);
        let cfg = RunConfig::from_json(&bad).unwrap();
        assert!(cfg.validate().iter().any(|v| v.contains("zero denominator")));

        let bad = HADAMARD.replace("-0.7071067811865476", "0.7071067811865476");
        assert_eq!(RunConfig::from_json(&bad).unwrap().validate(), vec!["coin not unitary".to_string()]);

        let bad = HADAMARD.replace("[[1.0, 0.0], [0.0, 0.0]]", "[[1.0, 0.0], [1.0, 0.0]]");
        assert!(RunConfig::from_json(&bad).unwrap().validate()[0].starts_with("initial state"));
    }

    #[test]
    fn origin_mixed_and_ensembles() {
        let mixed = HADAMARD.replace(
            r#"{"type": "pure", "amplitudes": [{"position": [0], "coin": [[1.0, 0.0], [0.0, 0.0]]}]}"#,
            r#"{"type": "origin_mixed"}"#,
        );
        let cfg = RunConfig::from_json(&mixed).unwrap();
        assert!(cfg.is_origin_mixed());
        assert_eq!(cfg.build().unwrap().1.members().len(), 2);

        let ens = HADAMARD.replace(
            r#"{"type": "pure", "amplitudes": [{"position": [0], "coin": [[1.0, 0.0], [0.0, 0.0]]}]}"#,
            r#"{"type": "ensemble", "members": [
                {"weight": 0.25, "state": {"amplitudes": [{"position": [0], "coin": [[1.0, 0.0], [0.0, 0.0]]}]}},
                {"weight": 0.75, "state": {"amplitudes": [{"position": [2], "coin": [[0.0, 0.0], [0.0, 1.0]]}]}}
            ]}"#,
        );
        let cfg = RunConfig::from_json(&ens).unwrap();
        assert_eq!(cfg.build().unwrap().1.members().len(), 2);
    }
}
