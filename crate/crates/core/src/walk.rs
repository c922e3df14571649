//! Position-space states and their exact evolution under `U = T (I ⊗ C)`.

use std::cmp::Ordering;

use num_complex::Complex64;

use crate::config::WalkConfig;
use crate::error::{Result, WalkError};

/// Tolerance on `|‖ψ‖² − 1|` for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-10;

/// A finitely supported wavefunction `ℤ^d → ℂ^s` on the internal lattice.
///
/// Entries are kept sorted lexicographically by position so every traversal,
/// and therefore every floating-point accumulation, happens in one canonical
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dim: usize,
    coin_size: usize,
    keys: Vec<i64>,
    amps: Vec<Complex64>,
}

fn cmp_shifted(a: &[i64], da: &[i64], b: &[i64], db: &[i64]) -> Ordering {
    for i in 0..a.len() {
        match (a[i] + da[i]).cmp(&(b[i] + db[i])) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

impl PureState {
    /// Builds a state from `(position, amplitude vector)` pairs. Repeated
    /// positions are summed. No normalization is imposed.
    pub fn from_entries<I>(dim: usize, coin_size: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Vec<Complex64>)>,
    {
        let mut entries: Vec<_> = entries.into_iter().collect();
        for (pos, amp) in &entries {
            if pos.len() != dim {
                return Err(WalkError::DimensionMismatch { expected: dim, found: pos.len() });
            }
            if amp.len() != coin_size {
                return Err(WalkError::DimensionMismatch {
                    expected: coin_size,
                    found: amp.len(),
                });
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut keys: Vec<i64> = Vec::with_capacity(entries.len() * dim);
        let mut amps: Vec<Complex64> = Vec::with_capacity(entries.len() * coin_size);
        let mut last: Option<Vec<i64>> = None;
        for (pos, amp) in entries {
            if last.as_ref() == Some(&pos) {
                let start = amps.len() - coin_size;
                for (slot, a) in amps[start..].iter_mut().zip(amp) {
                    *slot += a;
                }
            } else {
                keys.extend_from_slice(&pos);
                amps.extend(amp);
                last = Some(pos);
            }
        }
        Ok(PureState { dim, coin_size, keys, amps })
    }

    /// `δ_position ⊗ coin`.
    pub fn localized(position: Vec<i64>, coin: Vec<Complex64>) -> Self {
        PureState {
            dim: position.len(),
            coin_size: coin.len(),
            keys: position,
            amps: coin,
        }
    }

    /// `δ_0 ⊗ e_slot`.
    pub fn basis(dim: usize, coin_size: usize, slot: usize) -> Self {
        let mut coin = vec![Complex64::new(0.0, 0.0); coin_size];
        coin[slot] = Complex64::new(1.0, 0.0);
        Self::localized(vec![0; dim], coin)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coin_size(&self) -> usize {
        self.coin_size
    }

    /// Number of stored positions.
    pub fn len(&self) -> usize {
        self.amps.len().checked_div(self.coin_size).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, idx: usize) -> &[i64] {
        &self.keys[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn amplitude(&self, idx: usize) -> &[Complex64] {
        &self.amps[idx * self.coin_size..(idx + 1) * self.coin_size]
    }

    /// Entries in canonical (lexicographic) position order.
    pub fn iter(&self) -> impl Iterator<Item = (&[i64], &[Complex64])> + '_ {
        (0..self.len()).map(move |i| (self.position(i), self.amplitude(i)))
    }

    /// Amplitude vector at `position`, if stored.
    pub fn get(&self, position: &[i64]) -> Option<&[Complex64]> {
        let mut lo = 0;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.position(mid).cmp(position) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(self.amplitude(mid)),
            }
        }
        None
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(WalkError::Unnormalized(0.0));
        }
        for a in &mut self.amps {
            *a /= norm;
        }
        Ok(self)
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            Err(WalkError::Unnormalized(n2))
        } else {
            Ok(())
        }
    }

    /// Largest Euclidean norm of a stored position (internal lattice units).
    pub fn support_radius(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                self.position(i)
                    .iter()
                    .map(|&x| (x as f64) * (x as f64))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: Complex64, other: &PureState, b: Complex64) -> Result<Self> {
        let scaled = |st: &PureState, c: Complex64| {
            st.iter()
                .map(move |(p, amp)| (p.to_vec(), amp.iter().map(|z| z * c).collect::<Vec<_>>()))
                .collect::<Vec<_>>()
        };
        let mut entries = scaled(self, a);
        entries.extend(scaled(other, b));
        Self::from_entries(self.dim, self.coin_size, entries)
    }

    fn check_against(&self, cfg: &WalkConfig) -> Result<()> {
        if self.coin_size != cfg.coin_size() {
            return Err(WalkError::DimensionMismatch {
                expected: cfg.coin_size(),
                found: self.coin_size,
            });
        }
        if self.dim != cfg.dim() {
            return Err(WalkError::DimensionMismatch { expected: cfg.dim(), found: self.dim });
        }
        Ok(())
    }
}

/// Replaces the amplitude vector at every position by `C·ψ(m)`.
pub fn apply_coin(state: &PureState, cfg: &WalkConfig) -> Result<PureState> {
    state.check_against(cfg)?;
    let s = state.coin_size;
    let coin = cfg.coin();
    let mut amps = vec![Complex64::new(0.0, 0.0); state.amps.len()];
    for (out, inp) in amps.chunks_exact_mut(s).zip(state.amps.chunks_exact(s)) {
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, z) in inp.iter().enumerate() {
                acc += coin[(r, c)] * z;
            }
            *slot = acc;
        }
    }
    Ok(PureState { amps, ..state.clone() })
}

/// Conditional translation: coin component `j` moves by `L·v_j`.
///
/// Each coin component, translated, is still sorted, so the result is an
/// `s`-way merge. Exactly-zero components are not carried to the target.
pub fn apply_shift(state: &PureState, cfg: &WalkConfig) -> Result<PureState> {
    state.check_against(cfg)?;
    let s = state.coin_size;
    let d = state.dim;
    let n = state.len();
    let offsets = cfg.offsets();
    let zero = Complex64::new(0.0, 0.0);

    let mut cursors = vec![0usize; s];
    let mut keys = Vec::with_capacity(state.keys.len() + d);
    let mut amps = Vec::with_capacity(state.amps.len() + s);
    let mut target = vec![0i64; d];
    let no_offset = vec![0i64; d];
    loop {
        let mut best: Option<usize> = None;
        for j in 0..s {
            while cursors[j] < n && state.amps[cursors[j] * s + j] == zero {
                cursors[j] += 1;
            }
            if cursors[j] >= n {
                continue;
            }
            best = match best {
                None => Some(j),
                Some(b) => {
                    let ord = cmp_shifted(
                        state.position(cursors[j]),
                        &offsets[j],
                        state.position(cursors[b]),
                        &offsets[b],
                    );
                    if ord == Ordering::Less {
                        Some(j)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        let Some(b) = best else { break };
        for (t, (x, o)) in target.iter_mut().zip(state.position(cursors[b]).iter().zip(&offsets[b])) {
            *t = x + o;
        }
        keys.extend_from_slice(&target);
        let start = amps.len();
        amps.resize(start + s, zero);
        for j in 0..s {
            if cursors[j] < n
                && cmp_shifted(state.position(cursors[j]), &offsets[j], &target, &no_offset)
                    == Ordering::Equal
            {
                amps[start + j] = state.amps[cursors[j] * s + j];
                cursors[j] += 1;
            }
        }
    }
    Ok(PureState { dim: d, coin_size: s, keys, amps })
}

/// One walk step `U = T (I ⊗ C)`.
pub fn step(state: &PureState, cfg: &WalkConfig) -> Result<PureState> {
    apply_shift(&apply_coin(state, cfg)?, cfg)
}

/// `U^n ψ`.
pub fn evolve(state: &PureState, cfg: &WalkConfig, n: usize) -> Result<PureState> {
    state.check_against(cfg)?;
    let mut current = state.clone();
    for _ in 0..n {
        current = step(&current, cfg)?;
    }
    Ok(current)
}

/// Tolerance on the total weight of an ensemble.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A finite-rank density operator `ρ = Σ_i w_i |ψ_i⟩⟨ψ_i|`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(WalkError::Invalid("ensemble has no members".into()));
        };
        let (dim, s) = (first.dim, first.coin_size);
        let mut total = 0.0;
        for (w, st) in &members {
            if !(*w >= 0.0) {
                return Err(WalkError::Invalid(format!("negative ensemble weight {w}")));
            }
            if st.dim != dim || st.coin_size != s {
                return Err(WalkError::DimensionMismatch { expected: s, found: st.coin_size });
            }
            st.check_normalized()?;
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(WalkError::Invalid(format!("ensemble weights sum to {total}")));
        }
        Ok(Ensemble { members })
    }

    pub fn pure(state: PureState) -> Result<Self> {
        Self::new(vec![(1.0, state)])
    }

    /// Point mass at the origin with the maximally mixed coin `(1/s) I_s`.
    pub fn origin_mixed(dim: usize, coin_size: usize) -> Self {
        let w = 1.0 / coin_size as f64;
        Ensemble {
            members: (0..coin_size).map(|j| (w, PureState::basis(dim, coin_size, j))).collect(),
        }
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim
    }

    pub fn coin_size(&self) -> usize {
        self.members[0].1.coin_size
    }

    /// Evolves every member by `n` steps.
    pub fn evolve(&self, cfg: &WalkConfig, n: usize) -> Result<Ensemble> {
        let members = self
            .members
            .iter()
            .map(|(w, st)| Ok((*w, evolve(st, cfg, n)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { members })
    }
}
