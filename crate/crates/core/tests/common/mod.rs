#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use qwalk::config::rational_shift;
use qwalk::{Complex64, PureState, RationalVec, WalkConfig};
use rand::Rng;
use rand_distr::StandardNormal;

/// Sums amplitudes over every coin path of length `n` starting from
/// `δ_0 ⊗ coin0`; independent of the evolution code.
pub fn path_sum(cfg: &WalkConfig, coin0: &[Complex64], n: usize) -> BTreeMap<Vec<i64>, f64> {
    let s = cfg.coin_size();
    let d = cfg.dim();
    let c = cfg.coin();
    let mut amps: BTreeMap<(Vec<i64>, usize), Complex64> = BTreeMap::new();
    let total_paths = s.pow(n as u32);
    for start in 0..s {
        if coin0[start] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for code in 0..total_paths {
            let mut rest = code;
            let mut prev = start;
            let mut amp = coin0[start];
            let mut pos = vec![0i64; d];
            for _ in 0..n {
                let j = rest % s;
                rest /= s;
                amp *= c[(j, prev)];
                for (p, o) in pos.iter_mut().zip(&cfg.offsets()[j]) {
                    *p += o;
                }
                prev = j;
            }
            *amps.entry((pos, prev)).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
    }
    let mut masses = BTreeMap::new();
    for ((pos, _), a) in amps {
        *masses.entry(pos).or_insert(0.0) += a.norm_sqr();
    }
    masses
}

/// Haar-like random unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal folded back into Q.
pub fn random_unitary<R: Rng>(rng: &mut R, s: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(s, s, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..s {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..s {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random rational shifts with denominators at most 4.
pub fn random_shifts<R: Rng>(rng: &mut R, dim: usize, s: usize) -> Vec<RationalVec> {
    (0..s)
        .map(|_| {
            let coords: Vec<(i64, i64)> =
                (0..dim).map(|_| (rng.random_range(-6..=6), rng.random_range(1..=4))).collect();
            rational_shift(&coords).unwrap()
        })
        .collect()
}

pub fn random_config<R: Rng>(rng: &mut R) -> WalkConfig {
    let dim = rng.random_range(1..=2);
    let s = rng.random_range(2..=4);
    WalkConfig::new(dim, random_shifts(rng, dim, s), random_unitary(rng, s)).unwrap()
}

/// Normalized state on a few random sites within radius 2.
pub fn random_state<R: Rng>(rng: &mut R, dim: usize, s: usize) -> PureState {
    let sites = rng.random_range(1..=4);
    let entries: Vec<(Vec<i64>, Vec<Complex64>)> = (0..sites)
        .map(|_| {
            let pos = (0..dim).map(|_| rng.random_range(-2..=2)).collect();
            let amp = (0..s)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            (pos, amp)
        })
        .collect();
    PureState::from_entries(dim, s, entries).unwrap().normalized().unwrap()
}

/// `v = (3/2, −1)` with the Hadamard coin.
pub fn rational_hadamard() -> WalkConfig {
    let shifts = vec![rational_shift(&[(3, 2)]).unwrap(), rational_shift(&[(-1, 1)]).unwrap()];
    WalkConfig::new(1, shifts, WalkConfig::hadamard().coin().clone()).unwrap()
}

pub fn ballistic_1d() -> WalkConfig {
    WalkConfig::ballistic(vec![RationalVec::from_ints(&[1]), RationalVec::from_ints(&[-1])])
}

/// Prints one line per criterion and fails the test when it does not hold.
pub fn report(id: &str, ok: bool, detail: String) {
    println!("[{}] {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}
