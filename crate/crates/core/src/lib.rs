//! Coined quantum walks on `ℤ^d` and on `ℝ^d` with rational shifts.
//!
//! The crate simulates the walk exactly in position space, computes the
//! band structure of the momentum-space unitary `Û_k`, builds the weak
//! limit of the rescaled position distribution from the group velocities,
//! and measures how quickly simulations approach that limit.

pub mod config;
pub mod distribution;
pub mod error;
pub mod limit;
pub mod metrics;
pub mod rational;
pub mod runconfig;
pub mod spectral;
pub mod walk;

pub mod cli;

pub use config::{validate_config, WalkConfig};
pub use distribution::{position_distribution, rescale, PositionDistribution};
pub use error::{Result, WalkError};
pub use limit::{empirical_cf, limit_cf, limit_measure, sample_limit, KGrid, LimitMeasure};
pub use metrics::{cf_sup_distance, convergence_series, ks_distance, moment_errors, ConvergenceReport};

pub use rational::{Rational, RationalVec};
pub use spectral::{
    build_uk, eigensystem, evolve_momentum, fourier_state, group_velocity, w_matrix_ergodic,
    w_matrix_spectral, EigenSystem, MomentumMatrix,
};
pub use walk::{apply_coin, apply_shift, evolve, step, Ensemble, PureState};

pub use num_complex::Complex64;
