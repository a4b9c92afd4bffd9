//! ramsey-forge: a simulator, trajectory engine, and verifier for a two-phase
//! randomized edge coloring of the complete graph `K_n` in which every
//! 4-clique spans at least 5 distinct edge colors, using roughly
//! `(5/6 + ε)·n` colors.
//!
//! Phase 1 repeatedly picks a uniformly random uncolored triangle, orients it
//! at a random apex, and colors its three edges with a fresh cherry (`P²`)
//! plus a fresh single edge (`P¹`) drawn from carefully constrained candidate
//! sets ([`phase1`]). Phase 2 completes the few remaining edges with a small
//! reserved palette and drives the residual "bad events" to zero by
//! resampling ([`phase2`]). The deterministic mean-field trajectories the
//! process is expected to follow, together with their error windows and the
//! ODE system they satisfy, live in [`trajectories`]; live measurements of
//! the tracked random variables are taken by [`telemetry`]; final outputs are
//! certified by [`validator`].
//!
//! All randomness flows from a single 64-bit seed through named substreams
//! ([`rng`]), making every artifact byte-reproducible per seed.

pub mod bits;
pub mod coloring;
pub mod config;
pub mod phase1;
pub mod phase2;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod state;
pub mod telemetry;
pub mod trajectories;
pub mod validator;

pub use coloring::Coloring;
pub use config::{NoPairPolicy, PaletteSpec, ProcessConfig, StopRule, StoreMode};
pub use state::ColoringState;
