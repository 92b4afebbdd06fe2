//! UAV swarm multicast over a Poisson cluster process.
//!
//! The crate covers the whole chain from topology sampling to protocol
//! simulation:
//!
//! - [`geometry`]: cluster centers and uniformly scattered UAVs;
//! - [`channel`]: WINNER II path loss, Rayleigh fading and SNR tests;
//! - [`distributions`]: conditional distance densities with tabulated CDFs
//!   and samplers;
//! - [`analysis`]: coverage, link success, request success, delay and
//!   area spectral efficiency by quadrature;
//! - [`protocol`]: an event-driven simulator of cluster-based recovery and
//!   two BS-driven baselines;
//! - [`experiments`]: seeded parameter sweeps emitting CSV tables.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod config;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod protocol;
pub mod quadrature;
pub mod rng;

pub use analysis::{evaluate_metrics, MetricInputs, MetricResults};
pub use channel::{LinkKind, PathLossParams, RadioParams};
pub use config::{RadiusRule, ScenarioConfig};
pub use distributions::{ClusterGeometry, ConditionalDistanceDistribution, DistanceKind, DistanceQuery};
pub use error::{Error, Result};
pub use geometry::{build_topology, DeploymentMode, Position3, Topology, Vec2};
pub use protocol::{run_scheme, Scheme, SchemeOutcome, SimParams};
