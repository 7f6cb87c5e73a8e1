//! System-level simulator for dynamic channel borrowing on a reuse-3
//! hexagonal cluster, with two co-channel interference declination
//! strategies: blocking unoccupied copies of borrowed channels, and
//! bifurcating interfering cells into inner and outer regions.
//!
//! The crate is organised bottom-up:
//!
//! - [`topology`]: cluster geometry, band colouring, co-channel tiers.
//! - [`propagation`]: Okumura-Hata path loss.
//! - [`channel`]: channel pools, borrow planning and the declination strategies.
//! - [`traffic`]: Erlang call workload and the event replay.
//! - [`metrics`]: SINR, Shannon capacity, outage probability.
//! - [`scenario`]: configuration, the distance sweep, CSV and text output.

pub mod channel;
pub mod error;
pub mod metrics;
pub mod propagation;
pub mod scenario;
pub mod topology;
pub mod traffic;

pub use channel::{
    Admission, BorrowPlan, CallId, ChannelId, ChannelPool, ChannelState, Declination, Grant,
    Neutralization, NeutralizeAction, Occupancy, Region, RegionAllocation, Strategy,
};
pub use error::{Error, Result};
pub use metrics::{LinkSample, NoiseModel, OutageThreshold};
pub use propagation::PropagationParams;
pub use scenario::{load_config, run_scenario, MetricsReport, ScenarioConfig, Scheme};
pub use topology::{
    build_topology, BandTag, CellId, Point, Topology, TopologyParams, REFERENCE_CELL,
};
