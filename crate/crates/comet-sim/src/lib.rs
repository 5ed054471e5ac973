//! Group-cohesion estimation and cohesion-aware navigation in simulated 2-D crowds.
//!
//! The pipeline runs sensing over ground-truth agents, constant-velocity Kalman
//! tracking, proximity/co-movement grouping, per-group cohesion scoring, and one
//! of three local planners (`dwa`, `frozone`, `comet`). A batch harness runs
//! paired-seed corridor trials and reports average deviation angle, freezing
//! rate, and normalized path length per planner.

pub mod cohesion;
pub mod geometry;
pub mod grouping;
pub mod harness;
pub mod navigation;
pub mod sensor;
pub mod tracking;
pub mod world;

pub use world::{AgentState, ParamSet, Scenario, Vec2};
