//! Agentic orchestration of molecular-dynamics workflows.
//!
//! A planner turns a natural-language request into a [`agent::Plan`], a
//! worker drives schema-declared tools through a bounded
//! invoke/validate/reflect loop, and an analyzer interprets the trajectory
//! outputs. Chemistry executables sit behind [`md::MdBackend`]; the
//! [`md::MockBackend`] plus [`gateway::ScriptedBackend`] make every run
//! reproducible offline, which the [`bench`] harness relies on.

pub mod agent;
pub mod bench;
pub mod config;
pub mod gateway;
pub mod md;
pub mod retrieval;
pub mod run;
pub mod sandbox;
pub mod steps;
pub mod tools;

pub(crate) mod text;

/// Hard cap on worker iterations (model turns) per run.
pub const MAX_ITERATIONS: usize = 35;
