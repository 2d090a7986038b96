//! Stateless geocast routing in ad hoc wireless networks.
//!
//! Devices keep no routing state between transmissions: all forwarding
//! decisions are made from the incoming message, the device's neighborhood
//! and its pending send queue.

pub mod cli;
pub mod engine;
pub mod experiments;
pub mod geometry;
pub mod netgraph;
pub mod protocol;
