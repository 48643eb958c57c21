//! Joint beamforming and UAV trajectory learning for integrated sensing and
//! communication with a ground base station.

pub mod agent;
pub mod channel;
pub mod cxla;
pub mod env;
pub mod experiment;
pub mod layout;
pub mod nn;
pub mod replay;
pub mod rng;
pub mod signal;
pub mod world;
