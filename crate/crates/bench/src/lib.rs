//! Instance generators, sampling and experiment sweeps for anchored truss
//! reinforcement.

pub mod experiment;
pub mod gadget;
pub mod sample;
pub mod synth;
pub mod witness;
