pub mod agents;
pub mod bench;
pub mod engine;
pub mod heuristics;
pub mod modes;
pub mod ntbea;
pub mod rng;
pub mod scripts;
pub mod tournament;
