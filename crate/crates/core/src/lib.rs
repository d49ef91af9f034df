pub mod cli;
pub mod complex_build;
pub mod core_types;
pub mod decimator;
pub mod fixtures;
pub mod geometry;
pub mod mesh_io;
pub mod metrics;
pub mod quadrics;
pub mod texture_transfer;
