pub mod cli;
pub mod config;
pub mod dynamics;
pub mod experiments;
pub mod lattice;
pub mod noise;
pub mod properties;
pub mod walk;
pub mod wall;
