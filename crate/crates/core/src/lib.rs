pub mod catalog;
pub mod covers;
pub mod cuts;
pub mod discrete;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lattice;
pub mod loops;
pub mod surface;
pub mod systole;
pub mod words;
